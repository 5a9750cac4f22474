//! Two non-overlapping field modes coupled to one emitter.
//!
//! The emitter only sees the collective mode `C = (a e^{i phi_a} + b e^{i phi_b}) / sqrt 2`;
//! field states with no excitation in `C` leave it untouched however many
//! photons the individual modes carry.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use num_complex::Complex64 as C64;

use crate::dynamics::{evolve, Hamiltonian, Method, TimeGrid, NORM_TOLERANCE};
use crate::error::{Error, Result};
use crate::hilbert::{
    annihilation, coherent_state, embed, expectation, projector, sigma_plus, HilbertSpec, Operator,
    StateVector,
};

/// Positions and wavelength of two plane-wave modes meeting a giant atom.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeGeometry {
    r_a: f64,
    r_b: f64,
    theta_a: f64,
    theta_b: f64,
    lambda: f64,
}

impl ModeGeometry {
    pub fn new(r_a: f64, r_b: f64, theta_a: f64, theta_b: f64, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("wavelength must be positive, got {lambda}")));
        }
        if !(r_a >= 0.0 && r_b >= 0.0) || !r_a.is_finite() || !r_b.is_finite() {
            return Err(Error::invalid("coupling-point distances must be finite and >= 0"));
        }
        if !theta_a.is_finite() || !theta_b.is_finite() {
            return Err(Error::invalid("angles must be finite"));
        }
        Ok(Self { r_a, r_b, theta_a, theta_b, lambda })
    }

    /// Both modes along the axis, mode a at the origin, mode b `path_diff`
    /// further along (units of the wavelength).
    pub fn with_path_difference(path_diff_over_lambda: f64) -> Result<Self> {
        Self::new(0.0, path_diff_over_lambda, 0.0, 0.0, 1.0)
    }

    pub fn phases(&self) -> (f64, f64) {
        (
            TAU * self.r_a * self.theta_a.cos() / self.lambda,
            TAU * self.r_b * self.theta_b.cos() / self.lambda,
        )
    }

    /// `phi_b - phi_a`
    pub fn phase_difference(&self) -> f64 {
        let (pa, pb) = self.phases();
        pb - pa
    }
}

/// Coherent amplitudes of modes a and b.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoModeState {
    pub alpha: C64,
    pub beta: C64,
}

impl TwoModeState {
    pub fn new(alpha: C64, beta: C64) -> Self {
        Self { alpha, beta }
    }

    pub fn real(alpha: f64, beta: f64) -> Self {
        Self::new(C64::new(alpha, 0.0), C64::new(beta, 0.0))
    }

    /// State with amplitude `alpha` in mode a that is dark for `geom`.
    pub fn dark(alpha: C64, geom: &ModeGeometry) -> Self {
        let (pa, pb) = geom.phases();
        Self::new(alpha * C64::from_polar(1.0, -pa), -alpha * C64::from_polar(1.0, -pb))
    }

    pub fn total_photons(&self) -> f64 {
        self.alpha.norm_sqr() + self.beta.norm_sqr()
    }

    fn is_finite(&self) -> bool {
        [self.alpha, self.beta].iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// `2 pi r cos(theta) / lambda`
pub fn geometric_phase(r: f64, theta: f64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::invalid(format!("wavelength must be positive, got {lambda}")));
    }
    Ok(TAU * r * theta.cos() / lambda)
}

fn two_mode_ops(levels: usize) -> Result<(Operator, Operator)> {
    let space = HilbertSpec::new(&[levels, levels])?;
    let a = annihilation(levels)?;
    Ok((embed(&a, 0, &space)?, embed(&a, 1, &space)?))
}

/// Collective lowering operator on the (mode a, mode b) space.
pub fn collective_mode(phase_a: f64, phase_b: f64, levels: usize) -> Result<Operator> {
    let (a, b) = two_mode_ops(levels)?;
    let mut c = a.scale(C64::from_polar(FRAC_1_SQRT_2, phase_a));
    c.axpy(C64::from_polar(FRAC_1_SQRT_2, phase_b), &b);
    Ok(c)
}

/// `C^dagger C` on the (mode a, mode b) space.
pub fn collective_number(phase_a: f64, phase_b: f64, levels: usize) -> Result<Operator> {
    let c = collective_mode(phase_a, phase_b, levels)?;
    Ok(&c.dagger() * &c)
}

/// `<C^dagger C>` for the product coherent state `|alpha, beta>`, with
/// `phase_diff = phi_b - phi_a`.
pub fn ncol_expected_analytic(state: &TwoModeState, phase_diff: f64) -> f64 {
    let cross = state.beta * state.alpha.conj() * C64::from_polar(1.0, phase_diff);
    0.5 * state.total_photons() + cross.re
}

/// `|alpha + beta e^{i (phi_b - phi_a)}|`, proportionality constant 1.
pub fn resultant_amplitude(state: &TwoModeState, geom: &ModeGeometry) -> f64 {
    (state.alpha + state.beta * C64::from_polar(1.0, geom.phase_difference())).norm()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Interference {
    Constructive,
    Destructive,
    Partial,
}

impl Interference {
    pub fn label(&self) -> &'static str {
        match self {
            Interference::Constructive => "constructive",
            Interference::Destructive => "destructive",
            Interference::Partial => "partial",
        }
    }
}

impl std::fmt::Display for Interference {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Destructive below `tol (|alpha| + |beta|)`, constructive above
/// `(1 - tol)(|alpha| + |beta|)`, partial otherwise.
pub fn interference_class(
    state: &TwoModeState,
    geom: &ModeGeometry,
    tol: f64,
) -> Result<Interference> {
    if !(tol > 0.0 && tol < 0.5) {
        return Err(Error::invalid(format!("tolerance must lie in (0, 0.5), got {tol}")));
    }
    let scale = state.alpha.norm() + state.beta.norm();
    if scale == 0.0 {
        return Ok(Interference::Destructive);
    }
    let e = resultant_amplitude(state, geom);
    Ok(if e <= tol * scale {
        Interference::Destructive
    } else if e >= (1.0 - tol) * scale {
        Interference::Constructive
    } else {
        Interference::Partial
    })
}

/// `g [alpha e^{i phi_a} + beta e^{i phi_b}] sigma_+ + h.c.` on (|g>, |e>).
pub fn semiclassical_hamiltonian(state: &TwoModeState, geom: &ModeGeometry, g: f64) -> Operator {
    let (pa, pb) = geom.phases();
    let field = state.alpha * C64::from_polar(1.0, pa) + state.beta * C64::from_polar(1.0, pb);
    let coupling = sigma_plus().scale(field * g);
    &coupling + &coupling.dagger()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoModeSample {
    pub t: f64,
    pub pe: f64,
    pub n_a: f64,
    pub n_b: f64,
    pub n_col: f64,
    pub norm_err: f64,
}

impl TwoModeSample {
    /// `<sigma_+ sigma_- + a^dagger a + b^dagger b>`
    pub fn excitations(&self) -> f64 {
        self.pe + self.n_a + self.n_b
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TwoModeTrajectory {
    pub samples: Vec<TwoModeSample>,
}

impl TwoModeTrajectory {
    pub fn max_pe(&self) -> f64 {
        self.samples.iter().map(|s| s.pe).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_norm_err(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_err).fold(0.0, f64::max)
    }
}

/// Parameters of a full quantum two-mode run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoModeModel {
    pub g: f64,
    /// Common mode frequency.
    pub omega: f64,
    /// Atomic transition frequency.
    pub omega0: f64,
    pub levels: usize,
}

impl TwoModeModel {
    pub fn resonant(g: f64, omega: f64, levels: usize) -> Self {
        Self { g, omega, omega0: omega, levels }
    }

    /// Hamiltonian in the frame rotating at the mode frequency, ordering
    /// (atom, mode a, mode b). Time-independent, detuned or not.
    pub fn hamiltonian(&self, geom: &ModeGeometry) -> Result<Hamiltonian> {
        let space = HilbertSpec::new(&[2, self.levels, self.levels])?;
        let (pa, pb) = geom.phases();
        let low = annihilation(self.levels)?;
        let a = embed(&low, 1, &space)?;
        let b = embed(&low, 2, &space)?;
        let sp = embed(&sigma_plus(), 0, &space)?;
        let mut field = a.scale(C64::from_polar(1.0, pa));
        field.axpy(C64::from_polar(1.0, pb), &b);
        let coupling = (&field * &sp).scale(C64::new(self.g, 0.0));
        let mut h = &coupling + &coupling.dagger();
        h.axpy(C64::new(self.omega0 - self.omega, 0.0), &embed(&projector(2, 1)?, 0, &space)?);
        Ok(Hamiltonian::constant(h))
    }
}

/// Integrate the RWA two-mode model from `|g> (x) |alpha> (x) |beta>`.
pub fn simulate_two_mode_quantum(
    state: &TwoModeState,
    geom: &ModeGeometry,
    model: &TwoModeModel,
    grid: &TimeGrid,
) -> Result<TwoModeTrajectory> {
    if !state.is_finite() {
        return Err(Error::invalid("coherent amplitudes must be finite"));
    }
    let guard = model.levels as f64 / 4.0;
    if state.alpha.norm_sqr() > guard || state.beta.norm_sqr() > guard {
        return Err(Error::invalid(format!(
            "truncation too small: |alpha|^2, |beta|^2 must be <= levels/4 = {guard}"
        )));
    }
    let levels = model.levels;
    let space = HilbertSpec::new(&[2, levels, levels])?;
    let psi0 = StateVector::product(&[
        StateVector::basis(2, 0)?,
        coherent_state(state.alpha, levels)?,
        coherent_state(state.beta, levels)?,
    ])?;
    let h = model.hamiltonian(geom)?;

    let (pa, pb) = geom.phases();
    let low = annihilation(levels)?;
    let a = embed(&low, 1, &space)?;
    let b = embed(&low, 2, &space)?;
    let n_a_op = &a.dagger() * &a;
    let n_b_op = &b.dagger() * &b;
    let mut c = a.scale(C64::from_polar(FRAC_1_SQRT_2, pa));
    c.axpy(C64::from_polar(FRAC_1_SQRT_2, pb), &b);
    let n_col_op = &c.dagger() * &c;
    let excited = embed(&projector(2, 1)?, 0, &space)?;

    let mut samples = Vec::new();
    evolve(&h, &psi0, grid, Method::Auto, |t, psi| {
        let norm_err = (1.0 - psi.norm()).abs();
        debug_assert!(norm_err <= NORM_TOLERANCE);
        samples.push(TwoModeSample {
            t,
            pe: expectation(psi, &excited)?.re,
            n_a: expectation(psi, &n_a_op)?.re,
            n_b: expectation(psi, &n_b_op)?.re,
            n_col: expectation(psi, &n_col_op)?.re,
            norm_err,
        });
        Ok(())
    })?;
    Ok(TwoModeTrajectory { samples })
}
