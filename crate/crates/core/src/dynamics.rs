//! Time-dependent Schrödinger integration and observable extraction.
//!
//! Fixed-step classical RK4 is used wherever the Hamiltonian changes in time;
//! once it is constant the integrator switches to the exact one-step
//! propagator `exp(-i H dt)` built from a Hermitian eigendecomposition. The
//! state is never renormalized: norm drift is the global error monitor.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::circuit::CircuitSpec;
use crate::error::{Error, Result};
use crate::hilbert::{annihilation, embed, expectation, projector, Operator, StateVector};

/// Largest tolerated `|1 - ||psi|||` at any recorded sample.
pub const NORM_TOLERANCE: f64 = 1e-6;

/// Tolerance on the initial-state normalization.
pub const INITIAL_NORM_TOLERANCE: f64 = 1e-9;

/// Default minimum number of recorded samples per run.
pub const DEFAULT_SAMPLES: usize = 600;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Time profile of a drive amplitude, normalized to 1 at full strength.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Envelope {
    Constant,
    /// Linear rise from 0 over `t_ramp` ns, constant afterwards.
    Ramp {
        t_ramp: f64,
    },
}

impl Envelope {
    pub fn ramp(t_ramp: f64) -> Self {
        if t_ramp > 0.0 {
            Envelope::Ramp { t_ramp }
        } else {
            Envelope::Constant
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Envelope::Constant => 1.0,
            Envelope::Ramp { t_ramp } => (t / t_ramp).clamp(0.0, 1.0),
        }
    }

    /// `int_0^t value(s) ds`
    pub fn area(&self, t: f64) -> f64 {
        match *self {
            Envelope::Constant => t,
            Envelope::Ramp { t_ramp } => {
                if t <= t_ramp {
                    0.5 * t * t / t_ramp
                } else {
                    t - 0.5 * t_ramp
                }
            }
        }
    }

    /// Time after which the envelope is constant.
    pub fn settled_after(&self) -> f64 {
        match *self {
            Envelope::Constant => 0.0,
            Envelope::Ramp { t_ramp } => t_ramp,
        }
    }
}

/// One Hermitian drive contribution
/// `amplitude * env(t) * (op e^{-i(freq t - phase)} + op^dagger e^{+i(freq t - phase)})`.
#[derive(Clone, Debug)]
pub struct DriveTerm {
    op: Operator,
    op_dag: Operator,
    pub amplitude: f64,
    pub envelope: Envelope,
    pub freq: f64,
    pub phase: f64,
}

impl DriveTerm {
    pub fn new(op: Operator, amplitude: f64, envelope: Envelope, freq: f64, phase: f64) -> Self {
        let op_dag = op.dagger();
        Self { op, op_dag, amplitude, envelope, freq, phase }
    }

    pub fn coefficient(&self, t: f64) -> C64 {
        let arg = -self.freq * t + self.phase;
        C64::from_polar(self.amplitude * self.envelope.value(t), arg)
    }

    fn is_silent(&self) -> bool {
        self.amplitude == 0.0
    }
}

/// `H(t) = H_static + sum_j term_j(t)`.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    static_part: Operator,
    terms: Vec<DriveTerm>,
}

impl Hamiltonian {
    pub fn constant(op: Operator) -> Self {
        Self { static_part: op, terms: Vec::new() }
    }

    pub fn with_terms(static_part: Operator, terms: Vec<DriveTerm>) -> Result<Self> {
        for term in &terms {
            if term.op.dim() != static_part.dim() {
                return Err(Error::DimensionMismatch {
                    expected: static_part.dim(),
                    found: term.op.dim(),
                });
            }
        }
        Ok(Self { static_part, terms })
    }

    pub fn dim(&self) -> usize {
        self.static_part.dim()
    }

    pub fn static_part(&self) -> &Operator {
        &self.static_part
    }

    pub fn terms(&self) -> &[DriveTerm] {
        &self.terms
    }

    pub fn at(&self, t: f64) -> Operator {
        let mut m = self.static_part.matrix().clone();
        self.add_terms(t, &mut m);
        Operator::from_matrix(m).expect("finite square Hamiltonian")
    }

    fn eval_into(&self, t: f64, out: &mut DMatrix<C64>) {
        out.copy_from(self.static_part.matrix());
        self.add_terms(t, out);
    }

    fn add_terms(&self, t: f64, out: &mut DMatrix<C64>) {
        for term in self.terms.iter().filter(|x| !x.is_silent()) {
            let c = term.coefficient(t);
            let cc = c.conj();
            out.zip_zip_apply(term.op.matrix(), term.op_dag.matrix(), |h, a, b| {
                *h += c * a + cc * b
            });
        }
    }

    /// Earliest time from which `H(t)` no longer changes, if any.
    pub fn constant_from(&self) -> Option<f64> {
        let mut from: f64 = 0.0;
        for term in self.terms.iter().filter(|x| !x.is_silent()) {
            if term.freq != 0.0 {
                return None;
            }
            from = from.max(term.envelope.settled_after());
        }
        Some(from)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    pub t_end: f64,
    pub dt: f64,
    pub sample_stride: usize,
}

impl TimeGrid {
    pub fn new(t_end: f64, dt: f64, sample_stride: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!("dt must be positive, got {dt}")));
        }
        if !(t_end >= dt && t_end.is_finite()) {
            return Err(Error::invalid(format!("t_end ({t_end}) must be >= dt ({dt})")));
        }
        if sample_stride == 0 {
            return Err(Error::invalid("sample_stride must be >= 1"));
        }
        let steps = step_count(t_end, dt);
        if steps > u32::MAX as f64 {
            return Err(Error::invalid("too many integration steps"));
        }
        Ok(Self { t_end, dt, sample_stride })
    }

    /// Grid whose stride yields at least `min_samples` recorded samples.
    pub fn with_min_samples(t_end: f64, dt: f64, min_samples: usize) -> Result<Self> {
        let grid = Self::new(t_end, dt, 1)?;
        let stride = (grid.steps() / min_samples.max(1)).max(1);
        Self::new(t_end, dt, stride)
    }

    pub fn steps(&self) -> usize {
        step_count(self.t_end, self.dt) as usize
    }

    /// Actual step length: `t_end / steps`, never larger than `dt`.
    pub fn step(&self) -> f64 {
        self.t_end / self.steps() as f64
    }
}

// ceil(t_end / dt), ignoring representation error in the quotient
fn step_count(t_end: f64, dt: f64) -> f64 {
    (t_end / dt * (1.0 - 1e-12)).ceil().max(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Method {
    /// RK4 while `H` varies, exact propagator once it is constant.
    #[default]
    Auto,
    /// RK4 for every step.
    Rk4,
    /// Exact propagator for every step; requires a constant Hamiltonian.
    Exact,
}

/// Propagate `psi0` over `grid`, calling `record(t, psi)` at t = 0 and every
/// `sample_stride` steps (plus the final time).
pub fn evolve<F>(
    h: &Hamiltonian,
    psi0: &StateVector,
    grid: &TimeGrid,
    method: Method,
    mut record: F,
) -> Result<()>
where
    F: FnMut(f64, &StateVector) -> Result<()>,
{
    if h.dim() != psi0.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: psi0.dim() });
    }
    if (1.0 - psi0.norm()).abs() > INITIAL_NORM_TOLERANCE {
        return Err(Error::invalid("initial state is not normalized"));
    }
    let steps = grid.steps();
    let dt = grid.step();
    let exact_from = match method {
        Method::Rk4 => None,
        Method::Auto => h.constant_from(),
        Method::Exact => Some(h.constant_from().filter(|&t| t == 0.0).ok_or_else(|| {
            Error::invalid("exact propagation requires a time-independent Hamiltonian")
        })?),
    };

    let mut state = psi0.clone();
    record(0.0, &state)?;

    let mut stepper = Rk4::new(h.dim());
    let mut propagator: Option<DMatrix<C64>> = None;
    let mut scratch = DVector::zeros(h.dim());

    for k in 0..steps {
        let t = k as f64 * dt;
        let use_exact = exact_from.is_some_and(|t0| t >= t0 - 1e-12 * dt.max(1.0));
        if use_exact {
            let u = match &propagator {
                Some(u) => u,
                None => propagator.insert(exact_propagator(&h.at(t), dt)?),
            };
            scratch.gemv(C64::new(1.0, 0.0), u, state.amplitudes(), C64::new(0.0, 0.0));
            state.amplitudes_mut().copy_from(&scratch);
        } else {
            stepper.step(h, t, dt, state.amplitudes_mut());
        }
        let done = k + 1;
        if done % grid.sample_stride == 0 || done == steps {
            let t_now = done as f64 * dt;
            let norm_err = (1.0 - state.norm()).abs();
            if !(norm_err <= NORM_TOLERANCE) {
                return Err(Error::IntegrationDiverged { t: t_now, norm_err });
            }
            record(t_now, &state)?;
        }
    }
    Ok(())
}

/// `exp(-i H dt)` for Hermitian `H`.
pub fn exact_propagator(h: &Operator, dt: f64) -> Result<DMatrix<C64>> {
    if !h.is_hermitian(1e-10) {
        return Err(Error::invalid("exact propagator needs a Hermitian operator"));
    }
    // symmetrize away roundoff before decomposing
    let m = (h.matrix() + h.matrix().adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, 0)
        .ok_or_else(|| Error::Decomposition("Hermitian eigensolver did not converge".into()))?;
    let v = &eig.eigenvectors;
    let phases = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&lambda| C64::from_polar(1.0, -lambda * dt)),
    );
    let mut scaled = v.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    Ok(scaled * v.adjoint())
}

struct Rk4 {
    h_now: DMatrix<C64>,
    h_mid: DMatrix<C64>,
    h_end: DMatrix<C64>,
    cached_t: Option<f64>,
    k1: DVector<C64>,
    k2: DVector<C64>,
    k3: DVector<C64>,
    k4: DVector<C64>,
    tmp: DVector<C64>,
}

impl Rk4 {
    fn new(dim: usize) -> Self {
        Self {
            h_now: DMatrix::zeros(dim, dim),
            h_mid: DMatrix::zeros(dim, dim),
            h_end: DMatrix::zeros(dim, dim),
            cached_t: None,
            k1: DVector::zeros(dim),
            k2: DVector::zeros(dim),
            k3: DVector::zeros(dim),
            k4: DVector::zeros(dim),
            tmp: DVector::zeros(dim),
        }
    }

    fn step(&mut self, h: &Hamiltonian, t: f64, dt: f64, psi: &mut DVector<C64>) {
        // H(t + dt) of the previous step is H(t) of this one
        if self.cached_t == Some(t) {
            std::mem::swap(&mut self.h_now, &mut self.h_end);
        } else {
            h.eval_into(t, &mut self.h_now);
        }
        h.eval_into(t + 0.5 * dt, &mut self.h_mid);
        h.eval_into(t + dt, &mut self.h_end);
        self.cached_t = Some(t + dt);

        let zero = C64::new(0.0, 0.0);
        let half = C64::new(0.5 * dt, 0.0);
        let full = C64::new(dt, 0.0);

        self.k1.gemv(-I, &self.h_now, psi, zero);

        self.tmp.copy_from(psi);
        self.tmp.axpy(half, &self.k1, C64::new(1.0, 0.0));
        self.k2.gemv(-I, &self.h_mid, &self.tmp, zero);

        self.tmp.copy_from(psi);
        self.tmp.axpy(half, &self.k2, C64::new(1.0, 0.0));
        self.k3.gemv(-I, &self.h_mid, &self.tmp, zero);

        self.tmp.copy_from(psi);
        self.tmp.axpy(full, &self.k3, C64::new(1.0, 0.0));
        self.k4.gemv(-I, &self.h_end, &self.tmp, zero);

        let w = dt / 6.0;
        for i in 0..psi.len() {
            psi[i] += (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]) * w;
        }
    }
}

/// One recorded point of a circuit trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub pe: f64,
    pub n_r: [f64; 2],
    /// Lab-frame `<r_k>`.
    pub coh_r: [C64; 2],
    /// Lab-frame `<q>` (atom lowering operator).
    pub coh_q: C64,
    pub norm_err: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn pe(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.pe).collect()
    }

    pub fn max_pe(&self) -> f64 {
        self.samples.iter().map(|s| s.pe).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_norm_err(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_err).fold(0.0, f64::max)
    }

    /// Mean photon number of resonator `k` (0-based) over samples with `t >= t_from`.
    pub fn mean_photons(&self, k: usize, t_from: f64) -> f64 {
        let (sum, count) = self
            .samples
            .iter()
            .filter(|s| s.t >= t_from)
            .fold((0.0, 0usize), |(sum, n), s| (sum + s.n_r[k], n + 1));
        if count == 0 {
            0.0
        } else {
            sum / count as f64
        }
    }

    pub fn inversion_time(&self, threshold: f64) -> Option<f64> {
        estimate_inversion_time(&self.times(), &self.pe(), threshold)
    }
}

/// Operators sampled along a trajectory: excited-state projector of the atom
/// and number/lowering operators of up to two resonators.
#[derive(Clone, Debug)]
pub struct Observables {
    excited: Operator,
    lowering: Operator,
    resonators: Vec<(Operator, Operator)>,
    frame_freq: f64,
}

impl Observables {
    /// Bare atom of `levels` levels, no resonators.
    pub fn atom_only(levels: usize) -> Result<Self> {
        Ok(Self {
            excited: projector(levels, 1)?,
            lowering: annihilation(levels)?,
            resonators: Vec::new(),
            frame_freq: 0.0,
        })
    }

    /// Ordering (atom, r1, r2) of [`CircuitSpec::hilbert`].
    pub fn circuit(spec: &CircuitSpec) -> Result<Self> {
        let space = spec.hilbert()?;
        let excited = embed(&projector(spec.qubit_levels, 1)?, 0, &space)?;
        let lowering = embed(&annihilation(spec.qubit_levels)?, 0, &space)?;
        let resonators = (1..=2)
            .map(|slot| {
                let a = embed(&annihilation(spec.resonator_levels)?, slot, &space)?;
                Ok((&a.dagger() * &a, a))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { excited, lowering, resonators, frame_freq: 0.0 })
    }

    /// States passed to [`Observables::sample`] live in a frame rotating at
    /// `frame_freq`; coherences are mapped back to the lab frame.
    pub fn in_frame(mut self, frame_freq: f64) -> Self {
        self.frame_freq = frame_freq;
        self
    }

    pub fn dim(&self) -> usize {
        self.excited.dim()
    }

    pub fn sample(&self, t: f64, psi: &StateVector) -> Result<Sample> {
        let pe = expectation(psi, &self.excited)?.re;
        let mut n_r = [0.0; 2];
        let mut coh_r = [C64::new(0.0, 0.0); 2];
        let back = C64::from_polar(1.0, -self.frame_freq * t);
        for (k, (num, low)) in self.resonators.iter().enumerate() {
            n_r[k] = expectation(psi, num)?.re;
            coh_r[k] = expectation(psi, low)? * back;
        }
        let coh_q = expectation(psi, &self.lowering)? * back;
        Ok(Sample { t, pe, n_r, coh_r, coh_q, norm_err: (1.0 - psi.norm()).abs() })
    }
}

/// Sample record of a single state in the circuit ordering.
pub fn observables(psi: &StateVector, spec: &CircuitSpec) -> Result<Sample> {
    Observables::circuit(spec)?.sample(0.0, psi)
}

pub fn integrate(
    h: &Hamiltonian,
    psi0: &StateVector,
    grid: &TimeGrid,
    obs: &Observables,
) -> Result<Trajectory> {
    integrate_with(h, psi0, grid, obs, Method::Auto)
}

pub fn integrate_with(
    h: &Hamiltonian,
    psi0: &StateVector,
    grid: &TimeGrid,
    obs: &Observables,
    method: Method,
) -> Result<Trajectory> {
    if obs.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: obs.dim() });
    }
    let mut samples = Vec::with_capacity(grid.steps() / grid.sample_stride + 2);
    evolve(h, psi0, grid, method, |t, psi| {
        samples.push(obs.sample(t, psi)?);
        Ok(())
    })?;
    Ok(Trajectory { samples })
}

/// Time of the first local maximum of `values` above `threshold`, refined by
/// a 3-point quadratic fit. Plateaus resolve to their earliest point; a
/// maximum at either end of the record is not considered resolved.
pub fn estimate_inversion_time(times: &[f64], values: &[f64], threshold: f64) -> Option<f64> {
    let n = times.len().min(values.len());
    if n < 3 {
        return None;
    }
    let i = (1..n - 1).find(|&i| {
        values[i] > threshold && values[i] > values[i - 1] && values[i] >= values[i + 1]
    })?;
    let (t0, t1, t2) = (times[i - 1], times[i], times[i + 1]);
    let (y0, y1, y2) = (values[i - 1], values[i], values[i + 1]);
    // vertex of the parabola through the three points
    let d01 = (y1 - y0) / (t1 - t0);
    let d12 = (y2 - y1) / (t2 - t1);
    let curvature = (d12 - d01) / (t2 - t0);
    if curvature >= 0.0 {
        return Some(t1);
    }
    let vertex = 0.5 * (t0 + t1) - d01 / (2.0 * curvature);
    Some(vertex.clamp(t0, t2))
}
