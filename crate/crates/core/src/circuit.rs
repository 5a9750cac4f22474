//! Two resonators dispersively coupled to one anharmonic atom, both resonators
//! driven.
//!
//! Units: angular frequencies in rad/ns, times in ns, hbar = 1. Subsystem
//! ordering is (atom, r1, r2) everywhere.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;

use crate::dynamics::{DriveTerm, Envelope, Hamiltonian};
use crate::error::{Error, Result};
use crate::hilbert::{annihilation, embed, HilbertSpec, Operator, StateVector};

/// Linear frequency in GHz to angular frequency in rad/ns.
pub fn ghz(nu: f64) -> f64 {
    TAU * nu
}

/// Coupling-to-detuning ratio above which the dispersive picture is flagged.
pub const DISPERSIVE_LIMIT: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct CircuitSpec {
    pub omega0: f64,
    /// Anharmonicity, negative for a transmon. Only used with three atom levels.
    pub anharm: f64,
    pub omega_r: [f64; 2],
    pub g: [f64; 2],
    pub qubit_levels: usize,
    pub resonator_levels: usize,
}

impl CircuitSpec {
    /// omega0 = 5 GHz, resonators at omega0 -/+ 2 GHz, g = 80 MHz (all x 2pi),
    /// two-level atom, four resonator levels.
    pub fn reference() -> Self {
        let omega0 = ghz(5.0);
        let delta0 = ghz(2.0);
        Self {
            omega0,
            anharm: ghz(-0.3),
            omega_r: [omega0 - delta0, omega0 + delta0],
            g: [ghz(0.08); 2],
            qubit_levels: 2,
            resonator_levels: 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.qubit_levels, 2 | 3) {
            return Err(Error::invalid(format!(
                "qubit_levels must be 2 or 3, got {}",
                self.qubit_levels
            )));
        }
        if self.qubit_levels == 3 && self.anharm == 0.0 {
            return Err(Error::invalid("a three-level atom needs nonzero anharmonicity"));
        }
        if self.resonator_levels < 2 {
            return Err(Error::invalid("resonator_levels must be >= 2"));
        }
        let finite = [self.omega0, self.anharm]
            .iter()
            .chain(&self.omega_r)
            .chain(&self.g)
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::invalid("circuit parameters must be finite"));
        }
        Ok(())
    }

    /// `Delta_k = omega_{r,k} - omega0`
    pub fn detunings(&self) -> [f64; 2] {
        [self.omega_r[0] - self.omega0, self.omega_r[1] - self.omega0]
    }

    /// Human-readable notes for couplings outside the dispersive regime.
    pub fn dispersive_warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (k, (&g, delta)) in self.g.iter().zip(self.detunings()).enumerate() {
            let ratio = (g / delta).abs();
            if !(ratio < DISPERSIVE_LIMIT) {
                out.push(format!(
                    "resonator {}: |g/Delta| = {ratio:.3} is not << 1, dispersive picture unreliable",
                    k + 1
                ));
            }
        }
        out
    }

    pub fn hilbert(&self) -> Result<HilbertSpec> {
        HilbertSpec::new(&[self.qubit_levels, self.resonator_levels, self.resonator_levels])
    }

    /// `|atom, n1, n2>`
    pub fn basis_state(&self, atom: usize, n1: usize, n2: usize) -> Result<StateVector> {
        let space = self.hilbert()?;
        StateVector::basis(space.total_dim(), space.index_of(&[atom, n1, n2])?)
    }

    pub fn ground_state(&self) -> Result<StateVector> {
        self.basis_state(0, 0, 0)
    }
}

/// Per-resonator drive parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Drive {
    pub eps: f64,
    pub omega_d: f64,
    pub phi_d: f64,
    pub envelope: Envelope,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveSpec {
    pub drives: [Drive; 2],
}

impl DriveSpec {
    /// Equal 100 MHz x 2pi drives at omega0 with relative phase
    /// `phi_1 - phi_2 = delta_phi`.
    pub fn reference(spec: &CircuitSpec, delta_phi: f64, envelope: Envelope) -> Self {
        let drive = Drive { eps: ghz(0.1), omega_d: spec.omega0, phi_d: 0.0, envelope };
        Self { drives: [drive, Drive { phi_d: -delta_phi, ..drive }] }
    }

    pub fn delta_phi(&self) -> f64 {
        self.drives[0].phi_d - self.drives[1].phi_d
    }

    pub fn validate(&self) -> Result<()> {
        for (k, d) in self.drives.iter().enumerate() {
            if !(d.eps >= 0.0) || !d.eps.is_finite() {
                return Err(Error::invalid(format!("drive {}: eps must be >= 0", k + 1)));
            }
            if !d.omega_d.is_finite() || !d.phi_d.is_finite() {
                return Err(Error::invalid(format!("drive {}: non-finite parameter", k + 1)));
            }
            if let Envelope::Ramp { t_ramp } = d.envelope {
                if !(t_ramp >= 0.0) {
                    return Err(Error::invalid(format!("drive {}: t_ramp must be >= 0", k + 1)));
                }
            }
        }
        Ok(())
    }
}

struct Ladder {
    q: Operator,
    r: [Operator; 2],
}

fn ladder(spec: &CircuitSpec) -> Result<Ladder> {
    spec.validate()?;
    let space = spec.hilbert()?;
    let r = annihilation(spec.resonator_levels)?;
    Ok(Ladder {
        q: embed(&annihilation(spec.qubit_levels)?, 0, &space)?,
        r: [embed(&r, 1, &space)?, embed(&r, 2, &space)?],
    })
}

fn total_excitations(l: &Ladder) -> Operator {
    let mut n = &l.q.dagger() * &l.q;
    for r in &l.r {
        n = &n + &(&r.dagger() * r);
    }
    n
}

/// Total excitation number `q^dagger q + sum_k r_k^dagger r_k`.
pub fn excitation_number(spec: &CircuitSpec) -> Result<Operator> {
    Ok(total_excitations(&ladder(spec)?))
}

fn h0_from(spec: &CircuitSpec, l: &Ladder) -> Operator {
    let dim = l.q.dim();
    let real = |x: f64| C64::new(x, 0.0);
    let mut h = Operator::zeros(dim);
    for (k, r) in l.r.iter().enumerate() {
        h.axpy(real(spec.omega_r[k]), &(&r.dagger() * r));
    }
    let qd = l.q.dagger();
    h.axpy(real(spec.omega0), &(&qd * &l.q));
    if spec.qubit_levels > 2 {
        let qdqd_qq = &(&qd * &qd) * &(&l.q * &l.q);
        h.axpy(real(0.5 * spec.anharm), &qdqd_qq);
    }
    h
}

fn hc_from(spec: &CircuitSpec, l: &Ladder) -> Operator {
    let mut h = Operator::zeros(l.q.dim());
    let qd = l.q.dagger();
    for (k, r) in l.r.iter().enumerate() {
        let hop = &(&qd * r) + &(&l.q * &r.dagger());
        h.axpy(C64::new(spec.g[k], 0.0), &hop);
    }
    h
}

/// Bare Hamiltonian: resonators, atom and its anharmonic correction.
pub fn build_h0(spec: &CircuitSpec) -> Result<Operator> {
    let l = ladder(spec)?;
    Ok(h0_from(spec, &l))
}

/// Exchange coupling `sum_k g_k (q^dagger r_k + q r_k^dagger)`.
pub fn build_hc(spec: &CircuitSpec) -> Result<Operator> {
    let l = ladder(spec)?;
    Ok(hc_from(spec, &l))
}

/// Lab-frame drive Hamiltonian at time `t`.
pub fn build_hd(spec: &CircuitSpec, drives: &DriveSpec, t: f64) -> Result<Operator> {
    if !(t >= 0.0) {
        return Err(Error::invalid("drive time must be >= 0"));
    }
    let l = ladder(spec)?;
    let terms = drive_terms(&l, drives, 0.0);
    Ok(Hamiltonian::with_terms(Operator::zeros(l.q.dim()), terms)?.at(t))
}

fn drive_terms(l: &Ladder, drives: &DriveSpec, frame_freq: f64) -> Vec<DriveTerm> {
    drives
        .drives
        .iter()
        .zip(&l.r)
        .map(|(d, r)| {
            DriveTerm::new(r.dagger(), d.eps, d.envelope, d.omega_d - frame_freq, d.phi_d)
        })
        .collect()
}

/// Full Hamiltonian in a frame rotating at `frame_freq` on every subsystem,
/// `U = exp(i frame_freq t N_tot)`. `frame_freq = 0` is the lab frame.
///
/// Since `H_0` and `H_c` commute with `N_tot`, the transform only subtracts
/// `frame_freq * N_tot` and shifts every drive frequency by `-frame_freq`.
pub fn rotating_frame_generator(
    spec: &CircuitSpec,
    drives: &DriveSpec,
    frame_freq: f64,
) -> Result<Hamiltonian> {
    drives.validate()?;
    let l = ladder(spec)?;
    let mut static_part = &h0_from(spec, &l) + &hc_from(spec, &l);
    if frame_freq != 0.0 {
        static_part.axpy(C64::new(-frame_freq, 0.0), &total_excitations(&l));
    }
    Hamiltonian::with_terms(static_part, drive_terms(&l, drives, frame_freq))
}

pub fn lab_frame(spec: &CircuitSpec, drives: &DriveSpec) -> Result<Hamiltonian> {
    rotating_frame_generator(spec, drives, 0.0)
}
