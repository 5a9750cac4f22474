//! Dispersive reduction of the driven two-resonator circuit to a driven
//! two-level atom.
//!
//! Each resonator is displaced to the coherent amplitude it reaches under its
//! own drive. The atom then sees the dispersive shifts `g_k^2 / Delta_k` and a
//! single resultant drive phasor summing the contributions of both
//! resonators.

use num_complex::Complex64 as C64;

use crate::circuit::{CircuitSpec, DriveSpec};
use crate::dynamics::{
    integrate, DriveTerm, Envelope, Hamiltonian, Observables, Sample, TimeGrid, Trajectory,
};
use crate::error::{Error, Result};
use crate::hilbert::{sigma_minus, sigma_plus, Operator, StateVector};

/// Ratio |Omega_0k / Delta_k| above which the reduction is flagged.
pub const VALIDITY_LIMIT: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveParams {
    /// `Delta_k = omega_{r,k} - omega0`
    pub delta_k: [f64; 2],
    /// `g_k^2 / Delta_k`
    pub delta_ds_k: [f64; 2],
    pub delta_ds: f64,
    /// `g_k eps_k / (omega_{r,k} - omega_{d,k})`
    pub omega0k: [f64; 2],
    /// Steady coherent amplitude prefactor `-eps_k / (omega_{r,k} - omega_{d,k})`.
    pub xi0k: [f64; 2],
    pub drive_freqs: [f64; 2],
    pub drive_phases: [f64; 2],
    pub envelopes: [Envelope; 2],
}

pub fn derive_effective(spec: &CircuitSpec, drives: &DriveSpec) -> Result<EffectiveParams> {
    spec.validate()?;
    drives.validate()?;
    let delta_k = spec.detunings();
    let mut delta_ds_k = [0.0; 2];
    let mut omega0k = [0.0; 2];
    let mut xi0k = [0.0; 2];
    for k in 0..2 {
        if delta_k[k] == 0.0 {
            return Err(Error::invalid(format!("resonator {} is resonant with the atom", k + 1)));
        }
        let d = &drives.drives[k];
        let drive_detuning = spec.omega_r[k] - d.omega_d;
        if drive_detuning == 0.0 {
            return Err(Error::invalid(format!(
                "drive {} is resonant with its resonator; displacement diverges",
                k + 1
            )));
        }
        delta_ds_k[k] = spec.g[k] * spec.g[k] / delta_k[k];
        omega0k[k] = spec.g[k] * d.eps / drive_detuning;
        xi0k[k] = -d.eps / drive_detuning;
    }
    let params = EffectiveParams {
        delta_k,
        delta_ds_k,
        delta_ds: delta_ds_k[0] + delta_ds_k[1],
        omega0k,
        xi0k,
        drive_freqs: [drives.drives[0].omega_d, drives.drives[1].omega_d],
        drive_phases: [drives.drives[0].phi_d, drives.drives[1].phi_d],
        envelopes: [drives.drives[0].envelope, drives.drives[1].envelope],
    };
    for w in params.validity_warnings() {
        log::warn!("{w}");
    }
    Ok(params)
}

impl EffectiveParams {
    pub fn validity_warnings(&self) -> Vec<String> {
        (0..2)
            .filter_map(|k| {
                let ratio = (self.omega0k[k] / self.delta_k[k]).abs();
                (!(ratio < VALIDITY_LIMIT)).then(|| {
                    format!(
                        "resonator {}: |Omega_0/Delta| = {ratio:.3}, effective drive not weak",
                        k + 1
                    )
                })
            })
            .collect()
    }

    fn phase_factor(&self, k: usize, t: f64) -> C64 {
        C64::from_polar(1.0, -self.drive_freqs[k] * t + self.drive_phases[k])
    }

    /// Resultant phasor at full drive strength, `sum_k Omega_0k e^{i phi_k}`,
    /// for drives sharing one frequency.
    pub fn settled_phasor(&self) -> C64 {
        (0..2).map(|k| self.omega0k[k] * C64::from_polar(1.0, self.drive_phases[k])).sum()
    }

    fn active(&self) -> impl Iterator<Item = usize> + '_ {
        (0..2).filter(|&k| self.omega0k[k] != 0.0)
    }

    /// Envelope shared by every active drive, if drive frequencies and envelopes agree.
    fn common_drive(&self) -> Option<(f64, Envelope)> {
        let mut common: Option<(f64, Envelope)> = None;
        for k in self.active() {
            let this = (self.drive_freqs[k], self.envelopes[k]);
            match common {
                None => common = Some(this),
                Some(c) if c == this => {}
                Some(_) => return None,
            }
        }
        Some(common.unwrap_or((0.0, Envelope::Constant)))
    }

    /// Analytic inversion time for a common resonant drive.
    pub fn predicted_inversion_time(&self) -> Option<f64> {
        let (_, env) = self.common_drive()?;
        let w = self.settled_phasor().norm();
        if w == 0.0 {
            return None;
        }
        let area = std::f64::consts::FRAC_PI_2 / w;
        Some(match env {
            Envelope::Constant => area,
            Envelope::Ramp { t_ramp } if area <= 0.5 * t_ramp => (2.0 * area * t_ramp).sqrt(),
            Envelope::Ramp { t_ramp } => area + 0.5 * t_ramp,
        })
    }
}

/// Coherent amplitude of resonator `k` (0-based) at time `t`, with the
/// envelope applied quasi-statically.
pub fn displacement_amplitude(params: &EffectiveParams, k: usize, t: f64) -> Result<C64> {
    if k > 1 {
        return Err(Error::invalid(format!("resonator index {k} out of range")));
    }
    Ok(params.xi0k[k] * params.envelopes[k].value(t) * params.phase_factor(k, t))
}

/// `Omega_res(t) = sum_k Omega_0k(t) e^{-i omega_dk t + i phi_k}`
pub fn resultant_phasor(params: &EffectiveParams, t: f64) -> C64 {
    (0..2)
        .map(|k| params.omega0k[k] * params.envelopes[k].value(t) * params.phase_factor(k, t))
        .sum()
}

/// `(omega0 + delta_ds) sigma_+ sigma_- - [Omega_res sigma_+ + h.c.]`, basis (|g>, |e>).
pub fn effective_hamiltonian(params: &EffectiveParams, omega0: f64, t: f64) -> Operator {
    let omega = resultant_phasor(params, t);
    let mut h = Operator::from_real_diagonal(&[0.0, omega0 + params.delta_ds]);
    h.axpy(-omega, &sigma_plus());
    h.axpy(-omega.conj(), &sigma_minus());
    h
}

/// Effective Hamiltonian in a frame rotating at `frame_freq`.
pub fn effective_generator(params: &EffectiveParams, omega0: f64, frame_freq: f64) -> Hamiltonian {
    let static_part = Operator::from_real_diagonal(&[0.0, omega0 + params.delta_ds - frame_freq]);
    let terms = (0..2)
        .map(|k| {
            DriveTerm::new(
                sigma_plus(),
                -params.omega0k[k],
                params.envelopes[k],
                params.drive_freqs[k] - frame_freq,
                params.drive_phases[k],
            )
        })
        .collect();
    Hamiltonian::with_terms(static_part, terms).expect("2x2 terms")
}

/// Sample times `evolve` records for `grid`.
pub fn sample_times(grid: &TimeGrid) -> Vec<f64> {
    let steps = grid.steps();
    let dt = grid.step();
    std::iter::once(0.0)
        .chain(
            (1..=steps)
                .filter(|&k| k % grid.sample_stride == 0 || k == steps)
                .map(|k| k as f64 * dt),
        )
        .collect()
}

/// Atom excited-state population under the effective model, starting in `|g>`.
///
/// When every active drive shares one frequency equal to the shifted atom
/// frequency and one envelope, the phasor has a fixed direction and
/// `P_e(t) = sin^2(|Omega_res| * area(t))`. Other cases integrate the 2x2
/// system numerically.
pub fn effective_population(
    params: &EffectiveParams,
    omega0: f64,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    let shifted = omega0 + params.delta_ds;
    match params.common_drive() {
        Some((freq, env)) if params.active().next().is_none() || is_resonant(freq, shifted) => {
            let w = params.settled_phasor().norm();
            let samples = sample_times(grid)
                .into_iter()
                .map(|t| Sample {
                    t,
                    pe: (w * env.area(t)).sin().powi(2),
                    n_r: [0.0; 2],
                    coh_r: [C64::new(0.0, 0.0); 2],
                    coh_q: C64::new(0.0, 0.0),
                    norm_err: 0.0,
                })
                .collect();
            Ok(Trajectory { samples })
        }
        _ => {
            let frame = params.active().next().map_or(shifted, |k| params.drive_freqs[k]);
            let h = effective_generator(params, omega0, frame);
            integrate(&h, &StateVector::basis(2, 0)?, grid, &Observables::atom_only(2)?)
        }
    }
}

fn is_resonant(freq: f64, shifted: f64) -> bool {
    (freq - shifted).abs() <= 1e-12 * shifted.abs().max(1.0)
}
