//! Scenario execution: each scenario computes its results, then writes them.
//!
//! The compute functions are public so results can be inspected without
//! touching the filesystem.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::PathBuf;

use giantatom::circuit::{rotating_frame_generator, CircuitSpec, DriveSpec};
use giantatom::collective::{
    interference_class, resultant_amplitude, simulate_two_mode_quantum, Interference, ModeGeometry,
    TwoModeModel, TwoModeState, TwoModeTrajectory,
};
use giantatom::dynamics::{
    integrate_with, Method, Observables, TimeGrid, Trajectory, DEFAULT_SAMPLES,
};
use giantatom::effective::{derive_effective, effective_population, EffectiveParams};
use giantatom::{parallel, C64};

use crate::config::{Config, Scenario};
use crate::error::{numerical, CliError};
use crate::output::{self, float, optional, Summary, Table};

pub const TRAJECTORY_HEADER: &[&str] = &[
    "t_ns",
    "pe_exact",
    "pe_eff",
    "n_r1",
    "n_r2",
    "re_coh_r1",
    "im_coh_r1",
    "re_coh_r2",
    "im_coh_r2",
    "norm_err",
];

pub const SWEEP_HEADER: &[&str] = &["delta_phi", "pe_max", "tau_e_ns", "omega_res_eff"];

pub const GEOMETRY_HEADER: &[&str] =
    &["path_diff_over_lambda", "beta_over_alpha", "e_res", "class"];

pub const TWO_MODE_HEADER: &[&str] = &["t_ns", "pe", "n_a", "n_b", "n_col", "norm_err"];

pub const CONVERGE_HEADER: &[&str] = &["study", "resonator_levels", "dt_ns", "max_abs_dpe"];

/// Minimum error reduction per dt halving.
pub const MIN_DT_RATIO: f64 = 12.0;

/// Largest tolerated P_e change when raising the resonator truncation.
pub const MAX_TRUNCATION_DPE: f64 = 1e-4;

/// Run the configured scenario and write its files; returns the paths written.
pub fn run(cfg: &Config) -> Result<Vec<PathBuf>, CliError> {
    log::info!("scenario {} in the {:?} frame", cfg.scenario, cfg.frame);
    match cfg.scenario {
        Scenario::Fig1c => write_fig1c(cfg, &fig1c(cfg)?),
        Scenario::PhaseSweep => write_phase_sweep(cfg, &phase_sweep(cfg)?),
        Scenario::GeometryMap => write_geometry_map(cfg, &geometry_map(cfg)?),
        Scenario::DarkState => write_dark_state(cfg, &dark_state(cfg)?),
        Scenario::Converge => {
            let report = convergence(cfg)?;
            let paths = write_convergence(cfg, &report)?;
            if !report.passed() {
                return Err(CliError::Check {
                    scenario: cfg.scenario.to_string(),
                    msg: format!(
                        "convergence failed: dt ratios {:.2}, {:.2} (need >= {MIN_DT_RATIO}), \
                         truncation change {:.3e} (need < {MAX_TRUNCATION_DPE:e})",
                        report.dt_ratios[0], report.dt_ratios[1], report.truncation_dpe
                    ),
                });
            }
            Ok(paths)
        }
    }
}

/// Sampling grid honoring `grid.sample_stride`, else at least
/// [`DEFAULT_SAMPLES`] samples.
pub fn time_grid(cfg: &Config, t_end: f64, dt: f64) -> giantatom::Result<TimeGrid> {
    match cfg.grid.sample_stride {
        Some(stride) => TimeGrid::new(t_end, dt, stride),
        None => TimeGrid::with_min_samples(t_end, dt, DEFAULT_SAMPLES),
    }
}

/// Exact circuit dynamics from the ground state, integrated in a frame
/// rotating at `frame_freq` (0 for the lab frame).
pub fn simulate_circuit(
    spec: &CircuitSpec,
    drives: &DriveSpec,
    frame_freq: f64,
    grid: &TimeGrid,
    method: Method,
) -> giantatom::Result<Trajectory> {
    let h = rotating_frame_generator(spec, drives, frame_freq)?;
    let obs = Observables::circuit(spec)?.in_frame(frame_freq);
    integrate_with(&h, &spec.ground_state()?, grid, &obs, method)
}

/// One driven-circuit case: exact and effective traces on a shared grid.
#[derive(Clone, Debug)]
pub struct CircuitRun {
    pub name: String,
    pub delta_phi: f64,
    pub params: EffectiveParams,
    pub drives: DriveSpec,
    pub exact: Trajectory,
    pub effective: Trajectory,
    pub tau_e: Option<f64>,
    pub transient: f64,
}

impl CircuitRun {
    pub fn pe_max(&self) -> f64 {
        self.exact.max_pe()
    }

    pub fn max_effective_deviation(&self) -> f64 {
        self.exact
            .samples
            .iter()
            .zip(&self.effective.samples)
            .map(|(a, b)| (a.pe - b.pe).abs())
            .fold(0.0, f64::max)
    }

    /// `|Omega_res|` implied by the inversion time: the drive area reaching
    /// `tau_e` equals pi/2.
    pub fn omega_res_eff(&self) -> Option<f64> {
        let env = self.drives.drives[0].envelope;
        self.tau_e.map(|t| FRAC_PI_2 / env.area(t))
    }

    pub fn table(&self) -> Table {
        let mut table = Table::new(TRAJECTORY_HEADER);
        for (s, e) in self.exact.samples.iter().zip(&self.effective.samples) {
            table.push(vec![
                float(s.t),
                float(s.pe),
                float(e.pe),
                float(s.n_r[0]),
                float(s.n_r[1]),
                float(s.coh_r[0].re),
                float(s.coh_r[0].im),
                float(s.coh_r[1].re),
                float(s.coh_r[1].im),
                float(s.norm_err),
            ]);
        }
        table
    }

    pub fn summary(&self) -> Summary {
        Summary::new()
            .optional("tau_e_ns", self.tau_e)
            .float("pe_max", self.pe_max())
            .float("n_r1_mean", self.exact.mean_photons(0, self.transient))
            .float("n_r2_mean", self.exact.mean_photons(1, self.transient))
            .float("norm_err_max", self.exact.max_norm_err())
            .float("pe_eff_max_abs_diff", self.max_effective_deviation())
    }
}

/// Integrate one drive configuration. The window is `grid.t_end_ns`,
/// stretched to 1.5x the predicted inversion time when that is longer.
pub fn circuit_case(cfg: &Config, name: &str, drives: DriveSpec) -> Result<CircuitRun, CliError> {
    let label = format!("{} {name}", cfg.scenario);
    let err = numerical(&label);
    let params = derive_effective(&cfg.circuit, &drives).map_err(&err)?;
    let t_end = match params.predicted_inversion_time() {
        Some(tau) => cfg.grid.t_end.max(1.5 * tau),
        None => cfg.grid.t_end,
    };
    let grid = time_grid(cfg, t_end, cfg.dt()).map_err(&err)?;
    let exact = simulate_circuit(&cfg.circuit, &drives, cfg.frame_freq(), &grid, Method::Auto)
        .map_err(&err)?;
    let effective = effective_population(&params, cfg.circuit.omega0, &grid).map_err(&err)?;
    debug_assert_eq!(exact.samples.len(), effective.samples.len());
    let tau_e = exact.inversion_time(cfg.analysis.inversion_threshold);
    log::info!(
        "{label}: pe_max {:.6}, tau_e {:?} ns, {} samples",
        exact.max_pe(),
        tau_e,
        exact.samples.len()
    );
    Ok(CircuitRun {
        name: name.to_string(),
        delta_phi: drives.delta_phi(),
        params,
        drives,
        exact,
        effective,
        tau_e,
        transient: cfg.analysis.transient_ns,
    })
}

/// Out-of-phase (delta_phi = pi), in-phase (0) and single-drive cases.
pub fn fig1c(cfg: &Config) -> Result<Vec<CircuitRun>, CliError> {
    let mut single = cfg.drives_with_phase(PI);
    single.drives[1].eps = 0.0;
    let cases = [
        ("out_of_phase", cfg.drives_with_phase(PI)),
        ("in_phase", cfg.drives_with_phase(0.0)),
        ("single_drive", single),
    ];
    cases.into_iter().map(|(name, drives)| circuit_case(cfg, name, drives)).collect()
}

fn write_fig1c(cfg: &Config, runs: &[CircuitRun]) -> Result<Vec<PathBuf>, CliError> {
    let mut paths = Vec::new();
    for run in runs {
        let stem = format!("fig1c_{}", run.name);
        paths.push(output::write(&cfg.output_dir, &format!("{stem}.csv"), &run.table().render())?);
        paths.push(output::write(
            &cfg.output_dir,
            &format!("{stem}.summary"),
            &run.summary().render(),
        )?);
    }
    Ok(paths)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub delta_phi: f64,
    pub pe_max: f64,
    pub tau_e: Option<f64>,
    pub omega_res_eff: Option<f64>,
}

/// One exact run per configured delta_phi, evaluated in parallel.
pub fn phase_sweep(cfg: &Config) -> Result<Vec<SweepPoint>, CliError> {
    parallel::map(&cfg.sweep_delta_phi, |&dphi| {
        let run = circuit_case(cfg, &format!("delta_phi={dphi:.6}"), cfg.drives_with_phase(dphi))?;
        Ok(SweepPoint {
            delta_phi: dphi,
            pe_max: run.pe_max(),
            tau_e: run.tau_e,
            omega_res_eff: run.omega_res_eff(),
        })
    })
    .into_iter()
    .collect()
}

pub fn sweep_table(points: &[SweepPoint]) -> Table {
    let mut table = Table::new(SWEEP_HEADER);
    for p in points {
        table.push(vec![
            float(p.delta_phi),
            float(p.pe_max),
            optional(p.tau_e),
            optional(p.omega_res_eff),
        ]);
    }
    table
}

fn write_phase_sweep(cfg: &Config, points: &[SweepPoint]) -> Result<Vec<PathBuf>, CliError> {
    Ok(vec![output::write(&cfg.output_dir, "phase_sweep.csv", &sweep_table(points).render())?])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeometryCell {
    pub path_diff_over_lambda: f64,
    pub beta_over_alpha: f64,
    pub e_res: f64,
    pub class: Interference,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Resultant field over path difference in [0, path_max] and beta/alpha in
/// [beta_min, beta_max], with alpha = 1.
pub fn geometry_map(cfg: &Config) -> Result<Vec<GeometryCell>, CliError> {
    let g = &cfg.geometry;
    let err = numerical("geometry-map");
    let betas = linspace(g.beta_min, g.beta_max, g.resolution);
    let mut cells = Vec::with_capacity(g.resolution * g.resolution);
    for x in linspace(0.0, g.path_max, g.resolution) {
        let geom = ModeGeometry::with_path_difference(x).map_err(&err)?;
        for &b in &betas {
            let state = TwoModeState::real(1.0, b);
            cells.push(GeometryCell {
                path_diff_over_lambda: x,
                beta_over_alpha: b,
                e_res: resultant_amplitude(&state, &geom),
                class: interference_class(&state, &geom, g.tol).map_err(&err)?,
            });
        }
    }
    Ok(cells)
}

pub fn geometry_table(cells: &[GeometryCell]) -> Table {
    let mut table = Table::new(GEOMETRY_HEADER);
    for c in cells {
        table.push(vec![
            float(c.path_diff_over_lambda),
            float(c.beta_over_alpha),
            float(c.e_res),
            c.class.label().to_string(),
        ]);
    }
    table
}

fn write_geometry_map(cfg: &Config, cells: &[GeometryCell]) -> Result<Vec<PathBuf>, CliError> {
    Ok(vec![output::write(&cfg.output_dir, "geometry_map.csv", &geometry_table(cells).render())?])
}

#[derive(Clone, Debug)]
pub struct TwoModeRun {
    pub name: &'static str,
    pub state: TwoModeState,
    pub trajectory: TwoModeTrajectory,
}

impl TwoModeRun {
    pub fn table(&self) -> Table {
        let mut table = Table::new(TWO_MODE_HEADER);
        for s in &self.trajectory.samples {
            table.push(vec![
                float(s.t),
                float(s.pe),
                float(s.n_a),
                float(s.n_b),
                float(s.n_col),
                float(s.norm_err),
            ]);
        }
        table
    }

    pub fn summary(&self) -> Summary {
        let samples = &self.trajectory.samples;
        let totals = samples.iter().map(|s| s.n_a + s.n_b);
        Summary::new()
            .float("pe_max", self.trajectory.max_pe())
            .float("n_total_min", totals.clone().fold(f64::INFINITY, f64::min))
            .float("n_total_max", totals.fold(f64::NEG_INFINITY, f64::max))
            .float("n_col_initial", samples.first().map_or(0.0, |s| s.n_col))
            .float("norm_err_max", self.trajectory.max_norm_err())
    }
}

/// Resonant two-mode model with matched (zero) geometric phases, started
/// from `|alpha, -alpha>` (dark) and `|alpha, alpha>` (bright).
///
/// The Hamiltonian is time-independent, so the step only sets the sampling:
/// `grid.t_end_ns` split into [`DEFAULT_SAMPLES`] intervals.
pub fn dark_state(cfg: &Config) -> Result<Vec<TwoModeRun>, CliError> {
    let d = &cfg.dark;
    let err = numerical("dark-state");
    let geom = ModeGeometry::with_path_difference(0.0).map_err(&err)?;
    let model = TwoModeModel::resonant(d.g, cfg.circuit.omega0, d.levels);
    let t_end = cfg.grid.t_end;
    let grid = TimeGrid::new(t_end, t_end / DEFAULT_SAMPLES as f64, 1).map_err(&err)?;
    let alpha = C64::new(d.alpha, 0.0);
    [("dark", TwoModeState::dark(alpha, &geom)), ("bright", TwoModeState::new(alpha, alpha))]
        .into_iter()
        .map(|(name, state)| {
            let trajectory =
                simulate_two_mode_quantum(&state, &geom, &model, &grid).map_err(&err)?;
            log::info!("dark-state {name}: pe_max {:.3e}", trajectory.max_pe());
            Ok(TwoModeRun { name, state, trajectory })
        })
        .collect()
}

fn write_dark_state(cfg: &Config, runs: &[TwoModeRun]) -> Result<Vec<PathBuf>, CliError> {
    let mut paths = Vec::new();
    for run in runs {
        let stem = format!("dark_state_{}", run.name);
        paths.push(output::write(&cfg.output_dir, &format!("{stem}.csv"), &run.table().render())?);
        paths.push(output::write(
            &cfg.output_dir,
            &format!("{stem}.summary"),
            &run.summary().render(),
        )?);
    }
    Ok(paths)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Study {
    /// RK4 at `dt0 / divisor`, against the `dt0 / 8` reference.
    TimeStep { divisor: u32 },
    /// `levels` resonator states at `dt0`, against the largest truncation.
    Truncation { levels: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergeRow {
    pub study: Study,
    pub levels: usize,
    pub dt: f64,
    pub max_abs_dpe: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergeReport {
    pub rows: Vec<ConvergeRow>,
    /// Error ratios for dt0 -> dt0/2 and dt0/2 -> dt0/4.
    pub dt_ratios: [f64; 2],
    /// Largest P_e change between the configured truncation (or any larger
    /// one) and the largest truncation.
    pub truncation_dpe: f64,
    pub norm_err_max: f64,
}

impl ConvergeReport {
    pub fn passed(&self) -> bool {
        self.dt_ratios.iter().all(|&r| r >= MIN_DT_RATIO)
            && self.truncation_dpe < MAX_TRUNCATION_DPE
    }

    pub fn table(&self) -> Table {
        let mut table = Table::new(CONVERGE_HEADER);
        for r in &self.rows {
            let study = match r.study {
                Study::TimeStep { .. } => "dt",
                Study::Truncation { .. } => "levels",
            };
            table.push(vec![study.into(), r.levels.to_string(), float(r.dt), float(r.max_abs_dpe)]);
        }
        table
    }

    pub fn summary(&self) -> Summary {
        Summary::new()
            .float("dt_ratio_1", self.dt_ratios[0])
            .float("dt_ratio_2", self.dt_ratios[1])
            .float("truncation_max_dpe", self.truncation_dpe)
            .float("norm_err_max", self.norm_err_max)
            .text("passed", self.passed())
    }
}

fn max_abs_diff(a: &Trajectory, b: &Trajectory) -> Result<f64, CliError> {
    if a.samples.len() != b.samples.len() {
        return Err(CliError::Check {
            scenario: "converge".into(),
            msg: format!("sample grids differ ({} vs {})", a.samples.len(), b.samples.len()),
        });
    }
    Ok(a.samples.iter().zip(&b.samples).map(|(x, y)| (x.pe - y.pe).abs()).fold(0.0, f64::max))
}

/// Out-of-phase case repeated over dt and truncation; cells run in parallel.
///
/// Time-step cells use RK4 throughout so the ramp-free tail does not switch
/// to the exact propagator and mask the integrator order.
pub fn convergence(cfg: &Config) -> Result<ConvergeReport, CliError> {
    let err = numerical("converge");
    let drives = cfg.drives_with_phase(PI);
    let dt0 = cfg.dt();
    let t_end = cfg.grid.t_end;
    let base = time_grid(cfg, t_end, dt0).map_err(&err)?;
    let base_levels = cfg.circuit.resonator_levels;
    let mut levels = cfg.converge.levels.clone();
    if !levels.contains(&base_levels) {
        levels.push(base_levels);
    }
    levels.sort_unstable();
    levels.dedup();
    let top = *levels.last().expect("non-empty levels list");

    let mut studies: Vec<Study> =
        [1, 2, 4, 8].into_iter().map(|divisor| Study::TimeStep { divisor }).collect();
    studies.extend(levels.iter().map(|&levels| Study::Truncation { levels }));

    let runs: Vec<(Study, usize, f64, Trajectory)> = parallel::map(&studies, |&study| {
        let (spec, grid, method) = match study {
            Study::TimeStep { divisor } => {
                let m = divisor as usize;
                let grid = TimeGrid::new(t_end, dt0 / m as f64, base.sample_stride * m)?;
                (cfg.circuit.clone(), grid, Method::Rk4)
            }
            Study::Truncation { levels } => {
                let spec = CircuitSpec { resonator_levels: levels, ..cfg.circuit.clone() };
                (spec, base, Method::Auto)
            }
        };
        let tr = simulate_circuit(&spec, &drives, cfg.frame_freq(), &grid, method)?;
        Ok((study, spec.resonator_levels, grid.step(), tr))
    })
    .into_iter()
    .collect::<giantatom::Result<_>>()
    .map_err(&err)?;

    let find = |want: Study| &runs.iter().find(|r| r.0 == want).expect("study ran").3;
    let dt_ref = find(Study::TimeStep { divisor: 8 });
    let lv_ref = find(Study::Truncation { levels: top });

    let mut rows = Vec::with_capacity(runs.len());
    for (study, lv, dt, tr) in &runs {
        let reference = match study {
            Study::TimeStep { .. } => dt_ref,
            Study::Truncation { .. } => lv_ref,
        };
        rows.push(ConvergeRow {
            study: *study,
            levels: *lv,
            dt: *dt,
            max_abs_dpe: max_abs_diff(tr, reference)?,
        });
    }
    let dt_err = |d: u32| {
        rows.iter()
            .find(|r| r.study == Study::TimeStep { divisor: d })
            .map_or(f64::NAN, |r| r.max_abs_dpe)
    };
    let dt_ratios = [dt_err(1) / dt_err(2), dt_err(2) / dt_err(4)];
    let truncation_dpe = rows
        .iter()
        .filter(|r| matches!(r.study, Study::Truncation { levels } if levels >= base_levels))
        .map(|r| r.max_abs_dpe)
        .fold(0.0, f64::max);
    let norm_err_max = runs.iter().map(|r| r.3.max_norm_err()).fold(0.0, f64::max);
    log::info!("converge: dt ratios {dt_ratios:?}, truncation change {truncation_dpe:.3e}");
    Ok(ConvergeReport { rows, dt_ratios, truncation_dpe, norm_err_max })
}

fn write_convergence(cfg: &Config, report: &ConvergeReport) -> Result<Vec<PathBuf>, CliError> {
    Ok(vec![
        output::write(&cfg.output_dir, "converge.csv", &report.table().render())?,
        output::write(&cfg.output_dir, "converge.summary", &report.summary().render())?,
    ])
}
