//! Flat `key = value` scenario configuration.
//!
//! One assignment per line, `#` starts a comment, keys are dot-namespaced.
//! Frequencies are linear GHz (converted to rad/ns on load), phases radians,
//! times ns. Phases and phase lists also accept `pi` expressions such as
//! `3*pi/4` or `-pi/2`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use giantatom::circuit::{ghz, CircuitSpec, Drive, DriveSpec};
use giantatom::dynamics::Envelope;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },

    #[error("unknown key `{key}`")]
    UnknownKey { key: String },

    #[error("key `{key}` given twice")]
    Duplicate { key: String },

    #[error("key `{key}`: {msg}")]
    Invalid { key: String, msg: String },
}

fn invalid(key: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.to_string(), msg: msg.into() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    Fig1c,
    PhaseSweep,
    GeometryMap,
    DarkState,
    Converge,
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fig1c" => Ok(Scenario::Fig1c),
            "phase-sweep" => Ok(Scenario::PhaseSweep),
            "geometry-map" => Ok(Scenario::GeometryMap),
            "dark-state" => Ok(Scenario::DarkState),
            "converge" => Ok(Scenario::Converge),
            other => Err(format!(
                "unknown scenario `{other}` (fig1c, phase-sweep, geometry-map, dark-state, converge)"
            )),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Fig1c => "fig1c",
            Scenario::PhaseSweep => "phase-sweep",
            Scenario::GeometryMap => "geometry-map",
            Scenario::DarkState => "dark-state",
            Scenario::Converge => "converge",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame {
    Lab,
    Rotating,
}

impl FromStr for Frame {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "lab" => Ok(Frame::Lab),
            "rotating" => Ok(Frame::Rotating),
            other => Err(format!("unknown frame `{other}` (lab, rotating)")),
        }
    }
}

impl Frame {
    /// Default integration step in ns.
    pub fn default_dt(&self) -> f64 {
        match self {
            Frame::Lab => 5e-4,
            Frame::Rotating => 1e-2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridConfig {
    pub t_end: f64,
    pub dt: Option<f64>,
    pub sample_stride: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisConfig {
    /// P_e level a peak must exceed to count as an inversion.
    pub inversion_threshold: f64,
    /// Samples before this time are excluded from photon-number means.
    pub transient_ns: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeometryConfig {
    pub resolution: usize,
    pub beta_min: f64,
    pub beta_max: f64,
    pub path_max: f64,
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DarkConfig {
    pub alpha: f64,
    /// Atom-mode coupling, rad/ns.
    pub g: f64,
    pub levels: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergeConfig {
    pub levels: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub scenario: Scenario,
    pub frame: Frame,
    pub output_dir: PathBuf,
    pub circuit: CircuitSpec,
    pub drives: DriveSpec,
    pub grid: GridConfig,
    pub analysis: AnalysisConfig,
    pub sweep_delta_phi: Vec<f64>,
    pub geometry: GeometryConfig,
    pub dark: DarkConfig,
    pub converge: ConvergeConfig,
}

impl Default for Config {
    fn default() -> Self {
        let circuit = CircuitSpec::reference();
        let drives = DriveSpec::reference(&circuit, PI, Envelope::ramp(0.5));
        Self {
            scenario: Scenario::Fig1c,
            frame: Frame::Rotating,
            output_dir: PathBuf::from("out"),
            circuit,
            drives,
            grid: GridConfig { t_end: 60.0, dt: None, sample_stride: None },
            analysis: AnalysisConfig { inversion_threshold: 0.5, transient_ns: 5.0 },
            sweep_delta_phi: vec![0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0, PI],
            geometry: GeometryConfig {
                resolution: 41,
                beta_min: -1.0,
                beta_max: 1.0,
                path_max: 2.0,
                tol: 0.01,
            },
            dark: DarkConfig { alpha: 0.5, g: ghz(0.01), levels: 12 },
            converge: ConvergeConfig { levels: vec![3, 4, 5, 6] },
        }
    }
}

/// Every accepted key, in documentation order.
pub const KEYS: &[&str] = &[
    "scenario",
    "frame",
    "output.dir",
    "circuit.omega0_ghz",
    "circuit.anharm_ghz",
    "circuit.omega_r1_ghz",
    "circuit.omega_r2_ghz",
    "circuit.g1_ghz",
    "circuit.g2_ghz",
    "circuit.qubit_levels",
    "circuit.resonator_levels",
    "drive1.eps_ghz",
    "drive1.omega_d_ghz",
    "drive1.phi_d_rad",
    "drive1.t_ramp_ns",
    "drive2.eps_ghz",
    "drive2.omega_d_ghz",
    "drive2.t_ramp_ns",
    "grid.t_end_ns",
    "grid.dt_ns",
    "grid.sample_stride",
    "analysis.inversion_threshold",
    "analysis.transient_ns",
    "sweep.delta_phi_rad",
    "geometry.resolution",
    "geometry.beta_min",
    "geometry.beta_max",
    "geometry.path_max",
    "geometry.tol",
    "dark.alpha",
    "dark.g_ghz",
    "dark.levels",
    "converge.levels",
];

/// Split config text into key/value pairs, rejecting unknown and repeated keys.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Syntax { line: i + 1 });
        }
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey { key: key.to_string() });
        }
        if out.insert(key.to_string(), value.to_string()).is_some() {
            return Err(ConfigError::Duplicate { key: key.to_string() });
        }
    }
    Ok(out)
}

fn number(key: &str, value: &str) -> Result<f64, ConfigError> {
    let x: f64 = value.parse().map_err(|_| invalid(key, format!("`{value}` is not a number")))?;
    if !x.is_finite() {
        return Err(invalid(key, "must be finite"));
    }
    Ok(x)
}

fn positive(key: &str, value: &str) -> Result<f64, ConfigError> {
    let x = number(key, value)?;
    if x <= 0.0 {
        return Err(invalid(key, "must be positive"));
    }
    Ok(x)
}

fn non_negative(key: &str, value: &str) -> Result<f64, ConfigError> {
    let x = number(key, value)?;
    if x < 0.0 {
        return Err(invalid(key, "must be >= 0"));
    }
    Ok(x)
}

fn integer(key: &str, value: &str) -> Result<usize, ConfigError> {
    value.parse().map_err(|_| invalid(key, format!("`{value}` is not a non-negative integer")))
}

/// A float or a multiple of pi: `pi`, `-pi/2`, `3*pi/4`, `0.5pi`.
pub fn phase(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v = value.replace(' ', "");
    if let Ok(x) = v.parse::<f64>() {
        return if x.is_finite() { Ok(x) } else { Err(invalid(key, "must be finite")) };
    }
    let bad = || invalid(key, format!("`{value}` is not a number or pi expression"));
    let (num, den) = match v.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (v.as_str(), None),
    };
    let coef = num.strip_suffix("pi").ok_or_else(bad)?;
    let coef = coef.strip_suffix('*').unwrap_or(coef);
    let coef = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    let den = match den {
        Some(d) => d.parse::<f64>().ok().filter(|&d| d != 0.0).ok_or_else(bad)?,
        None => 1.0,
    };
    let x = coef * PI / den;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(bad())
    }
}

fn list<T>(
    key: &str,
    value: &str,
    item: impl Fn(&str, &str) -> Result<T, ConfigError>,
) -> Result<Vec<T>, ConfigError> {
    let items = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| item(key, s))
        .collect::<Result<Vec<_>, _>>()?;
    if items.is_empty() {
        return Err(invalid(key, "list must not be empty"));
    }
    Ok(items)
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let pairs = parse_pairs(text)?;
        let mut cfg = Config::default();
        for (key, value) in &pairs {
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Apply one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        match key {
            "scenario" => self.scenario = value.parse().map_err(|e: String| invalid(key, e))?,
            "frame" => self.frame = value.parse().map_err(|e: String| invalid(key, e))?,
            "output.dir" => self.output_dir = PathBuf::from(value),
            "circuit.omega0_ghz" => self.circuit.omega0 = ghz(positive(key, value)?),
            "circuit.anharm_ghz" => self.circuit.anharm = ghz(number(key, value)?),
            "circuit.omega_r1_ghz" => self.circuit.omega_r[0] = ghz(positive(key, value)?),
            "circuit.omega_r2_ghz" => self.circuit.omega_r[1] = ghz(positive(key, value)?),
            "circuit.g1_ghz" => self.circuit.g[0] = ghz(non_negative(key, value)?),
            "circuit.g2_ghz" => self.circuit.g[1] = ghz(non_negative(key, value)?),
            "circuit.qubit_levels" => self.circuit.qubit_levels = integer(key, value)?,
            "circuit.resonator_levels" => self.circuit.resonator_levels = integer(key, value)?,
            "drive1.eps_ghz" => self.drives.drives[0].eps = ghz(non_negative(key, value)?),
            "drive2.eps_ghz" => self.drives.drives[1].eps = ghz(non_negative(key, value)?),
            "drive1.omega_d_ghz" => self.drives.drives[0].omega_d = ghz(positive(key, value)?),
            "drive2.omega_d_ghz" => self.drives.drives[1].omega_d = ghz(positive(key, value)?),
            "drive1.phi_d_rad" => self.drives.drives[0].phi_d = phase(key, value)?,
            "drive1.t_ramp_ns" => {
                self.drives.drives[0].envelope = Envelope::ramp(non_negative(key, value)?)
            }
            "drive2.t_ramp_ns" => {
                self.drives.drives[1].envelope = Envelope::ramp(non_negative(key, value)?)
            }
            "grid.t_end_ns" => self.grid.t_end = positive(key, value)?,
            "grid.dt_ns" => self.grid.dt = Some(positive(key, value)?),
            "grid.sample_stride" => self.grid.sample_stride = Some(integer(key, value)?),
            "analysis.inversion_threshold" => {
                self.analysis.inversion_threshold = number(key, value)?
            }
            "analysis.transient_ns" => self.analysis.transient_ns = non_negative(key, value)?,
            "sweep.delta_phi_rad" => self.sweep_delta_phi = list(key, value, phase)?,
            "geometry.resolution" => self.geometry.resolution = integer(key, value)?,
            "geometry.beta_min" => self.geometry.beta_min = number(key, value)?,
            "geometry.beta_max" => self.geometry.beta_max = number(key, value)?,
            "geometry.path_max" => self.geometry.path_max = positive(key, value)?,
            "geometry.tol" => self.geometry.tol = number(key, value)?,
            "dark.alpha" => self.dark.alpha = number(key, value)?,
            "dark.g_ghz" => self.dark.g = ghz(non_negative(key, value)?),
            "dark.levels" => self.dark.levels = integer(key, value)?,
            "converge.levels" => self.converge.levels = list(key, value, integer)?,
            _ => return Err(ConfigError::UnknownKey { key: key.to_string() }),
        }
        Ok(())
    }

    /// Cross-field checks, run after all assignments.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let c = &self.circuit;
        if !matches!(c.qubit_levels, 2 | 3) {
            return Err(invalid("circuit.qubit_levels", "must be 2 or 3"));
        }
        if c.qubit_levels == 3 && c.anharm == 0.0 {
            return Err(invalid("circuit.anharm_ghz", "must be nonzero with three atom levels"));
        }
        if c.resonator_levels < 2 {
            return Err(invalid("circuit.resonator_levels", "must be >= 2"));
        }
        for (k, r) in c.omega_r.iter().enumerate() {
            if *r == c.omega0 {
                return Err(invalid(
                    &format!("circuit.omega_r{}_ghz", k + 1),
                    "resonator must be detuned from the atom",
                ));
            }
            if *r == self.drives.drives[k].omega_d {
                return Err(invalid(
                    &format!("drive{}.omega_d_ghz", k + 1),
                    "drive must be detuned from its resonator",
                ));
            }
        }
        if let Some(dt) = self.grid.dt {
            if dt > self.grid.t_end {
                return Err(invalid("grid.dt_ns", "must not exceed grid.t_end_ns"));
            }
        }
        if self.grid.sample_stride == Some(0) {
            return Err(invalid("grid.sample_stride", "must be >= 1"));
        }
        let thr = self.analysis.inversion_threshold;
        if !(thr > 0.0 && thr <= 1.0) {
            return Err(invalid("analysis.inversion_threshold", "must lie in (0, 1]"));
        }
        let g = &self.geometry;
        if g.resolution < 2 {
            return Err(invalid("geometry.resolution", "must be >= 2"));
        }
        if !(g.beta_max > g.beta_min) {
            return Err(invalid("geometry.beta_max", "must exceed geometry.beta_min"));
        }
        if !(g.tol > 0.0 && g.tol < 0.5) {
            return Err(invalid("geometry.tol", "must lie in (0, 0.5)"));
        }
        let d = &self.dark;
        if d.levels < 2 {
            return Err(invalid("dark.levels", "must be >= 2"));
        }
        if d.alpha * d.alpha > d.levels as f64 / 4.0 {
            return Err(invalid("dark.alpha", "|alpha|^2 must not exceed dark.levels / 4"));
        }
        if self.converge.levels.iter().any(|&l| l < 2) {
            return Err(invalid("converge.levels", "every entry must be >= 2"));
        }
        Ok(())
    }

    /// Integration step for the configured frame.
    pub fn dt(&self) -> f64 {
        self.grid.dt.unwrap_or_else(|| self.frame.default_dt())
    }

    /// Frame frequency: drive 1's carrier in the rotating frame, 0 in the lab.
    pub fn frame_freq(&self) -> f64 {
        match self.frame {
            Frame::Lab => 0.0,
            Frame::Rotating => self.drives.drives[0].omega_d,
        }
    }

    /// Drives with `phi_1 - phi_2 = delta_phi`.
    pub fn drives_with_phase(&self, delta_phi: f64) -> DriveSpec {
        let [d1, d2] = self.drives.drives;
        DriveSpec { drives: [d1, Drive { phi_d: d1.phi_d - delta_phi, ..d2 }] }
    }
}
