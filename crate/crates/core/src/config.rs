//! TOML run configuration shared by the command-line front end and the
//! runnable examples.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::GridSpec;
use crate::classical::{DEFAULT_SKIP_PERIODS, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::params::{Frame, SystemParams};
use crate::qsd::{Scheme, SampleSpec, TrajectoryConfig, MAX_STEP_NORM};

/// Batch commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Poincare,
    Lyapunov,
    ClassicalTrajectory,
    QsdEnsemble,
    Wigner,
    Entropy,
    Scan,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Poincare,
        Command::Lyapunov,
        Command::ClassicalTrajectory,
        Command::QsdEnsemble,
        Command::Wigner,
        Command::Entropy,
        Command::Scan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Poincare => "poincare",
            Command::Lyapunov => "lyapunov",
            Command::ClassicalTrajectory => "classical-trajectory",
            Command::QsdEnsemble => "qsd-ensemble",
            Command::Wigner => "wigner",
            Command::Entropy => "entropy",
            Command::Scan => "scan",
        }
    }

    fn is_quantum(self) -> bool {
        matches!(self, Command::QsdEnsemble | Command::Wigner | Command::Entropy)
    }
}

/// Classical integration settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassicalConfig {
    /// Initial amplitude `[Re, Im]`.
    pub alpha0: [f64; 2],
    pub t0: f64,
    pub tol: f64,
    /// Poincaré points kept after the transient.
    pub n_points: usize,
    /// Modulation periods discarded before recording.
    pub n_skip: usize,
    /// Measured periods for the Lyapunov estimate (after `n_skip`).
    pub lyapunov_periods: usize,
    /// End time of `classical-trajectory`.
    pub t_end: f64,
    /// Sample count of `classical-trajectory`.
    pub samples: usize,
}

impl Default for ClassicalConfig {
    fn default() -> Self {
        Self {
            alpha0: [0.0, 0.0],
            t0: 0.0,
            tol: DEFAULT_TOL,
            n_points: 5000,
            n_skip: DEFAULT_SKIP_PERIODS,
            lyapunov_periods: 300,
            t_end: 50.0,
            samples: 1000,
        }
    }
}

/// Trajectory ensemble settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuantumConfig {
    pub frame: Frame,
    pub dim: usize,
    pub dt: f64,
    pub scheme: Scheme,
    pub t_end: f64,
    pub ensemble_size: usize,
    /// Publication-scale ensemble size, used with `--paper-scale`.
    pub full_ensemble_size: usize,
    pub master_seed: u64,
    /// Jackknife groups for entropy error bars.
    pub groups: usize,
    /// `<a^dagger a>` samples per modulation period.
    pub samples_per_period: usize,
    /// Snapshot time for `wigner`, rounded to the stroboscopic clock.
    pub snapshot_time: f64,
    /// Entropy sample count over `(0, t_end]` for `entropy`.
    pub entropy_samples: usize,
    /// Keep a resumable checkpoint next to the output files.
    pub checkpoint: bool,
}

impl Default for QuantumConfig {
    fn default() -> Self {
        Self {
            frame: Frame::Omega1,
            dim: 50,
            dt: 1e-4,
            scheme: Scheme::SplitStep,
            t_end: 12.0,
            ensemble_size: 200,
            full_ensemble_size: 2000,
            master_seed: 0,
            groups: 20,
            samples_per_period: 50,
            snapshot_time: 10.0,
            entropy_samples: 40,
            checkpoint: true,
        }
    }
}

/// Wigner grid; extents default to the square chosen by [`GridSpec::default_for`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WignerConfig {
    pub half_width: Option<f64>,
    pub nx: usize,
    pub ny: usize,
}

impl Default for WignerConfig {
    fn default() -> Self {
        Self { half_width: None, nx: 256, ny: 256 }
    }
}

/// Parameter swept by `scan`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanParameter {
    Chi,
    Delta,
    DeltaMod,
    Omega1,
    Omega2,
}

impl ScanParameter {
    pub fn apply(self, mut p: SystemParams, value: f64) -> SystemParams {
        match self {
            ScanParameter::Chi => p.chi = value,
            ScanParameter::Delta => p.delta = value,
            ScanParameter::DeltaMod => p.delta_mod = value,
            ScanParameter::Omega1 => p.omega1 = value,
            ScanParameter::Omega2 => p.omega2 = value,
        }
        p
    }

    pub fn name(self) -> &'static str {
        match self {
            ScanParameter::Chi => "chi",
            ScanParameter::Delta => "delta",
            ScanParameter::DeltaMod => "delta_mod",
            ScanParameter::Omega1 => "omega1",
            ScanParameter::Omega2 => "omega2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    pub parameter: ScanParameter,
    pub values: Vec<f64>,
    /// Estimate the classical Lyapunov exponent at each value.
    pub lyapunov: bool,
    /// Estimate the minimal entropy over a period at each value.
    pub entropy: bool,
    /// Entropy samples within the period.
    pub period_samples: usize,
    /// Start of the sampled period.
    pub t_start: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            parameter: ScanParameter::Omega2,
            values: Vec::new(),
            lyapunov: true,
            entropy: true,
            period_samples: 8,
            t_start: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Output path prefix; files are `<prefix>.<kind>.<ext>`.
    pub prefix: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { prefix: PathBuf::from("out/run") }
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: SystemParams,
    #[serde(default)]
    pub classical: ClassicalConfig,
    #[serde(default)]
    pub quantum: QuantumConfig,
    #[serde(default)]
    pub wigner: WignerConfig,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn config_err(key: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Config { key: key.into(), reason: reason.into() }
}

/// Re-labels a module validation error with its configuration section.
fn in_section(section: &str, e: Error) -> Error {
    match e {
        Error::InvalidParameter { name, reason } => config_err(format!("{section}.{name}"), reason),
        Error::InvalidDimension(d) => config_err(format!("{section}.dim"), format!("need at least 2 levels, got {d}")),
        other => other,
    }
}

/// Parses and validates a configuration document for `command`.
pub fn parse_config(text: &str, command: Command) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let key = e.span().and_then(|s| key_at(text, s.start)).unwrap_or_else(|| "document".into());
        config_err(key, e.to_string())
    })?;
    cfg.validate(command)?;
    Ok(cfg)
}

/// Dotted key of the assignment or table header on the line holding `offset`.
fn key_at(text: &str, offset: usize) -> Option<String> {
    let start = text[..offset.min(text.len())].rfind('\n').map_or(0, |i| i + 1);
    let line = text[start..].lines().next()?.trim();
    let header = |l: &str| l.strip_prefix('[').and_then(|l| l.strip_suffix(']')).map(|h| h.trim().to_string());
    if let Some(h) = header(line) {
        return Some(h);
    }
    let key = line.split('=').next()?.trim().trim_matches('"');
    let section = text[..start].lines().rev().find_map(|l| header(l.trim()));
    Some(match section {
        Some(sec) => format!("{sec}.{key}"),
        None => key.to_string(),
    })
}

/// Reads and parses a configuration file.
pub fn load_config(path: &Path, command: Command) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text, command)
}

impl RunConfig {
    /// Default sections around the given parameters.
    pub fn new(params: SystemParams) -> Self {
        Self {
            params,
            classical: ClassicalConfig::default(),
            quantum: QuantumConfig::default(),
            wigner: WignerConfig::default(),
            scan: ScanConfig::default(),
            output: OutputConfig::default(),
        }
    }

    pub fn validate(&self, command: Command) -> Result<()> {
        self.params.validate().map_err(|e| in_section("params", e))?;
        let needs_period = !matches!(command, Command::ClassicalTrajectory);
        if needs_period {
            self.params.modulation_period().map_err(|e| in_section("params", e))?;
        }
        let c = &self.classical;
        if !(c.tol > 1e-14 && c.tol <= 1e-3) {
            return Err(config_err("classical.tol", format!("must lie in (1e-14, 1e-3], got {}", c.tol)));
        }
        if c.alpha0.iter().any(|v| !v.is_finite()) || !c.t0.is_finite() {
            return Err(config_err("classical.alpha0", "must be finite"));
        }
        match command {
            Command::Poincare if c.n_points == 0 => {
                return Err(config_err("classical.n_points", "must be at least 1"));
            }
            Command::Lyapunov | Command::Scan if c.lyapunov_periods < 110 => {
                return Err(config_err("classical.lyapunov_periods", "need at least 110 measured periods"));
            }
            Command::ClassicalTrajectory if !(c.t_end > c.t0) => {
                return Err(config_err("classical.t_end", format!("must exceed t0 = {}", c.t0)));
            }
            Command::ClassicalTrajectory if c.samples == 0 => {
                return Err(config_err("classical.samples", "must be at least 1"));
            }
            _ => {}
        }
        if command.is_quantum() || (command == Command::Scan && self.scan.entropy) {
            self.validate_quantum(command)?;
        }
        if command == Command::Wigner {
            let g = self.grid_spec();
            g.validate().map_err(|e| in_section("wigner", e))?;
            if self.wigner.half_width.is_some_and(|h| !(h > 0.0)) {
                return Err(config_err("wigner.half_width", "must be positive"));
            }
        }
        if command == Command::Scan {
            if self.scan.values.is_empty() {
                return Err(config_err("scan.values", "must list at least one value"));
            }
            for &v in &self.scan.values {
                let p = self.scan.parameter.apply(self.params, v);
                p.validate().map_err(|e| in_section("scan.values", e))?;
                p.modulation_period().map_err(|e| in_section("scan.values", e))?;
            }
            if self.scan.entropy && self.scan.period_samples == 0 {
                return Err(config_err("scan.period_samples", "must be at least 1"));
            }
            if self.scan.entropy && self.scan.t_start < crate::analysis::MIN_START / self.params.gamma {
                return Err(config_err("scan.t_start", "must be past the transient (>= 8/gamma)"));
            }
        }
        Ok(())
    }

    fn validate_quantum(&self, command: Command) -> Result<()> {
        let q = &self.quantum;
        if q.ensemble_size == 0 {
            return Err(config_err("quantum.ensemble_size", "must be at least 1"));
        }
        if q.groups == 0 {
            return Err(config_err("quantum.groups", "must be at least 1"));
        }
        if q.samples_per_period == 0 {
            return Err(config_err("quantum.samples_per_period", "must be at least 1"));
        }
        let traj = self.trajectory_config();
        traj.validate().map_err(|e| in_section("quantum", e))?;
        let worst = crate::qsd::QsdStepper::new(&self.params, q.dim, q.frame, q.dt, q.scheme)
            .map_err(|e| in_section("quantum", e))?
            .explicit_step_norm(&self.params);
        if worst > MAX_STEP_NORM {
            return Err(config_err("quantum.dt", format!("dt * ||H|| = {worst:.3} exceeds {MAX_STEP_NORM}")));
        }
        match command {
            Command::Wigner if !(q.snapshot_time >= 0.0 && self.snapshot_time() <= q.t_end) => {
                Err(config_err("quantum.snapshot_time", format!("must lie in [0, t_end = {}]", q.t_end)))
            }
            Command::Entropy if q.entropy_samples == 0 => Err(config_err("quantum.entropy_samples", "must be at least 1")),
            _ => Ok(()),
        }
    }

    pub fn alpha0(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.classical.alpha0[0], self.classical.alpha0[1])
    }

    pub fn trajectory_config(&self) -> TrajectoryConfig {
        let q = &self.quantum;
        TrajectoryConfig { frame: q.frame, dt: q.dt, scheme: q.scheme, ..TrajectoryConfig::new(self.params, q.dim, q.t_end) }
    }

    /// Uniform `<a^dagger a>` sampling over `[0, t_end]`.
    pub fn observation_spec(&self) -> SampleSpec {
        let period = self.params.modulation_period().unwrap_or(self.quantum.t_end);
        SampleSpec::uniform(self.quantum.t_end, period, self.quantum.samples_per_period)
    }

    /// `snapshot_time` rounded to the nearest point of the stroboscopic clock.
    pub fn snapshot_time(&self) -> f64 {
        match self.params.modulation_period() {
            Ok(period) => (self.quantum.snapshot_time / period).round() * period,
            Err(_) => self.quantum.snapshot_time,
        }
    }

    pub fn grid_spec(&self) -> GridSpec {
        let base = GridSpec::default_for(&self.params, self.quantum.dim);
        let sized = match self.wigner.half_width {
            Some(h) => GridSpec::square(h, 256),
            None => base,
        };
        sized.with_resolution(self.wigner.nx, self.wigner.ny)
    }

    /// Switches to the publication-scale ensemble size.
    pub fn paper_scale(&mut self) {
        self.quantum.ensemble_size = self.quantum.full_ensemble_size;
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}
