use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{fill_wiener, QsdStepper, Scheme, StateVector, TAIL_ALARM, TAIL_LEVELS};
use crate::error::{invalid, Error, Result};
use crate::params::{Frame, SystemParams};

/// Largest `dt * ||H||` accepted for the explicitly integrated part.
pub const MAX_STEP_NORM: f64 = 0.1;

/// Everything that determines a trajectory apart from its seed and sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    pub params: SystemParams,
    pub frame: Frame,
    pub dim: usize,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
}

impl TrajectoryConfig {
    pub fn new(params: SystemParams, dim: usize, t_end: f64) -> Self {
        Self { params, frame: Frame::Omega1, dim, dt: 1e-4, t_end, scheme: Scheme::SplitStep }
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    /// Index of the step nearest to `t`.
    pub fn step_index(&self, t: f64) -> usize {
        (t / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.dim < 2 {
            return Err(Error::InvalidDimension(self.dim));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(invalid("t_end", format!("must be non-negative, got {}", self.t_end)));
        }
        Ok(())
    }
}

/// Times at which observables and state snapshots are recorded. Each time is
/// mapped to the nearest integration step.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    /// Times at which `<a^dagger a>` is recorded.
    pub observe: Vec<f64>,
    /// Times at which the full state is captured.
    pub snapshots: Vec<f64>,
}

impl SampleSpec {
    /// `per_period` observation points per modulation period on `[0, t_end]`.
    pub fn uniform(t_end: f64, period: f64, per_period: usize) -> Self {
        let dt = period / per_period.max(1) as f64;
        let n = (t_end / dt + 1e-9).floor() as usize;
        Self { observe: (0..=n).map(|k| k as f64 * dt).collect(), snapshots: Vec::new() }
    }

    /// Stroboscopic snapshots `t0 + n period` for `n = 0..count`.
    pub fn stroboscopic(t0: f64, period: f64, count: usize) -> Vec<f64> {
        (0..count).map(|n| t0 + n as f64 * period).collect()
    }

    pub fn with_snapshots(mut self, times: Vec<f64>) -> Self {
        self.snapshots = times;
        self
    }

    pub(crate) fn validate(&self, t_end: f64) -> Result<()> {
        for (name, ts) in [("observe", &self.observe), ("snapshots", &self.snapshots)] {
            if ts.windows(2).any(|w| w[1] < w[0]) {
                return Err(invalid(name, "times must be ascending"));
            }
            if ts.iter().any(|&t| !(t >= 0.0) || t > t_end + 1e-12) {
                return Err(invalid(name, format!("times must lie in [0, {t_end}]")));
            }
        }
        Ok(())
    }
}

/// Output of one stochastic trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub sample_times: Vec<f64>,
    pub mean_n: Vec<f64>,
    pub snapshot_times: Vec<f64>,
    pub snapshots: Vec<StateVector>,
}

/// Source of complex Wiener increments, one per dissipation channel per step.
pub trait NoiseSource {
    fn fill(&mut self, dt: f64, out: &mut [Complex64]);
}

struct RngNoise(ChaCha8Rng);

impl NoiseSource for RngNoise {
    fn fill(&mut self, dt: f64, out: &mut [Complex64]) {
        fill_wiener(&mut self.0, dt, out);
    }
}

impl<F: FnMut(f64, &mut [Complex64])> NoiseSource for F {
    fn fill(&mut self, dt: f64, out: &mut [Complex64]) {
        self(dt, out)
    }
}

/// Runs one trajectory from the vacuum; fully determined by its arguments.
pub fn run_trajectory(seed: u64, cfg: &TrajectoryConfig, samples: &SampleSpec) -> Result<TrajectoryRecord> {
    let mut noise = RngNoise(ChaCha8Rng::seed_from_u64(seed));
    run_trajectory_with(seed, cfg, samples, &mut noise)
}

/// As [`run_trajectory`] with a caller-supplied noise path.
pub fn run_trajectory_with<N: NoiseSource + ?Sized>(
    seed: u64,
    cfg: &TrajectoryConfig,
    samples: &SampleSpec,
    noise: &mut N,
) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    samples.validate(cfg.t_end)?;
    let mut stepper = QsdStepper::new(&cfg.params, cfg.dim, cfg.frame, cfg.dt, cfg.scheme)?;
    let norm = stepper.explicit_step_norm(&cfg.params);
    if norm > MAX_STEP_NORM {
        return Err(invalid("dt", format!("dt * ||H|| = {norm:.3} exceeds {MAX_STEP_NORM}; reduce dt")));
    }
    let mut psi = StateVector::vacuum(cfg.dim)?.coeffs;
    let mut dxi = vec![Complex64::new(0.0, 0.0); stepper.n_channels()];

    let observe_idx: Vec<usize> = samples.observe.iter().map(|&t| cfg.step_index(t)).collect();
    let snap_idx: Vec<usize> = samples.snapshots.iter().map(|&t| cfg.step_index(t)).collect();
    let mut record = TrajectoryRecord {
        seed,
        sample_times: observe_idx.iter().map(|&k| k as f64 * cfg.dt).collect(),
        mean_n: Vec::with_capacity(observe_idx.len()),
        snapshot_times: snap_idx.iter().map(|&k| k as f64 * cfg.dt).collect(),
        snapshots: Vec::with_capacity(snap_idx.len()),
    };
    let (mut oi, mut si) = (0usize, 0usize);
    let n_steps = cfg.n_steps();
    for k in 0..=n_steps {
        while oi < observe_idx.len() && observe_idx[oi] == k {
            record.mean_n.push(psi.iter().enumerate().map(|(n, c)| n as f64 * c.norm_sqr()).sum());
            oi += 1;
        }
        while si < snap_idx.len() && snap_idx[si] == k {
            record.snapshots.push(StateVector { coeffs: psi.clone() });
            si += 1;
        }
        if k == n_steps {
            break;
        }
        let t = k as f64 * cfg.dt;
        noise.fill(cfg.dt, &mut dxi);
        stepper.step(&mut psi, t, &dxi).map_err(|e| match e {
            Error::NumericalBlowup { t, .. } => Error::NumericalBlowup { step: k, t },
            other => other,
        })?;
        let tail: f64 = psi[cfg.dim.saturating_sub(TAIL_LEVELS)..].iter().map(|c| c.norm_sqr()).sum();
        if tail >= TAIL_ALARM {
            return Err(Error::Truncation { t: t + cfg.dt, tail, dim: cfg.dim });
        }
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(params: SystemParams) -> TrajectoryConfig {
        TrajectoryConfig { dt: 1e-3, ..TrajectoryConfig::new(params, 20, 1.0) }
    }

    #[test]
    fn deterministic_per_seed() {
        let c = cfg(SystemParams::new(0.7, -3.0, 5.0, 1.5, 1.0));
        let s = SampleSpec::uniform(1.0, 0.2, 5).with_snapshots(vec![0.5, 1.0]);
        let a = run_trajectory(42, &c, &s).unwrap();
        let b = run_trajectory(42, &c, &s).unwrap();
        assert_eq!(a, b);
        let d = run_trajectory(43, &c, &s).unwrap();
        assert_ne!(a.mean_n, d.mean_n);
        assert_eq!(a.snapshots.len(), 2);
        assert!(a.mean_n.iter().all(|&n| (0.0..=19.0).contains(&n)));
    }

    #[test]
    fn undriven_stays_in_vacuum() {
        let c = cfg(SystemParams::new(0.7, -15.0, 5.0, 0.0, 0.0));
        let s = SampleSpec::uniform(1.0, 0.1, 10);
        let r = run_trajectory(1, &c, &s).unwrap();
        assert!(r.mean_n.iter().all(|&n| n == 0.0));
    }

    #[test]
    fn truncation_alarm_fires() {
        let mut c = cfg(SystemParams::new(0.0, 0.0, 5.0, 10.0, 10.0));
        c.dim = 6;
        let err = run_trajectory(1, &c, &SampleSpec::default()).unwrap_err();
        assert!(matches!(err, Error::Truncation { .. }), "{err:?}");
    }

    #[test]
    fn coarse_dt_rejected() {
        let mut c = cfg(SystemParams::strong_kerr());
        c.dim = 50;
        c.dt = 0.01;
        assert!(matches!(run_trajectory(1, &c, &SampleSpec::default()), Err(Error::InvalidParameter { name: "dt", .. })));
    }

    #[test]
    fn samples_out_of_range_rejected() {
        let c = cfg(SystemParams::strong_kerr());
        let s = SampleSpec { observe: vec![2.0], snapshots: vec![] };
        assert!(run_trajectory(1, &c, &s).is_err());
    }
}
