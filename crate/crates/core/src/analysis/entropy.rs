//! Von Neumann entropy `S = -Tr(rho ln rho)` with jackknife error bars.

use serde::{Deserialize, Serialize};

use super::{DensityMatrix, NEGATIVE_EIGEN_TOL};
use crate::error::{invalid, Error, Result};
use crate::params::{Frame, SystemParams};
use crate::qsd::{density_from, run_ensemble, EnsembleConfig, EnsembleResult, GroupedAccumulator, SampleSpec, TrajectoryConfig};

/// Eigenvalues at or below this contribute nothing (`0 ln 0 = 0`).
pub const EIGEN_CLAMP: f64 = 1e-12;

pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let mut s = 0.0;
    for &p in rho.eigenvalues() {
        if p < -NEGATIVE_EIGEN_TOL {
            return Err(Error::InvalidDensity(format!("eigenvalue {p:e}")));
        }
        if p > EIGEN_CLAMP {
            s -= p * p.ln();
        }
    }
    Ok(s.max(0.0))
}

/// Entropy of an ensemble estimate and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub value: f64,
    pub std_err: f64,
}

/// Entropy of the pooled density matrix with a grouped jackknife error.
///
/// Each group is left out in turn; with `G` non-empty groups the error is
/// `sqrt((G-1)/G sum (S_g - mean S_g)^2)`.
pub fn entropy_with_error(acc: &GroupedAccumulator) -> Result<EntropyEstimate> {
    let value = von_neumann_entropy(&acc.density()?)?;
    let partial = acc
        .leave_one_out()
        .iter()
        .filter(|a| a.count() > 0)
        .map(|a| density_from(a).and_then(|rho| von_neumann_entropy(&rho)))
        .collect::<Result<Vec<f64>>>()?;
    let g = partial.len() as f64;
    let std_err = if partial.len() < 2 {
        f64::INFINITY
    } else {
        let mean = partial.iter().sum::<f64>() / g;
        ((g - 1.0) / g * partial.iter().map(|s| (s - mean).powi(2)).sum::<f64>()).sqrt()
    };
    Ok(EntropyEstimate { value, std_err })
}

/// Entropy at every snapshot of an ensemble run.
pub fn entropy_series(result: &EnsembleResult) -> Result<Vec<EntropyEstimate>> {
    result.snapshots.iter().map(entropy_with_error).collect()
}

/// Settings for [`min_entropy_over_period`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodEntropyOptions {
    pub frame: Frame,
    pub dim: usize,
    pub ensemble_size: usize,
    pub period_sample_count: usize,
    /// First sampled time; must be past the transient.
    pub t_start: f64,
    pub dt: f64,
    pub master_seed: u64,
    pub groups: usize,
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl PeriodEntropyOptions {
    pub fn new(dim: usize, ensemble_size: usize, period_sample_count: usize) -> Self {
        Self {
            frame: Frame::Omega1,
            dim,
            ensemble_size,
            period_sample_count,
            t_start: 10.0,
            dt: 1e-4,
            master_seed: 0,
            groups: 20,
            workers: None,
        }
    }
}

/// Smallest entropy over one modulation period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinEntropy {
    pub value: f64,
    pub std_err: f64,
    /// Time at which the minimum occurs.
    pub time: f64,
}

/// Earliest start accepted by [`min_entropy_over_period`], in units of `1/gamma`.
pub const MIN_START: f64 = 8.0;

/// Runs one ensemble and returns the minimum of `S(t)` over
/// `period_sample_count` equally spaced times in `[t_start, t_start + 2 pi/delta)`.
pub fn min_entropy_over_period(params: &SystemParams, opts: &PeriodEntropyOptions) -> Result<MinEntropy> {
    if opts.t_start * params.gamma < MIN_START {
        return Err(invalid("t_start", format!("must be at least {MIN_START}/gamma to skip the transient")));
    }
    if opts.period_sample_count == 0 {
        return Err(invalid("period_sample_count", "must be at least 1"));
    }
    let period = params.modulation_period()?;
    let times: Vec<f64> = (0..opts.period_sample_count)
        .map(|j| opts.t_start + period * j as f64 / opts.period_sample_count as f64)
        .collect();
    let t_end = *times.last().unwrap();
    let traj = TrajectoryConfig { frame: opts.frame, dt: opts.dt, ..TrajectoryConfig::new(*params, opts.dim, t_end) };
    let samples = SampleSpec { observe: Vec::new(), snapshots: times };
    let cfg = EnsembleConfig {
        groups: opts.groups,
        workers: opts.workers,
        ..EnsembleConfig::new(traj, samples, opts.ensemble_size, opts.master_seed)
    };
    let result = run_ensemble(&cfg)?;
    let series = entropy_series(&result)?;
    let (k, best) = series
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.value.total_cmp(&b.1.value))
        .expect("at least one snapshot");
    Ok(MinEntropy { value: best.value, std_err: best.std_err, time: result.snapshot_times[k] })
}
