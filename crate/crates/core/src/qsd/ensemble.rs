use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_trajectory, ExactSum, SampleSpec, StateVector, TrajectoryConfig, TrajectoryRecord};
use crate::analysis::DensityMatrix;
use crate::error::{invalid, Error, Result};

/// Per-trajectory seed derived from the master seed and the trajectory index.
///
/// A SplitMix64 finalizer over both inputs, so seeds do not depend on how
/// trajectories are scheduled.
pub fn trajectory_seed(master_seed: u64, index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    mix(master_seed ^ mix(index))
}

/// Running sum of projectors `|psi><psi|` over an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleAccumulator {
    dim: usize,
    re: Vec<ExactSum>,
    im: Vec<ExactSum>,
    count: u64,
}

impl EnsembleAccumulator {
    pub fn new(dim: usize) -> Self {
        Self { dim, re: vec![ExactSum::default(); dim * dim], im: vec![ExactSum::default(); dim * dim], count: 0 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn add(&mut self, state: &StateVector) -> Result<()> {
        if state.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: state.dim() });
        }
        let c = state.coeffs();
        for i in 0..self.dim {
            for j in 0..self.dim {
                let z = c[i] * c[j].conj();
                self.re[i * self.dim + j].add(z.re);
                self.im[i * self.dim + j].add(z.im);
            }
        }
        self.count += 1;
        Ok(())
    }

    /// Entrywise sum; exact, hence associative and commutative.
    pub fn merge(&mut self, other: &EnsembleAccumulator) -> Result<()> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        for (a, b) in self.re.iter_mut().zip(&other.re) {
            a.merge(*b);
        }
        for (a, b) in self.im.iter_mut().zip(&other.im) {
            a.merge(*b);
        }
        self.count += other.count;
        Ok(())
    }

    /// `self - other`, for leave-one-group-out estimates.
    fn minus(&self, other: &EnsembleAccumulator) -> EnsembleAccumulator {
        EnsembleAccumulator {
            dim: self.dim,
            re: self.re.iter().zip(&other.re).map(|(a, b)| a.difference(*b)).collect(),
            im: self.im.iter().zip(&other.im).map(|(a, b)| a.difference(*b)).collect(),
            count: self.count - other.count,
        }
    }

    /// `sum_k |psi_k><psi_k|`.
    pub fn sum_projectors(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| {
            Complex64::new(self.re[i * self.dim + j].value(), self.im[i * self.dim + j].value())
        })
    }
}

/// Functional form of [`EnsembleAccumulator::add`].
pub fn accumulate(mut acc: EnsembleAccumulator, state: &StateVector) -> Result<EnsembleAccumulator> {
    acc.add(state)?;
    Ok(acc)
}

/// Ensemble density matrix `sum / count`, Hermitized.
pub fn density_from(acc: &EnsembleAccumulator) -> Result<DensityMatrix> {
    if acc.count == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let m = acc.sum_projectors() / Complex64::new(acc.count as f64, 0.0);
    let h = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    DensityMatrix::new(h)
}

/// `Tr(rho a^dagger a)`.
pub fn mean_excitation(rho: &DensityMatrix) -> f64 {
    (0..rho.dim()).map(|n| n as f64 * rho.entry(n, n).re).sum()
}

/// Exact first and second moments of a scalar across trajectories.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    sum: ExactSum,
    sum_sq: ExactSum,
    count: u64,
}

impl Moments {
    pub fn add(&mut self, x: f64) {
        self.sum.add(x);
        self.sum_sq.add(x * x);
        self.count += 1;
    }

    pub fn merge(&mut self, other: &Moments) {
        self.sum.merge(other.sum);
        self.sum_sq.merge(other.sum_sq);
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.sum.value() / self.count as f64
    }

    /// Standard error of the mean (sample variance with Bessel's correction).
    pub fn std_err(&self) -> f64 {
        if self.count < 2 {
            return f64::INFINITY;
        }
        let n = self.count as f64;
        let var = ((self.sum_sq.value() - self.sum.value().powi(2) / n) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

/// Projector sums split into groups by `trajectory index mod groups`, for
/// jackknife error bars on nonlinear functionals such as the entropy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupedAccumulator {
    groups: Vec<EnsembleAccumulator>,
}

impl GroupedAccumulator {
    pub fn new(dim: usize, groups: usize) -> Self {
        Self { groups: (0..groups.max(1)).map(|_| EnsembleAccumulator::new(dim)).collect() }
    }

    pub fn add(&mut self, index: usize, state: &StateVector) -> Result<()> {
        let g = index % self.groups.len();
        self.groups[g].add(state)
    }

    pub fn merge(&mut self, other: &GroupedAccumulator) -> Result<()> {
        if other.groups.len() != self.groups.len() {
            return Err(invalid("groups", "group counts differ"));
        }
        for (a, b) in self.groups.iter_mut().zip(&other.groups) {
            a.merge(b)?;
        }
        Ok(())
    }

    pub fn groups(&self) -> &[EnsembleAccumulator] {
        &self.groups
    }

    pub fn total(&self) -> EnsembleAccumulator {
        let mut acc = EnsembleAccumulator::new(self.groups[0].dim);
        for g in &self.groups {
            acc.merge(g).expect("groups share a dimension");
        }
        acc
    }

    pub fn density(&self) -> Result<DensityMatrix> {
        density_from(&self.total())
    }

    /// Totals with each non-empty group removed in turn.
    pub fn leave_one_out(&self) -> Vec<EnsembleAccumulator> {
        let total = self.total();
        self.groups.iter().filter(|g| g.count > 0).map(|g| total.minus(g)).collect()
    }
}

/// Ensemble of independent trajectories sharing one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub trajectory: TrajectoryConfig,
    pub samples: SampleSpec,
    pub size: usize,
    pub master_seed: u64,
    /// Jackknife groups for snapshot error bars.
    pub groups: usize,
    /// Worker threads; `None` uses all available cores. Results do not depend on it.
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl EnsembleConfig {
    pub fn new(trajectory: TrajectoryConfig, samples: SampleSpec, size: usize, master_seed: u64) -> Self {
        Self { trajectory, samples, size, master_seed, groups: 20, workers: None }
    }
}

/// Reduced ensemble output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub sample_times: Vec<f64>,
    pub mean_n: Vec<Moments>,
    /// Largest single-trajectory `<a^dagger a>` seen at any sample.
    pub max_single_mean_n: f64,
    pub snapshot_times: Vec<f64>,
    pub snapshots: Vec<GroupedAccumulator>,
    /// Indices of the absorbed trajectories, ascending.
    pub completed: Vec<usize>,
}

impl EnsembleResult {
    fn empty(cfg: &EnsembleConfig) -> Self {
        let dt = cfg.trajectory.dt;
        let snap: Vec<f64> = cfg.samples.snapshots.iter().map(|&t| cfg.trajectory.step_index(t) as f64 * dt).collect();
        Self {
            sample_times: cfg.samples.observe.iter().map(|&t| cfg.trajectory.step_index(t) as f64 * dt).collect(),
            mean_n: vec![Moments::default(); cfg.samples.observe.len()],
            max_single_mean_n: 0.0,
            snapshots: snap.iter().map(|_| GroupedAccumulator::new(cfg.trajectory.dim, cfg.groups)).collect(),
            snapshot_times: snap,
            completed: Vec::new(),
        }
    }

    fn absorb(&mut self, index: usize, rec: &TrajectoryRecord) -> Result<()> {
        for (m, &x) in self.mean_n.iter_mut().zip(&rec.mean_n) {
            m.add(x);
            self.max_single_mean_n = self.max_single_mean_n.max(x);
        }
        for (acc, s) in self.snapshots.iter_mut().zip(&rec.snapshots) {
            acc.add(index, s)?;
        }
        self.completed.push(index);
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.completed.len()
    }

    /// Ensemble density matrix at snapshot `k`.
    pub fn density(&self, k: usize) -> Result<DensityMatrix> {
        self.snapshots.get(k).ok_or(Error::EmptyEnsemble)?.density()
    }
}

fn build_pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(invalid("workers", "must be at least 1"));
        }
        b = b.num_threads(w);
    }
    b.build().map_err(|e| invalid("workers", e.to_string()))
}

fn run_chunk(cfg: &EnsembleConfig, pool: &rayon::ThreadPool, indices: &[usize]) -> Result<Vec<TrajectoryRecord>> {
    pool.install(|| {
        indices
            .par_iter()
            .map(|&i| run_trajectory(trajectory_seed(cfg.master_seed, i as u64), &cfg.trajectory, &cfg.samples))
            .collect()
    })
}

fn check_config(cfg: &EnsembleConfig) -> Result<()> {
    cfg.trajectory.validate()?;
    cfg.samples.validate(cfg.trajectory.t_end)?;
    if cfg.size == 0 {
        return Err(invalid("ensemble_size", "must be at least 1"));
    }
    if cfg.groups == 0 {
        return Err(invalid("groups", "must be at least 1"));
    }
    Ok(())
}

fn chunk_len(pool: &rayon::ThreadPool) -> usize {
    (pool.current_num_threads() * 8).max(16)
}

/// Runs `cfg.size` trajectories (in parallel) and reduces them.
pub fn run_ensemble(cfg: &EnsembleConfig) -> Result<EnsembleResult> {
    check_config(cfg)?;
    let pool = build_pool(cfg.workers)?;
    let mut result = EnsembleResult::empty(cfg);
    let all: Vec<usize> = (0..cfg.size).collect();
    for chunk in all.chunks(chunk_len(&pool)) {
        for (i, rec) in chunk.iter().zip(run_chunk(cfg, &pool, chunk)?) {
            result.absorb(*i, &rec)?;
        }
    }
    Ok(result)
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    config: EnsembleConfig,
    result: EnsembleResult,
}

/// As [`run_ensemble`], persisting progress to `path` after every chunk.
///
/// An existing checkpoint with an identical configuration is resumed; one with
/// a different configuration is an error. `max_chunks` stops early (for
/// interruption tests) and returns the partial result; otherwise the checkpoint
/// file is removed on completion.
pub fn run_ensemble_checkpointed(cfg: &EnsembleConfig, path: &Path, max_chunks: Option<usize>) -> Result<EnsembleResult> {
    check_config(cfg)?;
    let pool = build_pool(cfg.workers)?;
    let mut result = if path.exists() {
        let text = std::fs::read_to_string(path)?;
        let mut ck: Checkpoint =
            serde_json::from_str(&text).map_err(|e| Error::Io(format!("corrupt checkpoint: {e}")))?;
        ck.config.workers = cfg.workers;
        if ck.config != *cfg {
            return Err(invalid("checkpoint", format!("{} was written for a different configuration", path.display())));
        }
        ck.result
    } else {
        EnsembleResult::empty(cfg)
    };
    let done: std::collections::BTreeSet<usize> = result.completed.iter().copied().collect();
    let pending: Vec<usize> = (0..cfg.size).filter(|i| !done.contains(i)).collect();
    for (n, chunk) in pending.chunks(chunk_len(&pool)).enumerate() {
        if max_chunks.is_some_and(|m| n >= m) {
            return Ok(result);
        }
        for (i, rec) in chunk.iter().zip(run_chunk(cfg, &pool, chunk)?) {
            result.absorb(*i, &rec)?;
        }
        let ck = Checkpoint { config: cfg.clone(), result };
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, serde_json::to_vec(&ck).map_err(|e| Error::Io(e.to_string()))?)?;
        std::fs::rename(&tmp, path)?;
        result = ck.result;
    }
    if path.exists() {
        std::fs::remove_file(path)?;
    }
    result.completed.sort_unstable();
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SystemParams;

    fn state(c: &[f64]) -> StateVector {
        StateVector::from_coeffs(c.iter().map(|&x| Complex64::new(x, 0.3 * x)).collect()).unwrap()
    }

    #[test]
    fn single_state_is_projector() {
        let s = state(&[0.3, 0.5, -0.2, 0.1]);
        let acc = accumulate(EnsembleAccumulator::new(4), &s).unwrap();
        let rho = density_from(&acc).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        let p2 = rho.matrix() * rho.matrix();
        assert!((p2 - rho.matrix()).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn vacuum_ensemble_exact() {
        let mut acc = EnsembleAccumulator::new(5);
        let v = StateVector::vacuum(5).unwrap();
        for _ in 0..200 {
            acc.add(&v).unwrap();
        }
        let rho = density_from(&acc).unwrap();
        assert_eq!(rho.entry(0, 0), Complex64::new(1.0, 0.0));
        assert!(rho.matrix().iter().skip(1).all(|z| *z == Complex64::new(0.0, 0.0)));
        assert_eq!(mean_excitation(&rho), 0.0);
    }

    #[test]
    fn merge_commutes() {
        let mut a = EnsembleAccumulator::new(3);
        let mut b = EnsembleAccumulator::new(3);
        a.add(&state(&[1.0, 0.2, 0.1])).unwrap();
        a.add(&state(&[0.1, 0.9, 0.3])).unwrap();
        b.add(&state(&[0.5, -0.5, 0.7])).unwrap();
        let mut ab = a.clone();
        ab.merge(&b).unwrap();
        let mut ba = b.clone();
        ba.merge(&a).unwrap();
        assert_eq!(ab, ba);
        assert!(a.merge(&EnsembleAccumulator::new(4)).is_err());
        assert!(a.add(&StateVector::vacuum(4).unwrap()).is_err());
    }

    #[test]
    fn empty_accumulator_rejected() {
        assert_eq!(density_from(&EnsembleAccumulator::new(3)), Err(Error::EmptyEnsemble));
    }

    #[test]
    fn mean_excitation_examples() {
        let dim = 5;
        let mut acc = EnsembleAccumulator::new(dim);
        acc.add(&StateVector::fock(dim, 3).unwrap()).unwrap();
        assert!((mean_excitation(&density_from(&acc).unwrap()) - 3.0).abs() < 1e-12);
        let mut acc = EnsembleAccumulator::new(dim);
        acc.add(&StateVector::fock(dim, 0).unwrap()).unwrap();
        acc.add(&StateVector::fock(dim, 2).unwrap()).unwrap();
        assert!((mean_excitation(&density_from(&acc).unwrap()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn moments() {
        let mut m = Moments::default();
        for x in [1.0, 2.0, 3.0, 4.0] {
            m.add(x);
        }
        assert!((m.mean() - 2.5).abs() < 1e-15);
        let se = (1.25 * 4.0 / 3.0 / 4.0f64).sqrt();
        assert!((m.std_err() - se).abs() < 1e-12);
    }

    #[test]
    fn seeds_are_distinct() {
        let s: std::collections::HashSet<u64> = (0..1000).map(|i| trajectory_seed(7, i)).collect();
        assert_eq!(s.len(), 1000);
        assert_ne!(trajectory_seed(7, 0), trajectory_seed(8, 0));
    }

    fn small_cfg() -> EnsembleConfig {
        let p = SystemParams::new(0.7, -3.0, 5.0, 1.0, 0.8);
        let traj = TrajectoryConfig { dt: 2e-3, ..TrajectoryConfig::new(p, 12, 1.0) };
        let samples = SampleSpec::uniform(1.0, 0.25, 5).with_snapshots(vec![0.5, 1.0]);
        EnsembleConfig { groups: 4, ..EnsembleConfig::new(traj, samples, 40, 11) }
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mut cfg = small_cfg();
        cfg.workers = Some(1);
        let a = run_ensemble(&cfg).unwrap();
        cfg.workers = Some(3);
        let b = run_ensemble(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.count(), 40);
        let rho = a.density(1).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn resume_matches_uninterrupted() {
        let mut cfg = small_cfg();
        cfg.workers = Some(1);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.json");
        let partial = run_ensemble_checkpointed(&cfg, &path, Some(1)).unwrap();
        assert!(partial.count() < cfg.size);
        assert!(path.exists());
        let resumed = run_ensemble_checkpointed(&cfg, &path, None).unwrap();
        assert!(!path.exists());
        let direct = run_ensemble(&cfg).unwrap();
        assert_eq!(resumed.snapshots, direct.snapshots);
        assert_eq!(resumed.mean_n, direct.mean_n);
        assert_eq!(resumed.completed, direct.completed);
    }

    #[test]
    fn checkpoint_for_other_config_rejected() {
        let cfg = small_cfg();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.json");
        run_ensemble_checkpointed(&cfg, &path, Some(1)).unwrap();
        let mut other = cfg.clone();
        other.master_seed += 1;
        assert!(run_ensemble_checkpointed(&other, &path, None).is_err());
    }
}
