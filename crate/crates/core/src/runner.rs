//! Batch execution of the configured commands: runs the computation, writes
//! CSV data files and a TOML manifest.
//!
//! Files are named `<prefix>.<kind>.<ext>`. Numbers are written as `{:.16e}`
//! (17 significant digits), so data files round-trip exactly and repeat
//! byte-for-byte for a fixed configuration and seed.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{
    entropy_series, min_entropy_over_period, negativity_volume, von_neumann_entropy, wigner, PeriodEntropyOptions,
};
use crate::classical::{integrate_classical, lyapunov_max, poincare_section, uniform_times, LyapunovOptions, Regime};
use crate::config::{Command, RunConfig};
use crate::error::{Error, Result};
use crate::qsd::{mean_excitation, run_ensemble, run_ensemble_checkpointed, EnsembleConfig, EnsembleResult, SampleSpec};

/// Process exit status for an error category.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::InvalidParameter { .. } | Error::InvalidDimension(_) => 2,
        Error::Truncation { .. } => 4,
        Error::Io(_) => 5,
        _ => 3,
    }
}

/// A written data file and its column layout.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputFile {
    pub path: PathBuf,
    pub columns: String,
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub command: Command,
    pub files: Vec<OutputFile>,
    pub manifest: PathBuf,
    /// One-line human-readable result.
    pub summary: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'static str,
    version: &'static str,
    master_seed: u64,
    workers: String,
    wall_time_seconds: f64,
    summary: &'a str,
    files: &'a [OutputFile],
    config: &'a RunConfig,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn output_path(cfg: &RunConfig, kind: &str) -> PathBuf {
    let mut name = cfg.output.prefix.clone().into_os_string();
    name.push(format!(".{kind}"));
    PathBuf::from(name)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write_csv(cfg: &RunConfig, kind: &str, header: &[&str], rows: &[Vec<String>]) -> Result<OutputFile> {
    let path = output_path(cfg, kind);
    let mut text = header.join(",");
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    write_file(&path, &text)?;
    Ok(OutputFile { path, columns: header.join(",") })
}

/// Runs `command` and writes its outputs under `cfg.output.prefix`.
///
/// `workers` bounds the threads used for trajectory ensembles and parameter
/// scans; outputs do not depend on it.
pub fn run(command: Command, cfg: &RunConfig, workers: Option<usize>) -> Result<RunReport> {
    cfg.validate(command)?;
    let start = Instant::now();
    let (files, summary) = match command {
        Command::Poincare => run_poincare(cfg)?,
        Command::Lyapunov => run_lyapunov(cfg)?,
        Command::ClassicalTrajectory => run_classical(cfg)?,
        Command::QsdEnsemble => run_qsd(cfg, workers)?,
        Command::Wigner => run_wigner(cfg, workers)?,
        Command::Entropy => run_entropy(cfg, workers)?,
        Command::Scan => run_scan(cfg, workers)?,
    };
    let manifest = Manifest {
        command: command.name(),
        version: env!("CARGO_PKG_VERSION"),
        master_seed: cfg.quantum.master_seed,
        workers: workers.map_or_else(|| "all".to_string(), |w| w.to_string()),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        summary: &summary,
        files: &files,
        config: cfg,
    };
    let path = output_path(cfg, "manifest.toml");
    let text = toml::to_string(&manifest).map_err(|e| Error::Io(format!("manifest: {e}")))?;
    write_file(&path, &text)?;
    Ok(RunReport { command, files, manifest: path, summary })
}

fn run_poincare(cfg: &RunConfig) -> Result<(Vec<OutputFile>, String)> {
    let c = &cfg.classical;
    let set = poincare_section(&cfg.params, cfg.alpha0(), c.t0, c.n_points, c.n_skip, c.tol)?;
    let rows: Vec<Vec<String>> = set.points.iter().map(|p| vec![num(p.x), num(p.y)]).collect();
    let file = write_csv(cfg, "poincare.csv", &["x", "y"], &rows)?;
    let summary = format!(
        "{} points, max |alpha| = {:.6} (bound {:.6})",
        set.points.len(),
        set.max_radius(),
        crate::classical::amplitude_bound(&cfg.params)
    );
    Ok((vec![file], summary))
}

fn lyapunov_options(cfg: &RunConfig, params: &crate::SystemParams) -> Result<LyapunovOptions> {
    let c = &cfg.classical;
    let period = params.modulation_period()?;
    let transient = c.n_skip as f64 * period;
    Ok(LyapunovOptions {
        t_total: transient + c.lyapunov_periods as f64 * period,
        transient,
        renorm_period: period,
        tol: c.tol,
    })
}

fn run_lyapunov(cfg: &RunConfig) -> Result<(Vec<OutputFile>, String)> {
    let est = lyapunov_max(&cfg.params, cfg.alpha0(), &lyapunov_options(cfg, &cfg.params)?)?;
    let regime = Regime::classify(est.lambda_max, cfg.params.gamma);
    let row = vec![num(est.lambda_max), est.n_renorm.to_string(), est.converged.to_string(), regime.as_str().into()];
    let file = write_csv(cfg, "lyapunov.csv", &["lambda_max", "n_renorm", "converged", "regime"], &[row])?;
    let summary = format!("lambda_max = {:.6} ({}, converged: {})", est.lambda_max, regime.as_str(), est.converged);
    Ok((vec![file], summary))
}

fn run_classical(cfg: &RunConfig) -> Result<(Vec<OutputFile>, String)> {
    let c = &cfg.classical;
    let times = uniform_times(c.t0, c.t_end, c.samples);
    let samples = integrate_classical(cfg.alpha0(), c.t0, c.t_end, &cfg.params, c.tol, &times)?;
    let rows: Vec<Vec<String>> = samples.iter().map(|(t, p)| vec![num(*t), num(p.x), num(p.y)]).collect();
    let file = write_csv(cfg, "trajectory.csv", &["t", "x", "y"], &rows)?;
    let max = samples.iter().map(|(_, p)| p.radius()).fold(0.0, f64::max);
    Ok((vec![file], format!("{} samples, max |alpha| = {max:.6}", samples.len())))
}

fn ensemble(cfg: &RunConfig, samples: SampleSpec, workers: Option<usize>) -> Result<EnsembleResult> {
    let q = &cfg.quantum;
    let ens = EnsembleConfig {
        groups: q.groups,
        workers,
        ..EnsembleConfig::new(cfg.trajectory_config(), samples, q.ensemble_size, q.master_seed)
    };
    if q.checkpoint {
        run_ensemble_checkpointed(&ens, &output_path(cfg, "checkpoint.json"), None)
    } else {
        run_ensemble(&ens)
    }
}

fn run_qsd(cfg: &RunConfig, workers: Option<usize>) -> Result<(Vec<OutputFile>, String)> {
    let res = ensemble(cfg, cfg.observation_spec(), workers)?;
    let rows: Vec<Vec<String>> = res
        .sample_times
        .iter()
        .zip(&res.mean_n)
        .map(|(t, m)| vec![num(*t), num(m.mean()), num(m.std_err())])
        .collect();
    let file = write_csv(cfg, "mean_n.csv", &["t", "mean_n", "std_err"], &rows)?;
    let peak = res.mean_n.iter().map(|m| m.mean()).fold(0.0, f64::max);
    let summary = format!(
        "{} trajectories, max ensemble <n> = {peak:.4}, max single-trajectory <n> = {:.4}",
        res.count(),
        res.max_single_mean_n
    );
    Ok((vec![file], summary))
}

#[derive(Serialize)]
struct WignerMeta {
    time: f64,
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    nx: usize,
    ny: usize,
    layout: &'static str,
    normalization: f64,
    normalized: bool,
    negativity_volume: f64,
    entropy: f64,
    mean_n: f64,
}

fn run_wigner(cfg: &RunConfig, workers: Option<usize>) -> Result<(Vec<OutputFile>, String)> {
    let t = cfg.snapshot_time();
    let res = ensemble(cfg, SampleSpec::default().with_snapshots(vec![t]), workers)?;
    let rho = res.density(0)?;
    let grid = wigner(&rho, &cfg.grid_spec())?;
    let mut text = String::new();
    for j in 0..grid.ny {
        let row: Vec<String> = (0..grid.nx).map(|i| num(grid.at(i, j))).collect();
        writeln!(text, "{}", row.join(",")).unwrap();
    }
    let path = output_path(cfg, "wigner.csv");
    write_file(&path, &text)?;
    let matrix = OutputFile { path, columns: "matrix: row j is y_j ascending, column i is x_i ascending; no header".into() };
    let meta = WignerMeta {
        time: res.snapshot_times[0],
        x_min: grid.x_min,
        x_max: grid.x_max,
        y_min: grid.y_min,
        y_max: grid.y_max,
        nx: grid.nx,
        ny: grid.ny,
        layout: "values[j][i] = W(x_min + i dx, y_min + j dy)",
        normalization: grid.normalization,
        normalized: grid.normalized,
        negativity_volume: negativity_volume(&grid),
        entropy: von_neumann_entropy(&rho)?,
        mean_n: mean_excitation(&rho),
    };
    let meta_path = output_path(cfg, "wigner.meta.toml");
    write_file(&meta_path, &toml::to_string(&meta).map_err(|e| Error::Io(e.to_string()))?)?;
    let summary = format!(
        "t = {:.4}: normalization {:.5}{}, negativity volume {:.5}, S = {:.4}",
        meta.time,
        meta.normalization,
        if grid.normalized { "" } else { " (grid too small)" },
        meta.negativity_volume,
        meta.entropy
    );
    Ok((vec![matrix, OutputFile { path: meta_path, columns: "metadata".into() }], summary))
}

fn run_entropy(cfg: &RunConfig, workers: Option<usize>) -> Result<(Vec<OutputFile>, String)> {
    let q = &cfg.quantum;
    let times: Vec<f64> = (0..=q.entropy_samples).map(|k| q.t_end * k as f64 / q.entropy_samples as f64).collect();
    let res = ensemble(cfg, SampleSpec::default().with_snapshots(times), workers)?;
    let series = entropy_series(&res)?;
    let mut rows = Vec::with_capacity(series.len());
    for (k, (t, s)) in res.snapshot_times.iter().zip(&series).enumerate() {
        let n = mean_excitation(&res.density(k)?);
        rows.push(vec![num(*t), num(s.value), num(s.std_err), num(n)]);
    }
    let file = write_csv(cfg, "entropy.csv", &["t", "entropy", "std_err", "mean_n"], &rows)?;
    let peak = series.iter().map(|s| s.value).fold(0.0, f64::max);
    Ok((vec![file], format!("{} samples, max S = {peak:.4}", series.len())))
}

fn run_scan(cfg: &RunConfig, workers: Option<usize>) -> Result<(Vec<OutputFile>, String)> {
    let s = &cfg.scan;
    let points: Vec<crate::SystemParams> = s.values.iter().map(|&v| s.parameter.apply(cfg.params, v)).collect();
    let lyap = if s.lyapunov {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.unwrap_or(0))
            .build()
            .map_err(|e| crate::error::invalid("workers", e.to_string()))?;
        let est: Vec<_> = pool.install(|| {
            points
                .par_iter()
                .map(|p| lyapunov_options(cfg, p).and_then(|o| lyapunov_max(p, cfg.alpha0(), &o)))
                .collect::<Result<Vec<_>>>()
        })?;
        Some(est)
    } else {
        None
    };
    let mut entropy = Vec::new();
    if s.entropy {
        let q = &cfg.quantum;
        for p in &points {
            let opts = PeriodEntropyOptions {
                frame: q.frame,
                t_start: s.t_start,
                dt: q.dt,
                master_seed: q.master_seed,
                groups: q.groups,
                workers,
                ..PeriodEntropyOptions::new(q.dim, q.ensemble_size, s.period_samples)
            };
            entropy.push(min_entropy_over_period(p, &opts)?);
        }
    }
    let mut header = vec![s.parameter.name()];
    if s.lyapunov {
        header.extend(["lambda_max", "converged", "regime"]);
    }
    if s.entropy {
        header.extend(["min_entropy", "min_entropy_std_err", "min_entropy_time"]);
    }
    let mut rows = Vec::with_capacity(points.len());
    for (k, &v) in s.values.iter().enumerate() {
        let mut row = vec![num(v)];
        if let Some(l) = &lyap {
            let regime = Regime::classify(l[k].lambda_max, points[k].gamma);
            row.extend([num(l[k].lambda_max), l[k].converged.to_string(), regime.as_str().to_string()]);
        }
        if let Some(e) = entropy.get(k) {
            row.extend([num(e.value), num(e.std_err), num(e.time)]);
        }
        rows.push(row);
    }
    let file = write_csv(cfg, "scan.csv", &header, &rows)?;
    Ok((vec![file], format!("{} scan points over {}", rows.len(), s.parameter.name())))
}
