use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use driven_kerr::config::{load_config, Command};
use driven_kerr::runner::{exit_code, run};

#[derive(Clone, Copy, ValueEnum)]
enum Sub {
    Poincare,
    Lyapunov,
    ClassicalTrajectory,
    QsdEnsemble,
    Wigner,
    Entropy,
    Scan,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Poincare => Command::Poincare,
            Sub::Lyapunov => Command::Lyapunov,
            Sub::ClassicalTrajectory => Command::ClassicalTrajectory,
            Sub::QsdEnsemble => Command::QsdEnsemble,
            Sub::Wigner => Command::Wigner,
            Sub::Entropy => Command::Entropy,
            Sub::Scan => Command::Scan,
        }
    }
}

/// Classical and quantum-trajectory simulations of the two-tone driven Kerr oscillator.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[arg(value_enum)]
    command: Sub,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Master seed for the trajectory ensemble (overrides `quantum.master_seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to all cores. Results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Output path prefix (overrides `output.prefix`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use the publication-scale ensemble size (`quantum.full_ensemble_size`).
    #[arg(long)]
    paper_scale: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = Command::from(cli.command);
    let result = load_config(&cli.config, command).and_then(|mut cfg| {
        if let Some(seed) = cli.seed {
            cfg.quantum.master_seed = seed;
        }
        if let Some(out) = cli.out {
            cfg.output.prefix = out;
        }
        if cli.paper_scale {
            cfg.paper_scale();
        }
        run(command, &cfg, cli.workers)
    });
    match result {
        Ok(report) => {
            println!("{}: {}", command.name(), report.summary);
            for f in &report.files {
                println!("  wrote {}", f.path.display());
            }
            println!("  manifest {}", report.manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
