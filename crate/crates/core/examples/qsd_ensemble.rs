//! Ensemble-averaged excitation number from quantum state diffusion
//! trajectories.
//!
//! `cargo run --release --example qsd_ensemble [trajectories] [dim]`

use driven_kerr::qsd::{run_ensemble, EnsembleConfig, SampleSpec, TrajectoryConfig};
use driven_kerr::SystemParams;

fn main() -> driven_kerr::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let size: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(40);
    let dim: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(50);
    let p = SystemParams::strong_kerr();
    let t_end = 6.0;
    let traj = TrajectoryConfig::new(p, dim, t_end);
    let samples = SampleSpec::uniform(t_end, p.modulation_period()?, 5);
    let res = run_ensemble(&EnsembleConfig::new(traj, samples, size, 42))?;
    println!("{size} trajectories, dim {dim}");
    println!("     t      <n>     std err");
    for (t, m) in res.sample_times.iter().zip(&res.mean_n) {
        println!("{t:6.3}  {:7.3}  {:7.3}", m.mean(), m.std_err());
    }
    println!("largest single-trajectory <n>: {:.2}", res.max_single_mean_n);
    Ok(())
}
