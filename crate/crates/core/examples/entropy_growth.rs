//! Von Neumann entropy of the ensemble state versus time for a weak, a
//! chaotic-range and a strong second drive, and the minimum over one period.
//!
//! `cargo run --release --example entropy_growth [trajectories]`

use driven_kerr::analysis::{entropy_series, min_entropy_over_period, PeriodEntropyOptions};
use driven_kerr::qsd::{run_ensemble, EnsembleConfig, SampleSpec, TrajectoryConfig};
use driven_kerr::SystemParams;

fn main() -> driven_kerr::Result<()> {
    let size: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(40);
    let t_end = 6.0;
    let times: Vec<f64> = (1..=12).map(|k| 0.5 * k as f64).collect();
    for (omega2, dim) in [(1.0, 50), (10.2, 50), (20.0, 80)] {
        let p = SystemParams::strong_kerr().with_omega2(omega2);
        let traj = TrajectoryConfig::new(p, dim, t_end);
        let cfg = EnsembleConfig { groups: 10, ..EnsembleConfig::new(traj, SampleSpec::default().with_snapshots(times.clone()), size, 9) };
        let res = run_ensemble(&cfg)?;
        let s = entropy_series(&res)?;
        let line: Vec<String> = s.iter().map(|e| format!("{:.2}", e.value)).collect();
        println!("omega2 = {omega2:5.1}: S(t = 0.5..6) = {}", line.join(" "));
    }
    let p = SystemParams::strong_kerr();
    let opts = PeriodEntropyOptions { groups: 10, ..PeriodEntropyOptions::new(50, size, 4) };
    let m = min_entropy_over_period(&p, &opts)?;
    println!("minimum over one period from t = 10: S = {:.3} +- {:.3} at t = {:.3}", m.value, m.std_err, m.time);
    Ok(())
}
