//! Wigner function of an ensemble density matrix at a stroboscopic time,
//! with its normalization and negative volume.
//!
//! `cargo run --release --example wigner_snapshot [omega2] [trajectories] [out.csv]`

use driven_kerr::analysis::{negativity_volume, von_neumann_entropy, wigner, GridSpec};
use driven_kerr::qsd::{run_ensemble, EnsembleConfig, SampleSpec, TrajectoryConfig};
use driven_kerr::SystemParams;

fn main() -> driven_kerr::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let omega2: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(10.2);
    let size: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(40);
    let p = SystemParams::strong_kerr().with_omega2(omega2);
    let dim = 50;
    let period = p.modulation_period()?;
    let t = (10.0 / period).round() * period;
    let traj = TrajectoryConfig::new(p, dim, t);
    let res = run_ensemble(&EnsembleConfig::new(traj, SampleSpec::default().with_snapshots(vec![t]), size, 3))?;
    let rho = res.density(0)?;
    let spec = GridSpec::default_for(&p, dim).with_resolution(128, 128);
    let grid = wigner(&rho, &spec)?;
    println!("omega2 = {omega2}, t = {t:.4}, {size} trajectories");
    println!(
        "grid [{:.2}, {:.2}]^2 at {}x{}: normalization {:.4}, min W {:.4}, max W {:.4}",
        grid.x_min,
        grid.x_max,
        grid.nx,
        grid.ny,
        grid.normalization,
        grid.min(),
        grid.max()
    );
    println!("negativity volume {:.4e}, entropy {:.4}", negativity_volume(&grid), von_neumann_entropy(&rho)?);
    if let Some(path) = args.get(3) {
        let mut text = String::new();
        for j in 0..grid.ny {
            let row: Vec<String> = (0..grid.nx).map(|i| format!("{:.16e}", grid.at(i, j))).collect();
            text.push_str(&row.join(","));
            text.push('\n');
        }
        std::fs::write(path, text)?;
        println!("wrote {path}");
    }
    Ok(())
}
