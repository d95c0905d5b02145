//! Stroboscopic Poincaré section of the classical amplitude equation.
//!
//! `cargo run --release --example poincare_section [strong|intermediate|weak] [points] [out.csv]`

use driven_kerr::classical::{amplitude_bound, poincare_section, DEFAULT_SKIP_PERIODS, DEFAULT_TOL};
use driven_kerr::SystemParams;
use num_complex::Complex64;

fn main() -> driven_kerr::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let params = match args.get(1).map(String::as_str) {
        Some("intermediate") => SystemParams::intermediate_kerr(),
        Some("weak") => SystemParams::weak_kerr(),
        _ => SystemParams::strong_kerr(),
    };
    let n: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(5000);
    let set = poincare_section(&params, Complex64::new(0.0, 0.0), 0.0, n, DEFAULT_SKIP_PERIODS, DEFAULT_TOL)?;
    println!("{params:?}");
    println!(
        "{} points after {} periods: max |alpha| = {:.4} (bound {:.4}), diameter {:.4}",
        set.points.len(),
        set.skipped,
        set.max_radius(),
        amplitude_bound(&params),
        set.diameter()
    );
    if let Some(path) = args.get(3) {
        let mut text = String::from("x,y\n");
        for p in &set.points {
            text.push_str(&format!("{:.16e},{:.16e}\n", p.x, p.y));
        }
        std::fs::write(path, text)?;
        println!("wrote {path}");
    }
    Ok(())
}
