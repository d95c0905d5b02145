//! Trajectory-level check of the scaling symmetry
//! `(chi, Delta, Omega) -> (chi/l^2, Delta + chi(1 - 1/l^2), l Omega)`, `alpha -> l alpha`.
//!
//! `cargo run --release --example scaling_symmetry`

use driven_kerr::classical::{integrate_classical, scaling_transform};
use driven_kerr::SystemParams;
use num_complex::Complex64;

fn main() -> driven_kerr::Result<()> {
    let p = SystemParams::strong_kerr();
    let lam = 7f64.sqrt();
    let q = scaling_transform(&p, lam)?;
    println!("original {p:?}\nscaled   {q:?}");
    let times: Vec<f64> = (1..=50).map(f64::from).collect();
    let alpha0 = Complex64::new(0.5, -0.2);
    let a = integrate_classical(alpha0, 0.0, 50.0, &p, 1e-12, &times)?;
    let b = integrate_classical(alpha0 * lam, 0.0, 50.0, &q, 1e-12, &times)?;
    println!("    t   |l alpha(t)|   relative deviation");
    for ((t, pa), (_, pb)) in a.iter().zip(&b).step_by(5) {
        let want = pa.to_complex() * lam;
        println!("{t:5.1}  {:12.6}  {:.2e}", want.norm(), (pb.to_complex() - want).norm() / want.norm());
    }
    Ok(())
}
