//! Largest Lyapunov exponent versus the second drive amplitude, and bisection
//! of the sign changes that bound the chaotic window.
//!
//! `cargo run --release --example chaos_window`

use driven_kerr::classical::{bisect_sign_change, lyapunov_max, LyapunovOptions, Regime};
use driven_kerr::SystemParams;
use num_complex::Complex64;

fn lambda(p: &SystemParams) -> driven_kerr::Result<f64> {
    let opts = LyapunovOptions::for_params(p, 300)?;
    Ok(lyapunov_max(p, Complex64::new(0.0, 0.0), &opts)?.lambda_max)
}

fn main() -> driven_kerr::Result<()> {
    let base = SystemParams::strong_kerr();
    println!("omega2   lambda_max  regime");
    for k in 0..=19 {
        let o2 = 1.0 + k as f64;
        let l = lambda(&base.with_omega2(o2))?;
        println!("{o2:6.2}  {l:+10.4}  {}", Regime::classify(l, base.gamma).as_str());
    }
    let f = |o2: f64| lambda(&base.with_omega2(o2));
    match bisect_sign_change(1.0, 10.2, 8, f) {
        Ok((lo, hi)) => println!("onset bracket [{lo:.3}, {hi:.3}]"),
        Err(e) => println!("onset: {e}"),
    }
    match bisect_sign_change(10.2, 20.0, 8, f) {
        Ok((lo, hi)) => println!("disappearance bracket [{lo:.3}, {hi:.3}]"),
        Err(e) => println!("disappearance: {e}"),
    }
    Ok(())
}
