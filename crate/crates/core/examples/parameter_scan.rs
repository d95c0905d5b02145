//! Drives the batch runner from code: a scan of the second drive amplitude
//! reporting the classical Lyapunov exponent and the minimal entropy, written
//! as CSV plus a manifest.
//!
//! `cargo run --release --example parameter_scan [out-prefix]`

use driven_kerr::config::{parse_config, Command};
use driven_kerr::runner::run;

const CONFIG: &str = r#"
[params]
chi = 0.7
delta = -15.0
delta_mod = 5.0
omega1 = 10.2
omega2 = 10.2

[quantum]
dim = 80
ensemble_size = 24
groups = 8

[scan]
parameter = "omega2"
values = [1.0, 10.2, 20.0]
period_samples = 2
"#;

fn main() -> driven_kerr::Result<()> {
    let mut cfg = parse_config(CONFIG, Command::Scan)?;
    cfg.output.prefix = std::env::args().nth(1).unwrap_or_else(|| "out/scan".into()).into();
    let report = run(Command::Scan, &cfg, None)?;
    println!("{}", report.summary);
    for f in &report.files {
        println!("{}:\n{}", f.path.display(), std::fs::read_to_string(&f.path)?);
    }
    println!("manifest: {}", report.manifest.display());
    Ok(())
}
