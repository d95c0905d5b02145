use std::path::Path;
use std::process::Command;

use driven_kerr::config::{parse_config, Command as RunCommand};
use driven_kerr::runner::run;

const BIN: &str = env!("CARGO_BIN_EXE_driven-kerr");

const BASE: &str = "[params]\nchi = 0.7\ndelta = -15.0\ndelta_mod = 5.0\nomega1 = 10.2\nomega2 = 10.2\n";

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn invoke(args: &[&str]) -> std::process::Output {
    Command::new(BIN).args(args).output().unwrap()
}

#[test]
fn poincare_writes_requested_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &format!("{BASE}[classical]\nn_points = 300\nn_skip = 20\n"));
    let out = dir.path().join("run");
    let o = invoke(&["poincare", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("run.poincare.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "x,y");
    assert_eq!(lines.len(), 301);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 2));
    let manifest: toml::Table = std::fs::read_to_string(dir.path().join("run.manifest.toml")).unwrap().parse().unwrap();
    assert_eq!(manifest["command"].as_str(), Some("poincare"));
    assert_eq!(manifest["config"]["params"]["gamma"].as_float(), Some(1.0));
}

#[test]
fn exit_codes_by_category() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", &BASE.replace("delta_mod = 5.0", "delta_mod = 0.0"));
    let o = invoke(&["poincare", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("delta_mod"));

    let typed = write(dir.path(), "typed.toml", &BASE.replace("omega2 = 10.2", "omega2 = \"abc\""));
    let o = invoke(&["lyapunov", "--config", typed.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("omega2"));

    let o = invoke(&["poincare", "--config", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(5));

    let blocker = write(dir.path(), "file", "");
    let ok = write(dir.path(), "ok.toml", &format!("{BASE}[classical]\nn_points = 5\nn_skip = 1\n"));
    let o = invoke(&["poincare", "--config", ok.to_str().unwrap(), "--out", blocker.join("x").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(5));

    let tight = write(
        dir.path(),
        "tight.toml",
        &format!("{BASE}[quantum]\ndim = 6\ndt = 1e-3\nt_end = 1.0\nensemble_size = 2\ncheckpoint = false\n"),
    );
    let o = invoke(&["qsd-ensemble", "--config", tight.to_str().unwrap(), "--out", dir.path().join("t").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn ensemble_output_is_byte_identical_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "q.toml",
        "[params]\nchi = 0.7\ndelta = -4.0\ndelta_mod = 5.0\nomega1 = 1.5\nomega2 = 1.0\n\
         [quantum]\ndim = 16\ndt = 1e-3\nt_end = 1.5\nensemble_size = 24\ngroups = 4\nsnapshot_time = 1.3\n",
    );
    let mut files = Vec::new();
    for (k, workers) in ["1", "3", "1"].iter().enumerate() {
        let out = dir.path().join(format!("r{k}"));
        for cmd in ["qsd-ensemble", "entropy", "wigner"] {
            let o = invoke(&[cmd, "--config", cfg.to_str().unwrap(), "--seed", "9", "--workers", workers, "--out", out.to_str().unwrap()]);
            assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        }
        let read = |s: &str| std::fs::read(dir.path().join(format!("r{k}.{s}"))).unwrap();
        files.push([read("mean_n.csv"), read("entropy.csv"), read("wigner.csv"), read("wigner.meta.toml")]);
        assert!(!dir.path().join(format!("r{k}.checkpoint.json")).exists());
    }
    assert_eq!(files[0], files[1]);
    assert_eq!(files[0], files[2]);
}

#[test]
fn scan_has_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{BASE}[quantum]\ndim = 20\ndt = 5e-4\nensemble_size = 4\ngroups = 2\n\
         [scan]\nparameter = \"omega2\"\nvalues = [0.5, 1.0]\nlyapunov = true\nentropy = false\n\
         [classical]\nlyapunov_periods = 110\nn_skip = 20\n[output]\nprefix = \"{}\"\n",
        dir.path().join("s").display()
    );
    let cfg = parse_config(&text, RunCommand::Scan).unwrap();
    let report = run(RunCommand::Scan, &cfg, Some(1)).unwrap();
    let csv = std::fs::read_to_string(&report.files[0].path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "omega2,lambda_max,converged,regime");
    assert_eq!(lines.len(), 3);
}

#[test]
fn recipes_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("recipes");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let name = path.file_stem().unwrap().to_str().unwrap();
        let cmd = match name {
            "fig1a" | "fig1b" | "fig1c" => RunCommand::Poincare,
            "fig2a" | "fig2b" => RunCommand::QsdEnsemble,
            "fig2c" => RunCommand::ClassicalTrajectory,
            "fig6a" | "fig6b" | "fig6c" => RunCommand::Entropy,
            "fig7a" | "fig7b" => RunCommand::Scan,
            _ => RunCommand::Wigner,
        };
        parse_config(&text, cmd).unwrap_or_else(|e| panic!("{name}: {e}"));
        n += 1;
    }
    assert_eq!(n, 18);
}
