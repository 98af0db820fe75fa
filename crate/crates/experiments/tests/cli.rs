use std::path::Path;
use std::process::{Command, Output};

fn adacomb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adacomb"))
        .args(args)
        .env("ADACOMB_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn list_presets_names_every_experiment() {
    let out = adacomb(&["list-presets"]);
    assert!(out.status.success());
    let stdout = text(&out.stdout);
    for id in adacomb_experiments::ExperimentId::ALL {
        assert!(stdout.lines().any(|l| l.starts_with(id.name())), "{id} missing:\n{stdout}");
    }
}

#[test]
fn validate_reports_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        "experiment = \"convergence\"\nruns = 10\neta = 1.5\nmu1 = -1\nspeed = 3\n",
    );
    let out = adacomb(&["validate", "--config", &cfg]);
    assert!(!out.status.success());
    let stderr = text(&out.stderr);
    assert!(stderr.contains("eta: η out of [0,1), got 1.5"), "{stderr}");
    assert!(stderr.contains("speed"), "{stderr}");
}

#[test]
fn validate_warns_on_default_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "ok.toml", "experiment = \"transfer\"\n");
    let out = adacomb(&["validate", "--config", &cfg]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert!(text(&out.stderr).contains("warning"));
    assert!(text(&out.stdout).contains("100 runs"));
}

#[test]
fn unknown_preset_fails() {
    let out = adacomb(&["validate", "--config", "preset:nope"]);
    assert!(!out.status.success());
    assert!(text(&out.stderr).contains("unknown preset"));
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "small.toml",
        "experiment = \"lowcost\"\nruns = 3\nseed = 11\nhorizon = 3000\ntail = 1000\nbits = [12, 26]\noutput = \"lc\"\n",
    );
    let mut files = Vec::new();
    for k in 0..2 {
        let out_dir = dir.path().join(format!("out{k}"));
        let out = adacomb(&["run", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
        assert!(out.status.success(), "{}", text(&out.stderr));
        let a = std::fs::read(out_dir.join("lc.csv")).unwrap();
        let b = std::fs::read(out_dir.join("lc_summary.csv")).unwrap();
        files.push((a, b));
    }
    assert_eq!(files[0], files[1]);
    assert!(files[0].0.starts_with(b"n,"));
}

#[test]
fn cli_overrides_runs_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t.toml", "experiment = \"lowcost\"\nruns = 2\nhorizon = 2000\ntail = 500\nbits = [16]\n");
    let run = |seed: &str, sub: &str| {
        let out_dir = dir.path().join(sub);
        let out = adacomb(&["run", "--config", &cfg, "--out", out_dir.to_str().unwrap(), "--seed", seed]);
        assert!(out.status.success(), "{}", text(&out.stderr));
        std::fs::read(out_dir.join("lowcost_summary.csv")).unwrap()
    };
    assert_ne!(run("1", "a"), run("2", "b"));
}
