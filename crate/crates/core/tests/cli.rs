//! Exit codes and replay behaviour of the `tvls` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tvls::expcli::{RunManifest, MANIFEST_NAME};

fn tvls(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tvls")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn schema_lists_every_experiment_key() {
    let o = tvls(&["schema"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for key in ["max_iter", "alphas", "c_opening_deg", "n_angles", "eta", "regime"] {
        assert!(text.contains(key), "{key} missing from schema");
    }
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(code(&tvls(&["--help"])), 0);
    assert_eq!(code(&tvls(&[])), 2);
    assert_eq!(code(&tvls(&["reconstruct", "--config", "x"])), 2);
    assert_eq!(code(&tvls(&["deblur"])), 2);
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let out = d.join("out").display().to_string();
    let cases = [
        ("unknown.txt", "colour = blue\n"),
        ("malformed.txt", "max_iter 10\n"),
        ("duplicate.txt", "max_iter = 10\nmax_iter = 20\n"),
        ("negative.txt", "h = -1\n"),
        ("mismatch.txt", "experiment = radon\n"),
        ("wrong_experiment_key.txt", "n_angles = 10\n"),
    ];
    for (name, text) in cases {
        let cfg = write_config(d, name, text);
        let o = tvls(&["denoise-boundary", "--config", &cfg, "--output_dir", &out]);
        assert_eq!(code(&o), 2, "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let cfg = write_config(d, "empty.txt", "");
    for eta in ["5", "3.5449077018110318"] {
        let o = tvls(&["convergence-sweep", "--config", &cfg, "--eta", eta, "--output_dir", &out]);
        assert_eq!(code(&o), 2, "eta {eta}");
    }
    let o = tvls(&["deblur", "--config", &cfg, "--no-such-key", "1"]);
    assert_eq!(code(&o), 2);
    let o = tvls(&["deblur", "--config", &cfg, "--max_iter"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn missing_config_file_exits_1() {
    let o = tvls(&["radon", "--config", "/nonexistent/tvls/config.txt"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn run_then_replay_is_bit_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let cfg = write_config(d, "bd.txt", "# small\nh = 1/8\nmax_iter = 300\n");
    let out = d.join("run");
    let o = tvls(&["denoise-boundary", "--config", &cfg, "--emit-plots", "--output_dir", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = out.join(MANIFEST_NAME);
    let m = RunManifest::parse(&fs::read_to_string(&manifest).unwrap()).unwrap();
    assert!(m.is_ok());
    assert!(m.files.iter().any(|f| f.path.starts_with("plots/")));

    let o = tvls(&["replay", "--manifest", manifest.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in &m.files {
        let a = fs::read(out.join(&f.path)).unwrap();
        let b = fs::read(out.join("replay").join(&f.path)).unwrap();
        assert!(a == b, "{} differs", f.path);
    }
}

#[test]
fn replay_reports_a_tampered_digest() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let cfg = write_config(d, "sw.txt", "h = 1/16\nhalf_width = 1.6\nmax_iter = 50\nlevels = 2\n");
    let out = d.join("run");
    assert_eq!(code(&tvls(&["convergence-sweep", "--config", &cfg, "--output_dir", out.to_str().unwrap()])), 0);
    let manifest = out.join(MANIFEST_NAME);
    let text = fs::read_to_string(&manifest).unwrap();
    let line = text.lines().find(|l| l.starts_with("file.u_1.csv")).unwrap();
    let tampered = text.replace(line, "file.u_1.csv = sha256:00");
    fs::write(&manifest, tampered).unwrap();
    let o = tvls(&["replay", "--manifest", manifest.to_str().unwrap(), "--output-dir", d.join("again").to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("u_1.csv"));
}
