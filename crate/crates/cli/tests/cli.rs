use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use matterwave_core::states::io::read_field_binary;

const MINIMAL: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/minimal.toml");

fn matterwave(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_matterwave"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn listing(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    names
}

#[test]
fn minimal_run_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let out = matterwave(&["run", MINIMAL], dir);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (a, b) = (a.join("scenario"), b.join("scenario"));
    let files = listing(&a);
    assert!(files.iter().any(|f| f.starts_with("slice0_z_t00")), "{files:?}");
    assert_eq!(files, listing(&b));
    for f in &files {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn invalid_config_reports_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "[params]\nbeam_waist = -1.0\n[state]\nkind = \"hermite-gauss\"\nn = 1\nm = 1\n[run]\ntimes = [0.25]\n").unwrap();
    let out = matterwave(&["run", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains("beam_waist"), "{err}");
}

#[test]
fn figure_one_writes_density() {
    let tmp = tempfile::tempdir().unwrap();
    let out = matterwave(&["figures", "1"], tmp.path());
    assert!(out.status.success());
    let text = fs::read_to_string(tmp.path().join("fig1/density_t00.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("x,y,density"));
    assert_eq!(text.lines().count(), 1 + 161 * 161);
}

#[test]
fn binary_output_reads_back() {
    let tmp = tempfile::tempdir().unwrap();
    let out = matterwave(&["run", MINIMAL, "--format", "binary"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let bytes = fs::read(tmp.path().join("scenario/field_t00.bin")).unwrap();
    let field = read_field_binary(bytes.as_slice()).unwrap();
    assert!((field.norm() - 1.0).abs() < 1e-3, "{}", field.norm());
}

#[test]
fn failed_run_leaves_partial_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("deflect.toml");
    fs::write(
        &cfg,
        r#"name = "deflect"
[state]
kind = "hermite-gauss"
n = 1
m = 1
[force]
kind = "constant"
mu0 = 16.0
[run]
times = [1.0, 0.25]
[[output]]
kind = "density-slice"
normal = "x"
offset = -8.0
"#,
    )
    .unwrap();
    let out = matterwave(&["run", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let files = listing(&tmp.path().join("deflect"));
    assert!(!files.is_empty() && files.iter().all(|f| f.ends_with(".partial")), "{files:?}");
}

#[test]
fn quick_validation_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = matterwave(&["validate", "--quick"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    for line in stdout.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["pass"], true, "{line}");
    }
}
