use std::path::Path;
use std::process::{Command, Output};

fn magnetoatom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magnetoatom"))
        .args(args)
        .env("MAGNETOATOM_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn pt_coeffs_prints_exact_limits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "ps.cfg", "m2 = 1\n");
    let out = magnetoatom(&["pt-coeffs", "--config", &cfg]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("order,coefficient [Hartree"));
    for line in ["E_00,-1", "E_20,3/8", "E_40,-159/512", "E_22,-21/128", "E_42,-3093/8192", "E_44,17877/131072"] {
        assert!(text.lines().any(|l| l == line), "{line} missing in\n{text}");
    }
}

#[test]
fn identical_runs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "h.cfg", "B_eff = 1\n");
    let a = magnetoatom(&["table2", "--config", &cfg, "--b-list", "1", "--p-list", "0,20", "--restarts", "2"]);
    let b = magnetoatom(&["table2", "--config", &cfg, "--b-list", "1", "--p-list", "0,20", "--restarts", "2"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.lines().next().unwrap().contains("[Hartree]"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn output_and_manifest_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "h.cfg", "B_eff = 1\nP_eff = 50\n");
    let csv = dir.path().join("v.csv");
    let manifest = dir.path().join("run.manifest");
    let out = magnetoatom(&[
        "potential",
        "--config",
        &cfg,
        "--points",
        "50",
        "--output",
        csv.to_str().unwrap(),
        "--manifest",
        manifest.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let profile = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(profile.lines().count(), 51);
    assert!(profile.starts_with("x [a.u.],V_eff [Hartree]"));
    let m = std::fs::read_to_string(&manifest).unwrap();
    assert!(m.contains("subcommand=potential"), "{m}");
    assert!(m.contains("config.P_eff=50"), "{m}");
}

#[test]
fn oracle_on_a_small_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "h.cfg", "B_eff = 1\n");
    let out = magnetoatom(&["oracle", "--config", &cfg, "--grid", "64", "--levels", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let last = text.lines().last().unwrap();
    assert!(last.starts_with("extrapolated,"));
    let e: f64 = last.split(',').nth(3).unwrap().parse().unwrap();
    assert!((e + 1.4588).abs() < 0.02, "{e}");
}

#[test]
fn exit_codes() {
    // usage errors
    assert_eq!(magnetoatom(&[]).status.code(), Some(2));
    assert_eq!(magnetoatom(&["pt-coeffs"]).status.code(), Some(2));
    assert_eq!(magnetoatom(&["pt-coeffs", "--config", ""]).status.code(), Some(2));
    assert_eq!(magnetoatom(&["oracle", "--config", "x", "--levels", "3"]).status.code(), Some(2));

    // module errors
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("none.cfg");
    assert_eq!(magnetoatom(&["pt-coeffs", "--config", missing.to_str().unwrap()]).status.code(), Some(1));
    let bad = write(dir.path(), "bad.cfg", "B_eff = -1\n");
    let out = magnetoatom(&["pt-coeffs", "--config", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));
    let below = write(dir.path(), "below.cfg", "B_eff = 1\nP_eff = 10\n");
    let out = magnetoatom(&["oracle", "--config", &below, "--grid", "16", "--levels", "1", "--d", "1"]);
    assert_eq!(out.status.code(), Some(1));

    assert_eq!(magnetoatom(&["--version"]).status.code(), Some(0));
}

#[test]
fn thread_variable_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_magnetoatom"))
        .args(["pt-coeffs", "--config", "/dev/null"])
        .env("MAGNETOATOM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
