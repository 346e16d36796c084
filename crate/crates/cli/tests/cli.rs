use std::path::Path;
use std::process::{Command, Output};

fn sbspline(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sbspline")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generated_mesh_checks_and_solves() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("pentagon.json");
    let out = sbspline(&["mesh", "gen", "--shape", "vgon", "--valence", "5", "--out", path(&mesh)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let out = sbspline(&["check", "--mesh", path(&mesh), "--samples", "100"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS"));

    let result = dir.path().join("solution.json");
    let out = sbspline(&["solve", "--mesh", path(&mesh), "--problem", "biharmonic", "--out", path(&result)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&result).unwrap()).unwrap();
    assert!(json.to_string().contains("l2"));
}

#[test]
fn mixed_splines_fail_the_c1_check() {
    let out = sbspline(&["check", "--shape", "vgon", "--valence", "5", "--mixed", "--samples", "50"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn biharmonic_in_mixed_splines_is_refused() {
    let out = sbspline(&["solve", "--shape", "vgon", "--mixed", "--problem", "biharmonic"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn usage_and_input_errors_exit_with_two() {
    assert_eq!(code(&sbspline(&["solve", "--shape", "nonsense"])), 2);
    assert_eq!(code(&sbspline(&["check", "--shape", "vgon", "--valence", "4"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&sbspline(&["check", "--mesh", path(&missing)])), 2);
}

#[test]
fn export_writes_legacy_vtk() {
    let dir = tempfile::tempdir().unwrap();
    let vtk = dir.path().join("weight.vtk");
    let out = sbspline(&["export", "--shape", "vgon", "--field", "weight:wB", "--samples", "3", "--out", path(&vtk)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&vtk).unwrap();
    assert!(text.starts_with("# vtk DataFile"));
}

#[test]
fn converge_writes_a_rate_table() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rates.csv");
    let out = sbspline(&[
        "converge", "--problem", "poisson", "--shape", "vgon", "--valence", "3", "--levels", "2", "--report", path(&csv),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("level,h,dof"));
    assert_eq!(text.lines().count(), 3);
}
