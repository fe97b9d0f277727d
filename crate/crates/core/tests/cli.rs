use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use formc::runtime::CsrMatrix;

fn formc(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_formc")).args(args).current_dir(cwd).output().expect("formc runs")
}

fn asset(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(rel).display().to_string()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn compile_raw_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout(&formc(&["compile", &asset("forms/Mass.form"), "--format", "raw", "-o", "-"], dir.path()));
    assert!(text.starts_with("formc-raw 1\n"));
    assert_eq!(text.lines().filter(|l| l.starts_with("e ")).count(), 9);
}

#[test]
fn compile_c_default_output_name() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&formc(&["compile", &asset("forms/Poisson.form"), "--form", "a"], dir.path()));
    let c = std::fs::read_to_string(dir.path().join("Poisson.c")).unwrap();
    assert!(c.contains("void eval(double block[], const affine_map_3D* map)"));
    assert_eq!(c.lines().filter(|l| l.trim_start().starts_with("block[")).count(), 400);
}

#[test]
fn compile_every_form_into_one_c_file() {
    let dir = tempfile::tempdir().unwrap();
    let c = stdout(&formc(&["compile", &asset("forms/Poisson.form"), "-o", "-"], dir.path()));
    assert!(c.contains("void eval_a(") && c.contains("void eval_L("));
    let raw = formc(&["compile", &asset("forms/Poisson.form"), "--format", "raw", "-o", "-"], dir.path());
    assert_eq!(raw.status.code(), Some(1));
}

#[test]
fn assemble_paths_agree() {
    let dir = tempfile::tempdir().unwrap();
    let mut matrices = Vec::new();
    for path in ["tensor", "quadrature"] {
        let out = dir.path().join(format!("{path}.mtx"));
        let args = ["assemble", &asset("forms/NavierStokes.form"), "unit:2:3", "--path", path, "-o", out.to_str().unwrap()];
        stdout(&formc(&args, dir.path()));
        matrices.push(CsrMatrix::from_matrix_market(&std::fs::read_to_string(out).unwrap()).unwrap());
    }
    assert_eq!(matrices[0].rows(), 2 * 49);
    for (r, c, v) in matrices[0].entries() {
        assert!((v - matrices[1].get(r, c)).abs() < 1e-10, "({r},{c})");
    }
}

#[test]
fn assemble_mesh_file_and_load_vector() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout(&formc(&["assemble", &asset("forms/PoissonP1.form"), &asset("meshes/square2.mesh"), "--form", "L", "-o", "-"], dir.path()));
    assert!(text.starts_with("%%MatrixMarket matrix array real general"));
    let values: Vec<f64> = text.lines().skip(2).map(|l| l.trim().parse().unwrap()).collect();
    assert_eq!(values.len(), 4);
    assert!((values.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn tabulate_and_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let table = stdout(&formc(&["tabulate", "triangle", "2"], dir.path()));
    assert!(table.lines().count() > 6);
    let estimate = stdout(&formc(&["estimate", "mass", "--d", "2", "--qmax", "3"], dir.path()));
    assert_eq!(estimate.lines().count(), 4);
}

#[test]
fn failures_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(formc(&["compile", "missing.form"], dir.path()).status.code(), Some(1));
    assert_eq!(formc(&["compile"], dir.path()).status.code(), Some(2));
    assert_eq!(formc(&["assemble", &asset("forms/Mass.form"), "unit:9:2"], dir.path()).status.code(), Some(1));
    let bad = dir.path().join("bad.form");
    std::fs::write(&bad, "a = v*u*dx\n").unwrap();
    let out = formc(&["compile", bad.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("formc: "));
}
