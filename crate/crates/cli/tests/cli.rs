use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn effham(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_effham"))
        .args(args)
        .current_dir(dir)
        .env_remove("EFFHAM_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_matrix(dir: &Path, name: &str, dim: usize, f: impl Fn(usize, usize) -> (f64, f64)) {
    let entries: Vec<[f64; 2]> = (0..dim * dim).map(|i| f(i / dim, i % dim)).map(|(a, b)| [a, b]).collect();
    let text = serde_json::json!({ "dim": dim, "entries": entries }).to_string();
    std::fs::write(dir.join(name), text).unwrap();
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn counts_reproduce_the_table() {
    let dir = TempDir::new().unwrap();
    let out = effham(&["counts", "--check-table1"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for row in ["3,4,2", "4,11,4", "7,120,8"] {
        assert!(text.lines().any(|l| l == row), "{text}");
    }
}

#[test]
fn diagonal_input_needs_no_rotations() {
    let dir = TempDir::new().unwrap();
    write_matrix(dir.path(), "d.json", 3, |j, k| if j == k { (j as f64, 0.0) } else { (0.0, 0.0) });
    let out = effham(&["diag", "d.json", "--method", "npad"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("rotations: 0"));
}

#[test]
fn second_order_rswt_on_two_levels() {
    let dir = TempDir::new().unwrap();
    write_matrix(dir.path(), "m.json", 2, |j, k| match (j, k) {
        (0, 0) => (1.0, 0.0),
        (1, 1) => (-1.0, 0.0),
        _ => (0.1, 0.0),
    });
    let out = effham(&["diag", "m.json", "--method", "rswt", "--order", "2", "--out", "res"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("res/result.json")).unwrap()).unwrap();
    let eig: Vec<f64> = v["eigenvalues"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!((eig[0] + 1.005).abs() < 1e-12 && (eig[1] - 1.005).abs() < 1e-12, "{eig:?}");
}

#[test]
fn npad_matches_oracle_on_dense_input() {
    let dir = TempDir::new().unwrap();
    let entry = |j: usize, k: usize| -> (f64, f64) {
        let (a, b) = (j.min(k) as f64, j.max(k) as f64);
        let re = (1.3 * a + 0.7 * b + 0.2).sin();
        let im = if j == k { 0.0 } else { (0.9 * a - 1.1 * b).cos() };
        (re, if j <= k { im } else { -im })
    };
    write_matrix(dir.path(), "r.json", 8, entry);
    let out = effham(&["diag", "r.json", "--method", "npad", "--tol", "1e-12"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let diff: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("max |diff| vs oracle: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(diff < 1e-10, "{text}");
}

#[test]
fn exit_codes_separate_input_and_computation_errors() {
    let dir = TempDir::new().unwrap();
    write_matrix(dir.path(), "nh.json", 2, |j, k| if j < k { (0.3, 0.0) } else { (0.0, 0.0) });
    let out = effham(&["diag", "nh.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not Hermitian"));

    write_matrix(dir.path(), "deg.json", 2, |j, k| if j == k { (1.0, 0.0) } else { (0.1, 0.0) });
    let out = effham(&["diag", "deg.json", "--method", "rswt"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate gap"));

    assert_eq!(effham(&["diag", "missing.json"], dir.path()).status.code(), Some(2));
    assert_eq!(effham(&["fig3", "--grid", "detuning=0:1"], dir.path()).status.code(), Some(2));

    let out = Command::new(env!("CARGO_BIN_EXE_effham"))
        .args(["counts"])
        .env("EFFHAM_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fig3_is_deterministic_and_finite_off_the_swaps() {
    let dir = TempDir::new().unwrap();
    let args = ["fig3", "--check", "--grid", "detuning=-1:1.2:111"];
    let a = effham(&[&args[..], &["--out", "a"]].concat(), dir.path());
    let b = effham(&[&args[..], &["--out", "b"]].concat(), dir.path());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
    let ca = std::fs::read(dir.path().join("a/fig3.csv")).unwrap();
    assert_eq!(ca, std::fs::read(dir.path().join("b/fig3.csv")).unwrap());
    assert_eq!(
        std::fs::read(dir.path().join("a/fig3.svg")).unwrap(),
        std::fs::read(dir.path().join("b/fig3.svg")).unwrap()
    );
    let (header, rows) = read_csv(&dir.path().join("a/fig3.csv"));
    for col in ["err_two_rotation", "err_kerr_approx", "err_two_level", "err_leading_perturbation", "eps1_rel"] {
        assert!(header.iter().any(|h| h == col), "{col}");
    }
    let idx = |name: &str| header.iter().position(|h| h == name).unwrap();
    for r in &rows {
        let x = r[idx("detuning")];
        if (x.abs() - 0.3).abs() > 0.06 {
            assert!(r[idx("err_two_rotation")].is_finite(), "x = {x}");
            assert!(r[idx("err_two_level")].is_finite(), "x = {x}");
        }
    }
}

#[test]
fn fig4_masks_resonances_and_checks_the_dip() {
    let dir = TempDir::new().unwrap();
    let out = effham(
        &["fig4", "--check", "--grid", "sum=0:0.4:3", "--grid", "diff=0:0.4:3", "--grid", "cut=-0.9:-0.2:29"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("fig4_grid.csv"));
    let z4 = header.iter().position(|h| h == "abs_zeta4").unwrap();
    // Delta_+ = Delta_- puts qubit 2 on the resonator.
    let on_line = rows.iter().find(|r| r[0] == 0.2 && r[1] == 0.2).unwrap();
    assert!(on_line[z4].is_nan());
    let (cut_header, _) = read_csv(&dir.path().join("fig4_cut.csv"));
    assert_eq!(cut_header, ["sum", "numeric", "zeta4", "zeta6", "npad8", "disp"]);
    assert!(dir.path().join("fig4_zeta4.svg").exists());
}

#[test]
fn fig5_columns() {
    let dir = TempDir::new().unwrap();
    let out = effham(&["fig5", "--grid", "Omega=0:0.06:7"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = read_csv(&dir.path().join("fig5.csv"));
    assert_eq!(&header[..3], ["Omega", "analytical", "numeric"]);
    assert_eq!(rows.len(), 7);
    for r in &rows[1..4] {
        assert!(((r[1] - r[2]) / r[2]).abs() < 0.02);
    }
}

#[test]
fn fig7_zero_moves_inward_with_coupling() {
    let dir = TempDir::new().unwrap();
    let out = effham(&["fig7", "--check", "--grid", "cut=-0.9:-0.2:15"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (_, rows) = read_csv(&dir.path().join("fig7_zeros.csv"));
    assert_eq!(rows.len(), 3);
    assert!(rows[0][1].abs() > rows[1][1].abs() && rows[1][1].abs() > rows[2][1].abs());
}

#[test]
fn emitted_two_rotation_expression_matches_numeric_pipeline() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("p.json"), r#"{"omega1": 5.2, "omega2": 5.0, "alpha1": -0.3, "alpha2": -0.3, "g1": 0.1, "g2": 0.12}"#).unwrap();
    let out = effham(&["emit-expr", "two-rotation", "--config", "p.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let field = |name: &str| -> f64 {
        text.lines().find_map(|l| l.strip_prefix(name)).unwrap().trim().parse().unwrap()
    };
    let (value, numeric) = (field("value:"), field("numeric:"));
    assert!((value - numeric).abs() <= 1e-12 * numeric.abs());
    assert!(field("node_count:") > 10.0);
    assert!(text.contains("g2"));
}

#[test]
fn graph_json_export_parses() {
    let dir = TempDir::new().unwrap();
    let out = effham(&["emit-expr", "zeta4", "--format", "graph-json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let first = stdout(&out).lines().next().unwrap().to_string();
    let v: Value = serde_json::from_str(&first).unwrap();
    assert!(v["nodes"].as_array().is_some_and(|n| !n.is_empty()));
}
