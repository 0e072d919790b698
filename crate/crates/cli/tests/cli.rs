use std::path::Path;
use std::process::{Command, Output};

fn qsr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsr")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = qsr(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const BELL: &str = r#"{"labels": ["R", "C"], "dims": [2, 2], "kind": "pure",
  "data": [[0.7071067811865476, 0], [0, 0], [0, 0], [0.7071067811865476, 0]]}"#;

fn column<'a>(csv: &'a str, name: &str) -> Vec<&'a str> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name}"));
    lines.map(|l| l.split(',').nth(i).unwrap()).collect()
}

#[test]
fn gen_writes_a_reloadable_state() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("s.json");
    ok(&["gen", "--kind", "pure", "--dims", "2,2,2,2", "--labels", "R,A,B,C", "--seed", "7", "--out", p(&f)]);
    let first = std::fs::read_to_string(&f).unwrap();
    let s = qsr_core::linalg::io::from_json(&first).unwrap();
    assert_eq!(s.layout().labels(), vec!["R", "A", "B", "C"]);
    assert_eq!(qsr_core::linalg::io::to_json(&s), first);
}

#[test]
fn quantities_of_a_bell_pair() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bell.json");
    std::fs::write(&f, BELL).unwrap();
    let out = ok(&["quantities", "--input", p(&f)]);
    let fid: f64 = column(&out, "fidelity_self")[0].parse().unwrap();
    let imax: f64 = column(&out, "imax")[0].parse().unwrap();
    assert!((fid - 1.0).abs() < 1e-9);
    assert!((imax - 2.0).abs() < 1e-6, "{imax}");
}

#[test]
fn convex_split_on_a_product_state() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("prod.json");
    std::fs::write(&f, r#"{"labels": ["P", "Q"], "dims": [2, 2], "kind": "pure", "data": [[1, 0], [0, 0], [0, 0], [0, 0]]}"#)
        .unwrap();
    let out = ok(&["convexsplit", "--input", p(&f), "--delta", "0.12", "--n-override", "8"]);
    assert_eq!(column(&out, "n"), vec!["8"]);
    assert!(column(&out, "mutual_info")[0].parse::<f64>().unwrap().abs() < 1e-9);
    assert_eq!(column(&out, "bound_3delta_ok"), vec!["true"]);
    assert_eq!(column(&out, "bound_6delta_ok"), vec!["true"]);
}

#[test]
fn validation_errors_exit_with_two() {
    for args in [
        vec!["split", "--eps", "0.5"],
        vec!["convexsplit", "--delta", "0.3"],
        vec!["qeps", "--trials", "0"],
        vec!["quantities", "--input", "/nonexistent/state.json"],
    ] {
        let out = qsr(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    }
}

#[test]
fn malformed_state_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.json");
    std::fs::write(&f, r#"{"labels": ["R"], "dims": [2], "kind": "pure", "data": [[1, 0]]}"#).unwrap();
    let out = qsr(&["quantities", "--input", p(&f)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("data"));
}

#[test]
fn reruns_and_worker_counts_give_identical_csv() {
    let args = ["merge", "--trials", "3", "--seed", "11", "--amplitude-cap", "4096"];
    let a = ok(&args);
    let b = ok(&[&args[..], &["--jobs", "3"]].concat());
    assert_eq!(a, b);
    assert_eq!(a.lines().next().unwrap(), "input_id,eps,n,comm_qubits,operational_qubits,out_fidelity_sq,in_ball");
    assert_eq!(a.lines().count(), 4);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"command": "qeps", "eps": 0.2, "trials": 2, "seed": 3}"#).unwrap();
    let from_cfg = ok(&["qeps", "--config", p(&cfg), "--restarts", "1", "--iterations", "40"]);
    assert_eq!(column(&from_cfg, "eps"), vec!["2.0000000000000001e-1"; 2]);
    let flagged = ok(&["qeps", "--config", p(&cfg), "--eps", "0.05", "--restarts", "1", "--iterations", "40"]);
    assert_eq!(column(&flagged, "eps"), vec!["5.0000000000000003e-2"; 2]);
}
