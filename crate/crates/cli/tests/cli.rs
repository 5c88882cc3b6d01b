use std::path::Path;
use std::process::{Command, Output};

fn loewner(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loewner"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn circle_trace_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("trace.csv");
    let svg = dir.path().join("trace.svg");
    let out = loewner(&[
        "trace", "--family", "circle", "--horizon", "0.1249", "--n", "10000",
        "--out", csv.to_str().unwrap(), "--svg", svg.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = rows(&std::fs::read_to_string(&csv).unwrap());
    assert_eq!(table[0], ["t", "re", "im"]);
    assert_eq!(table.len(), 10_002);
    for r in &table[1..] {
        let (x, y) = (num(&r[1]), num(&r[2]));
        assert!((((x - 0.5).powi(2) + y * y).sqrt() - 0.5).abs() < 1e-2);
    }
    let figure = std::fs::read_to_string(&svg).unwrap();
    assert!(figure.contains("viewBox") && figure.matches("<polyline").count() == 1);
}

#[test]
fn threshold_sweep_separates_at_four() {
    let out = loewner(&[
        "threshold", "--family", "sqrt1mt", "--c-from", "3.0", "--c-to", "4.5", "--step", "0.1", "--x0", "1e-4",
    ]);
    assert!(out.status.success());
    let table = rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(table[0], ["c", "x0", "status", "gap", "t_star"]);
    assert_eq!(table.len(), 17);
    for r in &table[1..] {
        let c = num(&r[0]);
        if c < 4.0 {
            assert_eq!(r[2], "alive");
            assert!(num(&r[3]) > 0.0);
        } else {
            assert_eq!(r[2], "caught", "c = {c}");
        }
    }
}

#[test]
fn recursion_table_starts_at_zero_for_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rec.csv");
    let out = loewner(&["recursion", "--c", "2", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let table = rows(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(table[0], ["n", "h_n", "x_n", "e_n"]);
    assert_eq!(table[1][..3], ["1", "0", "2"]);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, args: &[&str]| {
        let p = dir.path().join(name);
        let mut full = args.to_vec();
        full.extend(["--out", p.to_str().unwrap()]);
        assert!(loewner(&full).status.success());
        std::fs::read(p).unwrap()
    };
    let brownian = ["trace", "--family", "brownian", "--seed", "11", "--n", "200"];
    assert_eq!(run("a.csv", &brownian), run("b.csv", &brownian));
    let sweep = ["qsweep", "--family", "sqrtt", "--horizon", "0.25", "--c-from", "1", "--c-to", "2", "--step", "0.5", "--levels", "2"];
    assert_eq!(run("c.csv", &sweep), run("d.csv", &sweep));
    let other_seed = ["trace", "--family", "brownian", "--seed", "12", "--n", "200"];
    assert_ne!(run("e.csv", &brownian), run("f.csv", &other_seed));
}

#[test]
fn zero_driving_welds_symmetrically() {
    let out = loewner(&["weld", "--horizon", "10", "--x", "0.5,1,2"]);
    assert!(out.status.success());
    let table = rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(table[0], ["x", "phi_x", "T_hit", "residual"]);
    for r in &table[1..] {
        assert!((num(&r[0]) + num(&r[1])).abs() < 1e-6);
    }
}

#[test]
fn hitting_and_flow_tables() {
    let out = loewner(&["hitting", "--horizon", "10", "--x0", "2,-3"]);
    let table = rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(table[0], ["x0", "T_hit", "terminal", "resolution"]);
    assert!((num(&table[1][1]) - 1.0).abs() < 1e-6);
    assert!((num(&table[2][1]) - 2.25).abs() < 1e-6);

    let out = loewner(&["flow", "--family", "sqrt1mt", "--c", "5", "--x0", "1"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("caught"));
    let table = rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(table[0], ["t", "x"]);

    let out = loewner(&["flow", "--kind", "fw", "--x0", "0", "--y0", "1", "--t-end", "0.5"]);
    let table = rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(table[0], ["t", "re", "im"]);
    let last = table.last().unwrap();
    assert!((num(&last[2]) - 3f64.sqrt()).abs() < 1e-6);
}

#[test]
fn csv_driving_terms_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("drive.csv");
    std::fs::write(&path, "t,value\n0,0\n0.5,0\n1,0\n").unwrap();
    let out = loewner(&["trace", "--family", path.to_str().unwrap(), "--n", "4"]);
    assert!(out.status.success());
    let table = rows(&String::from_utf8(out.stdout).unwrap());
    assert!((num(&table[5][2]) - 2.0).abs() < 1e-12);
}

#[test]
fn validation_errors_exit_with_one() {
    for args in [
        &["trace", "--family", "brownian"][..],
        &["trace", "--family", "no/such/file.csv"],
        &["trace", "--n", "0"],
        &["frobnicate"],
        &["weld", "--family", "sqrt1mt", "--c", "4", "--x", "1"],
        &["recursion"],
        &["threshold", "--family", "circle", "--c-from", "1", "--c-to", "2"],
        &["flow", "--x0", "1", "--dt", "-1"],
        &["flow", "--x0", "1", "--svg", "x.svg"],
    ] {
        let out = loewner(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(!err.trim().is_empty());
    }
}

#[test]
fn numerical_failures_exit_with_two() {
    let out = loewner(&["flow", "--family", "sqrt1mt", "--c", "3", "--x0", "1", "--max-steps", "10"]);
    assert_eq!(out.status.code(), Some(2));
    let out = loewner(&["hitting", "--horizon", "10", "--x0", "2", "--max-steps", "5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn every_subcommand_documents_itself() {
    for sub in ["trace", "flow", "hitting", "weld", "qsweep", "recursion", "threshold"] {
        let out = loewner(&[sub, "--help"]);
        assert_eq!(out.status.code(), Some(0));
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.contains("--dt") && text.contains("--out"), "{sub}");
    }
    assert!(Path::new(env!("CARGO_BIN_EXE_loewner")).exists());
}
