use std::process::{Command, Output};

fn covlocc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_covlocc")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field(report: &str, key: &str) -> f64 {
    report
        .lines()
        .find_map(|l| l.strip_prefix(key).map(|v| v.trim().parse().unwrap()))
        .unwrap_or_else(|| panic!("no {key} in\n{report}"))
}

#[test]
fn solve_semicov_point() {
    let o = covlocc(&["solve", "--scenario", "semicov", "--a", "0.6", "--c", "0.8", "--ppt"]);
    assert_eq!(o.status.code(), Some(0));
    let r = stdout(&o);
    assert!((field(&r, "fidelity ") - 0.9216).abs() < 1e-6);
    assert!(field(&r, "covariance_residual") < 1e-8);
    assert!(field(&r, "kraus_operators") >= 1.0);
}

#[test]
fn solve_protocol_points() {
    let o = covlocc(&["solve", "--scenario", "protocol", "--a", "0.7071", "--ppt"]);
    assert_eq!(o.status.code(), Some(0));
    assert!((field(&stdout(&o), "fidelity ") - 0.5).abs() < 1e-4);
    let o = covlocc(&["solve", "--scenario", "protocol", "--a", "0.5", "--no-ppt"]);
    assert_eq!(o.status.code(), Some(0));
    let r = stdout(&o);
    assert!((field(&r, "fidelity ") - 1.0).abs() < 1e-6);
    assert!((field(&r, "fidelity_noppt") - 1.0).abs() < 1e-6);
}

#[test]
fn argument_errors_exit_1() {
    for args in [
        &["solve", "--scenario", "semicov", "--a", "0.6"][..],
        &["solve", "--scenario", "nope", "--a", "0.6", "--c", "0.1"],
        &["solve", "--scenario", "semicov", "--a", "1.5", "--c", "0.1"],
        &["verify", "--scenario", "full-sim", "--d011", "1.5"],
        &["verify", "--scenario", "semicov"],
        &["sweep", "--scenario", "full-ind", "--grid", "1"],
        &["bogus"],
    ] {
        assert_eq!(covlocc(args).status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn help_exits_0() {
    assert_eq!(covlocc(&["--help"]).status.code(), Some(0));
}

#[test]
fn verify_published_sets() {
    let o = covlocc(&["verify", "--scenario", "full-sim", "--d011", "0.25"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!stdout(&o).contains("FAIL"));
    let o = covlocc(&["verify", "--scenario", "full-ind"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn verify_full_sim_defaults_to_ppt_midpoint() {
    let o = covlocc(&["verify", "--scenario", "full-sim"]);
    assert_eq!(o.status.code(), Some(0));
    let r = stdout(&o);
    assert!(r.contains("midpoint of PPT interval"));
    assert!(field(&r, "ppt_min_eigenvalue") > -1e-12);
}

#[test]
fn solve_full_sim_reports_d011_interval() {
    let o = covlocc(&["solve", "--scenario", "full-sim", "--a", "0", "--c", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let r = stdout(&o);
    assert!((field(&r, "fidelity ") - 0.6).abs() < 1e-6);
    assert!(r.contains("d011_ppt_interval    ["));
}

#[test]
fn verify_breach_exits_2() {
    let o = covlocc(&["verify", "--scenario", "full-ind", "--check-tol", "1e-30"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn verify_appendix_params() {
    let o = covlocc(&["verify", "--scenario", "protocol", "--a", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    // Weights that do not sum to a channel.
    let o = covlocc(&[
        "verify",
        "--scenario",
        "protocol",
        "--a",
        "0.5",
        "--params",
        "0.1,0.1,0,0.1,0.1,0,0.1,0.1",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_row_counts() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let o = covlocc(&[
        "sweep",
        "--scenario",
        "full-sim",
        "--grid",
        "21",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(reader.records().count(), 441);
}

#[test]
fn semicov_sweep_diagonal() {
    let o = covlocc(&["sweep", "--scenario", "semicov", "--grid", "6", "--jobs", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut diagonal = 0;
    for r in reader.records() {
        let r = r.unwrap();
        if r[1] == r[2] {
            diagonal += 1;
            assert!((r[4].parse::<f64>().unwrap() - 1.0).abs() < 1e-6);
        }
    }
    assert_eq!(diagonal, 6);
}

#[test]
fn protocol_sweep_minimum() {
    let o = covlocc(&["sweep", "--scenario", "protocol"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<(f64, f64)> = reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[1].parse().unwrap(), r[4].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 101);
    let (a, f) = rows
        .iter()
        .cloned()
        .fold((0.0, 2.0), |m, p| if p.1 < m.1 { p } else { m });
    assert!((a - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.011);
    assert!((f - 0.5).abs() < 1e-3);
}

#[test]
fn export_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("1.json");
    let two = dir.path().join("2.json");
    for p in [&one, &two] {
        let o = covlocc(&[
            "export",
            "--scenario",
            "semicov",
            "--a",
            "0.6",
            "--c",
            "0.8",
            "--ppt",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    let (a, b) = (std::fs::read(&one).unwrap(), std::fs::read(&two).unwrap());
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["labels"].as_array().unwrap().len(), 32);
    assert!(v["expected_fidelity"].is_null());
}

#[test]
fn export_full_ind_has_four_variables() {
    let o = covlocc(&["export", "--scenario", "full-ind", "--a", "0", "--c", "1", "--no-ppt"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["labels"].as_array().unwrap().len(), 4);
    assert_eq!(v["pencils"].as_array().unwrap().len(), 1);
}

#[test]
fn export_to_unwritable_path_exits_1() {
    let o = covlocc(&[
        "export",
        "--scenario",
        "full-ind",
        "--a",
        "0",
        "--c",
        "1",
        "--out",
        "/nonexistent/dir/p.json",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn irreps_check() {
    let o = covlocc(&["irreps", "--check"]);
    assert_eq!(o.status.code(), Some(0));
    let r = stdout(&o);
    assert_eq!(r.lines().filter(|l| l.starts_with("D")).count(), 16);
    assert!(r.contains("semicov: commutant dimension 32"));
    assert!(!r.contains("FAIL"));
}

#[test]
fn region_reports_flags() {
    let o = covlocc(&["region", "--grid", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 26);
    assert!(text.lines().nth(1).unwrap().ends_with("true"));
}
