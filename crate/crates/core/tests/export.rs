use covlocc::scenarios::{build_problem, solve_point};
use covlocc::sdp::{solve, ProblemExport, SdpProblem};
use covlocc::Scenario;

fn exported(scenario: Scenario, a: f64, c: f64, ppt: bool) -> String {
    build_problem(scenario, a, c, ppt)
        .unwrap()
        .export("p", serde_json::json!({ "a": a, "c": c }))
        .to_json()
        .unwrap()
}

#[test]
fn label_counts() {
    for (scenario, n) in [
        (Scenario::SemiCov, 32),
        (Scenario::FullSimultaneous, 14),
        (Scenario::FullIndependent, 4),
        (Scenario::Protocol, 32),
    ] {
        let doc = ProblemExport::from_json(&exported(scenario, 0.4, 0.7, true)).unwrap();
        assert_eq!(doc.labels.len(), n);
        assert_eq!(doc.objective.len(), n);
        for pencil in &doc.pencils {
            assert_eq!(pencil.coefficients.len(), n);
        }
        assert!(doc.equalities.rows.iter().all(|r| r.len() == n));
    }
}

#[test]
fn byte_stable() {
    for scenario in Scenario::ALL {
        assert_eq!(exported(scenario, 0.6, 0.8, true), exported(scenario, 0.6, 0.8, true));
    }
}

#[test]
fn expected_fidelity_is_null() {
    let v: serde_json::Value = serde_json::from_str(&exported(Scenario::SemiCov, 0.6, 0.8, true)).unwrap();
    assert!(v["expected_fidelity"].is_null());
    let pair = &v["pencils"][0]["constant"][0][0];
    assert_eq!(pair.as_array().unwrap().len(), 2);
}

#[test]
fn ppt_flag_controls_pencils() {
    let with = ProblemExport::from_json(&exported(Scenario::FullIndependent, 0.0, 1.0, true)).unwrap();
    let without = ProblemExport::from_json(&exported(Scenario::FullIndependent, 0.0, 1.0, false)).unwrap();
    assert_eq!(with.pencils.len(), 2);
    assert_eq!(without.pencils.len(), 1);
}

#[test]
fn round_trip_solves_to_same_optimum() {
    for (scenario, a, c) in [
        (Scenario::SemiCov, 0.6, 0.8),
        (Scenario::FullIndependent, 0.0, 1.0),
        (Scenario::Protocol, 0.3, 0.3),
    ] {
        let doc = ProblemExport::from_json(&exported(scenario, a, c, true)).unwrap();
        let rebuilt = SdpProblem::from_export(&doc).unwrap();
        let direct = solve_point(scenario, a, c, true).unwrap().fidelity;
        assert!((solve(&rebuilt).objective - direct).abs() < 1e-9);
    }
}

#[test]
fn malformed_documents_are_rejected() {
    assert!(ProblemExport::from_json("{").is_err());
    let mut doc = ProblemExport::from_json(&exported(Scenario::FullIndependent, 0.2, 0.4, true)).unwrap();
    doc.pencils[0].coefficients.pop();
    assert!(SdpProblem::from_export(&doc).is_err());
}
