use std::path::PathBuf;
use std::time::{Duration, Instant};

use num_traits::Zero;

use surfcalc::contraction::{contract, k_squared_via_formula, ContractionError};
use surfcalc::cover::{double_cover_invariants, make_cover};
use surfcalc::qlattice::{int, to_i64, Rational};
use surfcalc::scenario::{
    emit_report, load_scenario, parse_scenario, prepare, run_scenario, to_json, ReportFormat, ScenarioError,
};
use surfcalc::{ClassExpr, CurveConfig};

const SHIPPED: [&str; 4] = ["godeaux_Yprime", "campedelli_Xprime", "godeaux_Ytilde", "godeaux_section6"];

fn path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(format!("{name}.json"))
}

fn all_scenarios() -> Vec<PathBuf> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    v.sort();
    v
}

#[test]
fn shipped_scenarios_pass_quickly() {
    for name in SHIPPED {
        let start = Instant::now();
        let s = load_scenario(path(name)).unwrap();
        let r = run_scenario(&s).unwrap();
        let elapsed = start.elapsed();
        let text = String::from_utf8(emit_report(&r, ReportFormat::Text)).unwrap();
        assert!(r.all_passed(), "{text}");
        assert!(text.ends_with(&format!("{0}/{0} assertions passed\n", r.summary.total)));
        assert!(elapsed < Duration::from_secs(1), "{name} took {elapsed:?}");
    }
}

#[test]
fn every_scenario_file_passes() {
    for p in all_scenarios() {
        let r = run_scenario(&load_scenario(&p).unwrap()).unwrap();
        assert!(r.all_passed(), "{}", p.display());
    }
}

#[test]
fn replay_is_deterministic() {
    for name in SHIPPED {
        let a = run_scenario(&load_scenario(path(name)).unwrap()).unwrap();
        let b = run_scenario(&load_scenario(path(name)).unwrap()).unwrap();
        for f in [ReportFormat::Json, ReportFormat::Text] {
            assert_eq!(emit_report(&a, f), emit_report(&b, f));
        }
    }
}

#[test]
fn schema_round_trip() {
    for p in all_scenarios() {
        let s = load_scenario(&p).unwrap();
        let again = parse_scenario(&to_json(&s)).unwrap();
        assert_eq!(s, again, "{}", p.display());
    }
}

#[test]
fn report_json_shape() {
    let r = run_scenario(&load_scenario(path("godeaux_Yprime")).unwrap()).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&emit_report(&r, ReportFormat::Json)).unwrap();
    assert_eq!(v["scenario"], "godeaux_Yprime");
    let first = &v["assertions"][0];
    for key in ["kind", "target", "expected", "computed", "pass"] {
        assert!(first.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["summary"]["failed"], 0);
}

#[test]
fn yprime_has_four_configs_contracted() {
    let s = load_scenario(path("godeaux_Yprime")).unwrap();
    assert_eq!(s.contractions[0].configs, ["C85", "C74", "A3a", "A3b"]);
    let p = prepare(&s).unwrap();
    let y = p.contraction("Yprime").unwrap().as_ref().unwrap();
    assert_eq!(y.records.len(), 4);
    assert_eq!(y.contracted_curves().count(), 14);
}

#[test]
fn undefined_curve_is_reported() {
    let text = std::fs::read_to_string(path("godeaux_Yprime"))
        .unwrap()
        .replacen("\"lhs\": \"B1\"", "\"lhs\": \"B9\"", 1);
    match parse_scenario(&text) {
        Err(ScenarioError::Unresolved { name, .. }) => assert_eq!(name, "B9"),
        other => panic!("expected unresolved name, got {other:?}"),
    }
}

#[test]
fn wrong_explicit_class_is_rejected() {
    let text = std::fs::read_to_string(path("godeaux_Yprime"))
        .unwrap()
        .replacen("\"class\": \"e2 - e6\"", "\"class\": \"e2 - e7\"", 1);
    assert!(matches!(parse_scenario(&text), Err(ScenarioError::ClassMismatch { .. })));
}

#[test]
fn one_failure_lists_expected_and_computed() {
    let text = std::fs::read_to_string(path("godeaux_Yprime"))
        .unwrap()
        .replacen("\"expected\": \"-7\"", "\"expected\": \"-13/2\"", 1);
    let r = run_scenario(&parse_scenario(&text).unwrap()).unwrap();
    assert_eq!(r.summary.failed, 1);
    let out = String::from_utf8(emit_report(&r, ReportFormat::Text)).unwrap();
    assert!(out.contains("expected -13/2"));
    assert!(out.contains("computed -7"));
    assert!(out.ends_with(&format!("{}/{} assertions passed\n", r.summary.total - 1, r.summary.total)));
}

#[test]
fn missing_file_and_syntax_errors() {
    assert!(matches!(load_scenario("/nonexistent/x.json"), Err(ScenarioError::Io { .. })));
    assert!(matches!(
        parse_scenario("{\"schema\": 1, \"name\": \"x\",\n \"script\": [}"),
        Err(ScenarioError::Parse { line: 2, .. })
    ));
}

#[test]
fn dot_output_of_c85() {
    let s = load_scenario(path("godeaux_Yprime")).unwrap();
    let graphs = prepare(&s).unwrap().dot_graphs(&s).unwrap();
    let (_, dot) = graphs.iter().find(|(n, _)| n == "C85").unwrap();
    for w in ["(-2)", "(-3)", "(-5)"] {
        assert!(dot.contains(w));
    }
    assert_eq!(dot.matches(" -- ").count(), 3);
}

/// Every contraction in every scenario: three routes to K^2 agree, and the
/// coefficients are in [0, 1), all zero exactly for rational double points.
#[test]
fn contraction_cross_checks() {
    for p in all_scenarios() {
        let prepared = prepare(&load_scenario(&p).unwrap()).unwrap();
        for (name, y) in prepared.contractions() {
            let y = y.as_ref().unwrap();
            let formula = k_squared_via_formula(y).unwrap();
            assert_eq!(formula, y.k_squared, "{name}");
            assert_eq!(formula, y.k_squared_via_discrepancies(), "{name}");
            for r in &y.records {
                assert!(r.discrepancies_in_range(), "{name}/{}", r.config.name);
            }
        }
    }
}

/// Perturbing one coefficient breaks orthogonality to some contracted curve.
#[test]
fn coefficients_are_unique() {
    let prepared = prepare(&load_scenario(path("godeaux_Yprime")).unwrap()).unwrap();
    let y = prepared.contraction("Yprime").unwrap().as_ref().unwrap();
    for r in &y.records {
        for name in &r.config.members {
            let c = y.base.curve(name).unwrap();
            let moved = &y.k_pullback + &c.scale(&Rational::new(1.into(), 7.into()));
            assert!(y
                .contracted_curves()
                .any(|d| !moved.intersect(y.base.curve(d).unwrap()).is_zero()));
        }
    }
}

#[test]
fn minus_two_cycle_is_not_contractible() {
    let prepared = prepare(&load_scenario(path("godeaux_Yprime")).unwrap()).unwrap();
    let e1 = prepared.stage("E1").unwrap();
    let cycle = CurveConfig::new("I8", ["B1", "B6", "B2", "B7", "B3", "B8", "B4", "B5"]);
    assert_eq!(
        contract(e1, &[cycle]),
        Err(ContractionError::NotNegativeDefinite("I8".into()))
    );
}

/// Fiber identities: F^2 = 0, and every smooth rational component obeys
/// K.C = -2 - C^2.
#[test]
fn fiber_components_satisfy_adjunction() {
    let prepared = prepare(&load_scenario(path("godeaux_Yprime")).unwrap()).unwrap();
    let z = prepared.stage("final").unwrap();
    assert!(z.curve("F").unwrap().square().is_zero());
    assert_eq!(z.arithmetic_genus("F").unwrap(), int(1));
    for c in ["F1", "F2", "E1", "E2", "E3", "E4", "E5", "E6", "E7", "M", "l", "S"] {
        let self_int = z.curve(c).unwrap().square();
        assert_eq!(z.canonical_degree(c).unwrap(), int(-2) - self_int, "{c}");
    }
    let e1 = prepared.stage("E1").unwrap();
    for c in ["B1", "B2", "B3", "B4", "B5", "B6", "B7", "B8"] {
        assert_eq!(e1.arithmetic_genus(c).unwrap(), int(0), "{c}");
        assert!(e1.curve(c).unwrap().intersect(e1.curve("F").unwrap()).is_zero());
    }
}

#[test]
fn cover_properties() {
    let prepared = prepare(&load_scenario(path("godeaux_Yprime")).unwrap()).unwrap();
    for stage in ["E1", "final"] {
        let m = prepared.stage(stage).unwrap();
        let branch: Vec<String> = ["B1", "B2", "B3", "B4"].map(String::from).to_vec();
        let spec = make_cover(m, &branch).unwrap();
        assert_eq!(spec.half_class.scale(&int(2)), spec.branch_class);
        let inv = double_cover_invariants(&m.k_squared(), &int(1), &spec, m.canonical());
        assert!(to_i64(&inv.k2_cover).is_some() && to_i64(&inv.chi_cover).is_some());
        // Trivial branch: the cover is two copies numerically.
        let etale = make_cover(m, &[]).unwrap();
        let inv0 = double_cover_invariants(&m.k_squared(), &int(1), &etale, m.canonical());
        assert_eq!(inv0.k2_cover, int(2) * m.k_squared());
        assert_eq!(inv0.chi_cover, int(2));
    }
    let z = prepared.stage("final").unwrap();
    let l = z.eval(&ClassExpr::parse("h - e3 - e5 - e6").unwrap()).unwrap();
    assert_eq!(z.canonical().intersect(&l), int(0));
    assert_eq!(l.square(), int(-2));
}
