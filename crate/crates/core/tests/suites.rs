use qleg::suites::{run_suite, Suite, SuiteConfig};

#[test]
fn same_seed_same_reports() {
    for suite in [Suite::Addition, Suite::CrossPath, Suite::Charlier] {
        let a = run_suite(suite, &SuiteConfig::with_seed(7)).unwrap();
        let b = run_suite(suite, &SuiteConfig::with_seed(7)).unwrap();
        assert_eq!(a, b);
        let c = run_suite(suite, &SuiteConfig::with_seed(8)).unwrap();
        if suite != Suite::Charlier {
            assert_ne!(a, c, "{suite}: seed has no effect");
        }
    }
}

#[test]
fn reports_serialize_with_the_expected_fields() {
    let reports = run_suite(Suite::Operator, &SuiteConfig::default()).unwrap();
    let v = serde_json::to_value(&reports[0]).unwrap();
    for key in ["identity_id", "params", "lhs", "rhs", "abs_residual", "rel_residual", "tolerance", "passed", "truncation"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert!(v["params"].is_object());
    assert!(v["identity_id"].is_string());
}

#[test]
fn suites_parse_by_name() {
    for s in Suite::ALL {
        assert_eq!(s.as_str().parse::<Suite>().unwrap(), s);
    }
    assert_eq!("classical".parse::<Suite>().unwrap(), Suite::Classical);
    assert!("nonsense".parse::<Suite>().is_err());
}

#[test]
fn pinned_degree_restricts_the_grid() {
    let cfg = SuiteConfig { l: Some(2), ..SuiteConfig::default() };
    let reports = run_suite(Suite::Special, &cfg).unwrap();
    assert!(!reports.is_empty());
    assert!(reports.iter().all(|r| r.params.get("l").map(|v| v.to_string()) == Some("2".into())));
}
