mod common;

use common::cli;
use serde_json::Value;

fn json(s: &str) -> Value {
    serde_json::from_str(s).expect("valid JSON")
}

#[test]
fn calgary_json_total() {
    let out = cli(&["case", "calgary", "--format", "json"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v = json(&out.stdout);
    assert!((v["total_delta_kg"].as_f64().unwrap() + 84.0).abs() <= 1.0);
    assert!(out.stdout.ends_with("}\n"));
}

#[test]
fn case_all_is_an_array() {
    let out = cli(&["case", "all", "--format", "json"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v = json(&out.stdout);
    let ids: Vec<&str> = v.as_array().unwrap().iter().map(|r| r["region"].as_str().unwrap()).collect();
    assert_eq!(ids, ["nl", "sf", "calgary"]);
}

#[test]
fn case_formats() {
    let table = cli(&["case", "nl", "--scenario", "2"]);
    assert_eq!(table.code, 0);
    assert!(table.stdout.starts_with("Netherlands (scenario 2, canonical factors)"));
    let csv = cli(&["case", "sf", "--format", "csv", "--no-modal-shift"]);
    assert_eq!(csv.code, 0);
    assert!(csv.stdout.starts_with("mode,before_km,during_km,factor_g_per_pkt,delta_kg\n"));
    assert!(csv.stdout.lines().last().unwrap().starts_with("total,"));
}

#[test]
fn nl_rail_factor() {
    let out = cli(&["factors", "--grid", "NL", "--format", "json"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v = json(&out.stdout);
    let rail = v["factors"]["rail"]["value"].as_f64().unwrap();
    assert!((rail - 101.0).abs() <= 1.0, "{rail}");
    let table = cli(&["factors", "--grid", "327"]);
    assert_eq!(table.code, 0);
    assert!(table.stdout.contains("Train"));
}

#[test]
fn calc_identical_profiles_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("same.json");
    let profile = r#"{"distances":{"car":5000,"rail":1200,"bus":300,"bicycle":800}}"#;
    std::fs::write(&path, format!(r#"{{"before":{profile},"during":{profile},"grid":"NL"}}"#)).unwrap();
    let out = cli(&["calc", "--input", path.to_str().unwrap()]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert_eq!(json(&out.stdout)["delta"]["total"].as_f64().unwrap(), 0.0);
}

#[test]
fn calc_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{").unwrap();
    let out = cli(&["calc", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("bad_request"), "{}", out.stderr);

    let rail = dir.path().join("rail.json");
    std::fs::write(&rail, r#"{"before":{"distances":{"rail":100}},"during":{"distances":{"rail":50}}}"#).unwrap();
    let out = cli(&["calc", "--input", rail.to_str().unwrap()]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("missing_factor"), "{}", out.stderr);

    let out = cli(&["calc", "--input", dir.path().join("absent.json").to_str().unwrap()]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("io_error"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["case", "tokyo"][..],
        &["case", "nl", "--bogus"],
        &["case", "nl", "--scenario", "9"],
        &["case", "calgary", "--scenario", "1"],
        &["factors", "--grid", "Atlantis"],
        &["sweep", "wind"],
        &[],
    ] {
        let out = cli(args);
        assert_eq!(out.code, 2, "{args:?}: {}", out.stderr);
        assert!(out.stdout.is_empty());
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn lenient_runs_other_scenarios() {
    let out = cli(&["case", "calgary", "--scenario", "1", "--lenient", "--format", "json"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert_eq!(json(&out.stdout)["scenario"], 1);
}

#[test]
fn sweep_points_and_range() {
    let out = cli(&["sweep", "grid", "--case", "sf", "--points", "VT,DC", "--format", "json"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v = json(&out.stdout);
    let pts = v["points"].as_array().unwrap();
    assert_eq!(pts.len(), 2);
    assert_eq!(pts[0]["label"], "VT");
    let out = cli(&["sweep", "bus-occupancy", "--min", "5", "--max", "40", "--steps", "8", "--format", "csv"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert_eq!(out.stdout.lines().count(), 9);
    let out = cli(&["sweep", "bus", "--points", "5", "--min", "1"]);
    assert_eq!(out.code, 1);
}

#[test]
fn synth_then_regress() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mot.csv");
    let p = path.to_str().unwrap();
    let out = cli(&["synth", "--vehicles", "20000", "--seed", "7", "--out", p]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let out = cli(&["regress", "--csv", p, "--format", "json", "--seed", "7"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v = json(&out.stdout);
    let results = v["results"].as_array().unwrap();
    assert_eq!(results.len(), 2);
    for r in results {
        assert!(r["coefficient"].as_f64().unwrap() > 0.0);
        assert!(r["p_value"].as_f64().unwrap() < 0.05);
        assert!(r["converged"].as_bool().unwrap());
    }
    assert_eq!(v["balanced_observations"].as_u64().unwrap(), 2 * v["elvs"].as_u64().unwrap());
    // Same seed, same sample.
    assert_eq!(cli(&["regress", "--csv", p, "--format", "json", "--seed", "7"]).stdout, out.stdout);

    let table = cli(&["regress", "--csv", p, "--predictor", "age"]);
    assert_eq!(table.code, 0);
    assert!(table.stdout.contains("Pseudo R2"));
    assert!(table.stdout.lines().any(|l| l.starts_with("age")));
}

#[test]
fn regress_reports_missing_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "vehicle_id,test_date\nA,2013-01-01\n").unwrap();
    let out = cli(&["regress", "--csv", path.to_str().unwrap()]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("invalid_input"), "{}", out.stderr);
}

#[test]
fn fleet_bundled_and_file() {
    let out = cli(&["fleet", "--format", "json"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v = json(&out.stdout);
    assert_eq!(v["press_release"]["rounded_km"].as_f64().unwrap(), 12_900.0);

    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("usage.csv");
    std::fs::write(&csv, "city,total_vkt_annual,fleet_size\nCalgary,8400000,630\n").unwrap();
    let out = cli(&["fleet", "--usage", csv.to_str().unwrap(), "--format", "json"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert_eq!(json(&out.stdout)["mileage"]["average_rounded_km"].as_f64().unwrap(), 13_300.0);

    let js = dir.path().join("usage.json");
    std::fs::write(&js, r#"[{"city":"X","total_vkt_annual":1000,"fleet_size":0}]"#).unwrap();
    let out = cli(&["fleet", "--usage", js.to_str().unwrap()]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("domain_error"));
}

#[test]
fn data_dir_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("occupancy.json"), r#"{"car":1.58,"carpool":2.5,"bus":21,"rail":55}"#).unwrap();
    let out = cli(&["--data-dir", dir.path().to_str().unwrap(), "factors", "--grid", "NL", "--format", "json"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let bus = json(&out.stdout)["factors"]["bus"]["value"].as_f64().unwrap();
    assert!((bus - 187.43 * 10.5 / 21.0).abs() < 0.1, "{bus}");

    let out = cli(&["--data-dir", dir.path().join("nope").to_str().unwrap(), "factors"]);
    assert_eq!(out.code, 1);
}
