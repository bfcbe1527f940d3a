use std::path::{Path, PathBuf};

use super::*;

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn minimal_json(grid_import: &str) -> String {
    format!(
        r#"{{
  "time": {{ "step_hours": 1.0, "steps": 2, "start_hour_of_day": 0.0 }},
  "tariffs": {{
    "gridImport": {grid_import}, "gridExport": -35.8, "gridUse": 50,
    "parking": 0.5, "flexibility": -0.5, "charge": 2, "discharge": -3
  }},
  "buildings": [ {{ "name": "a", "net_load_kw": [3.0, -2.0] }} ]
}}"#
    )
}

#[test]
fn scalar_tariffs_expand_and_convert_units() {
    let s = parse_scenario_str(&minimal_json("122.8"), Path::new(".")).unwrap();
    assert_eq!(s.tariffs.grid_import_eur_per_kwh.len(), 2);
    assert!((s.tariffs.grid_import_eur_per_kwh[0] - 0.1228).abs() < 1e-15);
    assert!((s.tariffs.grid_export_eur_per_kwh[1] + 0.0358).abs() < 1e-15);
    assert_eq!(s.tariffs.charge_eur_per_hour, vec![2.0, 2.0]);
    assert_eq!(s.buildings[0].net_load.deficit_kw, vec![3.0, 0.0]);
    assert_eq!(s.buildings[0].net_load.surplus_kw, vec![0.0, 2.0]);
    assert!(!s.buildings[0].battery.is_present());
    assert!(validate_scenario(&s).is_empty());
}

#[test]
fn negative_import_tariff_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    std::fs::write(&path, minimal_json("-5")).unwrap();
    match load_scenario(&path) {
        Err(Error::Validation(v)) => {
            assert!(v.iter().any(|x| x.code == "grid-import-negative"), "{v:?}");
        }
        other => panic!("expected validation error, got {other:?}"),
    }
}

#[test]
fn truncated_file_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let text = minimal_json("122.8");
    std::fs::write(&path, &text[..text.len() / 2]).unwrap();
    assert!(matches!(load_scenario(&path), Err(Error::Parse { .. })));
}

#[test]
fn unknown_field_names_its_path() {
    let text = minimal_json("122.8").replace("\"gridUse\"", "\"gridUsage\"");
    match parse_scenario_str(&text, Path::new(".")) {
        Err(Error::Parse { message, .. }) => assert!(message.contains("tariffs"), "{message}"),
        other => panic!("expected parse error, got {other:?}"),
    }
}

#[test]
fn missing_file_is_io() {
    assert!(matches!(load_scenario("/nonexistent/x.json"), Err(Error::Io { .. })));
}

#[test]
fn csv_net_load() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("load.csv"),
        "hour,building,net_kw\n1,a,-2.0\n0,a,3.0\n0,b,1.5\n1,b,0\n",
    )
    .unwrap();
    let table = read_net_load_csv(&dir.path().join("load.csv")).unwrap();
    assert_eq!(table["a"], vec![3.0, -2.0]);
    assert_eq!(table["b"], vec![1.5, 0.0]);

    let text = minimal_json("122.8").replace("[3.0, -2.0]", r#"{ "csv": "load.csv" }"#);
    let s = parse_scenario_str(&text, dir.path()).unwrap();
    assert_eq!(s.buildings[0].net_load.signed(), vec![3.0, -2.0]);
}

#[test]
fn csv_gap_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("load.csv");
    std::fs::write(&path, "hour,building,net_kw\n0,a,1\n2,a,1\n").unwrap();
    assert!(matches!(read_net_load_csv(&path), Err(Error::Parse { .. })));
}

#[test]
fn split_demand_and_pv() {
    let text = minimal_json("122.8")
        .replace("[3.0, -2.0]", r#"{ "demand_kw": [4, 1], "pv_kw": [1, 3] }"#);
    let s = parse_scenario_str(&text, Path::new(".")).unwrap();
    assert_eq!(s.buildings[0].net_load.signed(), vec![3.0, -2.0]);
}

#[test]
fn round_trip_is_exact() {
    let s = synthetic_community(7).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    write_scenario(&s, &path).unwrap();
    assert_eq!(load_scenario(&path).unwrap(), s);
}

#[test]
fn pool_assignment_is_deterministic() {
    let text = minimal_json("122.8").replace(
        "\"buildings\"",
        r#""ev_pool": { "count": 4, "seed": 9, "per_building": 2 }, "buildings""#,
    );
    let text = text.replace("\"steps\": 2", "\"steps\": 24").replace("[3.0, -2.0]", &format!("{:?}", vec![1.0; 24]));
    let text = text.replace("\"start_hour_of_day\": 0.0", "\"start_hour_of_day\": 8.0");
    let a = parse_scenario_str(&text, Path::new(".")).unwrap();
    let b = parse_scenario_str(&text, Path::new(".")).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.buildings[0].sessions.len(), 2);
}

/// The checked-in fixture must equal the generator output. Set
/// `TEMGRID_REGENERATE_FIXTURES=1` to rewrite it.
#[test]
fn community_fixture_matches_generator() {
    let path = fixture_dir().join("community.json");
    let generated = synthetic_community(42).unwrap();
    if std::env::var_os("TEMGRID_REGENERATE_FIXTURES").is_some() {
        write_scenario(&generated, &path).unwrap();
    }
    assert_eq!(load_scenario(&path).unwrap(), generated);
}

#[test]
fn bad_fixture_lists_violations() {
    match load_scenario(fixture_dir().join("bad.json")) {
        Err(Error::Validation(v)) => assert!(v.len() >= 2, "{v:?}"),
        other => panic!("expected validation errors, got {other:?}"),
    }
}

#[test]
fn seed_override_replaces_pool_seed() {
    let base = minimal_json("122.8")
        .replace("\"steps\": 2", "\"steps\": 24")
        .replace("[3.0, -2.0]", &format!("{:?}", vec![1.0; 24]))
        .replace(
            "\"buildings\"",
            r#""ev_pool": { "count": 3, "seed": 9, "per_building": 3 }, "buildings""#,
        );
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    std::fs::write(&path, &base).unwrap();
    let file_seed = load_scenario_seeded(&path, None).unwrap();
    let same = load_scenario_seeded(&path, Some(9)).unwrap();
    let other = load_scenario_seeded(&path, Some(10)).unwrap();
    assert_eq!(file_seed, same);
    assert_ne!(file_seed.buildings[0].sessions, other.buildings[0].sessions);
}
