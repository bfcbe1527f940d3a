use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn temgrid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_temgrid"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn validate_lists_violations() {
    let out = temgrid(&["validate", fixture("bad.json").to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let err = stderr(&out);
    assert!(err.contains("grid-import-negative@0"), "{err}");
    assert!(err.contains("building-duplicate-name"), "{err}");
}

#[test]
fn validate_accepts_fixture() {
    let out = temgrid(&["validate", fixture("community.json").to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).starts_with("ok: 4 buildings"));
}

#[test]
fn missing_file_exits_with_three() {
    assert_eq!(code(&temgrid(&["validate", "/nonexistent/scenario.json"])), 3);
    assert_eq!(code(&temgrid(&["run", "/nonexistent/scenario.json", "-o", "/tmp/unused"])), 3);
}

#[test]
fn truncated_file_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cut.json");
    let text = std::fs::read_to_string(fixture("community.json")).unwrap();
    std::fs::write(&path, &text[..text.len() / 3]).unwrap();
    let out = temgrid(&["validate", path.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
}

#[test]
fn unknown_flag_exits_with_three() {
    assert_eq!(code(&temgrid(&["run", "x.json", "--bogus"])), 3);
    assert_eq!(code(&temgrid(&["--help"])), 0);
}

#[test]
fn price_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = temgrid(&["price", fixture("community.json").to_str().unwrap(), "-o", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("prices.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "step,ratio,c_ec_eur_mwh,c_ic_eur_mwh");
    assert_eq!(lines.len(), 25);
}

#[test]
fn sample_evs_is_deterministic_json() {
    let a = temgrid(&["sample-evs", "--count", "12", "--seed", "5"]);
    let b = temgrid(&["sample-evs", "--count", "12", "--seed", "5"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let sessions: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let list = sessions.as_array().unwrap();
    assert_eq!(list.len(), 12);
    for s in list {
        let parking = s["parking_hours"].as_f64().unwrap();
        assert!((6.25..=11.0).contains(&parking));
    }
}

#[test]
fn dump_lp_has_sections() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.lp");
    let out = temgrid(&[
        "dump-lp",
        fixture("community.json").to_str().unwrap(),
        "--mode",
        "individual",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(path).unwrap();
    for section in ["Minimize", "Subject To", "Bounds", "SOS", "End"] {
        assert!(text.contains(section), "missing {section}");
    }
}

#[test]
fn time_limit_without_incumbent_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = temgrid(&[
        "run",
        fixture("community.json").to_str().unwrap(),
        "--modes",
        "community",
        "--time-limit",
        "0",
        "-o",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn full_run_writes_artifacts_deterministically() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let scenario = fixture("community.json");
    let run = |dir: &Path| {
        temgrid(&[
            "run",
            scenario.to_str().unwrap(),
            "--modes",
            "baseline,individual,community",
            "-o",
            dir.to_str().unwrap(),
        ])
    };
    let (first, second) = std::thread::scope(|s| {
        let x = s.spawn(|| run(a.path()));
        let y = s.spawn(|| run(b.path()));
        (x.join().unwrap(), y.join().unwrap())
    });
    assert_eq!(code(&first), 0, "{}", stderr(&first));
    assert_eq!(code(&second), 0);
    assert_eq!(first.stdout, second.stdout);
    assert!(stdout(&first).contains("total"));

    let files = [
        "costs.json",
        "costs.txt",
        "dispatch_baseline.csv",
        "dispatch_community.csv",
        "dispatch_individual.csv",
        "prices.csv",
    ];
    for f in files {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f} differs between runs");
    }

    let dispatch = read_csv(&a.path().join("dispatch_community.csv"));
    assert_eq!(dispatch.len(), 1 + 24 * 4);
    assert_eq!(dispatch[0].len(), 10);
    for row in &dispatch[1..] {
        let soc: f64 = row[9].parse().unwrap();
        assert!((0.2 - 1e-9..=0.9 + 1e-9).contains(&soc), "soc {soc}");
        assert!(row.iter().all(|c| c != "-0.000000"));
    }

    // Energy-weighted community export tariff stays inside the grid band.
    let scenario = temgrid_core::scenario_io::load_scenario(&scenario).unwrap();
    let prices = read_csv(&a.path().join("prices.csv"));
    let (mut num, mut den) = (0.0, 0.0);
    for (h, row) in prices[1..].iter().enumerate() {
        let surplus: f64 = scenario.buildings.iter().map(|b| b.net_load.surplus_kw[h]).sum();
        num += surplus * row[2].parse::<f64>().unwrap();
        den += surplus;
    }
    let mean = num / den;
    assert!((-72.8 - 1e-6..=-35.8 + 1e-6).contains(&mean), "mean {mean}");

    let costs: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.path().join("costs.json")).unwrap()).unwrap();
    let total = &costs["total"]["modes"];
    let individual = total["individual"]["electricity_eur"].as_f64().unwrap();
    let community = total["community"]["electricity_eur"].as_f64().unwrap();
    assert!(community < individual - 1e-6);
    assert_eq!(total["baseline"]["ev_revenue_eur"].as_f64().unwrap(), 0.0);
}
