use proptest::prelude::*;

use super::*;
use crate::domain::{BatterySpec, BuildingAssets, EVSession, NetLoadSeries, RunOptions, TariffBook, TimeGrid};
use crate::scenario_io::synthetic_community;
use crate::solver::{solve_lp, LpStatus, SolverOptions};
use crate::tariff::price_community;

fn battery() -> BatterySpec {
    BatterySpec {
        capacity_kwh: 90.0,
        max_charge_kw: 45.0,
        max_discharge_kw: 45.0,
        one_way_efficiency: 0.95,
        soc_min: 0.2,
        soc_max: 0.9,
        soc_initial: 0.2,
    }
}

fn session(arrival: usize, parking: f64) -> EVSession {
    EVSession {
        id: "ev".into(),
        arrival_step: arrival,
        parking_hours: parking,
        requested_charge_hours: 2.0,
        max_discharge_hours: 1.0,
        max_charge_kw: 10.0,
        max_discharge_kw: 10.0,
        charger_efficiency: 0.93,
    }
}

fn building(name: &str, net: Vec<f64>, battery: BatterySpec, sessions: Vec<EVSession>) -> BuildingAssets {
    BuildingAssets {
        name: name.into(),
        net_load: NetLoadSeries::from_signed(&net),
        battery,
        sessions,
    }
}

fn scenario(steps: usize, buildings: Vec<BuildingAssets>) -> CommunityScenario {
    CommunityScenario {
        time: TimeGrid::new(1.0, steps, 0.0),
        tariffs: TariffBook::flat_reference(steps),
        buildings,
        options: RunOptions::default(),
    }
}

fn one_building_day() -> CommunityScenario {
    let net: Vec<f64> = (0..24).map(|h| if (9..16).contains(&h) { -20.0 } else { 15.0 }).collect();
    scenario(24, vec![building("a", net, battery(), vec![session(6, 12.0)])])
}

fn model(s: &CommunityScenario, mode: RunMode) -> MilpModel {
    let prices = price_community(s).unwrap();
    build(s, &prices, mode).unwrap()
}

fn row<'a>(m: &'a MilpModel, name: &str) -> &'a Row {
    m.lp.rows.iter().find(|r| r.name == name).unwrap_or_else(|| panic!("no row {name}"))
}

#[test]
fn individual_free_variable_count() {
    let m = model(&one_building_day(), RunMode::Individual);
    // grid flows 48, battery powers 48, SoC 24, EV powers over a 12-step window 24
    assert_eq!(m.free_var_count(), 144);
    assert_eq!(m.lp.num_vars(), 24 * 7 + 2 * 24);
    let v = &m.catalog.buildings[0];
    for h in 0..24 {
        assert!(m.lp.is_fixed(v.comm_export[h]) && m.lp.is_fixed(v.comm_import[h]));
        let inside = (6..18).contains(&h);
        assert_eq!(m.lp.upper[v.ev_charge[0][h]] > 0.0, inside, "step {h}");
    }
}

#[test]
fn baseline_objective_is_closed_form() {
    let s = synthetic_community(3).unwrap();
    let m = model(&s, RunMode::Baseline);
    assert_eq!(m.free_var_count(), 0);
    let x = m.lp.lower.clone();
    let mut expected = 0.0;
    for b in &s.buildings {
        for h in 0..s.time.steps {
            expected += s.time.step_hours
                * (b.net_load.deficit_kw[h] * s.tariffs.grid_import_eur_per_kwh[h]
                    + b.net_load.surplus_kw[h] * s.tariffs.grid_export_eur_per_kwh[h]);
        }
    }
    assert!((m.lp.objective(&x) - expected).abs() < 1e-9);
    assert!(m.lp.rows.iter().all(|r| r.violation(&x) < 1e-9));
}

fn solve_with(m: &MilpModel, fix: &[(usize, f64)]) -> Vec<f64> {
    let mut lp = m.lp.clone();
    for &(j, v) in fix {
        lp.lower[j] = v;
        lp.upper[j] = v;
    }
    let sol = solve_lp(&lp, &SolverOptions::default()).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    sol.values
}

fn idle_fixes(m: &MilpModel) -> Vec<(usize, f64)> {
    let v = &m.catalog.buildings[0];
    let mut fix = Vec::new();
    for h in 0..m.time.steps {
        fix.push((v.bs_charge[h], 0.0));
        fix.push((v.bs_discharge[h], 0.0));
        for n in 0..v.ev_charge.len() {
            fix.push((v.ev_charge[n][h], 0.0));
            fix.push((v.ev_discharge[n][h], 0.0));
        }
    }
    fix
}

#[test]
fn balance_with_assets_idle_imports_the_deficit() {
    let s = scenario(1, vec![building("a", vec![10.0], battery(), vec![])]);
    let m = model(&s, RunMode::Individual);
    let x = solve_with(&m, &idle_fixes(&m));
    let v = &m.catalog.buildings[0];
    assert!((x[v.grid_import[0]] - 10.0).abs() < 1e-9);
    assert!(x[v.grid_export[0]].abs() < 1e-9);
    assert!((m.costs[0].electricity.eval(&x) - 10.0 * 0.1228).abs() < 1e-12);
}

#[test]
fn battery_charging_reduces_export() {
    let mut bs = battery();
    bs.soc_initial = 0.5;
    let mut s = scenario(1, vec![building("a", vec![-10.0], bs, vec![])]);
    s.options.model.terminal_soc = TerminalSoc::Free;
    let m = model(&s, RunMode::Individual);
    let v = &m.catalog.buildings[0];
    let mut fix = idle_fixes(&m);
    fix.retain(|&(j, _)| j != v.bs_charge[0]);
    fix.push((v.bs_charge[0], 4.0));
    let x = solve_with(&m, &fix);
    assert!((x[v.grid_export[0]] - 6.0).abs() < 1e-9);
    assert!(x[v.grid_import[0]].abs() < 1e-9);
}

#[test]
fn ev_charging_without_load_imports() {
    let mut ev = session(0, 2.0);
    ev.max_discharge_hours = 0.0;
    let s = scenario(2, vec![building("a", vec![0.0, 0.0], BatterySpec::none(), vec![ev])]);
    let m = model(&s, RunMode::Individual);
    let v = &m.catalog.buildings[0];
    let x = solve_with(&m, &[(v.ev_charge[0][0], 10.0)]);
    assert!((x[v.grid_import[0]] - 10.0).abs() < 1e-9);
    assert!(x[v.grid_export[0]].abs() < 1e-9);
}

#[test]
fn session_without_discharge_has_no_discharge_room() {
    let mut ev = session(0, 4.0);
    ev.max_discharge_hours = 0.0;
    let s = scenario(4, vec![building("a", vec![1.0; 4], BatterySpec::none(), vec![ev])]);
    let m = model(&s, RunMode::Individual);
    let v = &m.catalog.buildings[0];
    assert!(v.ev_discharge[0].iter().all(|&j| m.lp.upper[j] == 0.0));
    assert_eq!(m.rows_of(RowFamily::EvPrefix).count(), 0);
    let total = row(&m, "ev_total_b0_n0");
    assert_eq!(total.rhs, 2.0);
    assert!(total.terms.iter().all(|&(_, a)| (a - 0.1).abs() < 1e-15));
}

#[test]
fn two_hours_at_ten_kilowatts_is_twenty_kwh() {
    let s = scenario(4, vec![building("a", vec![1.0; 4], BatterySpec::none(), vec![session(0, 4.0)])]);
    let m = model(&s, RunMode::Individual);
    let v = &m.catalog.buildings[0];
    let mut x: Vec<f64> = vec![0.0; m.lp.num_vars()];
    x[v.ev_charge[0][0]] = 10.0;
    x[v.ev_charge[0][2]] = 10.0;
    assert!(row(&m, "ev_total_b0_n0").violation(&x) < 1e-12);
    x[v.ev_charge[0][2]] = 9.0;
    assert!(row(&m, "ev_total_b0_n0").violation(&x) > 0.09);
}

#[test]
fn eight_step_window_has_eight_prefix_rows() {
    let s = scenario(10, vec![building("a", vec![1.0; 10], BatterySpec::none(), vec![session(1, 8.0)])]);
    let m = model(&s, RunMode::Individual);
    assert_eq!(m.rows_of(RowFamily::EvPrefix).count(), 8);
    assert_eq!(m.pairs.iter().filter(|p| p.family == PairFamily::Ev).count(), 8);
}

#[test]
fn prefix_rows_forbid_discharge_before_charge() {
    let s = scenario(4, vec![building("a", vec![1.0; 4], BatterySpec::none(), vec![session(0, 4.0)])]);
    let m = model(&s, RunMode::Individual);
    let v = &m.catalog.buildings[0];
    let mut x: Vec<f64> = vec![0.0; m.lp.num_vars()];
    x[v.ev_discharge[0][0]] = 5.0;
    assert!(row(&m, "ev_prefix_b0_n0_h0").violation(&x) > 0.4);
    x[v.ev_discharge[0][0]] = 0.0;
    x[v.ev_charge[0][0]] = 10.0;
    x[v.ev_discharge[0][1]] = 10.0;
    assert!(m.rows_of(RowFamily::EvPrefix).all(|r| r.violation(&x) < 1e-12));
}

#[test]
fn soc_recursion_arithmetic() {
    let s = scenario(2, vec![building("a", vec![0.0, 0.0], battery(), vec![])]);
    let m = model(&s, RunMode::Individual);
    let v = &m.catalog.buildings[0];
    let mut x: Vec<f64> = vec![0.0; m.lp.num_vars()];
    x[v.bs_charge[0]] = 45.0;
    x[v.soc[0]] = 0.2 + 42.75 / 90.0;
    x[v.soc[1]] = x[v.soc[0]];
    assert!((x[v.soc[0]] - 0.675).abs() < 1e-15);
    assert!(row(&m, "soc_b0_h0").violation(&x) < 1e-12);
    assert!(row(&m, "soc_b0_h1").violation(&x) < 1e-12);
    x[v.soc[0]] = 0.7;
    assert!(row(&m, "soc_b0_h0").violation(&x) > 0.02);
}

#[test]
fn idle_battery_keeps_soc() {
    let s = scenario(3, vec![building("a", vec![1.0; 3], battery(), vec![])]);
    let m = model(&s, RunMode::Individual);
    let v = &m.catalog.buildings[0];
    let mut x: Vec<f64> = vec![0.0; m.lp.num_vars()];
    for h in 0..3 {
        x[v.soc[h]] = 0.2;
    }
    assert!(m.rows_of(RowFamily::SocRecursion).all(|r| r.violation(&x) < 1e-15));
    assert!(m.rows_of(RowFamily::TerminalSoc).all(|r| r.violation(&x) < 1e-15));
}

#[test]
fn full_battery_cannot_charge() {
    let s = scenario(2, vec![building("a", vec![1.0; 2], battery(), vec![])]);
    let m = model(&s, RunMode::Individual);
    let v = &m.catalog.buildings[0];
    let mut x: Vec<f64> = vec![0.0; m.lp.num_vars()];
    x[v.soc[0]] = 0.9;
    x[v.bs_charge[1]] = 1.0;
    assert!(row(&m, "bs_room_up_b0_h1").violation(&x) > 0.9);
    x[v.bs_charge[1]] = 0.0;
    assert!(row(&m, "bs_room_up_b0_h1").violation(&x) < 1e-12);
}

#[test]
fn zero_capacity_battery_with_power_is_rejected() {
    let mut bs = battery();
    bs.capacity_kwh = 0.0;
    let s = scenario(2, vec![building("a", vec![1.0; 2], bs, vec![])]);
    let prices = price_community(&s).unwrap();
    assert!(matches!(build(&s, &prices, RunMode::Individual), Err(Error::Build(_))));
}

#[test]
fn mismatched_lengths_are_rejected() {
    let mut s = one_building_day();
    s.tariffs.charge_eur_per_hour.pop();
    let prices = price_community(&one_building_day()).unwrap();
    assert!(matches!(build(&s, &prices, RunMode::Individual), Err(Error::Build(_))));
}

#[test]
fn community_balance_row_for_two_buildings() {
    let s = scenario(
        1,
        vec![
            building("surplus", vec![-10.0], BatterySpec::none(), vec![]),
            building("deficit", vec![8.0], BatterySpec::none(), vec![]),
        ],
    );
    let m = model(&s, RunMode::Community);
    let r = row(&m, "community_h0");
    assert_eq!(r.relation, Relation::Eq);
    assert_eq!(r.rhs, 0.0);
    let v = &m.catalog.buildings;
    let mut expected = vec![
        (v[0].comm_export[0], 1.0),
        (v[0].comm_import[0], -1.0),
        (v[1].comm_export[0], 1.0),
        (v[1].comm_import[0], -1.0),
    ];
    let mut got = r.terms.clone();
    expected.sort_by_key(|t| t.0);
    got.sort_by_key(|t| t.0);
    assert_eq!(got, expected);
    // export is limited by the surplus, the deficit building has none to export
    assert_eq!(m.lp.upper[v[0].comm_export[0]], 10.0);
    assert_eq!(m.lp.upper[v[1].comm_export[0]], 0.0);
}

#[test]
fn import_cap_grows_with_ev_charging() {
    let s = scenario(2, vec![building("a", vec![5.0, 5.0], BatterySpec::none(), vec![session(0, 2.0)])]);
    let m = model(&s, RunMode::Community);
    let v = &m.catalog.buildings[0];
    let cap = m
        .guarded
        .iter()
        .find(|g| g.row.name == "comm_import_cap_b0_h0")
        .unwrap();
    assert_eq!(cap.guard, v.comm_import[0]);
    assert_eq!(cap.row.rhs, 5.0);
    assert!(cap.row.terms.contains(&(v.ev_charge[0][0], -1.0)));
    let mut x: Vec<f64> = vec![0.0; m.lp.num_vars()];
    x[v.comm_import[0]] = 15.0;
    x[v.ev_charge[0][0]] = 10.0;
    assert!(cap.row.violation(&x) < 1e-12);
}

#[test]
fn single_building_community_has_a_trivial_balance() {
    let s = scenario(1, vec![building("a", vec![-3.0], BatterySpec::none(), vec![])]);
    let m = model(&s, RunMode::Community);
    let sol = crate::solver::solve(&m, &SolverOptions::default()).unwrap();
    let d = &sol.buildings[0];
    assert!(d.community_export_kw[0].abs() < 1e-9 && d.community_import_kw[0].abs() < 1e-9);
}

#[test]
fn hull_rows_hold_at_guard_zero() {
    // Any point with a zero flow satisfies the unconditional hull rows.
    let s = synthetic_community(5).unwrap();
    let m = model(&s, RunMode::Community);
    let mut x = m.lp.upper.iter().map(|&u| if u.is_finite() { u } else { 0.0 }).collect::<Vec<_>>();
    for v in &m.catalog.buildings {
        for h in 0..m.time.steps {
            x[v.comm_export[h]] = 0.0;
            x[v.comm_import[h]] = 0.0;
        }
    }
    for r in m.lp.rows.iter().filter(|r| r.name.contains("_hull_")) {
        assert!(r.violation(&x) < 1e-9, "{}", r.name);
    }
}

#[test]
fn lp_text_lists_pairs_and_guards() {
    let s = scenario(2, vec![building("a", vec![5.0, -5.0], battery(), vec![session(0, 2.0)])]);
    let m = model(&s, RunMode::Community);
    let text = write_lp(&m);
    assert!(text.starts_with("\\ mode: community"));
    assert!(text.contains("Subject To") && text.contains("Bounds") && text.trim_end().ends_with("End"));
    assert_eq!(text.matches(" S1:: ").count(), m.pairs.len());
    assert!(text.contains("\\ if ci_b0_h0 > 0:"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn models_are_deterministic_and_well_formed(seed in 0u64..1000, mode in 0usize..3) {
        let s = synthetic_community(seed).unwrap();
        let mode = RunMode::ALL[mode];
        let a = model(&s, mode);
        let b = model(&s, mode);
        prop_assert_eq!(&a, &b);
        let n = a.lp.num_vars();
        for r in &a.lp.rows {
            prop_assert!(!r.terms.is_empty(), "empty row {}", r.name);
            prop_assert!(r.rhs.is_finite());
            for &(j, c) in &r.terms {
                prop_assert!(j < n && c.is_finite());
            }
        }
        for p in &a.pairs {
            prop_assert!(p.first != p.second);
            prop_assert!(a.lp.lower[p.first] == 0.0 && a.lp.lower[p.second] == 0.0);
        }
        for (j, info) in a.catalog.info.iter().enumerate() {
            if info.kind != VarKind::Soc {
                prop_assert!(a.lp.lower[j] >= 0.0);
            }
        }
    }
}
