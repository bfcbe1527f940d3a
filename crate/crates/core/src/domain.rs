//! Scenario data types shared by every stage of the pipeline, plus the
//! scenario validator.
//!
//! Units: power in kW, energy in kWh, durations in hours, grid tariffs in
//! €/kWh (export tariffs negative, i.e. income), EV contract tariffs in €/h.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::ModelOptions;
use crate::solver::SolverOptions;

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub step_hours: f64,
    pub steps: usize,
    #[serde(default)]
    pub start_hour_of_day: f64,
}

impl TimeGrid {
    pub fn new(step_hours: f64, steps: usize, start_hour_of_day: f64) -> Self {
        Self {
            step_hours,
            steps,
            start_hour_of_day,
        }
    }

    /// 24 hourly steps starting at midnight.
    pub fn hourly_day() -> Self {
        Self::new(1.0, 24, 0.0)
    }

    pub fn horizon_hours(&self) -> f64 {
        self.steps as f64 * self.step_hours
    }

    /// Number of whole steps needed to cover `hours`.
    pub fn steps_covering(&self, hours: f64) -> usize {
        let raw = hours / self.step_hours;
        (raw - EPS).ceil().max(0.0) as usize
    }
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self::hourly_day()
    }
}

/// Baseline net load split into a deficit part (demand above PV) and a
/// surplus part (PV above demand), both nonnegative.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NetLoadSeries {
    pub deficit_kw: Vec<f64>,
    pub surplus_kw: Vec<f64>,
}

impl NetLoadSeries {
    /// Splits a signed series (demand − PV) into deficit and surplus magnitudes.
    pub fn from_signed(net_kw: &[f64]) -> Self {
        Self {
            deficit_kw: net_kw.iter().map(|&n| n.max(0.0)).collect(),
            surplus_kw: net_kw.iter().map(|&n| (-n).max(0.0)).collect(),
        }
    }

    pub fn from_demand_and_pv(demand_kw: &[f64], pv_kw: &[f64]) -> Self {
        let net: Vec<f64> = demand_kw.iter().zip(pv_kw).map(|(d, p)| d - p).collect();
        Self::from_signed(&net)
    }

    pub fn signed(&self) -> Vec<f64> {
        self.deficit_kw
            .iter()
            .zip(&self.surplus_kw)
            .map(|(d, s)| d - s)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.deficit_kw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deficit_kw.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatterySpec {
    pub capacity_kwh: f64,
    pub max_charge_kw: f64,
    pub max_discharge_kw: f64,
    pub one_way_efficiency: f64,
    pub soc_min: f64,
    pub soc_max: f64,
    pub soc_initial: f64,
}

impl BatterySpec {
    /// A building without stationary storage.
    pub fn none() -> Self {
        Self {
            capacity_kwh: 0.0,
            max_charge_kw: 0.0,
            max_discharge_kw: 0.0,
            one_way_efficiency: 1.0,
            soc_min: 0.0,
            soc_max: 1.0,
            soc_initial: 0.0,
        }
    }

    pub fn is_present(&self) -> bool {
        self.capacity_kwh > 0.0
    }
}

/// One parked EV and the contract its user signed for this visit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EVSession {
    pub id: String,
    pub arrival_step: usize,
    pub parking_hours: f64,
    pub requested_charge_hours: f64,
    pub max_discharge_hours: f64,
    pub max_charge_kw: f64,
    pub max_discharge_kw: f64,
    pub charger_efficiency: f64,
}

/// The steps during which an EV is plugged in. The last step may be only
/// partially covered; `last_fraction` is the covered share of it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionWindow {
    pub start: usize,
    pub end: usize,
    pub last_fraction: f64,
}

impl SessionWindow {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    pub fn contains(&self, step: usize) -> bool {
        step >= self.start && step < self.end
    }

    /// Share of `step` during which the EV is plugged in.
    pub fn availability(&self, step: usize) -> f64 {
        if !self.contains(step) {
            0.0
        } else if step + 1 == self.end {
            self.last_fraction
        } else {
            1.0
        }
    }
}

impl EVSession {
    pub fn window(&self, time: &TimeGrid) -> SessionWindow {
        let n = time.steps_covering(self.parking_hours);
        let start = self.arrival_step;
        let end = start + n;
        let last_fraction = if n == 0 {
            0.0
        } else {
            let covered = self.parking_hours - (n - 1) as f64 * time.step_hours;
            (covered / time.step_hours).clamp(0.0, 1.0)
        };
        SessionWindow {
            start,
            end,
            last_fraction,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TariffBook {
    pub grid_import_eur_per_kwh: Vec<f64>,
    pub grid_export_eur_per_kwh: Vec<f64>,
    pub grid_use_eur_per_kwh: Vec<f64>,
    pub parking_eur_per_hour: f64,
    pub flexibility_eur_per_hour: f64,
    pub charge_eur_per_hour: Vec<f64>,
    pub discharge_eur_per_hour: Vec<f64>,
}

impl TariffBook {
    /// Flat tariffs with the reference values: 122.8 €/MWh import, −35.8 €/MWh
    /// export, 50 €/MWh grid use, 0.5/−0.5 €/h parking/flexibility and
    /// 2/−3 €/h charging/discharging.
    pub fn flat_reference(steps: usize) -> Self {
        Self {
            grid_import_eur_per_kwh: vec![0.1228; steps],
            grid_export_eur_per_kwh: vec![-0.0358; steps],
            grid_use_eur_per_kwh: vec![0.050; steps],
            parking_eur_per_hour: 0.5,
            flexibility_eur_per_hour: -0.5,
            charge_eur_per_hour: vec![2.0; steps],
            discharge_eur_per_hour: vec![-3.0; steps],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildingAssets {
    pub name: String,
    pub net_load: NetLoadSeries,
    pub battery: BatterySpec,
    pub sessions: Vec<EVSession>,
}

/// Options carried by a scenario file; CLI flags override them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunOptions {
    #[serde(flatten)]
    pub model: ModelOptions,
    #[serde(flatten)]
    pub solver: SolverOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommunityScenario {
    pub time: TimeGrid,
    pub tariffs: TariffBook,
    pub buildings: Vec<BuildingAssets>,
    pub options: RunOptions,
}

/// One failed scenario invariant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    /// Machine-readable code such as `net-load-overlap`.
    pub code: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<usize>,
    pub message: String,
}

impl Violation {
    fn new(code: &'static str, message: impl Into<String>) -> Self {
        Self {
            code,
            step: None,
            message: message.into(),
        }
    }

    fn at(code: &'static str, step: usize, message: impl Into<String>) -> Self {
        Self {
            code,
            step: Some(step),
            message: message.into(),
        }
    }

    /// `code` or `code@step`.
    pub fn key(&self) -> String {
        match self.step {
            Some(step) => format!("{}@{}", self.code, step),
            None => self.code.to_string(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key(), self.message)
    }
}

fn check_series(
    out: &mut Vec<Violation>,
    name: &str,
    series: &[f64],
    steps: usize,
) -> bool {
    if series.len() != steps {
        out.push(Violation::new(
            "series-length-mismatch",
            format!("{name} has {} values, expected {steps}", series.len()),
        ));
        return false;
    }
    if let Some(h) = series.iter().position(|v| !v.is_finite()) {
        out.push(Violation::at(
            "non-finite-value",
            h,
            format!("{name} is not finite at step {h}"),
        ));
        return false;
    }
    true
}

/// Checks every scenario invariant. An empty list means the scenario is valid.
pub fn validate_scenario(scenario: &CommunityScenario) -> Vec<Violation> {
    let mut out = Vec::new();
    let time = &scenario.time;

    if !(time.step_hours > 0.0) || !time.step_hours.is_finite() {
        out.push(Violation::new(
            "time-step-nonpositive",
            format!("step_hours must be positive, got {}", time.step_hours),
        ));
    }
    if time.steps == 0 {
        out.push(Violation::new("time-steps-zero", "at least one step is required"));
    }
    if time.horizon_hours() > 24.0 + EPS {
        out.push(Violation::new(
            "time-horizon-exceeds-day",
            format!("{} steps of {} h exceed 24 h", time.steps, time.step_hours),
        ));
    }
    if !(0.0..24.0).contains(&time.start_hour_of_day) {
        out.push(Violation::new(
            "time-start-out-of-day",
            format!("start_hour_of_day {} is not in [0, 24)", time.start_hour_of_day),
        ));
    }
    let steps = time.steps;
    let time_ok = out.is_empty();

    validate_tariffs(&mut out, &scenario.tariffs, steps);

    if scenario.buildings.is_empty() {
        out.push(Violation::new("no-buildings", "a community needs at least one building"));
    }
    let mut names = HashSet::new();
    for building in &scenario.buildings {
        if !names.insert(building.name.as_str()) {
            out.push(Violation::new(
                "building-duplicate-name",
                format!("building name {:?} is used twice", building.name),
            ));
        }
        validate_building(&mut out, building, time, time_ok);
    }

    let solver = &scenario.options.solver;
    for (name, value) in [
        ("feas_tol", solver.feas_tol),
        ("opt_tol", solver.opt_tol),
        ("comp_tol", solver.comp_tol),
    ] {
        if !(value > 0.0) {
            out.push(Violation::new(
                "tolerance-nonpositive",
                format!("{name} must be positive, got {value}"),
            ));
        }
    }
    out
}

fn validate_tariffs(out: &mut Vec<Violation>, tariffs: &TariffBook, steps: usize) {
    let import_ok = check_series(out, "grid import tariff", &tariffs.grid_import_eur_per_kwh, steps);
    let export_ok = check_series(out, "grid export tariff", &tariffs.grid_export_eur_per_kwh, steps);
    let use_ok = check_series(out, "grid use tariff", &tariffs.grid_use_eur_per_kwh, steps);
    check_series(out, "EV charge tariff", &tariffs.charge_eur_per_hour, steps);
    check_series(out, "EV discharge tariff", &tariffs.discharge_eur_per_hour, steps);
    for (name, value) in [
        ("parking tariff", tariffs.parking_eur_per_hour),
        ("flexibility tariff", tariffs.flexibility_eur_per_hour),
    ] {
        if !value.is_finite() {
            out.push(Violation::new("non-finite-value", format!("{name} is not finite")));
        }
    }

    if import_ok {
        if let Some(h) = tariffs.grid_import_eur_per_kwh.iter().position(|&c| c < 0.0) {
            out.push(Violation::at(
                "grid-import-negative",
                h,
                format!(
                    "grid import tariff is {} €/kWh at step {h}",
                    tariffs.grid_import_eur_per_kwh[h]
                ),
            ));
        }
    }
    if export_ok {
        if let Some(h) = tariffs.grid_export_eur_per_kwh.iter().position(|&c| c > 0.0) {
            out.push(Violation::at(
                "grid-export-positive",
                h,
                format!(
                    "grid export tariff must be ≤ 0 (income), got {} at step {h}",
                    tariffs.grid_export_eur_per_kwh[h]
                ),
            ));
        }
    }
    if import_ok && export_ok && use_ok {
        for h in 0..steps {
            let ig = tariffs.grid_import_eur_per_kwh[h];
            let eg = tariffs.grid_export_eur_per_kwh[h];
            let g = tariffs.grid_use_eur_per_kwh[h];
            if ig - g < -eg - EPS * (1.0 + ig.abs()) {
                out.push(Violation::at(
                    "tariff-interval-empty",
                    h,
                    format!("import − grid use ({}) is below −export ({})", ig - g, -eg),
                ));
            }
        }
    }
}

fn validate_building(
    out: &mut Vec<Violation>,
    building: &BuildingAssets,
    time: &TimeGrid,
    time_ok: bool,
) {
    let name = &building.name;
    let steps = time.steps;
    let net = &building.net_load;
    let deficit_ok = check_series(out, &format!("{name} deficit"), &net.deficit_kw, steps);
    let surplus_ok = check_series(out, &format!("{name} surplus"), &net.surplus_kw, steps);
    if deficit_ok && surplus_ok {
        for h in 0..steps {
            let (d, s) = (net.deficit_kw[h], net.surplus_kw[h]);
            if d < 0.0 || s < 0.0 {
                out.push(Violation::at(
                    "net-load-negative",
                    h,
                    format!("{name}: deficit {d} / surplus {s} must be ≥ 0"),
                ));
            }
            if d > 0.0 && s > 0.0 {
                out.push(Violation::at(
                    "net-load-overlap",
                    h,
                    format!("{name}: deficit {d} and surplus {s} are both positive"),
                ));
            }
        }
    }

    let bs = &building.battery;
    let all_finite = [
        bs.capacity_kwh,
        bs.max_charge_kw,
        bs.max_discharge_kw,
        bs.one_way_efficiency,
        bs.soc_min,
        bs.soc_max,
        bs.soc_initial,
    ]
    .iter()
    .all(|v| v.is_finite());
    if !all_finite {
        out.push(Violation::new("non-finite-value", format!("{name}: battery field not finite")));
    }
    if !(0.0 <= bs.soc_min
        && bs.soc_min <= bs.soc_initial
        && bs.soc_initial <= bs.soc_max
        && bs.soc_max <= 1.0)
    {
        out.push(Violation::new(
            "battery-soc-order",
            format!(
                "{name}: need 0 ≤ soc_min ({}) ≤ soc_initial ({}) ≤ soc_max ({}) ≤ 1",
                bs.soc_min, bs.soc_initial, bs.soc_max
            ),
        ));
    }
    if !(bs.one_way_efficiency > 0.0 && bs.one_way_efficiency <= 1.0) {
        out.push(Violation::new(
            "battery-efficiency-range",
            format!("{name}: efficiency {} not in (0, 1]", bs.one_way_efficiency),
        ));
    }
    if bs.capacity_kwh < 0.0 {
        out.push(Violation::new(
            "battery-capacity-negative",
            format!("{name}: capacity {} kWh", bs.capacity_kwh),
        ));
    }
    if bs.max_charge_kw < 0.0 || bs.max_discharge_kw < 0.0 {
        out.push(Violation::new(
            "battery-power-negative",
            format!("{name}: battery power limits must be ≥ 0"),
        ));
    }
    if bs.capacity_kwh == 0.0 && (bs.max_charge_kw > 0.0 || bs.max_discharge_kw > 0.0) {
        out.push(Violation::new(
            "battery-capacity-zero-with-power",
            format!("{name}: zero-capacity battery with nonzero power limits"),
        ));
    }

    let mut ids = HashSet::new();
    for session in &building.sessions {
        if !ids.insert(session.id.as_str()) {
            out.push(Violation::new(
                "ev-duplicate-id",
                format!("{name}: EV id {:?} used twice", session.id),
            ));
        }
        validate_session(out, name, session, time, time_ok);
    }
}

fn validate_session(
    out: &mut Vec<Violation>,
    building: &str,
    s: &EVSession,
    time: &TimeGrid,
    time_ok: bool,
) {
    let who = format!("{building}/{}", s.id);
    let values = [
        s.parking_hours,
        s.requested_charge_hours,
        s.max_discharge_hours,
        s.max_charge_kw,
        s.max_discharge_kw,
    ];
    if values.iter().any(|v| !v.is_finite()) {
        out.push(Violation::new("non-finite-value", format!("{who}: non-finite field")));
        return;
    }
    if values.iter().any(|&v| v < 0.0) {
        out.push(Violation::new(
            "ev-negative-value",
            format!("{who}: durations and powers must be ≥ 0"),
        ));
    }
    if !(s.charger_efficiency > 0.0 && s.charger_efficiency <= 1.0) {
        out.push(Violation::new(
            "ev-efficiency-range",
            format!("{who}: efficiency {} not in (0, 1]", s.charger_efficiency),
        ));
    }
    if s.requested_charge_hours + s.max_discharge_hours > s.parking_hours + EPS {
        out.push(Violation::new(
            "ev-periods-exceed-parking",
            format!(
                "{who}: charge {} h + discharge {} h exceed parking {} h",
                s.requested_charge_hours, s.max_discharge_hours, s.parking_hours
            ),
        ));
    }
    if s.requested_charge_hours > 0.0 && s.max_charge_kw <= 0.0 {
        out.push(Violation::new(
            "ev-zero-power-with-request",
            format!("{who}: charging requested with a zero charging power limit"),
        ));
    }
    if time_ok && s.arrival_step + time.steps_covering(s.parking_hours) > time.steps {
        out.push(Violation::new(
            "ev-window-exceeds-horizon",
            format!(
                "{who}: arrival step {} + {} h parking does not fit {} steps",
                s.arrival_step, s.parking_hours, time.steps
            ),
        ));
    }
}
