//! Cost tables, dispatch series and price reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::domain::CommunityScenario;
use crate::error::{Error, Result};
use crate::ev_contract::{session_revenue, SessionLedger};
use crate::model::RunMode;
use crate::solver::{BuildingCost, DispatchSolution};
use crate::tariff::{weighted_mean, CommunityPrices};

/// Agreement required between recomputed costs and the solver's objective.
pub const COST_TOL: f64 = 1e-6;

/// Recomputes each building's electricity cost and EV revenue from the raw
/// dispatch, independently of the model's cost rows.
pub fn recompute_costs(
    scenario: &CommunityScenario,
    prices: &CommunityPrices,
    solution: &DispatchSolution,
) -> Result<Vec<BuildingCost>> {
    check_shape(scenario, solution)?;
    let t = &scenario.tariffs;
    let dt = scenario.time.step_hours;
    let verbatim = scenario.options.model.eq2_verbatim;
    let community = solution.mode == RunMode::Community;
    let mut out = Vec::with_capacity(scenario.buildings.len());
    for (b, d) in scenario.buildings.iter().zip(&solution.buildings) {
        let mut electricity = 0.0;
        for h in 0..scenario.time.steps {
            let (c_ig, c_eg) = (t.grid_import_eur_per_kwh[h], t.grid_export_eur_per_kwh[h]);
            let (c_ic, c_ec) = if community {
                (prices.import_eur_per_kwh[h], prices.export_eur_per_kwh[h])
            } else {
                (0.0, 0.0)
            };
            let ev_c: f64 = d.ev_charge_kw.iter().map(|s| s[h]).sum();
            let ev_d: f64 = d.ev_discharge_kw.iter().map(|s| s[h]).sum();
            electricity += if verbatim {
                dt * (b.net_load.deficit_kw[h] * c_ig + b.net_load.surplus_kw[h] * c_eg
                    + d.community_import_kw[h] * (c_ic - c_ig)
                    + d.community_export_kw[h] * (c_ec - c_eg)
                    - (d.battery_discharge_kw[h] + ev_d) * c_ig
                    - (d.battery_charge_kw[h] + ev_c) * c_eg)
            } else {
                dt * (d.grid_import_kw[h] * c_ig
                    + d.grid_export_kw[h] * c_eg
                    + d.community_import_kw[h] * c_ic
                    + d.community_export_kw[h] * c_ec)
            };
        }
        let mut revenue = 0.0;
        if solution.mode != RunMode::Baseline {
            for (n, session) in b.sessions.iter().enumerate() {
                let ledger = SessionLedger::from_powers(
                    session,
                    &d.ev_charge_kw[n],
                    &d.ev_discharge_kw[n],
                    &scenario.time,
                )?;
                revenue += session_revenue(session, &ledger, t)?;
            }
        }
        out.push(BuildingCost {
            electricity_eur: electricity,
            ev_revenue_eur: revenue,
        });
    }
    let total: f64 = out.iter().map(BuildingCost::net_eur).sum();
    if (total - solution.objective_eur).abs() > COST_TOL * (1.0 + total.abs()) {
        return Err(Error::CostMismatch {
            reported: total,
            solver: solution.objective_eur,
        });
    }
    Ok(out)
}

fn check_shape(scenario: &CommunityScenario, solution: &DispatchSolution) -> Result<()> {
    let names_match = scenario.buildings.len() == solution.buildings.len()
        && scenario
            .buildings
            .iter()
            .zip(&solution.buildings)
            .all(|(b, d)| b.name == d.name && b.sessions.len() == d.ev_charge_kw.len());
    if !names_match {
        return Err(Error::ModeMismatch(format!(
            "{} solution does not belong to this scenario",
            solution.mode
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeCost {
    pub electricity_eur: f64,
    pub ev_revenue_eur: f64,
    pub objective_eur: f64,
}

impl ModeCost {
    fn from_cost(c: &BuildingCost) -> Self {
        Self {
            electricity_eur: c.electricity_eur,
            ev_revenue_eur: c.ev_revenue_eur,
            objective_eur: c.net_eur(),
        }
    }

    fn add(&mut self, other: &ModeCost) {
        self.electricity_eur += other.electricity_eur;
        self.ev_revenue_eur += other.ev_revenue_eur;
        self.objective_eur += other.objective_eur;
    }
}

/// Percent reductions; positive means the second scenario is cheaper.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Deltas {
    /// Objective (electricity minus EV revenue) against baseline electricity.
    pub individual_objective_vs_baseline_pct: Option<f64>,
    pub community_objective_vs_baseline_pct: Option<f64>,
    /// Electricity cost alone against baseline electricity.
    pub individual_electricity_vs_baseline_pct: Option<f64>,
    pub community_electricity_vs_baseline_pct: Option<f64>,
    pub community_electricity_vs_individual_pct: Option<f64>,
    pub community_objective_vs_individual_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BuildingRow {
    pub name: String,
    pub baseline_electricity_eur: Option<f64>,
    pub modes: BTreeMap<RunMode, ModeCost>,
    pub deltas: Deltas,
}

impl BuildingRow {
    pub fn mode(&self, mode: RunMode) -> Option<&ModeCost> {
        self.modes.get(&mode)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceSummary {
    /// Community export tariff weighted by community surplus (€/MWh).
    pub mean_export_by_surplus_eur_mwh: f64,
    /// Community import tariff weighted by community deficit (€/MWh).
    pub mean_import_by_deficit_eur_mwh: f64,
    /// Export tariff weighted by energy actually traded, when a community run exists.
    pub mean_export_traded_eur_mwh: Option<f64>,
    pub mean_import_traded_eur_mwh: Option<f64>,
    pub traded_kwh: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostBreakdown {
    pub buildings: Vec<BuildingRow>,
    pub total: BuildingRow,
    pub prices: PriceSummary,
}

fn reduction_pct(reference: Option<f64>, value: Option<f64>) -> Option<f64> {
    match (reference, value) {
        (Some(r), Some(v)) if r.abs() > 1e-12 => Some((r - v) / r.abs() * 100.0),
        _ => None,
    }
}

fn row(name: String, modes: BTreeMap<RunMode, ModeCost>) -> BuildingRow {
    let get = |m: RunMode, f: fn(&ModeCost) -> f64| modes.get(&m).map(f);
    let elec = |c: &ModeCost| c.electricity_eur;
    let obj = |c: &ModeCost| c.objective_eur;
    let base = get(RunMode::Baseline, elec);
    let deltas = Deltas {
        individual_objective_vs_baseline_pct: reduction_pct(base, get(RunMode::Individual, obj)),
        community_objective_vs_baseline_pct: reduction_pct(base, get(RunMode::Community, obj)),
        individual_electricity_vs_baseline_pct: reduction_pct(base, get(RunMode::Individual, elec)),
        community_electricity_vs_baseline_pct: reduction_pct(base, get(RunMode::Community, elec)),
        community_electricity_vs_individual_pct: reduction_pct(
            get(RunMode::Individual, elec),
            get(RunMode::Community, elec),
        ),
        community_objective_vs_individual_pct: reduction_pct(
            get(RunMode::Individual, obj),
            get(RunMode::Community, obj),
        ),
    };
    BuildingRow {
        name,
        baseline_electricity_eur: base,
        modes,
        deltas,
    }
}

/// Builds the per-building cost table for any subset of the three runs.
/// Costs are recomputed from each dispatch and must match the solver.
pub fn summarize(
    scenario: &CommunityScenario,
    prices: &CommunityPrices,
    solutions: &[&DispatchSolution],
) -> Result<CostBreakdown> {
    let mut per_mode: BTreeMap<RunMode, Vec<BuildingCost>> = BTreeMap::new();
    for s in solutions {
        if per_mode.contains_key(&s.mode) {
            return Err(Error::ModeMismatch(format!("two {} solutions given", s.mode)));
        }
        let costs = recompute_costs(scenario, prices, s)?;
        if let Some(b) = costs.iter().position(|c| c.ev_revenue_eur != 0.0) {
            if s.mode == RunMode::Baseline {
                return Err(Error::ModeMismatch(format!(
                    "baseline solution carries EV revenue at {}",
                    scenario.buildings[b].name
                )));
            }
        }
        per_mode.insert(s.mode, costs);
    }

    let mut totals: BTreeMap<RunMode, ModeCost> = BTreeMap::new();
    let mut buildings = Vec::with_capacity(scenario.buildings.len());
    for (i, b) in scenario.buildings.iter().enumerate() {
        let modes: BTreeMap<RunMode, ModeCost> = per_mode
            .iter()
            .map(|(&m, costs)| (m, ModeCost::from_cost(&costs[i])))
            .collect();
        for (&m, c) in &modes {
            totals
                .entry(m)
                .or_insert(ModeCost {
                    electricity_eur: 0.0,
                    ev_revenue_eur: 0.0,
                    objective_eur: 0.0,
                })
                .add(c);
        }
        buildings.push(row(b.name.clone(), modes));
    }

    let community = solutions.iter().find(|s| s.mode == RunMode::Community);
    let traded = community.map(|s| traded_means(prices, s));
    Ok(CostBreakdown {
        buildings,
        total: row("total".into(), totals),
        prices: PriceSummary {
            mean_export_by_surplus_eur_mwh: prices.mean_export_by_surplus(scenario) * 1e3,
            mean_import_by_deficit_eur_mwh: prices.mean_import_by_deficit(scenario) * 1e3,
            mean_export_traded_eur_mwh: traded.and_then(|t| t.0),
            mean_import_traded_eur_mwh: traded.and_then(|t| t.1),
            traded_kwh: traded.map(|t| t.2),
        },
    })
}

fn traded_means(prices: &CommunityPrices, s: &DispatchSolution) -> (Option<f64>, Option<f64>, f64) {
    let steps = prices.steps();
    let exported: Vec<f64> = (0..steps)
        .map(|h| s.buildings.iter().map(|b| b.community_export_kw[h]).sum())
        .collect();
    let imported: Vec<f64> = (0..steps)
        .map(|h| s.buildings.iter().map(|b| b.community_import_kw[h]).sum())
        .collect();
    let total: f64 = exported.iter().sum();
    let mean = |v: &[f64], w: &[f64]| {
        (w.iter().sum::<f64>() > 0.0).then(|| weighted_mean(v, w) * 1e3)
    };
    (
        mean(&prices.export_eur_per_kwh, &exported),
        mean(&prices.import_eur_per_kwh, &imported),
        total,
    )
}

/// Fixed six-decimal rendering without a negative zero.
pub fn fixed(v: f64) -> String {
    let s = format!("{v:.6}");
    if s.starts_with('-') && s[1..].bytes().all(|c| c == b'0' || c == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn cell(v: Option<f64>, decimals: usize) -> String {
    match v {
        Some(x) => {
            let s = format!("{x:.decimals$}");
            if s.starts_with('-') && s[1..].bytes().all(|c| c == b'0' || c == b'.') {
                s[1..].to_string()
            } else {
                s
            }
        }
        None => "-".into(),
    }
}

impl CostBreakdown {
    /// Aligned plain-text table, one row per building plus the total.
    pub fn to_text(&self) -> String {
        let modes: Vec<RunMode> = self.total.modes.keys().copied().collect();
        let mut header = vec!["building".to_string()];
        for m in &modes {
            header.push(format!("{m} C_E"));
            if *m != RunMode::Baseline {
                header.push(format!("{m} C_EV"));
                header.push(format!("{m} obj"));
            }
        }
        header.push("comm vs indiv C_E %".into());
        header.push("comm obj vs base C_E %".into());

        let mut rows = vec![header];
        for r in self.buildings.iter().chain(std::iter::once(&self.total)) {
            let mut line = vec![r.name.clone()];
            for m in &modes {
                let c = r.modes.get(m);
                line.push(cell(c.map(|c| c.electricity_eur), 2));
                if *m != RunMode::Baseline {
                    line.push(cell(c.map(|c| c.ev_revenue_eur), 2));
                    line.push(cell(c.map(|c| c.objective_eur), 2));
                }
            }
            line.push(cell(r.deltas.community_electricity_vs_individual_pct, 2));
            line.push(cell(r.deltas.community_objective_vs_baseline_pct, 2));
            rows.push(line);
        }
        let widths: Vec<usize> = (0..rows[0].len())
            .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for (i, r) in rows.iter().enumerate() {
            let cells: Vec<String> = r
                .iter()
                .enumerate()
                .map(|(c, s)| {
                    if c == 0 {
                        format!("{s:<w$}", w = widths[c])
                    } else {
                        format!("{s:>w$}", w = widths[c])
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
            if i == 0 {
                let total: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
                let _ = writeln!(out, "{}", "-".repeat(total));
            }
        }
        let p = &self.prices;
        let _ = writeln!(
            out,
            "\ncommunity export tariff (surplus-weighted): {} EUR/MWh",
            cell(Some(p.mean_export_by_surplus_eur_mwh), 2)
        );
        let _ = writeln!(
            out,
            "community import tariff (deficit-weighted): {} EUR/MWh",
            cell(Some(p.mean_import_by_deficit_eur_mwh), 2)
        );
        if let Some(kwh) = p.traded_kwh {
            let _ = writeln!(
                out,
                "traded in community: {} kWh, export {} EUR/MWh, import {} EUR/MWh",
                cell(Some(kwh), 2),
                cell(p.mean_export_traded_eur_mwh, 2),
                cell(p.mean_import_traded_eur_mwh, 2)
            );
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse {
            path: "<cost breakdown>".into(),
            message: e.to_string(),
        })
    }
}

fn csv_error(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::io(path, std::io::Error::other(e.to_string()))
}

pub const DISPATCH_HEADER: [&str; 10] = [
    "step",
    "building",
    "net_grid_kw",
    "bs_charge_kw",
    "bs_discharge_kw",
    "ev_charge_kw",
    "ev_discharge_kw",
    "comm_export_kw",
    "comm_import_kw",
    "soc",
];

/// Writes one row per step and building; EV columns sum over the building's sessions.
pub fn write_dispatch_csv<W: Write>(solution: &DispatchSolution, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DISPATCH_HEADER)?;
    let steps = solution.buildings.first().map_or(0, |b| b.soc.len());
    for h in 0..steps {
        for b in &solution.buildings {
            let ev_c: f64 = b.ev_charge_kw.iter().map(|s| s[h]).sum();
            let ev_d: f64 = b.ev_discharge_kw.iter().map(|s| s[h]).sum();
            w.write_record([
                h.to_string(),
                b.name.clone(),
                fixed(b.grid_import_kw[h] - b.grid_export_kw[h]),
                fixed(b.battery_charge_kw[h]),
                fixed(b.battery_discharge_kw[h]),
                fixed(ev_c),
                fixed(ev_d),
                fixed(b.community_export_kw[h]),
                fixed(b.community_import_kw[h]),
                fixed(b.soc[h]),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn export_dispatch_csv(solution: &DispatchSolution, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_dispatch_csv(solution, std::io::BufWriter::new(file)).map_err(|e| csv_error(path, e))
}

pub fn write_prices_csv<W: Write>(prices: &CommunityPrices, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step", "ratio", "c_ec_eur_mwh", "c_ic_eur_mwh"])?;
    for h in 0..prices.steps() {
        w.write_record([
            h.to_string(),
            fixed(prices.surplus_ratio[h]),
            fixed(prices.export_eur_per_kwh[h] * 1e3),
            fixed(prices.import_eur_per_kwh[h] * 1e3),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn export_prices_csv(prices: &CommunityPrices, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_prices_csv(prices, std::io::BufWriter::new(file)).map_err(|e| csv_error(path, e))
}
