//! LP and mixed-complementarity solving.

mod branch;
mod lp;
mod lu;
mod simplex;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use lp::{LinearProgram, LpSolution, LpStatus, Relation, Row, RowFamily};
pub use lu::{LuFactor, Singular};
pub use simplex::{Basis, SimplexOptions};

use crate::error::Result;
use crate::model::{MilpModel, PairFamily, RunMode};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub feas_tol: f64,
    pub opt_tol: f64,
    /// Largest value the smaller member of a complementarity pair may take.
    pub comp_tol: f64,
    pub max_nodes: usize,
    pub time_limit_seconds: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-7,
            opt_tol: 1e-7,
            comp_tol: 1e-5,
            max_nodes: 10_000,
            time_limit_seconds: None,
        }
    }
}

impl SolverOptions {
    pub fn simplex(&self) -> SimplexOptions {
        SimplexOptions {
            feas_tol: self.feas_tol,
            opt_tol: self.opt_tol,
            ..SimplexOptions::default()
        }
    }
}

pub fn solve_lp(lp: &LinearProgram, options: &SolverOptions) -> Result<LpSolution> {
    simplex::solve_lp(lp, &options.simplex())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BuildingDispatch {
    pub name: String,
    pub grid_import_kw: Vec<f64>,
    pub grid_export_kw: Vec<f64>,
    pub battery_charge_kw: Vec<f64>,
    pub battery_discharge_kw: Vec<f64>,
    pub soc: Vec<f64>,
    pub community_export_kw: Vec<f64>,
    pub community_import_kw: Vec<f64>,
    pub ev_charge_kw: Vec<Vec<f64>>,
    pub ev_discharge_kw: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BuildingCost {
    pub electricity_eur: f64,
    pub ev_revenue_eur: f64,
}

impl BuildingCost {
    pub fn net_eur(&self) -> f64 {
        self.electricity_eur - self.ev_revenue_eur
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispatchSolution {
    pub mode: RunMode,
    pub objective_eur: f64,
    /// True when the node or time limit stopped the search before optimality was proven.
    pub limit_reached: bool,
    /// Best lower bound on the objective still open when the search stopped.
    pub best_bound_eur: f64,
    pub nodes: usize,
    pub lp_iterations: usize,
    #[serde(skip)]
    pub values: Vec<f64>,
    pub buildings: Vec<BuildingDispatch>,
    pub costs: Vec<BuildingCost>,
}

impl DispatchSolution {
    pub fn from_values(model: &MilpModel, values: Vec<f64>) -> Self {
        let pick = |ids: &[usize]| ids.iter().map(|&j| values[j]).collect::<Vec<f64>>();
        let buildings = model
            .catalog
            .buildings
            .iter()
            .map(|v| BuildingDispatch {
                name: v.name.clone(),
                grid_import_kw: pick(&v.grid_import),
                grid_export_kw: pick(&v.grid_export),
                battery_charge_kw: pick(&v.bs_charge),
                battery_discharge_kw: pick(&v.bs_discharge),
                soc: pick(&v.soc),
                community_export_kw: pick(&v.comm_export),
                community_import_kw: pick(&v.comm_import),
                ev_charge_kw: v.ev_charge.iter().map(|ids| pick(ids)).collect(),
                ev_discharge_kw: v.ev_discharge.iter().map(|ids| pick(ids)).collect(),
            })
            .collect();
        let costs = model
            .costs
            .iter()
            .map(|c| BuildingCost {
                electricity_eur: c.electricity.eval(&values),
                ev_revenue_eur: c.ev_revenue.eval(&values),
            })
            .collect();
        let objective = model.lp.objective(&values);
        DispatchSolution {
            mode: model.mode,
            objective_eur: objective,
            limit_reached: false,
            best_bound_eur: objective,
            nodes: 0,
            lp_iterations: 0,
            values,
            buildings,
            costs,
        }
    }

    pub fn total_electricity_eur(&self) -> f64 {
        self.costs.iter().map(|c| c.electricity_eur).sum()
    }

    pub fn total_ev_revenue_eur(&self) -> f64 {
        self.costs.iter().map(|c| c.ev_revenue_eur).sum()
    }
}

/// Solves the model to optimality over its complementarity pairs and guarded rows.
pub fn solve(model: &MilpModel, options: &SolverOptions) -> Result<DispatchSolution> {
    let outcome = branch::branch_and_bound(model, options)?;
    let mut solution = DispatchSolution::from_values(model, outcome.values);
    solution.limit_reached = outcome.limit_reached;
    solution.best_bound_eur = outcome.best_bound;
    solution.nodes = outcome.nodes;
    solution.lp_iterations = outcome.iterations;
    Ok(solution)
}

/// Worst residuals of a candidate dispatch, computed directly from the model rows.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerificationReport {
    pub row_residuals: BTreeMap<RowFamily, f64>,
    pub bound_violation: f64,
    pub complementarity: BTreeMap<PairFamily, f64>,
    pub guarded_violation: f64,
    pub objective_gap: f64,
}

impl VerificationReport {
    /// Names of the checks whose residual exceeds `tol`.
    pub fn failures(&self, tol: f64) -> Vec<String> {
        let mut out: Vec<String> = self
            .row_residuals
            .iter()
            .filter(|(_, &r)| r > tol)
            .map(|(f, _)| f.name().to_string())
            .collect();
        if self.bound_violation > tol {
            out.push("bounds".into());
        }
        for (fam, &r) in &self.complementarity {
            if r > tol {
                out.push(format!("complementarity-{fam:?}").to_lowercase());
            }
        }
        if self.guarded_violation > tol {
            out.push(RowFamily::CommunityCap.name().into());
        }
        if self.objective_gap > tol {
            out.push("objective".into());
        }
        out
    }

    pub fn is_clean(&self, tol: f64) -> bool {
        self.failures(tol).is_empty()
    }
}

/// Re-checks every row, bound, complementarity pair and guarded row of `model` at `solution`.
/// A guarded row counts as violated only while its guard exceeds `comp_tol`.
pub fn verify(model: &MilpModel, solution: &DispatchSolution, comp_tol: f64) -> VerificationReport {
    let x = &solution.values;
    let lp = &model.lp;
    let mut report = VerificationReport::default();
    for row in &lp.rows {
        let r = row.violation(x);
        let e = report.row_residuals.entry(row.family).or_insert(0.0);
        *e = e.max(r);
    }
    for j in 0..lp.num_vars() {
        let v = (lp.lower[j] - x[j]).max(x[j] - lp.upper[j]).max(0.0);
        report.bound_violation = report.bound_violation.max(v);
    }
    for p in &model.pairs {
        let v = x[p.first].min(x[p.second]).max(0.0);
        let e = report.complementarity.entry(p.family).or_insert(0.0);
        *e = e.max(v);
    }
    for g in &model.guarded {
        if x[g.guard] > comp_tol {
            report.guarded_violation = report.guarded_violation.max(g.row.violation(x));
        }
    }
    report.objective_gap = (lp.objective(x) - solution.objective_eur).abs();
    report
}
