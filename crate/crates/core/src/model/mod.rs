//! Assembly of the community scheduling problem.
//!
//! Every building gets grid import/export flows tied to its net load by a
//! power-balance row, plus battery, EV and community-exchange variables.
//! Charge/discharge and import/export exclusivity is not written as binary
//! variables; the pairs are registered and enforced by the solver only when
//! the LP relaxation violates them. The community caps on exchange flows
//! are likewise registered as guarded rows that bind only while their flow
//! is positive.

mod lp_format;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use lp_format::write_lp;

use crate::domain::{CommunityScenario, EVSession, TimeGrid};
use crate::error::{Error, Result};
use crate::ev_contract::CompensationMode;
use crate::solver::{LinearProgram, Relation, Row, RowFamily};
use crate::tariff::{CommunityPrices, RatioForm};

const INF: f64 = f64::INFINITY;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    /// No flexibility: batteries, EVs and community exchange all idle.
    Baseline,
    /// Batteries and EVs scheduled per building, no community exchange.
    Individual,
    /// Batteries, EVs and community exchange scheduled jointly.
    Community,
}

impl RunMode {
    pub const ALL: [RunMode; 3] = [RunMode::Baseline, RunMode::Individual, RunMode::Community];

    pub fn name(self) -> &'static str {
        match self {
            RunMode::Baseline => "baseline",
            RunMode::Individual => "individual",
            RunMode::Community => "community",
        }
    }
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RunMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(RunMode::Baseline),
            "individual" => Ok(RunMode::Individual),
            "community" => Ok(RunMode::Community),
            other => Err(Error::Domain(format!("unknown run mode {other:?}"))),
        }
    }
}

/// Whether the battery must end the day at least as full as it started.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TerminalSoc {
    Free,
    #[default]
    Restore,
}

impl FromStr for TerminalSoc {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "free" => Ok(TerminalSoc::Free),
            "restore" => Ok(TerminalSoc::Restore),
            other => Err(Error::Domain(format!("unknown terminal SoC rule {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelOptions {
    pub compensation: CompensationMode,
    /// Price flows with the residual-based electricity cost instead of
    /// explicit grid import/export variables.
    pub eq2_verbatim: bool,
    pub terminal_soc: TerminalSoc,
    pub ratio_form: RatioForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarKind {
    GridImport,
    GridExport,
    BsCharge,
    BsDischarge,
    Soc,
    CommExport,
    CommImport,
    EvCharge,
    EvDischarge,
}

impl VarKind {
    fn prefix(self) -> &'static str {
        match self {
            VarKind::GridImport => "gi",
            VarKind::GridExport => "ge",
            VarKind::BsCharge => "bsc",
            VarKind::BsDischarge => "bsd",
            VarKind::Soc => "soc",
            VarKind::CommExport => "ce",
            VarKind::CommImport => "ci",
            VarKind::EvCharge => "evc",
            VarKind::EvDischarge => "evd",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarInfo {
    pub kind: VarKind,
    pub building: usize,
    pub session: Option<usize>,
    pub step: usize,
}

/// Variable indices of one building; `soc[h]` is the state of charge at the end of step `h`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BuildingVars {
    pub name: String,
    pub grid_import: Vec<usize>,
    pub grid_export: Vec<usize>,
    pub bs_charge: Vec<usize>,
    pub bs_discharge: Vec<usize>,
    pub soc: Vec<usize>,
    pub comm_export: Vec<usize>,
    pub comm_import: Vec<usize>,
    pub ev_charge: Vec<Vec<usize>>,
    pub ev_discharge: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VariableCatalog {
    pub info: Vec<VarInfo>,
    pub buildings: Vec<BuildingVars>,
}

impl VariableCatalog {
    pub fn len(&self) -> usize {
        self.info.len()
    }

    pub fn is_empty(&self) -> bool {
        self.info.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PairFamily {
    Ev,
    Battery,
    Community,
}

/// Two nonnegative variables that may not both be positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplementarityPair {
    pub first: usize,
    pub second: usize,
    pub family: PairFamily,
}

/// A row that must hold only while `guard` is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct GuardedRow {
    pub guard: usize,
    pub row: Row,
}

/// Affine expression over model variables.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearExpr {
    pub constant: f64,
    pub terms: Vec<(usize, f64)>,
}

impl LinearExpr {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(j, a)| a * x[j]).sum::<f64>()
    }

    fn add(&mut self, var: usize, coef: f64) {
        if coef != 0.0 {
            self.terms.push((var, coef));
        }
    }
}

/// Electricity cost and EV revenue of one building as functions of the dispatch.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BuildingCostTerms {
    pub electricity: LinearExpr,
    pub ev_revenue: LinearExpr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpModel {
    pub mode: RunMode,
    pub options: ModelOptions,
    pub time: TimeGrid,
    pub lp: LinearProgram,
    pub pairs: Vec<ComplementarityPair>,
    pub guarded: Vec<GuardedRow>,
    pub catalog: VariableCatalog,
    pub costs: Vec<BuildingCostTerms>,
}

impl MilpModel {
    /// Variables whose bounds leave room to move.
    pub fn free_var_count(&self) -> usize {
        (0..self.lp.num_vars()).filter(|&j| !self.lp.is_fixed(j)).count()
    }

    pub fn rows_of(&self, family: RowFamily) -> impl Iterator<Item = &Row> {
        self.lp.rows.iter().filter(move |r| r.family == family)
    }
}

struct Builder<'a> {
    scenario: &'a CommunityScenario,
    mode: RunMode,
    options: ModelOptions,
    lp: LinearProgram,
    catalog: VariableCatalog,
    pairs: Vec<ComplementarityPair>,
    guarded: Vec<GuardedRow>,
    costs: Vec<BuildingCostTerms>,
}

/// Builds the scheduling problem for `mode` with the scenario's own model options.
pub fn build(scenario: &CommunityScenario, prices: &CommunityPrices, mode: RunMode) -> Result<MilpModel> {
    build_with(scenario, prices, mode, scenario.options.model)
}

pub fn build_with(
    scenario: &CommunityScenario,
    prices: &CommunityPrices,
    mode: RunMode,
    options: ModelOptions,
) -> Result<MilpModel> {
    check_lengths(scenario, prices, mode)?;
    let mut b = Builder {
        scenario,
        mode,
        options,
        lp: LinearProgram::new(),
        catalog: VariableCatalog::default(),
        pairs: Vec::new(),
        guarded: Vec::new(),
        costs: Vec::new(),
    };
    b.add_variables()?;
    for bi in 0..scenario.buildings.len() {
        b.add_power_balance(bi);
        if mode != RunMode::Baseline {
            b.add_storage_constraints(bi)?;
            for n in 0..scenario.buildings[bi].sessions.len() {
                b.add_ev_constraints(bi, n);
            }
        }
    }
    if mode == RunMode::Community {
        b.add_community_constraints();
    }
    b.add_costs(prices);
    Ok(b.finish())
}

fn check_lengths(scenario: &CommunityScenario, prices: &CommunityPrices, mode: RunMode) -> Result<()> {
    let steps = scenario.time.steps;
    let bad = |what: &str, len: usize| {
        Err(Error::Build(format!("{what} has {len} values, expected {steps}")))
    };
    let t = &scenario.tariffs;
    for (what, series) in [
        ("grid import tariff", &t.grid_import_eur_per_kwh),
        ("grid export tariff", &t.grid_export_eur_per_kwh),
        ("grid use tariff", &t.grid_use_eur_per_kwh),
        ("EV charge tariff", &t.charge_eur_per_hour),
        ("EV discharge tariff", &t.discharge_eur_per_hour),
    ] {
        if series.len() != steps {
            return bad(what, series.len());
        }
    }
    for building in &scenario.buildings {
        let net = &building.net_load;
        if net.deficit_kw.len() != steps || net.surplus_kw.len() != steps {
            return bad(&format!("net load of {}", building.name), net.len());
        }
        for s in &building.sessions {
            if s.arrival_step + scenario.time.steps_covering(s.parking_hours) > steps {
                return Err(Error::Build(format!(
                    "EV {} of {} does not fit the horizon",
                    s.id, building.name
                )));
            }
        }
    }
    if mode == RunMode::Community
        && (prices.export_eur_per_kwh.len() != steps || prices.import_eur_per_kwh.len() != steps)
    {
        return bad("community prices", prices.steps());
    }
    Ok(())
}

impl Builder<'_> {
    fn var(&mut self, kind: VarKind, building: usize, session: Option<usize>, step: usize, lo: f64, hi: f64) -> usize {
        let name = match session {
            Some(n) => format!("{}_b{building}_n{n}_h{step}", kind.prefix()),
            None => format!("{}_b{building}_h{step}", kind.prefix()),
        };
        let id = self.lp.add_var(name, lo, hi, 0.0);
        self.catalog.info.push(VarInfo {
            kind,
            building,
            session,
            step,
        });
        id
    }

    fn add_variables(&mut self) -> Result<()> {
        let steps = self.scenario.time.steps;
        let flexible = self.mode != RunMode::Baseline;
        let community = self.mode == RunMode::Community;
        for (bi, building) in self.scenario.buildings.iter().enumerate() {
            let bs = &building.battery;
            if bs.capacity_kwh <= 0.0 && (bs.max_charge_kw > 0.0 || bs.max_discharge_kw > 0.0) {
                return Err(Error::Build(format!(
                    "{}: zero-capacity battery with nonzero power limits",
                    building.name
                )));
            }
            let has_bs = flexible && bs.is_present();
            let mut vars = BuildingVars {
                name: building.name.clone(),
                ..Default::default()
            };
            for h in 0..steps {
                let (gi_lo, gi_hi, ge_lo, ge_hi) = if flexible {
                    (0.0, INF, 0.0, INF)
                } else {
                    let l_plus = building.net_load.deficit_kw[h];
                    let l_minus = building.net_load.surplus_kw[h];
                    (l_plus, l_plus, l_minus, l_minus)
                };
                vars.grid_import.push(self.var(VarKind::GridImport, bi, None, h, gi_lo, gi_hi));
                vars.grid_export.push(self.var(VarKind::GridExport, bi, None, h, ge_lo, ge_hi));
                let (c_hi, d_hi) = if has_bs {
                    (bs.max_charge_kw, bs.max_discharge_kw)
                } else {
                    (0.0, 0.0)
                };
                vars.bs_charge.push(self.var(VarKind::BsCharge, bi, None, h, 0.0, c_hi));
                vars.bs_discharge.push(self.var(VarKind::BsDischarge, bi, None, h, 0.0, d_hi));
                let (s_lo, s_hi) = if has_bs {
                    (bs.soc_min, bs.soc_max)
                } else {
                    (bs.soc_initial, bs.soc_initial)
                };
                vars.soc.push(self.var(VarKind::Soc, bi, None, h, s_lo, s_hi));
                // Export never exceeds the surplus: the export cap with
                // nonnegative battery and EV charging implies it.
                let (e_hi, i_hi) = if community {
                    (building.net_load.surplus_kw[h], INF)
                } else {
                    (0.0, 0.0)
                };
                vars.comm_export.push(self.var(VarKind::CommExport, bi, None, h, 0.0, e_hi));
                vars.comm_import.push(self.var(VarKind::CommImport, bi, None, h, 0.0, i_hi));
            }
            for (n, session) in building.sessions.iter().enumerate() {
                let window = session.window(&self.scenario.time);
                let mut charge = Vec::with_capacity(steps);
                let mut discharge = Vec::with_capacity(steps);
                for h in 0..steps {
                    let avail = if flexible { window.availability(h) } else { 0.0 };
                    let d_avail = if session.max_discharge_hours > 0.0 { avail } else { 0.0 };
                    charge.push(self.var(VarKind::EvCharge, bi, Some(n), h, 0.0, session.max_charge_kw * avail));
                    discharge.push(self.var(
                        VarKind::EvDischarge,
                        bi,
                        Some(n),
                        h,
                        0.0,
                        session.max_discharge_kw * d_avail,
                    ));
                }
                vars.ev_charge.push(charge);
                vars.ev_discharge.push(discharge);
            }
            self.catalog.buildings.push(vars);
        }
        Ok(())
    }

    /// grid_import − grid_export = L⁺ − L⁻ + battery, EV and community net draw.
    fn add_power_balance(&mut self, bi: usize) {
        let building = &self.scenario.buildings[bi];
        let v = &self.catalog.buildings[bi];
        for h in 0..self.scenario.time.steps {
            let mut terms = vec![
                (v.grid_import[h], 1.0),
                (v.grid_export[h], -1.0),
                (v.bs_charge[h], -1.0),
                (v.bs_discharge[h], 1.0),
                (v.comm_export[h], -1.0),
                (v.comm_import[h], 1.0),
            ];
            for n in 0..v.ev_charge.len() {
                terms.push((v.ev_charge[n][h], -1.0));
                terms.push((v.ev_discharge[n][h], 1.0));
            }
            let rhs = building.net_load.deficit_kw[h] - building.net_load.surplus_kw[h];
            self.lp.add_row(
                format!("balance_b{bi}_h{h}"),
                RowFamily::PowerBalance,
                terms,
                Relation::Eq,
                rhs,
            );
        }
    }

    fn add_storage_constraints(&mut self, bi: usize) -> Result<()> {
        let bs = &self.scenario.buildings[bi].battery;
        if !bs.is_present() {
            return Ok(());
        }
        let dt = self.scenario.time.step_hours;
        let e = bs.capacity_kwh;
        let eta = bs.one_way_efficiency;
        let v = self.catalog.buildings[bi].clone();
        let steps = self.scenario.time.steps;
        for h in 0..steps {
            let (c, d, s) = (v.bs_charge[h], v.bs_discharge[h], v.soc[h]);
            let prev = if h == 0 { None } else { Some(v.soc[h - 1]) };

            let mut terms = vec![(s, 1.0), (c, -eta * dt / e), (d, dt / e)];
            let mut rhs = 0.0;
            match prev {
                Some(p) => terms.push((p, -1.0)),
                None => rhs = bs.soc_initial,
            }
            self.lp.add_row(format!("soc_b{bi}_h{h}"), RowFamily::SocRecursion, terms, Relation::Eq, rhs);

            let (mut up, mut up_rhs) = (vec![(c, eta * dt)], e * bs.soc_max);
            let (mut down, mut down_rhs) = (vec![(d, dt)], -e * bs.soc_min);
            match prev {
                Some(p) => {
                    up.push((p, e));
                    down.push((p, -e));
                }
                None => {
                    up_rhs -= e * bs.soc_initial;
                    down_rhs += e * bs.soc_initial;
                }
            }
            self.lp.add_row(format!("bs_room_up_b{bi}_h{h}"), RowFamily::SocHeadroom, up, Relation::LessEq, up_rhs);
            self.lp.add_row(format!("bs_room_down_b{bi}_h{h}"), RowFamily::SocHeadroom, down, Relation::LessEq, down_rhs);

            self.pairs.push(ComplementarityPair {
                first: c,
                second: d,
                family: PairFamily::Battery,
            });
        }
        if self.options.terminal_soc == TerminalSoc::Restore {
            self.lp.add_row(
                format!("soc_end_b{bi}"),
                RowFamily::TerminalSoc,
                vec![(v.soc[steps - 1], 1.0)],
                Relation::GreaterEq,
                bs.soc_initial,
            );
        }
        Ok(())
    }

    fn add_ev_constraints(&mut self, bi: usize, n: usize) {
        let session: &EVSession = &self.scenario.buildings[bi].sessions[n];
        let dt = self.scenario.time.step_hours;
        let window = session.window(&self.scenario.time);
        let charge = self.catalog.buildings[bi].ev_charge[n].clone();
        let discharge = self.catalog.buildings[bi].ev_discharge[n].clone();
        let c_unit = if session.max_charge_kw > 0.0 { dt / session.max_charge_kw } else { 0.0 };
        let d_unit = if session.max_discharge_kw > 0.0 && session.max_discharge_hours > 0.0 {
            dt / session.max_discharge_kw
        } else {
            0.0
        };
        let factor = self.options.compensation.discharge_factor(session.charger_efficiency);
        let steps: Vec<usize> = (window.start..window.end).collect();

        let mut total = Vec::new();
        let mut cap = Vec::new();
        let mut idle = Vec::new();
        // Discharge through step h is covered by charge through step h − 1.
        // Given charge/discharge exclusivity this equals the same-step form,
        // and it keeps the relaxation from charging and discharging at once.
        let mut prefix: Vec<(usize, f64)> = Vec::new();
        for &h in &steps {
            if d_unit > 0.0 {
                total.push((discharge[h], -factor * d_unit));
                cap.push((discharge[h], d_unit));
                idle.push((discharge[h], d_unit));
                prefix.push((discharge[h], d_unit));
                self.lp.add_row(
                    format!("ev_prefix_b{bi}_n{n}_h{h}"),
                    RowFamily::EvPrefix,
                    prefix.clone(),
                    Relation::LessEq,
                    0.0,
                );
            }
            if c_unit > 0.0 {
                total.push((charge[h], c_unit));
                idle.push((charge[h], c_unit));
                prefix.push((charge[h], -c_unit));
            }
            if c_unit > 0.0 && d_unit > 0.0 {
                self.lp.add_row(
                    format!("ev_step_b{bi}_n{n}_h{h}"),
                    RowFamily::EvStepUsage,
                    vec![(charge[h], c_unit), (discharge[h], d_unit)],
                    Relation::LessEq,
                    dt * window.availability(h),
                );
            }
            self.pairs.push(ComplementarityPair {
                first: charge[h],
                second: discharge[h],
                family: PairFamily::Ev,
            });
        }
        if !total.is_empty() {
            self.lp.add_row(
                format!("ev_total_b{bi}_n{n}"),
                RowFamily::EvTotalCharge,
                total,
                Relation::Eq,
                session.requested_charge_hours,
            );
        }
        if !cap.is_empty() {
            self.lp.add_row(
                format!("ev_dcap_b{bi}_n{n}"),
                RowFamily::EvDischargeCap,
                cap,
                Relation::LessEq,
                session.max_discharge_hours,
            );
        }
        if !idle.is_empty() {
            self.lp.add_row(
                format!("ev_idle_b{bi}_n{n}"),
                RowFamily::EvIdle,
                idle,
                Relation::LessEq,
                session.parking_hours,
            );
        }
    }

    fn add_community_constraints(&mut self) {
        let steps = self.scenario.time.steps;
        for h in 0..steps {
            let mut terms = Vec::new();
            for v in &self.catalog.buildings {
                terms.push((v.comm_export[h], 1.0));
                terms.push((v.comm_import[h], -1.0));
            }
            self.lp.add_row(
                format!("community_h{h}"),
                RowFamily::CommunityBalance,
                terms,
                Relation::Eq,
                0.0,
            );
        }
        for (bi, building) in self.scenario.buildings.iter().enumerate() {
            let v = &self.catalog.buildings[bi];
            for h in 0..steps {
                // import ≤ L⁺ − battery discharge − EV discharge + EV charge
                let mut import = vec![(v.comm_import[h], 1.0), (v.bs_discharge[h], 1.0)];
                // export ≤ L⁻ − battery charge − EV charge
                let mut export = vec![(v.comm_export[h], 1.0), (v.bs_charge[h], 1.0)];
                for n in 0..v.ev_charge.len() {
                    import.push((v.ev_discharge[n][h], 1.0));
                    import.push((v.ev_charge[n][h], -1.0));
                    export.push((v.ev_charge[n][h], 1.0));
                }
                self.guarded.push(GuardedRow {
                    guard: v.comm_import[h],
                    row: Row {
                        name: format!("comm_import_cap_b{bi}_h{h}"),
                        family: RowFamily::CommunityCap,
                        terms: import,
                        relation: Relation::LessEq,
                        rhs: building.net_load.deficit_kw[h],
                    },
                });
                self.guarded.push(GuardedRow {
                    guard: v.comm_export[h],
                    row: Row {
                        name: format!("comm_export_cap_b{bi}_h{h}"),
                        family: RowFamily::CommunityCap,
                        terms: export,
                        relation: Relation::LessEq,
                        rhs: building.net_load.surplus_kw[h],
                    },
                });
                self.pairs.push(ComplementarityPair {
                    first: v.comm_export[h],
                    second: v.comm_import[h],
                    family: PairFamily::Community,
                });
            }
        }
        for bi in 0..self.scenario.buildings.len() {
            for h in 0..steps {
                self.add_cap_hull(bi, h);
            }
        }
    }

    /// Rows valid whether or not a guarded cap is active: the convex hull of
    /// "flow is zero" and "cap holds" over the box of the battery and EV flows.
    fn add_cap_hull(&mut self, bi: usize, h: usize) {
        let building = &self.scenario.buildings[bi];
        let v = &self.catalog.buildings[bi];
        let upper = |j: usize| self.lp.upper[j];
        let charge_room = upper(v.bs_charge[h]) + v.ev_charge.iter().map(|ids| upper(ids[h])).sum::<f64>();
        let discharge_room =
            upper(v.bs_discharge[h]) + v.ev_discharge.iter().map(|ids| upper(ids[h])).sum::<f64>();
        let weight = |cap: f64, room: f64| if room > cap { cap / room } else { 1.0 };

        let l_minus = building.net_load.surplus_kw[h];
        let a = weight(l_minus, charge_room);
        let mut export = vec![(v.comm_export[h], 1.0)];
        if a > 0.0 {
            export.push((v.bs_charge[h], a));
            for ids in &v.ev_charge {
                export.push((ids[h], a));
            }
        }
        let l_plus = building.net_load.deficit_kw[h];
        let b = weight(l_plus, discharge_room);
        let mut import = vec![(v.comm_import[h], 1.0)];
        if b > 0.0 {
            import.push((v.bs_discharge[h], b));
            for ids in &v.ev_discharge {
                import.push((ids[h], b));
            }
        }
        for ids in &v.ev_charge {
            import.push((ids[h], -1.0));
        }
        self.lp.add_row(
            format!("comm_export_hull_b{bi}_h{h}"),
            RowFamily::CommunityCap,
            export,
            Relation::LessEq,
            l_minus,
        );
        self.lp.add_row(
            format!("comm_import_hull_b{bi}_h{h}"),
            RowFamily::CommunityCap,
            import,
            Relation::LessEq,
            l_plus,
        );
    }

    fn add_costs(&mut self, prices: &CommunityPrices) {
        let s = self.scenario;
        let t = &s.tariffs;
        let dt = s.time.step_hours;
        let community = self.mode == RunMode::Community;
        let flexible = self.mode != RunMode::Baseline;
        for (bi, building) in s.buildings.iter().enumerate() {
            let v = &self.catalog.buildings[bi];
            let mut elec = LinearExpr::default();
            for h in 0..s.time.steps {
                let c_ig = t.grid_import_eur_per_kwh[h];
                let c_eg = t.grid_export_eur_per_kwh[h];
                let (c_ic, c_ec) = if community {
                    (prices.import_eur_per_kwh[h], prices.export_eur_per_kwh[h])
                } else {
                    (0.0, 0.0)
                };
                if self.options.eq2_verbatim {
                    let l_plus = building.net_load.deficit_kw[h];
                    let l_minus = building.net_load.surplus_kw[h];
                    elec.constant += dt * (l_plus * c_ig + l_minus * c_eg);
                    elec.add(v.comm_import[h], dt * (c_ic - c_ig));
                    elec.add(v.comm_export[h], dt * (c_ec - c_eg));
                    elec.add(v.bs_discharge[h], -dt * c_ig);
                    elec.add(v.bs_charge[h], -dt * c_eg);
                    for n in 0..v.ev_charge.len() {
                        elec.add(v.ev_discharge[n][h], -dt * c_ig);
                        elec.add(v.ev_charge[n][h], -dt * c_eg);
                    }
                } else {
                    elec.add(v.grid_import[h], dt * c_ig);
                    elec.add(v.grid_export[h], dt * c_eg);
                    elec.add(v.comm_import[h], dt * c_ic);
                    elec.add(v.comm_export[h], dt * c_ec);
                }
            }

            let mut revenue = LinearExpr::default();
            if flexible {
                for (n, session) in building.sessions.iter().enumerate() {
                    revenue.constant +=
                        session.parking_hours * (t.parking_eur_per_hour + t.flexibility_eur_per_hour);
                    let window = session.window(&s.time);
                    for h in window.start..window.end {
                        if session.max_charge_kw > 0.0 {
                            let unit = dt / session.max_charge_kw;
                            revenue.add(
                                v.ev_charge[n][h],
                                unit * (t.charge_eur_per_hour[h] - t.flexibility_eur_per_hour),
                            );
                        }
                        if session.max_discharge_kw > 0.0 && session.max_discharge_hours > 0.0 {
                            let unit = dt / session.max_discharge_kw;
                            revenue.add(
                                v.ev_discharge[n][h],
                                unit * (t.discharge_eur_per_hour[h] - t.flexibility_eur_per_hour),
                            );
                        }
                    }
                }
            }
            self.costs.push(BuildingCostTerms {
                electricity: elec,
                ev_revenue: revenue,
            });
        }
    }

    fn finish(mut self) -> MilpModel {
        for part in &self.costs {
            self.lp.constant += part.electricity.constant - part.ev_revenue.constant;
            for &(j, a) in &part.electricity.terms {
                self.lp.cost[j] += a;
            }
            for &(j, a) in &part.ev_revenue.terms {
                self.lp.cost[j] -= a;
            }
        }
        MilpModel {
            mode: self.mode,
            options: self.options,
            time: self.scenario.time.clone(),
            lp: self.lp,
            pairs: self.pairs,
            guarded: self.guarded,
            catalog: self.catalog,
            costs: self.costs,
        }
    }
}

#[cfg(test)]
mod tests;
