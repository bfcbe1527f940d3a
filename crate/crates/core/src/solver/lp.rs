use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    LessEq,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    GreaterEq,
}

/// Constraint families, used to group verification residuals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowFamily {
    PowerBalance,
    SocRecursion,
    SocHeadroom,
    TerminalSoc,
    EvTotalCharge,
    EvDischargeCap,
    EvPrefix,
    EvStepUsage,
    EvIdle,
    CommunityBalance,
    CommunityCap,
    Other,
}

impl RowFamily {
    pub fn name(self) -> &'static str {
        match self {
            RowFamily::PowerBalance => "power-balance",
            RowFamily::SocRecursion => "soc-recursion",
            RowFamily::SocHeadroom => "soc-headroom",
            RowFamily::TerminalSoc => "terminal-soc",
            RowFamily::EvTotalCharge => "ev-total-charge",
            RowFamily::EvDischargeCap => "ev-discharge-cap",
            RowFamily::EvPrefix => "ev-prefix",
            RowFamily::EvStepUsage => "ev-step-usage",
            RowFamily::EvIdle => "ev-idle",
            RowFamily::CommunityBalance => "community-balance",
            RowFamily::CommunityCap => "community-cap",
            RowFamily::Other => "other",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub family: RowFamily,
    pub terms: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.relation {
            Relation::LessEq => (lhs - self.rhs).max(0.0),
            Relation::GreaterEq => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// `min cᵀx + constant` subject to rows and `lower ≤ x ≤ upper`.
/// Bounds may be infinite.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    pub names: Vec<String>,
    pub cost: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub constant: f64,
    pub rows: Vec<Row>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, cost: f64) -> usize {
        self.names.push(name.into());
        self.lower.push(lower);
        self.upper.push(upper);
        self.cost.push(cost);
        self.cost.len() - 1
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        family: RowFamily,
        terms: Vec<(usize, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        self.rows.push(Row {
            name: name.into(),
            family,
            terms,
            relation,
            rhs,
        });
        self.rows.len() - 1
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.constant + self.cost.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }

    pub fn is_fixed(&self, j: usize) -> bool {
        self.lower[j] == self.upper[j]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective_value: f64,
    /// Primal values; for an unbounded problem, the last feasible point.
    pub values: Vec<f64>,
    /// One multiplier per row (≤ 0 on binding `≤` rows, ≥ 0 on binding `≥` rows).
    pub dual_values: Vec<f64>,
    /// Rows left violated when phase one stalled (infeasible status only).
    pub infeasible_rows: Vec<usize>,
    /// Variables whose bounds were left violated (infeasible status only).
    pub infeasible_vars: Vec<usize>,
    /// Improving direction over the structural variables (unbounded status only).
    pub ray: Vec<f64>,
    pub iterations: usize,
}

impl LpSolution {
    /// Lagrangian dual bound `min over the box of (c − Aᵀy)ᵀx + min over row ranges of yᵀr`.
    /// Reduced costs within `tol` of zero against an infinite bound are treated as zero.
    pub fn dual_objective(&self, lp: &LinearProgram, tol: f64) -> f64 {
        let mut reduced = lp.cost.clone();
        let mut total = lp.constant;
        for (row, &y) in lp.rows.iter().zip(&self.dual_values) {
            for &(j, a) in &row.terms {
                reduced[j] -= a * y;
            }
            let (lo, hi) = row_range(row);
            total += box_min(y, lo, hi, tol);
        }
        for (j, &d) in reduced.iter().enumerate() {
            total += box_min(d, lp.lower[j], lp.upper[j], tol);
        }
        total
    }
}

pub(crate) fn row_range(row: &Row) -> (f64, f64) {
    match row.relation {
        Relation::LessEq => (f64::NEG_INFINITY, row.rhs),
        Relation::GreaterEq => (row.rhs, f64::INFINITY),
        Relation::Eq => (row.rhs, row.rhs),
    }
}

fn box_min(coef: f64, lo: f64, hi: f64, tol: f64) -> f64 {
    if coef > tol {
        if lo.is_finite() { coef * lo } else { f64::NEG_INFINITY }
    } else if coef < -tol {
        if hi.is_finite() { coef * hi } else { f64::NEG_INFINITY }
    } else {
        // treat as zero, but keep the contribution when the bound is finite
        let pick = if coef >= 0.0 { lo } else { hi };
        if pick.is_finite() { coef * pick } else { 0.0 }
    }
}
