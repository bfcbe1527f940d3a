//! Bounded-variable primal revised simplex.
//!
//! Every row gets a logical variable `r = aᵀx` whose bounds encode the
//! relation, so the working system is `[A −I] z = 0` with box bounds on all
//! of `z`. Phase one minimises the sum of bound violations of the basic
//! variables (recomputed every iteration); phase two the true cost. Pricing
//! is Dantzig's rule with a Harris two-pass ratio test; after a run of
//! degenerate pivots it switches to Bland's rule until progress resumes.

use std::collections::VecDeque;

use super::lp::{row_range, LinearProgram, LpSolution, LpStatus};
use super::lu::LuFactor;
use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const HISTORY_LEN: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    pub feas_tol: f64,
    pub opt_tol: f64,
    pub refactor_interval: usize,
    pub degenerate_limit: usize,
    pub max_iterations: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-7,
            opt_tol: 1e-7,
            refactor_interval: 100,
            degenerate_limit: 50,
            max_iterations: 200_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic(usize),
    AtLower,
    AtUpper,
    /// Nonbasic free variable sitting at zero.
    Free,
}

enum Step {
    Flip { t: f64 },
    Pivot { position: usize, t: f64, to_upper: bool },
    Unbounded,
}

struct Simplex<'a> {
    lp: &'a LinearProgram,
    opts: SimplexOptions,
    m: usize,
    n: usize,
    cols: Vec<Vec<(usize, f64)>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    lu: LuFactor,
    history: VecDeque<String>,
    iterations: usize,
    degenerate_run: usize,
    bland: bool,
}

/// Final basis of a solve, reusable as the starting point of a related LP.
///
/// Entries cover the structural variables followed by one logical per row.
/// A later LP may have tightened bounds and extra rows appended; the
/// logicals of appended rows start basic.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    basic: Vec<bool>,
    at_upper: Vec<bool>,
    structurals: usize,
}

/// Solves the LP relaxation of `lp`.
pub fn solve_lp(lp: &LinearProgram, opts: &SimplexOptions) -> Result<LpSolution> {
    solve_lp_from(lp, opts, None).map(|(s, _)| s)
}

/// Solves `lp` starting from `start` when it fits, from the all-logical basis otherwise.
pub fn solve_lp_from(
    lp: &LinearProgram,
    opts: &SimplexOptions,
    start: Option<&Basis>,
) -> Result<(LpSolution, Option<Basis>)> {
    let n = lp.num_vars();
    let m = lp.rows.len();
    if let Some(bad) = (0..n).find(|&j| lp.lower[j] > lp.upper[j]) {
        return Ok((LpSolution {
            status: LpStatus::Infeasible,
            objective_value: f64::INFINITY,
            values: vec![0.0; n],
            dual_values: vec![0.0; m],
            infeasible_rows: Vec::new(),
            infeasible_vars: vec![bad],
            ray: Vec::new(),
            iterations: 0,
        }, None));
    }
    let mut s = Simplex::new(lp, *opts)?;
    if let Some(b) = start {
        if s.install(b) {
            s.dual_phase()?;
        }
    }
    let sol = s.run()?;
    Ok((sol, Some(s.basis_snapshot())))
}

impl<'a> Simplex<'a> {
    fn new(lp: &'a LinearProgram, opts: SimplexOptions) -> Result<Self> {
        let n = lp.num_vars();
        let m = lp.rows.len();
        let mut cols = vec![Vec::new(); n];
        for (i, row) in lp.rows.iter().enumerate() {
            for &(j, a) in &row.terms {
                if j >= n {
                    return Err(Error::Build(format!(
                        "row {} references unknown variable {j}",
                        row.name
                    )));
                }
                if a != 0.0 {
                    cols[j].push((i, a));
                }
            }
        }
        // merge duplicate entries
        for col in &mut cols {
            col.sort_by_key(|&(i, _)| i);
            col.dedup_by(|next, prev| {
                if next.0 == prev.0 {
                    prev.1 += next.1;
                    true
                } else {
                    false
                }
            });
        }

        let mut lower = lp.lower.clone();
        let mut upper = lp.upper.clone();
        for row in &lp.rows {
            let (lo, hi) = row_range(row);
            lower.push(lo);
            upper.push(hi);
        }
        let mut x = vec![0.0; n + m];
        let mut state = Vec::with_capacity(n + m);
        for j in 0..n {
            let (lo, hi) = (lower[j], upper[j]);
            let st = if lo.is_finite() {
                x[j] = lo;
                VarState::AtLower
            } else if hi.is_finite() {
                x[j] = hi;
                VarState::AtUpper
            } else {
                VarState::Free
            };
            state.push(st);
        }
        let basis: Vec<usize> = (n..n + m).collect();
        for (p, &v) in basis.iter().enumerate() {
            state.push(VarState::Basic(p));
            debug_assert_eq!(state.len() - 1, v);
        }
        let identity: Vec<Vec<(usize, f64)>> = (0..m).map(|i| vec![(i, -1.0)]).collect();
        let lu = LuFactor::factorize(m, &identity).expect("logical basis is nonsingular");
        let mut s = Self {
            lp,
            opts,
            m,
            n,
            cols,
            lower,
            upper,
            x,
            state,
            basis,
            lu,
            history: VecDeque::new(),
            iterations: 0,
            degenerate_run: 0,
            bland: false,
        };
        s.recompute_basics();
        Ok(s)
    }

    /// Replaces the logical start basis by `b`, keeping the logical one if `b`
    /// does not fit or is singular.
    fn install(&mut self, b: &Basis) -> bool {
        let (n, m) = (self.n, self.m);
        if b.structurals != n || b.basic.len() > n + m {
            return false;
        }
        let extra = n + m - b.basic.len();
        let mut basic = b.basic.clone();
        basic.extend(std::iter::repeat_n(true, extra));
        let mut at_upper = b.at_upper.clone();
        at_upper.extend(std::iter::repeat_n(false, extra));
        let basis: Vec<usize> = (0..n + m).filter(|&j| basic[j]).collect();
        if basis.len() != m {
            return false;
        }
        let columns: Vec<Vec<(usize, f64)>> = basis.iter().map(|&v| self.column(v)).collect();
        let Ok(lu) = LuFactor::factorize(m, &columns) else {
            return false;
        };
        for j in 0..n + m {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if basic[j] {
                continue;
            }
            let (st, x) = if at_upper[j] && hi.is_finite() {
                (VarState::AtUpper, hi)
            } else if lo.is_finite() {
                (VarState::AtLower, lo)
            } else if hi.is_finite() {
                (VarState::AtUpper, hi)
            } else {
                (VarState::Free, 0.0)
            };
            self.state[j] = st;
            self.x[j] = x;
        }
        for (p, &v) in basis.iter().enumerate() {
            self.state[v] = VarState::Basic(p);
        }
        self.basis = basis;
        self.lu = lu;
        self.recompute_basics();
        true
    }

    fn reduced_cost(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.n {
            self.lp.cost[j] - self.cols[j].iter().map(|&(i, a)| a * y[i]).sum::<f64>()
        } else {
            y[j - self.n]
        }
    }

    /// Dual simplex from a dual-feasible basis, run until the basis is
    /// primal feasible. Returns early, leaving the primal method to finish,
    /// when the basis is not dual feasible or the dual method stalls.
    fn dual_phase(&mut self) -> Result<()> {
        let tol = self.opts.feas_tol;
        let dtol = self.opts.opt_tol;
        let limit = 10 * (self.m + 10);
        for _ in 0..limit {
            if self.lu.eta_count() >= self.opts.refactor_interval {
                self.refactor()?;
            }
            let cb: Vec<f64> = self.basis.iter().map(|&v| self.var_cost(v)).collect();
            let y = self.lu.solve_transpose(&cb);
            let mut d = vec![0.0; self.n + self.m];
            for j in 0..self.n + self.m {
                let dj = match self.state[j] {
                    VarState::Basic(_) => continue,
                    _ if self.lower[j] == self.upper[j] => continue,
                    st => {
                        let dj = self.reduced_cost(j, &y);
                        let wrong = match st {
                            VarState::AtLower => dj < -dtol,
                            VarState::AtUpper => dj > dtol,
                            _ => dj.abs() > dtol,
                        };
                        if wrong {
                            return Ok(());
                        }
                        dj
                    }
                };
                d[j] = dj;
            }

            // leaving row: largest bound violation
            let mut leave: Option<(usize, f64)> = None;
            for (p, &v) in self.basis.iter().enumerate() {
                let (xv, lo, hi) = (self.x[v], self.lower[v], self.upper[v]);
                let viol = (lo - xv).max(xv - hi);
                if viol > tol && leave.is_none_or(|(_, b)| viol > b) {
                    leave = Some((p, viol));
                }
            }
            let Some((p, _)) = leave else {
                return Ok(());
            };
            let v = self.basis[p];
            let below = self.x[v] < self.lower[v];
            let target = if below { self.lower[v] } else { self.upper[v] };

            let mut unit = vec![0.0; self.m];
            unit[p] = 1.0;
            let rho = self.lu.solve_transpose(&unit);
            // (variable, pivot-row entry, ratio, relaxed ratio)
            let mut cands: Vec<(usize, f64, f64, f64)> = Vec::new();
            for j in 0..self.n + self.m {
                let st = self.state[j];
                if matches!(st, VarState::Basic(_)) || self.lower[j] == self.upper[j] {
                    continue;
                }
                let a = if j < self.n {
                    self.cols[j].iter().map(|&(i, c)| c * rho[i]).sum::<f64>()
                } else {
                    -rho[j - self.n]
                };
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                // x_p moves by −a per unit increase of x_j
                let eligible = match st {
                    VarState::AtLower => (below && a < 0.0) || (!below && a > 0.0),
                    VarState::AtUpper => (below && a > 0.0) || (!below && a < 0.0),
                    _ => true,
                };
                if eligible {
                    let dj = d[j].abs();
                    cands.push((j, a, dj / a.abs(), (dj + dtol) / a.abs()));
                }
            }
            if cands.is_empty() {
                // primal infeasible; let phase one confirm it
                return Ok(());
            }
            let theta = cands.iter().map(|c| c.3).fold(f64::INFINITY, f64::min);
            let &(q, a_q, _, _) = cands
                .iter()
                .filter(|c| c.2 <= theta)
                .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
                .expect("the minimum-ratio candidate qualifies");

            let alpha = self.lu.solve(&self.dense_column(q));
            if (alpha[p] - a_q).abs() > 1e-6 * (1.0 + a_q.abs()) || alpha[p].abs() <= PIVOT_TOL {
                self.refactor()?;
                continue;
            }
            let step = (self.x[v] - target) / alpha[p];
            self.x[q] += step;
            for (r, &a) in alpha.iter().enumerate() {
                if a != 0.0 {
                    let b = self.basis[r];
                    self.x[b] -= a * step;
                }
            }
            self.x[v] = target;
            self.state[v] = if below { VarState::AtLower } else { VarState::AtUpper };
            self.basis[p] = q;
            self.state[q] = VarState::Basic(p);
            self.lu.update(p, &alpha);
            self.iterations += 1;
            self.push_history(format!("dual in {q} out {v} pivot {:.3e}", alpha[p]));
        }
        Ok(())
    }

    fn basis_snapshot(&self) -> Basis {
        Basis {
            basic: self.state.iter().map(|s| matches!(s, VarState::Basic(_))).collect(),
            at_upper: self.state.iter().map(|s| matches!(s, VarState::AtUpper)).collect(),
            structurals: self.n,
        }
    }

    fn column(&self, j: usize) -> Vec<(usize, f64)> {
        if j < self.n {
            self.cols[j].clone()
        } else {
            vec![(j - self.n, -1.0)]
        }
    }

    fn dense_column(&self, j: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.m];
        if j < self.n {
            for &(i, a) in &self.cols[j] {
                v[i] = a;
            }
        } else {
            v[j - self.n] = -1.0;
        }
        v
    }

    fn recompute_basics(&mut self) {
        let mut rhs = vec![0.0; self.m];
        for j in 0..self.n + self.m {
            if matches!(self.state[j], VarState::Basic(_)) {
                continue;
            }
            let xj = self.x[j];
            if xj == 0.0 {
                continue;
            }
            if j < self.n {
                for &(i, a) in &self.cols[j] {
                    rhs[i] -= a * xj;
                }
            } else {
                rhs[j - self.n] += xj;
            }
        }
        let xb = self.lu.solve(&rhs);
        for (p, &v) in self.basis.iter().enumerate() {
            self.x[v] = xb[p];
        }
    }

    fn refactor(&mut self) -> Result<()> {
        let columns: Vec<Vec<(usize, f64)>> = self.basis.iter().map(|&v| self.column(v)).collect();
        self.lu = LuFactor::factorize(self.m, &columns).map_err(|e| Error::Numerical {
            message: format!(
                "singular basis at refactorization (position {}, variable {})",
                e.position, self.basis[e.position]
            ),
            history: self.history_tail(),
        })?;
        self.recompute_basics();
        Ok(())
    }

    fn history_tail(&self) -> String {
        self.history.iter().cloned().collect::<Vec<_>>().join("; ")
    }

    fn infeasibility(&self, v: usize) -> f64 {
        let tol = self.opts.feas_tol;
        if self.x[v] < self.lower[v] - tol {
            -1.0
        } else if self.x[v] > self.upper[v] + tol {
            1.0
        } else {
            0.0
        }
    }

    fn var_cost(&self, j: usize) -> f64 {
        if j < self.n {
            self.lp.cost[j]
        } else {
            0.0
        }
    }

    fn run(&mut self) -> Result<LpSolution> {
        let mut fresh = true;
        loop {
            if self.iterations >= self.opts.max_iterations {
                return Err(Error::Numerical {
                    message: format!("iteration limit {} reached", self.opts.max_iterations),
                    history: self.history_tail(),
                });
            }
            if self.lu.eta_count() >= self.opts.refactor_interval {
                self.refactor()?;
                fresh = true;
            }

            let phase_costs: Vec<f64> = self.basis.iter().map(|&v| self.infeasibility(v)).collect();
            let phase_one = phase_costs.iter().any(|&c| c != 0.0);
            let cb: Vec<f64> = if phase_one {
                phase_costs
            } else {
                self.basis.iter().map(|&v| self.var_cost(v)).collect()
            };
            let y = self.lu.solve_transpose(&cb);

            let Some((q, dir)) = self.price(&y, phase_one) else {
                if !fresh {
                    self.refactor()?;
                    fresh = true;
                    continue;
                }
                return Ok(if phase_one {
                    self.infeasible_solution(y)
                } else {
                    self.optimal_solution(y)
                });
            };

            let alpha = self.lu.solve(&self.dense_column(q));
            let step = self.ratio_test(q, dir, &alpha, phase_one);
            self.iterations += 1;
            match step {
                Step::Unbounded => {
                    if phase_one {
                        return Err(Error::Numerical {
                            message: "phase one found an unbounded direction".into(),
                            history: self.history_tail(),
                        });
                    }
                    if !fresh {
                        self.refactor()?;
                        fresh = true;
                        continue;
                    }
                    return Ok(self.unbounded_solution(q, dir, &alpha));
                }
                Step::Flip { t } => {
                    self.shift(q, dir, t, &alpha);
                    self.state[q] = if dir > 0.0 { VarState::AtUpper } else { VarState::AtLower };
                    self.x[q] = if dir > 0.0 { self.upper[q] } else { self.lower[q] };
                    self.note_progress(t);
                    self.push_history(format!("flip {q} t={t:.3e}"));
                }
                Step::Pivot { position, t, to_upper } => {
                    if alpha[position].abs() < PIVOT_TOL && !fresh {
                        self.refactor()?;
                        fresh = true;
                        continue;
                    }
                    self.shift(q, dir, t, &alpha);
                    let leaving = self.basis[position];
                    if to_upper {
                        self.x[leaving] = self.upper[leaving];
                        self.state[leaving] = VarState::AtUpper;
                    } else {
                        self.x[leaving] = self.lower[leaving];
                        self.state[leaving] = VarState::AtLower;
                    }
                    self.basis[position] = q;
                    self.state[q] = VarState::Basic(position);
                    self.lu.update(position, &alpha);
                    fresh = false;
                    self.note_progress(t);
                    self.push_history(format!(
                        "in {q} out {leaving} pivot {:.3e} t={t:.3e}",
                        alpha[position]
                    ));
                }
            }
        }
    }

    fn push_history(&mut self, entry: String) {
        if self.history.len() == HISTORY_LEN {
            self.history.pop_front();
        }
        self.history.push_back(entry);
    }

    fn note_progress(&mut self, t: f64) {
        if t <= 1e-12 {
            self.degenerate_run += 1;
            if self.degenerate_run >= self.opts.degenerate_limit {
                self.bland = true;
            }
        } else {
            self.degenerate_run = 0;
            self.bland = false;
        }
    }

    fn shift(&mut self, q: usize, dir: f64, t: f64, alpha: &[f64]) {
        if t == 0.0 {
            return;
        }
        self.x[q] += dir * t;
        for (p, &a) in alpha.iter().enumerate() {
            if a != 0.0 {
                let v = self.basis[p];
                self.x[v] -= dir * a * t;
            }
        }
    }

    /// Picks an entering variable and its direction (+1 increase, −1 decrease).
    fn price(&self, y: &[f64], phase_one: bool) -> Option<(usize, f64)> {
        let tol = self.opts.opt_tol;
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.n + self.m {
            let st = self.state[j];
            if matches!(st, VarState::Basic(_)) || self.lower[j] == self.upper[j] {
                continue;
            }
            let c = if phase_one { 0.0 } else { self.var_cost(j) };
            let d = if j < self.n {
                c - self.cols[j].iter().map(|&(i, a)| a * y[i]).sum::<f64>()
            } else {
                c + y[j - self.n]
            };
            let dir = match st {
                VarState::AtLower if d < -tol => 1.0,
                VarState::AtUpper if d > tol => -1.0,
                VarState::Free if d.abs() > tol => -d.signum(),
                _ => continue,
            };
            if self.bland {
                return Some((j, dir));
            }
            if best.map_or(true, |(_, _, bd)| d.abs() > bd) {
                best = Some((j, dir, d.abs()));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    fn ratio_test(&self, q: usize, dir: f64, alpha: &[f64], phase_one: bool) -> Step {
        let tol = self.opts.feas_tol;
        // (position, exact ratio, relaxed ratio, leaves at upper)
        let mut cands: Vec<(usize, f64, f64, bool)> = Vec::new();
        for (p, &a) in alpha.iter().enumerate() {
            if a.abs() <= PIVOT_TOL {
                continue;
            }
            let v = self.basis[p];
            let rate = -dir * a;
            let (xv, lo, hi) = (self.x[v], self.lower[v], self.upper[v]);
            if phase_one && xv < lo - tol {
                if rate > 0.0 {
                    let t = (lo - xv) / rate;
                    cands.push((p, t, t, false));
                }
            } else if phase_one && xv > hi + tol {
                if rate < 0.0 {
                    let t = (xv - hi) / -rate;
                    cands.push((p, t, t, true));
                }
            } else if rate < 0.0 {
                if lo.is_finite() {
                    cands.push((p, (xv - lo) / -rate, (xv - lo + tol) / -rate, false));
                }
            } else if hi.is_finite() {
                cands.push((p, (hi - xv) / rate, (hi - xv + tol) / rate, true));
            }
        }
        let range = self.upper[q] - self.lower[q];

        let chosen = if self.bland {
            let mut best: Option<(usize, f64, bool)> = None;
            for &(p, t, _, up) in &cands {
                let t = t.max(0.0);
                let better = match best {
                    None => true,
                    Some((bp, bt, _)) => {
                        t < bt - 1e-12 || (t <= bt + 1e-12 && self.basis[p] < self.basis[bp])
                    }
                };
                if better {
                    best = Some((p, t, up));
                }
            }
            best
        } else {
            let theta = cands.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
            let mut best: Option<(usize, f64, bool, f64)> = None;
            for &(p, t, _, up) in &cands {
                if t <= theta {
                    let mag = alpha[p].abs();
                    if best.map_or(true, |b| mag > b.3) {
                        best = Some((p, t.max(0.0), up, mag));
                    }
                }
            }
            best.map(|(p, t, up, _)| (p, t, up))
        };

        match chosen {
            Some((_, t, _)) if range.is_finite() && range <= t => Step::Flip { t: range },
            Some((position, t, to_upper)) => Step::Pivot { position, t, to_upper },
            None if range.is_finite() => Step::Flip { t: range },
            None => Step::Unbounded,
        }
    }

    fn optimal_solution(&self, y: Vec<f64>) -> LpSolution {
        let values = self.structural_values();
        LpSolution {
            status: LpStatus::Optimal,
            objective_value: self.lp.objective(&values),
            values,
            dual_values: y,
            infeasible_rows: Vec::new(),
            infeasible_vars: Vec::new(),
            ray: Vec::new(),
            iterations: self.iterations,
        }
    }

    fn infeasible_solution(&self, y: Vec<f64>) -> LpSolution {
        let mut rows = Vec::new();
        let mut vars = Vec::new();
        for &v in &self.basis {
            if self.infeasibility(v) != 0.0 {
                if v >= self.n {
                    rows.push(v - self.n);
                } else {
                    vars.push(v);
                }
            }
        }
        rows.sort_unstable();
        vars.sort_unstable();
        LpSolution {
            status: LpStatus::Infeasible,
            objective_value: f64::INFINITY,
            values: self.structural_values(),
            dual_values: y,
            infeasible_rows: rows,
            infeasible_vars: vars,
            ray: Vec::new(),
            iterations: self.iterations,
        }
    }

    fn unbounded_solution(&self, q: usize, dir: f64, alpha: &[f64]) -> LpSolution {
        let mut ray = vec![0.0; self.n];
        if q < self.n {
            ray[q] = dir;
        }
        for (p, &a) in alpha.iter().enumerate() {
            let v = self.basis[p];
            if v < self.n {
                ray[v] = -dir * a;
            }
        }
        LpSolution {
            status: LpStatus::Unbounded,
            objective_value: f64::NEG_INFINITY,
            values: self.structural_values(),
            dual_values: vec![0.0; self.m],
            infeasible_rows: Vec::new(),
            infeasible_vars: Vec::new(),
            ray,
            iterations: self.iterations,
        }
    }

    fn structural_values(&self) -> Vec<f64> {
        self.x[..self.n].to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::lp::{Relation, RowFamily};

    const INF: f64 = f64::INFINITY;

    fn solve(lp: &LinearProgram) -> LpSolution {
        solve_lp(lp, &SimplexOptions::default()).unwrap()
    }

    #[test]
    fn single_lower_bound_row() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x", -INF, INF, 1.0);
        lp.add_row("r", RowFamily::Other, vec![(x, 1.0)], Relation::GreaterEq, 3.0);
        let s = solve(&lp);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.values[0] - 3.0).abs() < 1e-9);
        assert!((s.objective_value - 3.0).abs() < 1e-9);
        assert!((s.dual_values[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn two_variable_polytope() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x", 0.0, INF, -1.0);
        let y = lp.add_var("y", 0.0, INF, -1.0);
        lp.add_row("sum", RowFamily::Other, vec![(x, 1.0), (y, 1.0)], Relation::LessEq, 4.0);
        lp.add_row("xcap", RowFamily::Other, vec![(x, 1.0)], Relation::LessEq, 3.0);
        lp.add_row("ycap", RowFamily::Other, vec![(y, 1.0)], Relation::LessEq, 3.0);
        let s = solve(&lp);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective_value + 4.0).abs() < 1e-9);
        assert!((s.dual_objective(&lp, 1e-9) - s.objective_value).abs() < 1e-9);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x", -INF, INF, 0.0);
        lp.add_row("le", RowFamily::Other, vec![(x, 1.0)], Relation::LessEq, 1.0);
        lp.add_row("ge", RowFamily::Other, vec![(x, 1.0)], Relation::GreaterEq, 2.0);
        let s = solve(&lp);
        assert_eq!(s.status, LpStatus::Infeasible);
        assert!(!s.infeasible_rows.is_empty());
    }

    #[test]
    fn crossed_bounds_are_infeasible() {
        let mut lp = LinearProgram::new();
        lp.add_var("x", 2.0, 1.0, 0.0);
        assert_eq!(solve(&lp).status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_direction_is_reported() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x", 0.0, INF, -1.0);
        let y = lp.add_var("y", 0.0, INF, 0.0);
        lp.add_row("r", RowFamily::Other, vec![(x, 1.0), (y, -1.0)], Relation::LessEq, 1.0);
        let s = solve(&lp);
        assert_eq!(s.status, LpStatus::Unbounded);
        assert!(s.ray[0] > 0.0);
        // the ray keeps the row satisfied
        assert!(s.ray[0] - s.ray[1] <= 1e-12);
    }

    #[test]
    fn bounded_variables_flip() {
        // max 3x + 2y, x,y ∈ [0, 1], x + y ≤ 1.5
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x", 0.0, 1.0, -3.0);
        let y = lp.add_var("y", 0.0, 1.0, -2.0);
        lp.add_row("r", RowFamily::Other, vec![(x, 1.0), (y, 1.0)], Relation::LessEq, 1.5);
        let s = solve(&lp);
        assert!((s.objective_value + 4.0).abs() < 1e-9);
        assert!((s.values[0] - 1.0).abs() < 1e-9 && (s.values[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn equality_system_with_free_variables() {
        // min x + 2y + 3z; x + y + z = 6; x − y = 1; y − z = 1; all free
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x", -INF, INF, 1.0);
        let y = lp.add_var("y", -INF, INF, 2.0);
        let z = lp.add_var("z", -INF, INF, 3.0);
        lp.add_row("a", RowFamily::Other, vec![(x, 1.0), (y, 1.0), (z, 1.0)], Relation::Eq, 6.0);
        lp.add_row("b", RowFamily::Other, vec![(x, 1.0), (y, -1.0)], Relation::Eq, 1.0);
        lp.add_row("c", RowFamily::Other, vec![(y, 1.0), (z, -1.0)], Relation::Eq, 1.0);
        let s = solve(&lp);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.values[0] - 3.0).abs() < 1e-9);
        assert!((s.values[1] - 2.0).abs() < 1e-9);
        assert!((s.values[2] - 1.0).abs() < 1e-9);
        assert!((s.objective_value - 10.0).abs() < 1e-9);
    }
}
