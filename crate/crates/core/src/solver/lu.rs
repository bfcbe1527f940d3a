//! Sparse LU factorization of a simplex basis with product-form updates.
//!
//! Columns are eliminated left-looking in order of increasing fill; each
//! pivot is the sparsest row among entries within a threshold of the
//! column's largest magnitude. Basis changes between refactorizations are
//! applied as eta matrices.

/// Entries below this magnitude are dropped from L and U.
const DROP_TOL: f64 = 1e-14;
/// Relative threshold for pivot candidates.
const PIVOT_THRESHOLD: f64 = 0.1;
/// Absolute floor below which a column is declared dependent.
const SINGULAR_TOL: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq)]
pub struct Singular {
    /// Basis position whose column is dependent on the previously eliminated ones.
    pub position: usize,
}

#[derive(Debug, Clone)]
struct Eta {
    position: usize,
    pivot: f64,
    others: Vec<(usize, f64)>,
}

#[derive(Debug, Clone)]
pub struct LuFactor {
    dim: usize,
    /// Row eliminated at step k.
    pivot_row: Vec<usize>,
    /// Basis position eliminated at step k.
    pivot_pos: Vec<usize>,
    /// Below-pivot multipliers of step k, keyed by row.
    lower: Vec<Vec<(usize, f64)>>,
    /// Off-diagonal entries of U column k, keyed by earlier step index.
    upper: Vec<Vec<(usize, f64)>>,
    diag: Vec<f64>,
    etas: Vec<Eta>,
}

impl LuFactor {
    /// Factorizes the square matrix whose column `j` is `columns[j]` given as
    /// `(row, value)` pairs.
    pub fn factorize(dim: usize, columns: &[Vec<(usize, f64)>]) -> Result<Self, Singular> {
        assert_eq!(columns.len(), dim);
        let mut row_count = vec![0usize; dim];
        for col in columns {
            for &(r, _) in col {
                row_count[r] += 1;
            }
        }
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by_key(|&j| (columns[j].len(), j));

        let mut f = LuFactor {
            dim,
            pivot_row: Vec::with_capacity(dim),
            pivot_pos: Vec::with_capacity(dim),
            lower: Vec::with_capacity(dim),
            upper: Vec::with_capacity(dim),
            diag: Vec::with_capacity(dim),
            etas: Vec::new(),
        };
        // step index at which each row was pivoted
        let mut row_step = vec![usize::MAX; dim];
        let mut work = vec![0.0; dim];
        let mut touched: Vec<usize> = Vec::new();
        let mut mark = vec![false; dim];

        for &pos in &order {
            for &(r, v) in &columns[pos] {
                work[r] += v;
                if !mark[r] {
                    mark[r] = true;
                    touched.push(r);
                }
            }
            // Apply earlier eliminations in step order.
            let mut u_col = Vec::new();
            let mut pending: Vec<usize> = touched
                .iter()
                .filter(|&&r| row_step[r] != usize::MAX)
                .map(|&r| row_step[r])
                .collect();
            pending.sort_unstable();
            let mut next = 0;
            while next < pending.len() {
                let k = pending[next];
                next += 1;
                let r = f.pivot_row[k];
                let u = work[r];
                work[r] = 0.0;
                if u.abs() <= DROP_TOL {
                    continue;
                }
                u_col.push((k, u));
                for &(i, l) in &f.lower[k] {
                    if !mark[i] {
                        mark[i] = true;
                        touched.push(i);
                        if row_step[i] != usize::MAX {
                            // keep `pending` sorted; new steps are always later than k
                            let s = row_step[i];
                            let at = pending[next..].partition_point(|&p| p < s) + next;
                            pending.insert(at, s);
                        }
                    }
                    work[i] -= l * u;
                }
            }

            let mut max_abs = 0.0f64;
            for &r in &touched {
                if row_step[r] == usize::MAX {
                    max_abs = max_abs.max(work[r].abs());
                }
            }
            if max_abs < SINGULAR_TOL {
                return Err(Singular { position: pos });
            }
            let mut best: Option<(usize, usize, f64)> = None;
            for &r in &touched {
                if row_step[r] != usize::MAX {
                    continue;
                }
                let a = work[r].abs();
                if a < PIVOT_THRESHOLD * max_abs {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((br, bc, ba)) => {
                        (row_count[r], std::cmp::Reverse(ordered(a)), r)
                            < (bc, std::cmp::Reverse(ordered(ba)), br)
                    }
                };
                if better {
                    best = Some((r, row_count[r], a));
                }
            }
            let (prow, _, _) = best.expect("a candidate pivot exists above the threshold");
            let piv = work[prow];
            let k = f.pivot_row.len();
            let mut l_col = Vec::new();
            for &r in &touched {
                if row_step[r] == usize::MAX && r != prow {
                    let v = work[r] / piv;
                    if v.abs() > DROP_TOL {
                        l_col.push((r, v));
                    }
                }
            }
            l_col.sort_unstable_by_key(|&(r, _)| r);
            row_step[prow] = k;
            f.pivot_row.push(prow);
            f.pivot_pos.push(pos);
            f.lower.push(l_col);
            f.upper.push(u_col);
            f.diag.push(piv);

            for &r in &touched {
                work[r] = 0.0;
                mark[r] = false;
            }
            touched.clear();
        }
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eta_count(&self) -> usize {
        self.etas.len()
    }

    /// Solves `B x = rhs`; `rhs` is indexed by row, the result by basis position.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut y = rhs.to_vec();
        let n = self.dim;
        let mut z = vec![0.0; n];
        for k in 0..n {
            let t = y[self.pivot_row[k]];
            z[k] = t;
            if t != 0.0 {
                for &(i, l) in &self.lower[k] {
                    y[i] -= l * t;
                }
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let w = z[k] / self.diag[k];
            x[self.pivot_pos[k]] = w;
            if w != 0.0 {
                for &(j, u) in &self.upper[k] {
                    z[j] -= u * w;
                }
            }
        }
        for eta in &self.etas {
            let xp = x[eta.position] / eta.pivot;
            x[eta.position] = xp;
            if xp != 0.0 {
                for &(i, a) in &eta.others {
                    x[i] -= a * xp;
                }
            }
        }
        x
    }

    /// Solves `Bᵀ y = rhs`; `rhs` is indexed by basis position, the result by row.
    pub fn solve_transpose(&self, rhs: &[f64]) -> Vec<f64> {
        let mut c = rhs.to_vec();
        for eta in self.etas.iter().rev() {
            let mut acc = c[eta.position];
            for &(i, a) in &eta.others {
                acc -= a * c[i];
            }
            c[eta.position] = acc / eta.pivot;
        }
        let n = self.dim;
        let mut v = vec![0.0; n];
        for k in 0..n {
            let mut acc = c[self.pivot_pos[k]];
            for &(j, u) in &self.upper[k] {
                acc -= u * v[j];
            }
            v[k] = acc / self.diag[k];
        }
        let mut y = vec![0.0; n];
        for k in (0..n).rev() {
            let mut acc = v[k];
            for &(i, l) in &self.lower[k] {
                acc -= l * y[i];
            }
            y[self.pivot_row[k]] = acc;
        }
        y
    }

    /// Records that basis position `position` now holds a column whose
    /// representation in the old basis is `alpha` (i.e. `B⁻¹ a`).
    pub fn update(&mut self, position: usize, alpha: &[f64]) {
        let others = alpha
            .iter()
            .enumerate()
            .filter(|&(i, &a)| i != position && a.abs() > DROP_TOL)
            .map(|(i, &a)| (i, a))
            .collect();
        self.etas.push(Eta {
            position,
            pivot: alpha[position],
            others,
        });
    }
}

fn ordered(x: f64) -> u64 {
    // nonnegative finite floats order like their bit patterns
    x.to_bits()
}
