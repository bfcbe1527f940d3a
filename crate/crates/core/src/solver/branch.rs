//! Best-first branch-and-bound over violated complementarity pairs and
//! guarded rows.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::rc::Rc;
use std::time::Instant;

use log::debug;

use super::lp::{LpStatus, Row};
use super::simplex::Basis;
use super::{simplex, SolverOptions};
use crate::error::{Error, Result};
use crate::model::MilpModel;

pub(super) struct Outcome {
    pub values: Vec<f64>,
    pub limit_reached: bool,
    pub best_bound: f64,
    pub nodes: usize,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
struct Node {
    bound: f64,
    depth: usize,
    id: usize,
    zeroed: Vec<usize>,
    enforced: Vec<usize>,
    warm: Option<Rc<Basis>>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // BinaryHeap is a max-heap: smallest bound first, then deepest, then oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.id.cmp(&self.id))
    }
}

enum Branch {
    Pair(usize, usize),
    Guard(usize),
}

fn most_violated(model: &MilpModel, x: &[f64], enforced: &[usize], opts: &SolverOptions) -> Option<Branch> {
    let mut best: Option<(f64, Branch)> = None;
    for p in &model.pairs {
        let v = x[p.first].min(x[p.second]);
        if v > opts.comp_tol && best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, Branch::Pair(p.first, p.second)));
        }
    }
    for (k, g) in model.guarded.iter().enumerate() {
        if enforced.contains(&k) || x[g.guard] <= opts.comp_tol {
            continue;
        }
        let v = g.row.violation(x).min(x[g.guard]);
        if v > opts.feas_tol.max(opts.comp_tol) && best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, Branch::Guard(k)));
        }
    }
    best.map(|(_, b)| b)
}

pub(super) fn branch_and_bound(model: &MilpModel, opts: &SolverOptions) -> Result<Outcome> {
    let start = Instant::now();
    let simplex_opts = opts.simplex();
    let mut heap = BinaryHeap::new();
    heap.push(Node {
        bound: f64::NEG_INFINITY,
        depth: 0,
        id: 0,
        zeroed: Vec::new(),
        enforced: Vec::new(),
        warm: None,
    });
    let mut next_id = 1;
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut nodes = 0;
    let mut iterations = 0;
    let mut limit_reached = false;

    while let Some(node) = heap.pop() {
        if let Some((best, _)) = &incumbent {
            if node.bound >= *best - opts.opt_tol {
                heap.clear();
                break;
            }
        }
        let out_of_time = opts
            .time_limit_seconds
            .is_some_and(|limit| start.elapsed().as_secs_f64() > limit);
        if nodes >= opts.max_nodes || out_of_time {
            heap.push(node);
            limit_reached = true;
            break;
        }
        nodes += 1;

        let mut lp = model.lp.clone();
        for &j in &node.zeroed {
            lp.upper[j] = lp.upper[j].min(0.0);
        }
        for &k in &node.enforced {
            let Row { name, family, terms, relation, rhs } = model.guarded[k].row.clone();
            lp.add_row(name, family, terms, relation, rhs);
        }
        let (sol, basis) = simplex::solve_lp_from(&lp, &simplex_opts, node.warm.as_deref())?;
        iterations += sol.iterations;
        match sol.status {
            LpStatus::Infeasible => {
                if nodes == 1 {
                    return Err(Error::NotOptimal("infeasible"));
                }
                continue;
            }
            LpStatus::Unbounded => return Err(Error::NotOptimal("unbounded")),
            LpStatus::Optimal => {}
        }
        let obj = sol.objective_value;
        if let Some((best, _)) = &incumbent {
            if obj >= *best - opts.opt_tol {
                continue;
            }
        }
        match most_violated(model, &sol.values, &node.enforced, opts) {
            None => {
                debug!("node {nodes}: incumbent {obj:.6} at depth {}", node.depth);
                incumbent = Some((obj, sol.values));
            }
            Some(branch) => {
                let warm = basis.map(Rc::new);
                let children: Vec<(Vec<usize>, Vec<usize>)> = match branch {
                    Branch::Pair(a, b) => vec![
                        ([node.zeroed.clone(), vec![a]].concat(), node.enforced.clone()),
                        ([node.zeroed.clone(), vec![b]].concat(), node.enforced.clone()),
                    ],
                    Branch::Guard(k) => vec![
                        ([node.zeroed.clone(), vec![model.guarded[k].guard]].concat(), node.enforced.clone()),
                        (node.zeroed.clone(), [node.enforced.clone(), vec![k]].concat()),
                    ],
                };
                for (zeroed, enforced) in children {
                    heap.push(Node {
                        bound: obj,
                        depth: node.depth + 1,
                        id: next_id,
                        zeroed,
                        enforced,
                        warm: warm.clone(),
                    });
                    next_id += 1;
                }
            }
        }
    }

    let open_bound = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    match incumbent {
        Some((obj, values)) => Ok(Outcome {
            values,
            limit_reached,
            best_bound: if limit_reached { open_bound.min(obj) } else { obj },
            nodes,
            iterations,
        }),
        None if limit_reached => Err(Error::Limit { nodes }),
        None => Err(Error::NotOptimal("infeasible")),
    }
}
