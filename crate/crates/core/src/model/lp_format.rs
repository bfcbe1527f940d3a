//! CPLEX LP text export.

use std::fmt::Write as _;

use super::MilpModel;
use crate::solver::{Relation, Row};

const WRAP: usize = 200;

fn number(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:.12e}")
    }
}

fn push_terms(out: &mut String, terms: &[(usize, f64)], names: &[String]) {
    let mut line_len = 0;
    let mut first = true;
    for &(j, a) in terms {
        if a == 0.0 {
            continue;
        }
        let sign = if a < 0.0 { "-" } else if first { "" } else { "+" };
        let mag = a.abs();
        let piece = if mag == 1.0 {
            format!(" {sign} {}", names[j])
        } else {
            format!(" {sign} {} {}", number(mag), names[j])
        };
        if line_len + piece.len() > WRAP {
            out.push_str("\n  ");
            line_len = 2;
        }
        line_len += piece.len();
        out.push_str(&piece);
        first = false;
    }
    if first {
        out.push_str(" 0");
    }
}

fn push_row(out: &mut String, row: &Row, names: &[String]) {
    let _ = write!(out, " {}:", row.name);
    push_terms(out, &row.terms, names);
    let op = match row.relation {
        Relation::LessEq => "<=",
        Relation::Eq => "=",
        Relation::GreaterEq => ">=",
    };
    let _ = writeln!(out, " {op} {}", number(row.rhs));
}

/// Renders the model as CPLEX LP text. Complementarity pairs become SOS1
/// sets; guarded caps, which have no LP-format equivalent, are listed as
/// comments.
pub fn write_lp(model: &MilpModel) -> String {
    let lp = &model.lp;
    let names = &lp.names;
    let mut out = String::new();
    let _ = writeln!(out, "\\ mode: {}", model.mode);
    let _ = writeln!(out, "\\ variables: {} ({} free)", lp.num_vars(), model.free_var_count());
    out.push_str("Minimize\n obj:");
    let terms: Vec<(usize, f64)> = lp.cost.iter().copied().enumerate().filter(|&(_, c)| c != 0.0).collect();
    push_terms(&mut out, &terms, names);
    if lp.constant != 0.0 {
        let sign = if lp.constant < 0.0 { "-" } else { "+" };
        let _ = write!(out, " {sign} {}", number(lp.constant.abs()));
    }
    out.push_str("\nSubject To\n");
    for row in &lp.rows {
        push_row(&mut out, row, names);
    }
    if !model.guarded.is_empty() {
        out.push_str("\\ conditional rows, enforced only while the named flow is positive:\n");
        for g in &model.guarded {
            let mut line = String::new();
            push_row(&mut line, &g.row, names);
            let _ = write!(out, "\\ if {} > 0:{}", names[g.guard], line);
        }
    }
    out.push_str("Bounds\n");
    for j in 0..lp.num_vars() {
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        let name = &names[j];
        if lo == hi {
            let _ = writeln!(out, " {name} = {}", number(lo));
        } else if lo.is_infinite() && hi.is_infinite() {
            let _ = writeln!(out, " {name} free");
        } else {
            let l = if lo.is_finite() { number(lo) } else { "-inf".into() };
            let h = if hi.is_finite() { number(hi) } else { "+inf".into() };
            let _ = writeln!(out, " {l} <= {name} <= {h}");
        }
    }
    if !model.pairs.is_empty() {
        out.push_str("SOS\n");
        for (k, p) in model.pairs.iter().enumerate() {
            let _ = writeln!(out, " s{k}: S1:: {}:1 {}:2", names[p.first], names[p.second]);
        }
    }
    out.push_str("End\n");
    out
}
