//! Structural and distributional error measures.

use crate::approx::MarginalSet;
use crate::error::{PgmError, Result};
use crate::potential::PotentialTable;
use crate::structure::PdagGraph;

/// Structural Hamming distance between two PDAGs over the same variables:
/// missing or extra adjacencies count 1, and so does an adjacency present in
/// both with a different mark (direction reversed, or directed vs undirected).
pub fn shd(a: &PdagGraph, b: &PdagGraph) -> Result<usize> {
    if a.n() != b.n() {
        return Err(PgmError::VariableMismatch(format!(
            "graphs have {} and {} variables",
            a.n(),
            b.n()
        )));
    }
    let mut d = 0;
    for i in 0..a.n() {
        for j in i + 1..a.n() {
            match (a.adjacent(i, j), b.adjacent(i, j)) {
                (false, false) => {}
                (true, true) => {
                    let same = (a.is_undirected(i, j) && b.is_undirected(i, j))
                        || (a.is_directed(i, j) && b.is_directed(i, j))
                        || (a.is_directed(j, i) && b.is_directed(j, i));
                    if !same {
                        d += 1;
                    }
                }
                _ => d += 1,
            }
        }
    }
    Ok(d)
}

const NORMALIZED_TOLERANCE: f64 = 1e-6;

fn hellinger_values(p: &[f64], q: &[f64]) -> f64 {
    let s: f64 = p.iter().zip(q).map(|(a, b)| (a.sqrt() - b.sqrt()).powi(2)).sum();
    (0.5 * s).sqrt()
}

/// `sqrt(½ Σ (√p − √q)²)` between two normalized tables over the same
/// scope; the result lies in `[0, 1]`.
pub fn hellinger(p: &PotentialTable, q: &PotentialTable) -> Result<f64> {
    if p.scope() != q.scope() || p.cards() != q.cards() {
        return Err(PgmError::VariableMismatch(format!(
            "tables over {:?} and {:?}",
            p.scope(),
            q.scope()
        )));
    }
    for t in [p, q] {
        let s = t.sum();
        if (s - 1.0).abs() > NORMALIZED_TOLERANCE {
            return Err(PgmError::Unnormalized(s));
        }
    }
    Ok(hellinger_values(p.values(), q.values()))
}

/// Average Hellinger distance over the variables of two marginal sets,
/// which must cover the same, nonempty set of variables.
pub fn mean_hellinger(a: &MarginalSet, b: &MarginalSet) -> Result<f64> {
    let va: Vec<usize> = a.vars().collect();
    let vb: Vec<usize> = b.vars().collect();
    if va != vb || va.is_empty() {
        return Err(PgmError::VariableMismatch(format!(
            "marginal sets cover {va:?} and {vb:?}"
        )));
    }
    let mut total = 0.0;
    for v in &va {
        total += hellinger(a.get(*v).expect("listed"), b.get(*v).expect("listed"))?;
    }
    Ok(total / va.len() as f64)
}
