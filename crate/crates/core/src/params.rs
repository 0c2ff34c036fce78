//! Maximum-likelihood CPT estimation from complete data.

use crate::dataset::Dataset;
use crate::error::{PgmError, Result};
use crate::exec;
use crate::network::{DagStructure, Network};

pub const DEFAULT_PSEUDOCOUNT: f64 = 1.0;

/// Fit `P(x | pa) = (N(x, pa) + a) / (N(pa) + a·|X|)`.
///
/// Parent configurations never observed with `a = 0` get a uniform row.
/// Each family is counted in one pass over its columns; families are
/// counted in parallel. Integer counts make the result independent of row
/// order.
pub fn fit_mle(structure: &DagStructure, data: &Dataset, pseudocount: f64) -> Result<Network> {
    if !(pseudocount >= 0.0) || !pseudocount.is_finite() {
        return Err(PgmError::InvalidConfig(format!(
            "pseudocount must be a nonnegative number, got {pseudocount}"
        )));
    }
    check_match(structure, data)?;
    let n = structure.n();
    let rows = exec::map_range(n, |v| family_rows(structure, data, v, pseudocount));
    Network::from_rows("learned", structure.variables.clone(), structure.parents.clone(), rows)
}

fn check_match(structure: &DagStructure, data: &Dataset) -> Result<()> {
    let sv = &structure.variables;
    let dv = data.variables();
    if sv.len() != dv.len() {
        return Err(PgmError::VariableMismatch(format!(
            "structure has {} variables, data has {}",
            sv.len(),
            dv.len()
        )));
    }
    for (a, b) in sv.iter().zip(dv) {
        if a.name != b.name || a.states != b.states {
            return Err(PgmError::VariableMismatch(format!(
                "structure variable {} does not match data column {}",
                a.name, b.name
            )));
        }
    }
    Ok(())
}

fn family_rows(s: &DagStructure, data: &Dataset, v: usize, a: f64) -> Vec<f64> {
    let card = s.variables[v].card();
    let ps = &s.parents[v];
    let n_cfg: usize = ps.iter().map(|&p| s.variables[p].card()).product();
    let mut counts = vec![0u64; n_cfg * card];
    let pcols: Vec<(&[u16], usize)> = ps.iter().map(|&p| (data.column(p), data.card(p))).collect();
    let col = data.column(v);
    for r in 0..data.n_rows() {
        let mut cfg = 0usize;
        for (c, k) in &pcols {
            cfg = cfg * k + c[r] as usize;
        }
        counts[cfg * card + col[r] as usize] += 1;
    }
    let mut rows = Vec::with_capacity(counts.len());
    for row in counts.chunks(card) {
        let total: u64 = row.iter().sum();
        let denom = total as f64 + a * card as f64;
        if denom == 0.0 {
            rows.extend(std::iter::repeat_n(1.0 / card as f64, card));
        } else {
            rows.extend(row.iter().map(|&c| (c as f64 + a) / denom));
        }
    }
    rows
}
