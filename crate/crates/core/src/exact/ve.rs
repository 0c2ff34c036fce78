use crate::error::{PgmError, Result};
use crate::network::{Evidence, Network};
use crate::potential::{PotentialTable, DEFAULT_MAX_ENTRIES};

use super::order::{min_fill, moral_graph};

/// Posterior `P(query | ev)` by variable elimination.
///
/// Nodes that are not ancestors of the query or evidence are pruned first.
/// Observed variables other than the query are summed out of each reduced
/// factor individually, which is exact because a reduced factor is nonzero
/// on a single state of each observed variable.
pub fn variable_elimination(net: &Network, query: usize, ev: &Evidence) -> Result<PotentialTable> {
    variable_elimination_capped(net, query, ev, DEFAULT_MAX_ENTRIES)
}

pub fn variable_elimination_capped(
    net: &Network,
    query: usize,
    ev: &Evidence,
    cap: usize,
) -> Result<PotentialTable> {
    ev.validate(net)?;
    if query >= net.n() {
        return Err(PgmError::InvalidVariable(format!("unknown variable id {query}")));
    }
    let relevant = net.ancestral_set(std::iter::once(query).chain(ev.iter().map(|(v, _)| v)));
    let mut factors: Vec<PotentialTable> = Vec::new();
    for v in (0..net.n()).filter(|&v| relevant[v]) {
        let t = net.cpt(v).reduce(ev);
        let keep: Vec<usize> = t
            .scope()
            .iter()
            .copied()
            .filter(|&u| u == query || !ev.contains(u))
            .collect();
        factors.push(t.marginalize(&keep)?);
    }

    let present: Vec<bool> = (0..net.n())
        .map(|v| relevant[v] && (v == query || !ev.contains(v)))
        .collect();
    let eliminate: Vec<bool> = (0..net.n()).map(|v| present[v] && v != query).collect();
    let (order, _) = min_fill(moral_graph(net, &present), &eliminate);

    for v in order {
        let (with, without): (Vec<_>, Vec<_>) = factors.into_iter().partition(|f| f.contains(v));
        factors = without;
        let Some((first, rest)) = with.split_first() else { continue };
        let mut prod = first.clone();
        for f in rest {
            prod = prod.multiply_capped(f, cap)?;
        }
        let keep: Vec<usize> = prod.scope().iter().copied().filter(|&u| u != v).collect();
        factors.push(prod.marginalize(&keep)?);
    }
    let mut result = PotentialTable::new(&[(query, net.card(query))], vec![1.0; net.card(query)])?;
    for f in &factors {
        result = result.multiply_capped(f, cap)?;
    }
    result.normalize().map_err(|_| PgmError::ImpossibleEvidence)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn close(a: &[f64], b: &[f64]) {
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-12, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn prior_of_child() {
        let net = fixtures::two_node();
        let p = variable_elimination(&net, 1, &Evidence::new()).unwrap();
        close(p.values(), &[0.59, 0.41]);
    }

    #[test]
    fn diagnostic_query() {
        let net = fixtures::two_node();
        let p = variable_elimination(&net, 0, &Evidence::from_pairs([(1, 1)])).unwrap();
        close(p.values(), &[0.14 / 0.41, 0.27 / 0.41]);
    }

    #[test]
    fn evidence_on_query() {
        let net = fixtures::two_node();
        let p = variable_elimination(&net, 0, &Evidence::from_pairs([(0, 1)])).unwrap();
        assert_eq!(p.values(), &[0.0, 1.0]);
    }

    #[test]
    fn impossible_evidence() {
        let net = fixtures::deterministic_pair();
        let ev = Evidence::from_pairs([(0, 0), (1, 1)]);
        assert_eq!(variable_elimination(&net, 0, &Evidence::from_pairs([(1, 1), (0, 0)])).unwrap_err(), PgmError::ImpossibleEvidence);
        assert!(variable_elimination(&net, 1, &ev).is_err());
    }
}
