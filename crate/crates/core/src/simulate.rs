//! Forward sampling of datasets and random network generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::dataset::{Dataset, State};
use crate::error::{PgmError, Result};
use crate::exec;
use crate::network::{Network, Variable};

const ROWS_PER_TASK: usize = 4096;

/// `n` complete rows drawn from `net`. Row `r` uses stream `r` of a ChaCha8
/// generator seeded with `seed`, so the data is identical for any worker
/// count and a longer dataset extends a shorter one.
pub fn generate_dataset(net: &Network, n: usize, seed: u64) -> Result<Dataset> {
    let nv = net.n();
    if nv == 0 {
        return Err(PgmError::InvalidNetwork("network has no variables".into()));
    }
    let topo = net.topological_order().to_vec();
    let rows: Vec<Vec<f64>> = (0..nv).map(|v| net.cpt_rows(v)).collect();
    let strides: Vec<Vec<usize>> = (0..nv)
        .map(|v| {
            let ps = net.parents(v);
            let mut s = vec![0; ps.len()];
            let mut acc = 1;
            for k in (0..ps.len()).rev() {
                s[k] = acc;
                acc *= net.card(ps[k]);
            }
            s
        })
        .collect();
    let base = ChaCha8Rng::seed_from_u64(seed);
    let mut flat: Vec<State> = vec![0; n * nv];
    exec::for_chunks_mut(&mut flat, ROWS_PER_TASK * nv, |ci, chunk| {
        let mut state = vec![0usize; nv];
        for (j, row) in chunk.chunks_mut(nv).enumerate() {
            let mut rng = base.clone();
            rng.set_stream((ci * ROWS_PER_TASK + j) as u64);
            for &v in &topo {
                let card = net.card(v);
                let r: usize = net.parents(v).iter().zip(&strides[v]).map(|(&p, &s)| state[p] * s).sum();
                let probs = &rows[v][r * card..(r + 1) * card];
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut pick = 0;
                for (k, &p) in probs.iter().enumerate() {
                    if p > 0.0 {
                        acc += p;
                        pick = k;
                        if u < acc {
                            break;
                        }
                    }
                }
                state[v] = pick;
            }
            for (cell, &s) in row.iter_mut().zip(&state) {
                *cell = s as State;
            }
        }
    });
    let columns = (0..nv).map(|v| flat.iter().skip(v).step_by(nv).copied().collect()).collect();
    Dataset::new(net.variables().to_vec(), columns)
}

fn names(n: usize) -> Vec<String> {
    let width = n.saturating_sub(1).to_string().len();
    (0..n).map(|i| format!("X{i:0width$}")).collect()
}

fn dirichlet_rows<R: Rng>(rng: &mut R, configs: usize, card: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(configs * card);
    for _ in 0..configs {
        let draws: Vec<f64> = (0..card).map(|_| rng.sample::<f64, _>(Exp1).max(1e-300)).collect();
        let s: f64 = draws.iter().sum();
        out.extend(draws.iter().map(|d| d / s));
    }
    out
}

fn assemble<R: Rng>(rng: &mut R, cards: &[usize], parents: Vec<Vec<usize>>, name: &str) -> Result<Network> {
    let vars: Vec<Variable> = names(cards.len())
        .into_iter()
        .zip(cards)
        .enumerate()
        .map(|(i, (nm, &c))| Variable::with_card(i, nm, c))
        .collect::<Result<_>>()?;
    let rows = (0..cards.len())
        .map(|v| {
            let configs: usize = parents[v].iter().map(|&p| cards[p]).product();
            dirichlet_rows(rng, configs, cards[v])
        })
        .collect();
    Network::from_rows(name, vars, parents, rows)
}

/// Random DAG over `n` variables named `X0..`, each with up to `max_parents`
/// parents among lower ids, cardinalities drawn from `cards`, and CPT rows
/// from a flat Dirichlet.
pub fn random_network(
    n: usize,
    max_parents: usize,
    cards: std::ops::RangeInclusive<usize>,
    seed: u64,
) -> Result<Network> {
    if n == 0 || *cards.start() < 1 || cards.is_empty() {
        return Err(PgmError::InvalidConfig("need at least one variable and one state".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let card_of: Vec<usize> = (0..n).map(|_| rng.random_range(cards.clone())).collect();
    let parents: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            let k = rng.random_range(0..=max_parents.min(v));
            let mut ps = rand::seq::index::sample(&mut rng, v, k).into_vec();
            ps.sort_unstable();
            ps
        })
        .collect();
    assemble(&mut rng, &card_of, parents, "random")
}

/// Random polytree: a random labelled tree whose edges get random
/// directions, so nodes may have several parents but no undirected cycle.
pub fn random_polytree(n: usize, cards: std::ops::RangeInclusive<usize>, seed: u64) -> Result<Network> {
    if n == 0 || *cards.start() < 1 || cards.is_empty() {
        return Err(PgmError::InvalidConfig("need at least one variable and one state".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let card_of: Vec<usize> = (0..n).map(|_| rng.random_range(cards.clone())).collect();
    let mut parents = vec![Vec::new(); n];
    for v in 1..n {
        let u = rng.random_range(0..v);
        if rng.random::<bool>() {
            parents[v].push(u);
        } else {
            parents[u].push(v);
        }
    }
    parents.iter_mut().for_each(|p| p.sort_unstable());
    assemble(&mut rng, &card_of, parents, "polytree")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Workers;
    use crate::fixtures;

    #[test]
    fn data_is_worker_independent_and_prefix_stable() {
        let net = fixtures::asia_like();
        let a = Workers(1).install(|| generate_dataset(&net, 10_000, 5).unwrap());
        let b = Workers(3).install(|| generate_dataset(&net, 10_000, 5).unwrap());
        assert_eq!(a, b);
        let short = generate_dataset(&net, 5000, 5).unwrap();
        assert_eq!(short.column(3), &a.column(3)[..5000]);
    }

    #[test]
    fn frequencies_match_prior() {
        let net = fixtures::two_node();
        let d = generate_dataset(&net, 200_000, 0).unwrap();
        let ones = d.column(1).iter().filter(|&&s| s == 1).count() as f64 / 200_000.0;
        assert!((ones - 0.41).abs() < 0.005);
    }

    #[test]
    fn random_networks_are_valid() {
        for seed in 0..20 {
            let net = random_network(12, 3, 2..=4, seed).unwrap();
            assert_eq!(net.n(), 12);
            assert!(net.all_parents().iter().all(|p| p.len() <= 3));
            let tree = random_polytree(15, 2..=3, seed).unwrap();
            let edges: usize = tree.all_parents().iter().map(Vec::len).sum();
            assert_eq!(edges, 14);
        }
    }

    #[test]
    fn names_sort_in_id_order() {
        let n = names(12);
        let mut sorted = n.clone();
        sorted.sort();
        assert_eq!(n, sorted);
    }
}
