//! Junction tree construction and two-phase level-synchronous propagation.
//!
//! Messages between cliques at the same depth are independent, so each
//! collect or distribute step runs all cliques of one depth concurrently;
//! large clique tables additionally split their own kernels across workers.

use std::collections::VecDeque;

use crate::error::{PgmError, Result};
use crate::exec;
use crate::network::{Evidence, Network};
use crate::potential::{PotentialTable, DEFAULT_MAX_ENTRIES};

use super::order::{min_fill, moral_graph};

#[derive(Debug, Clone, PartialEq)]
pub struct Separator {
    /// Endpoint cliques, `a < b`.
    pub a: usize,
    pub b: usize,
    pub vars: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JunctionTree {
    cliques: Vec<Vec<usize>>,
    initial: Vec<PotentialTable>,
    separators: Vec<Separator>,
    /// `(neighbour clique, separator index)` per clique.
    adjacency: Vec<Vec<(usize, usize)>>,
    root: usize,
    /// Parent clique and connecting separator, `None` for the root.
    up: Vec<Option<(usize, usize)>>,
    levels: Vec<usize>,
    by_level: Vec<Vec<usize>>,
    /// Smallest clique containing each variable.
    home: Vec<usize>,
    cards: Vec<usize>,
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|v| b.binary_search(v).is_ok())
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().copied().filter(|v| b.binary_search(v).is_ok()).collect()
}

fn find(uf: &mut [usize], mut x: usize) -> usize {
    while uf[x] != x {
        uf[x] = uf[uf[x]];
        x = uf[x];
    }
    x
}

fn bfs_depths(adjacency: &[Vec<(usize, usize)>], root: usize) -> Vec<usize> {
    let mut depth = vec![usize::MAX; adjacency.len()];
    depth[root] = 0;
    let mut q = VecDeque::from([root]);
    while let Some(c) = q.pop_front() {
        for &(nb, _) in &adjacency[c] {
            if depth[nb] == usize::MAX {
                depth[nb] = depth[c] + 1;
                q.push_back(nb);
            }
        }
    }
    depth
}

/// Build a junction tree with the default table-size cap.
pub fn build_junction_tree(net: &Network) -> Result<JunctionTree> {
    JunctionTree::build(net, DEFAULT_MAX_ENTRIES)
}

impl JunctionTree {
    /// Moralize, triangulate by min-fill, keep maximal elimination cliques,
    /// connect them by a maximum-weight spanning tree on separator size
    /// (ties by the smaller clique-index pair), assign each CPT to the
    /// first clique that covers its family, and root the tree at a
    /// minimum-eccentricity clique (lowest index on ties).
    pub fn build(net: &Network, cap: usize) -> Result<Self> {
        let n = net.n();
        let all = vec![true; n];
        let (_, elim_cliques) = min_fill(moral_graph(net, &all), &all);

        let mut cliques: Vec<Vec<usize>> = Vec::new();
        for (i, c) in elim_cliques.iter().enumerate() {
            let dominated = elim_cliques.iter().enumerate().any(|(j, d)| {
                j != i && is_subset(c, d) && (c.len() < d.len() || j < i)
            });
            if !dominated {
                cliques.push(c.clone());
            }
        }
        let k = cliques.len();

        let mut candidates: Vec<(usize, usize, usize)> = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                candidates.push((intersect(&cliques[i], &cliques[j]).len(), i, j));
            }
        }
        candidates.sort_by(|x, y| y.0.cmp(&x.0).then((x.1, x.2).cmp(&(y.1, y.2))));
        let mut uf: Vec<usize> = (0..k).collect();
        let mut separators = Vec::with_capacity(k.saturating_sub(1));
        let mut adjacency = vec![Vec::new(); k];
        for (_, i, j) in candidates {
            let (ri, rj) = (find(&mut uf, i), find(&mut uf, j));
            if ri == rj {
                continue;
            }
            uf[ri] = rj;
            let s = separators.len();
            separators.push(Separator { a: i, b: j, vars: intersect(&cliques[i], &cliques[j]) });
            adjacency[i].push((j, s));
            adjacency[j].push((i, s));
        }
        for a in adjacency.iter_mut() {
            a.sort_unstable();
        }

        let cards: Vec<usize> = (0..n).map(|v| net.card(v)).collect();
        let mut initial = Vec::with_capacity(k);
        for c in &cliques {
            let vars: Vec<(usize, usize)> = c.iter().map(|&v| (v, cards[v])).collect();
            let entries: u128 = vars.iter().map(|v| v.1 as u128).product();
            if entries > cap as u128 {
                return Err(PgmError::TableTooLarge { entries, cap });
            }
            initial.push(PotentialTable::ones(&vars)?);
        }
        for v in 0..n {
            let family = net.cpt(v).scope();
            let c = (0..k)
                .find(|&c| is_subset(family, &cliques[c]))
                .expect("triangulated moral graph covers every family");
            initial[c] = initial[c].multiply_capped(net.cpt(v), cap)?;
        }

        let root = (0..k)
            .min_by_key(|&c| (*bfs_depths(&adjacency, c).iter().max().unwrap_or(&0), c))
            .unwrap_or(0);
        let levels = if k == 0 { Vec::new() } else { bfs_depths(&adjacency, root) };
        let mut up = vec![None; k];
        for c in 0..k {
            for &(nb, s) in &adjacency[c] {
                if levels[nb] + 1 == levels[c] {
                    up[c] = Some((nb, s));
                }
            }
        }
        let max_depth = levels.iter().copied().max().unwrap_or(0);
        let mut by_level = vec![Vec::new(); if k == 0 { 0 } else { max_depth + 1 }];
        for c in 0..k {
            by_level[levels[c]].push(c);
        }
        let home = (0..n)
            .map(|v| {
                (0..k)
                    .filter(|&c| cliques[c].binary_search(&v).is_ok())
                    .min_by_key(|&c| (initial[c].len(), c))
                    .expect("every variable is in some clique")
            })
            .collect();

        Ok(JunctionTree { cliques, initial, separators, adjacency, root, up, levels, by_level, home, cards })
    }

    pub fn cliques(&self) -> &[Vec<usize>] {
        &self.cliques
    }

    pub fn separators(&self) -> &[Separator] {
        &self.separators
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    /// Neighbouring cliques of `c`.
    pub fn tree_neighbors(&self, c: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[c].iter().map(|x| x.0)
    }

    pub fn initial_potential(&self, c: usize) -> &PotentialTable {
        &self.initial[c]
    }

    /// Largest clique size minus one.
    pub fn width(&self) -> usize {
        self.cliques.iter().map(Vec::len).max().unwrap_or(1).saturating_sub(1)
    }

    /// Entries across all clique tables.
    pub fn total_entries(&self) -> usize {
        self.initial.iter().map(PotentialTable::len).sum()
    }

    /// Absorb evidence and run collect then distribute.
    pub fn propagate(&self, ev: &Evidence) -> Result<CalibratedTree<'_>> {
        for (v, s) in ev.iter() {
            if v >= self.cards.len() || s >= self.cards[v] {
                return Err(PgmError::InvalidEvidence(format!("bad observation {v}={s}")));
            }
        }
        let mut pots = self.initial.clone();
        for (v, s) in ev.iter() {
            let c = self.home[v];
            pots[c] = pots[c].reduce(&Evidence::from_pairs([(v, s)]));
        }
        let mut seps: Vec<Option<PotentialTable>> = vec![None; self.separators.len()];

        // collect: deepest level first
        for depth in (1..self.by_level.len()).rev() {
            let level = &self.by_level[depth];
            let msgs = exec::map_slice(level, |&c| {
                let (_, s) = self.up[c].expect("non-root");
                pots[c].marginalize(&self.separators[s].vars)
            });
            let mut by_parent: Vec<(usize, Vec<usize>)> = Vec::new();
            for (i, &c) in level.iter().enumerate() {
                let (p, _) = self.up[c].expect("non-root");
                match by_parent.iter_mut().find(|e| e.0 == p) {
                    Some(e) => e.1.push(i),
                    None => by_parent.push((p, vec![i])),
                }
            }
            let msgs: Vec<PotentialTable> = msgs.into_iter().collect::<Result<_>>()?;
            let updated = exec::map_slice(&by_parent, |(p, idx)| {
                let mut t = pots[*p].clone();
                for &i in idx {
                    t = t.multiply(&msgs[i])?;
                }
                Ok::<_, PgmError>(t)
            });
            for ((p, _), t) in by_parent.iter().zip(updated) {
                pots[*p] = t?;
            }
            for (i, &c) in level.iter().enumerate() {
                let (_, s) = self.up[c].expect("non-root");
                seps[s] = Some(msgs[i].clone());
            }
        }
        if let Some(root) = pots.get(self.root) {
            if !(root.sum() > 0.0) {
                return Err(PgmError::ImpossibleEvidence);
            }
        }

        // distribute: root outwards
        for depth in 1..self.by_level.len() {
            let level = &self.by_level[depth];
            let out = exec::map_slice(level, |&c| {
                let (p, s) = self.up[c].expect("non-root");
                let fresh = pots[p].marginalize(&self.separators[s].vars)?;
                let old = seps[s].as_ref().expect("set during collect");
                let ratio = fresh.divide(old)?;
                Ok::<_, PgmError>((pots[c].multiply(&ratio)?, fresh))
            });
            for (&c, r) in level.iter().zip(out) {
                let (table, fresh) = r?;
                let (_, s) = self.up[c].expect("non-root");
                pots[c] = table;
                seps[s] = Some(fresh);
            }
        }
        let seps = seps
            .into_iter()
            .map(|s| s.expect("every separator carries a message"))
            .collect();
        Ok(CalibratedTree { tree: self, cliques: pots, seps })
    }
}

/// Clique and separator tables after propagation. Entries are joint
/// probabilities with the evidence, so they are unnormalized.
#[derive(Debug, Clone)]
pub struct CalibratedTree<'a> {
    tree: &'a JunctionTree,
    cliques: Vec<PotentialTable>,
    seps: Vec<PotentialTable>,
}

impl CalibratedTree<'_> {
    pub fn tree(&self) -> &JunctionTree {
        self.tree
    }

    pub fn clique(&self, c: usize) -> &PotentialTable {
        &self.cliques[c]
    }

    pub fn separator(&self, s: usize) -> &PotentialTable {
        &self.seps[s]
    }

    /// Normalized marginal of `var` from its smallest containing clique.
    pub fn query(&self, var: usize) -> Result<PotentialTable> {
        let c = *self
            .tree
            .home
            .get(var)
            .ok_or_else(|| PgmError::InvalidVariable(format!("variable {var} not in tree")))?;
        self.cliques[c]
            .marginalize(&[var])?
            .normalize()
            .map_err(|_| PgmError::ImpossibleEvidence)
    }

    /// Probability of the evidence.
    pub fn evidence_probability(&self) -> f64 {
        self.cliques.get(self.tree.root).map_or(1.0, PotentialTable::sum)
    }
}

pub fn jt_propagate<'a>(tree: &'a JunctionTree, ev: &Evidence) -> Result<CalibratedTree<'a>> {
    tree.propagate(ev)
}

pub fn jt_query(tree: &CalibratedTree<'_>, var: usize) -> Result<PotentialTable> {
    tree.query(var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn chain_has_two_cliques() {
        let jt = build_junction_tree(&fixtures::chain()).unwrap();
        assert_eq!(jt.cliques(), &[vec![0, 1], vec![1, 2]]);
        assert_eq!(jt.separators().len(), 1);
        assert_eq!(jt.separators()[0].vars, vec![1]);
    }

    #[test]
    fn collider_is_one_clique() {
        let jt = build_junction_tree(&fixtures::collider()).unwrap();
        assert_eq!(jt.cliques(), &[vec![0, 1, 2]]);
        assert!(jt.separators().is_empty());
    }

    #[test]
    fn chain_prior_clique_table() {
        let net = fixtures::two_node();
        let jt = build_junction_tree(&net).unwrap();
        let cal = jt.propagate(&Evidence::new()).unwrap();
        let ab = (0..jt.cliques().len())
            .find(|&c| jt.cliques()[c] == vec![0, 1])
            .unwrap();
        let want = [0.56, 0.14, 0.03, 0.27];
        for (x, y) in cal.clique(ab).values().iter().zip(want) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn calibrated_neighbours_agree() {
        let net = fixtures::asia_like();
        let jt = build_junction_tree(&net).unwrap();
        let cal = jt.propagate(&fixtures::benchmark_evidence(&net)).unwrap();
        for s in jt.separators() {
            let a = cal.clique(s.a).marginalize(&s.vars).unwrap();
            let b = cal.clique(s.b).marginalize(&s.vars).unwrap();
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn evidence_on_query_is_one_hot() {
        let net = fixtures::two_node();
        let jt = build_junction_tree(&net).unwrap();
        let cal = jt.propagate(&Evidence::from_pairs([(0, 1)])).unwrap();
        assert_eq!(cal.query(0).unwrap().values(), &[0.0, 1.0]);
    }

    #[test]
    fn impossible_evidence_detected() {
        let net = fixtures::deterministic_pair();
        let jt = build_junction_tree(&net).unwrap();
        assert_eq!(
            jt.propagate(&Evidence::from_pairs([(0, 0), (1, 1)])).unwrap_err(),
            PgmError::ImpossibleEvidence
        );
    }
}
