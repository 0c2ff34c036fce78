use std::collections::BTreeSet;

use crate::network::{Evidence, Network};

pub(crate) type Graph = Vec<BTreeSet<usize>>;

/// Moral graph restricted to nodes with `present[v]`.
pub(crate) fn moral_graph(net: &Network, present: &[bool]) -> Graph {
    let mut g: Graph = vec![BTreeSet::new(); net.n()];
    let mut link = |a: usize, b: usize| {
        if a != b && present[a] && present[b] {
            g[a].insert(b);
            g[b].insert(a);
        }
    };
    for v in 0..net.n() {
        let ps = net.parents(v);
        for (i, &p) in ps.iter().enumerate() {
            link(p, v);
            for &q in &ps[i + 1..] {
                link(p, q);
            }
        }
    }
    g
}

fn fill_in(g: &Graph, v: usize) -> usize {
    let nb: Vec<usize> = g[v].iter().copied().collect();
    let mut fill = 0;
    for (i, &a) in nb.iter().enumerate() {
        for &b in &nb[i + 1..] {
            if !g[a].contains(&b) {
                fill += 1;
            }
        }
    }
    fill
}

/// Greedy min-fill elimination of every vertex with `eliminate[v]`; ties go
/// to the lowest id. Returns the order and, for each step, the eliminated
/// vertex together with its neighbours at that moment.
pub(crate) fn min_fill(mut g: Graph, eliminate: &[bool]) -> (Vec<usize>, Vec<Vec<usize>>) {
    let mut remaining: BTreeSet<usize> = (0..g.len()).filter(|&v| eliminate[v]).collect();
    let mut order = Vec::with_capacity(remaining.len());
    let mut cliques = Vec::with_capacity(remaining.len());
    while !remaining.is_empty() {
        let v = *remaining
            .iter()
            .min_by_key(|&&v| (fill_in(&g, v), v))
            .expect("nonempty");
        remaining.remove(&v);
        let nb: Vec<usize> = g[v].iter().copied().collect();
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                g[a].insert(b);
                g[b].insert(a);
            }
        }
        for &a in &nb {
            g[a].remove(&v);
        }
        g[v].clear();
        let mut clique = nb;
        clique.push(v);
        clique.sort_unstable();
        order.push(v);
        cliques.push(clique);
    }
    (order, cliques)
}

/// Min-fill order over the moral graph for every variable that is neither a
/// target nor observed. Observed variables are dropped from the graph first.
pub fn elimination_order(net: &Network, targets: &[usize], ev: &Evidence) -> Vec<usize> {
    let present: Vec<bool> = (0..net.n())
        .map(|v| !ev.contains(v) || targets.contains(&v))
        .collect();
    let eliminate: Vec<bool> = (0..net.n()).map(|v| present[v] && !targets.contains(&v)).collect();
    min_fill(moral_graph(net, &present), &eliminate).0
}
