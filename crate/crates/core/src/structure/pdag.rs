use std::collections::BTreeMap;

use crate::error::{PgmError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mark {
    None,
    Undirected,
    /// row → column
    Out,
    /// column → row
    In,
}

/// Partially directed graph: every adjacent pair carries either an
/// undirected edge or one arrow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PdagGraph {
    n: usize,
    marks: Vec<Mark>,
}

impl PdagGraph {
    pub fn new(n: usize) -> Self {
        PdagGraph { n, marks: vec![Mark::None; n * n] }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::new(n);
        for i in 0..n {
            for j in i + 1..n {
                g.add_undirected(i, j);
            }
        }
        g
    }

    /// Fully directed graph from parent lists.
    pub fn from_parents(parents: &[Vec<usize>]) -> Self {
        let mut g = Self::new(parents.len());
        for (v, ps) in parents.iter().enumerate() {
            for &p in ps {
                g.add_directed(p, v);
            }
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn set(&mut self, i: usize, j: usize, m: Mark) {
        assert!(i != j, "self-loops are not allowed");
        let rev = match m {
            Mark::Out => Mark::In,
            Mark::In => Mark::Out,
            other => other,
        };
        self.marks[i * self.n + j] = m;
        self.marks[j * self.n + i] = rev;
    }

    fn mark(&self, i: usize, j: usize) -> Mark {
        self.marks[i * self.n + j]
    }

    pub fn add_undirected(&mut self, i: usize, j: usize) {
        self.set(i, j, Mark::Undirected);
    }

    pub fn add_directed(&mut self, from: usize, to: usize) {
        self.set(from, to, Mark::Out);
    }

    /// Alias of [`add_directed`](Self::add_directed) for re-orienting an existing edge.
    pub fn orient(&mut self, from: usize, to: usize) {
        self.set(from, to, Mark::Out);
    }

    pub fn remove(&mut self, i: usize, j: usize) {
        self.set(i, j, Mark::None);
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        i != j && self.mark(i, j) != Mark::None
    }

    pub fn is_undirected(&self, i: usize, j: usize) -> bool {
        i != j && self.mark(i, j) == Mark::Undirected
    }

    pub fn is_directed(&self, from: usize, to: usize) -> bool {
        from != to && self.mark(from, to) == Mark::Out
    }

    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        (0..self.n).filter(|&j| self.adjacent(i, j)).collect()
    }

    pub fn undirected_neighbors(&self, i: usize) -> Vec<usize> {
        (0..self.n).filter(|&j| self.is_undirected(i, j)).collect()
    }

    pub fn parents(&self, i: usize) -> Vec<usize> {
        (0..self.n).filter(|&j| self.is_directed(j, i)).collect()
    }

    pub fn children(&self, i: usize) -> Vec<usize> {
        (0..self.n).filter(|&j| self.is_directed(i, j)).collect()
    }

    /// Edges in unordered-pair order: `(from, to, true)` for arrows and
    /// `(lo, hi, false)` for undirected edges.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, bool)> + '_ {
        (0..self.n).flat_map(move |i| {
            (i + 1..self.n).filter_map(move |j| match self.mark(i, j) {
                Mark::None => None,
                Mark::Undirected => Some((i, j, false)),
                Mark::Out => Some((i, j, true)),
                Mark::In => Some((j, i, true)),
            })
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    pub fn is_fully_directed(&self) -> bool {
        self.edges().all(|e| e.2)
    }

    /// Same adjacencies, every edge undirected.
    pub fn skeleton(&self) -> PdagGraph {
        let mut g = PdagGraph::new(self.n);
        for (i, j, _) in self.edges() {
            g.add_undirected(i, j);
        }
        g
    }

    /// Parent lists of a fully directed graph.
    pub fn to_parents(&self) -> Result<Vec<Vec<usize>>> {
        if !self.is_fully_directed() {
            return Err(PgmError::InvalidNetwork("graph has undirected edges".into()));
        }
        let parents: Vec<Vec<usize>> = (0..self.n).map(|i| self.parents(i)).collect();
        if crate::network::topological_order(&parents).is_none() {
            return Err(PgmError::InvalidNetwork("graph has a directed cycle".into()));
        }
        Ok(parents)
    }

    /// Graph with node `i` renamed to `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> PdagGraph {
        let mut g = PdagGraph::new(self.n);
        for (i, j, directed) in self.edges() {
            if directed {
                g.add_directed(perm[i], perm[j]);
            } else {
                g.add_undirected(perm[i], perm[j]);
            }
        }
        g
    }
}

/// Separating sets keyed by unordered pair `(min, max)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SepsetMap {
    sets: BTreeMap<(usize, usize), Vec<usize>>,
}

impl SepsetMap {
    pub fn new() -> Self {
        Self::default()
    }

    fn key(i: usize, j: usize) -> (usize, usize) {
        (i.min(j), i.max(j))
    }

    pub fn insert(&mut self, i: usize, j: usize, mut set: Vec<usize>) {
        set.sort_unstable();
        debug_assert!(!set.contains(&i) && !set.contains(&j));
        self.sets.insert(Self::key(i, j), set);
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&[usize]> {
        self.sets.get(&Self::key(i, j)).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), &[usize])> {
        self.sets.iter().map(|(k, v)| (*k, v.as_slice()))
    }

    pub fn relabel(&self, perm: &[usize]) -> SepsetMap {
        let mut out = SepsetMap::new();
        for ((i, j), s) in self.iter() {
            out.insert(perm[i], perm[j], s.iter().map(|&v| perm[v]).collect());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marks_are_symmetric() {
        let mut g = PdagGraph::new(3);
        g.add_directed(2, 0);
        g.add_undirected(0, 1);
        assert!(g.is_directed(2, 0) && !g.is_directed(0, 2));
        assert!(g.is_undirected(1, 0));
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1, false), (2, 0, true)]);
        assert_eq!(g.parents(0), vec![2]);
        g.remove(0, 2);
        assert!(!g.adjacent(2, 0));
    }

    #[test]
    fn to_parents_requires_dag() {
        let mut g = PdagGraph::new(2);
        g.add_undirected(0, 1);
        assert!(g.to_parents().is_err());
        g.orient(1, 0);
        assert_eq!(g.to_parents().unwrap(), vec![vec![1], vec![]]);
    }
}
