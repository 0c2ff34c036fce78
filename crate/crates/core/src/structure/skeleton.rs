use crate::dataset::Dataset;
use crate::exec;

use super::ci::CiTester;
use super::{PdagGraph, SepsetMap};

/// Knobs for the skeleton search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkeletonOptions {
    pub alpha: f64,
    /// Largest conditioning-set size; `None` is unlimited.
    pub max_depth: Option<usize>,
    /// Tests whose unadjusted dof exceeds `n_rows / rows_per_dof` are
    /// treated as independent without counting. `0` disables the guard.
    pub rows_per_dof: f64,
}

impl Default for SkeletonOptions {
    fn default() -> Self {
        SkeletonOptions { alpha: 0.05, max_depth: None, rows_per_dof: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonResult {
    pub graph: PdagGraph,
    pub sepsets: SepsetMap,
    pub ci_tests: u64,
    pub levels: usize,
}

/// Calls `f` on each size-`k` subset of `items` in lexicographic order;
/// stops early when `f` returns true.
fn for_each_subset(items: &[usize], k: usize, mut f: impl FnMut(&[usize]) -> bool) -> bool {
    if k > items.len() {
        return false;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut buf = vec![0; k];
    loop {
        for (b, &i) in buf.iter_mut().zip(&idx) {
            *b = items[i];
        }
        if f(&buf) {
            return true;
        }
        let mut pos = k;
        loop {
            if pos == 0 {
                return false;
            }
            pos -= 1;
            if idx[pos] < items.len() - k + pos {
                break;
            }
        }
        idx[pos] += 1;
        for q in pos + 1..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// One edge's work at a level: the first separating set found, if any, and
/// the number of tests run. All subsets of the first endpoint's neighbours
/// come first, then those of the second endpoint not already tried.
fn test_edge(
    tester: &CiTester<'_>,
    adj: &[Vec<usize>],
    x: usize,
    y: usize,
    level: usize,
) -> (Option<Vec<usize>>, u64) {
    let ax: Vec<usize> = adj[x].iter().copied().filter(|&v| v != y).collect();
    let ay: Vec<usize> = adj[y].iter().copied().filter(|&v| v != x).collect();
    let mut pool = ax.clone();
    pool.extend(&ay);
    pool.sort_unstable();
    pool.dedup();
    let planned = binomial(ax.len(), level) + binomial(ay.len(), level);
    let counts = tester.edge(x, y, &pool, planned);

    let mut tests = 0u64;
    let mut found = None;
    let mut run = |z: &[usize]| {
        tests += 1;
        if counts.test(z).independent {
            found = Some(z.to_vec());
            true
        } else {
            false
        }
    };
    if !for_each_subset(&ax, level, &mut run) {
        for_each_subset(&ay, level, |z| {
            if level > 0 && z.iter().all(|v| ax.contains(v)) {
                return false;
            }
            run(z)
        });
    }
    (found, tests)
}

/// Level-wise skeleton search with adjacency sets frozen at the start of
/// every level. Edges of a level are independent tasks handed to the worker
/// pool; removals are committed after the whole level finishes, so the
/// result does not depend on scheduling.
pub fn pc_stable_skeleton(data: &Dataset, opts: &SkeletonOptions) -> SkeletonResult {
    let n = data.n_vars();
    let tester = CiTester { data, alpha: opts.alpha, rows_per_dof: opts.rows_per_dof };
    let mut graph = PdagGraph::complete(n);
    let mut sepsets = SepsetMap::new();
    let mut ci_tests = 0u64;
    let mut level = 0usize;
    loop {
        if opts.max_depth.is_some_and(|d| level > d) {
            break;
        }
        let adj: Vec<Vec<usize>> = (0..n).map(|v| graph.neighbors(v)).collect();
        let edges: Vec<(usize, usize)> = graph
            .edges()
            .map(|(i, j, _)| (i.min(j), i.max(j)))
            .filter(|&(x, y)| adj[x].len() > level || adj[y].len() > level)
            .collect();
        if edges.is_empty() {
            break;
        }
        let results = exec::map_slice(&edges, |&(x, y)| test_edge(&tester, &adj, x, y, level));
        for (&(x, y), (sep, tests)) in edges.iter().zip(results) {
            ci_tests += tests;
            if let Some(s) = sep {
                graph.remove(x, y);
                sepsets.insert(x, y, s);
            }
        }
        level += 1;
    }
    SkeletonResult { graph, sepsets, ci_tests, levels: level }
}
