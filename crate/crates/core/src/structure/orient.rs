use crate::error::{PgmError, Result};

use super::{PdagGraph, SepsetMap};

/// Orient every unshielded triple `x - z - y` with `z` outside
/// `sepset(x, y)` as `x -> z <- y`.
///
/// Triples are visited in lexicographic `(x, y, z)` order and a later triple
/// overwrites an earlier orientation of the same edge. Pairs without a
/// recorded sepset are left alone.
pub fn orient_v_structures(skeleton: &PdagGraph, sepsets: &SepsetMap) -> PdagGraph {
    let n = skeleton.n();
    let mut g = skeleton.clone();
    for x in 0..n {
        for y in x + 1..n {
            if skeleton.adjacent(x, y) {
                continue;
            }
            let Some(sep) = sepsets.get(x, y) else { continue };
            for z in 0..n {
                if skeleton.adjacent(x, z) && skeleton.adjacent(y, z) && !sep.contains(&z) {
                    g.orient(x, z);
                    g.orient(y, z);
                }
            }
        }
    }
    g
}

fn rule1(g: &mut PdagGraph) -> bool {
    // a -> b - c, a and c nonadjacent  =>  b -> c
    let n = g.n();
    for b in 0..n {
        for c in g.undirected_neighbors(b) {
            if g.parents(b).iter().any(|&a| a != c && !g.adjacent(a, c)) {
                g.orient(b, c);
                return true;
            }
        }
    }
    false
}

fn rule2(g: &mut PdagGraph) -> bool {
    // a -> b -> c and a - c  =>  a -> c
    let n = g.n();
    for a in 0..n {
        for c in g.undirected_neighbors(a) {
            if g.children(a).iter().any(|&b| g.is_directed(b, c)) {
                g.orient(a, c);
                return true;
            }
        }
    }
    false
}

fn rule3(g: &mut PdagGraph) -> bool {
    // a - c -> b, a - d -> b, c and d nonadjacent, a - b  =>  a -> b
    let n = g.n();
    for a in 0..n {
        for b in g.undirected_neighbors(a) {
            let mids: Vec<usize> = g
                .undirected_neighbors(a)
                .into_iter()
                .filter(|&m| m != b && g.is_directed(m, b))
                .collect();
            let hit = mids
                .iter()
                .enumerate()
                .any(|(i, &c)| mids[i + 1..].iter().any(|&d| !g.adjacent(c, d)));
            if hit {
                g.orient(a, b);
                return true;
            }
        }
    }
    false
}

fn rule4(g: &mut PdagGraph) -> bool {
    // a - b, d -> c -> b, a - d, a adjacent to c, b and d nonadjacent  =>  a -> b
    let n = g.n();
    for a in 0..n {
        for b in g.undirected_neighbors(a) {
            let hit = g.parents(b).into_iter().any(|c| {
                c != a
                    && g.adjacent(a, c)
                    && g.parents(c)
                        .into_iter()
                        .any(|d| d != b && g.is_undirected(a, d) && !g.adjacent(b, d))
            });
            if hit {
                g.orient(a, b);
                return true;
            }
        }
    }
    false
}

/// Apply Meek's rules R1-R4 until nothing changes.
pub fn apply_meek_rules(g: &PdagGraph) -> PdagGraph {
    let mut g = g.clone();
    while rule1(&mut g) || rule2(&mut g) || rule3(&mut g) || rule4(&mut g) {}
    g
}

/// A DAG in the equivalence class of `cpdag` (Dor-Tarsi).
///
/// Repeatedly removes a sink whose undirected neighbours are adjacent to all
/// of its other neighbours, pointing its undirected edges into it. The
/// highest-id eligible sink is taken first, so lower ids end up earlier in
/// the resulting order and a lone `A - B` becomes `A -> B`.
pub fn extend_to_dag(cpdag: &PdagGraph) -> Result<Vec<Vec<usize>>> {
    let n = cpdag.n();
    let mut work = cpdag.clone();
    let mut out = cpdag.clone();
    let mut alive = vec![true; n];
    for _ in 0..n {
        let pick = (0..n).rev().find(|&x| {
            alive[x]
                && work.children(x).is_empty()
                && {
                    let nbrs = work.neighbors(x);
                    work.undirected_neighbors(x)
                        .iter()
                        .all(|&y| nbrs.iter().all(|&z| z == y || work.adjacent(y, z)))
                }
        });
        let x = pick.ok_or(PgmError::NoExtension)?;
        for y in work.undirected_neighbors(x) {
            out.orient(y, x);
        }
        for y in work.neighbors(x) {
            work.remove(x, y);
        }
        alive[x] = false;
    }
    out.to_parents()
}

/// The CPDAG of a DAG: its skeleton with v-structures, completed by Meek's rules.
pub fn cpdag_from_dag(parents: &[Vec<usize>]) -> PdagGraph {
    let dag = PdagGraph::from_parents(parents);
    let mut g = dag.skeleton();
    for (z, ps) in parents.iter().enumerate() {
        for (i, &x) in ps.iter().enumerate() {
            for &y in &ps[i + 1..] {
                if !dag.adjacent(x, y) {
                    g.orient(x, z);
                    g.orient(y, z);
                }
            }
        }
    }
    apply_meek_rules(&g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> PdagGraph {
        let mut g = PdagGraph::new(3);
        g.add_undirected(0, 1);
        g.add_undirected(1, 2);
        g
    }

    #[test]
    fn collider_when_middle_not_in_sepset() {
        let mut s = SepsetMap::new();
        s.insert(0, 2, vec![]);
        let g = orient_v_structures(&path3(), &s);
        assert!(g.is_directed(0, 1) && g.is_directed(2, 1));
    }

    #[test]
    fn no_collider_when_middle_in_sepset() {
        let mut s = SepsetMap::new();
        s.insert(0, 2, vec![1]);
        assert_eq!(orient_v_structures(&path3(), &s), path3());
    }

    #[test]
    fn triangle_untouched() {
        let g = PdagGraph::complete(3);
        assert_eq!(orient_v_structures(&g, &SepsetMap::new()), g);
    }

    #[test]
    fn meek_r1() {
        let mut g = PdagGraph::new(3);
        g.add_directed(0, 1);
        g.add_undirected(1, 2);
        let m = apply_meek_rules(&g);
        assert!(m.is_directed(1, 2));
    }

    #[test]
    fn meek_r2() {
        let mut g = PdagGraph::new(3);
        g.add_directed(0, 1);
        g.add_directed(1, 2);
        g.add_undirected(0, 2);
        assert!(apply_meek_rules(&g).is_directed(0, 2));
    }

    #[test]
    fn meek_r3() {
        // a=0 with c=1, d=2 both -> b=3, a - b
        let mut g = PdagGraph::new(4);
        g.add_undirected(0, 1);
        g.add_undirected(0, 2);
        g.add_undirected(0, 3);
        g.add_directed(1, 3);
        g.add_directed(2, 3);
        assert!(apply_meek_rules(&g).is_directed(0, 3));
    }

    #[test]
    fn meek_r4() {
        // a=0 - b=1, d=3 -> c=2 -> b, a - d, a - c, b and d nonadjacent
        let mut g = PdagGraph::new(4);
        g.add_undirected(0, 1);
        g.add_directed(3, 2);
        g.add_directed(2, 1);
        g.add_undirected(0, 3);
        g.add_undirected(0, 2);
        assert!(apply_meek_rules(&g).is_directed(0, 1));
    }

    #[test]
    fn undirected_tree_unchanged() {
        let mut g = PdagGraph::new(4);
        g.add_undirected(0, 1);
        g.add_undirected(1, 2);
        g.add_undirected(1, 3);
        assert_eq!(apply_meek_rules(&g), g);
    }

    #[test]
    fn extension_examples() {
        let dag = vec![vec![], vec![0], vec![1]];
        assert_eq!(extend_to_dag(&PdagGraph::from_parents(&dag)).unwrap(), dag);

        let mut g = PdagGraph::new(2);
        g.add_undirected(0, 1);
        assert_eq!(extend_to_dag(&g).unwrap(), vec![vec![], vec![0]]);

        // A -> B <- C, B - D: only B -> D avoids a new collider
        let mut g = PdagGraph::new(4);
        g.add_directed(0, 1);
        g.add_directed(2, 1);
        g.add_undirected(1, 3);
        let parents = extend_to_dag(&g).unwrap();
        let oracle: Vec<Vec<Vec<usize>>> = [(1usize, 3usize), (3, 1)]
            .iter()
            .map(|&(f, t)| {
                let mut h = g.clone();
                h.orient(f, t);
                h.to_parents().unwrap()
            })
            .filter(|p| cpdag_from_dag(p) == cpdag_from_dag(&[vec![], vec![0, 2], vec![], vec![1]]))
            .collect();
        assert_eq!(oracle.len(), 1);
        assert_eq!(parents, oracle[0]);
    }

    #[test]
    fn no_extension_for_undirected_four_cycle() {
        let mut g = PdagGraph::new(4);
        for (a, b) in [(0, 1), (1, 2), (2, 3), (3, 0)] {
            g.add_undirected(a, b);
        }
        assert_eq!(extend_to_dag(&g), Err(PgmError::NoExtension));
    }

    #[test]
    fn cpdag_of_collider_and_chain() {
        let g = cpdag_from_dag(&[vec![], vec![0, 2], vec![]]);
        assert!(g.is_directed(0, 1) && g.is_directed(2, 1));
        let g = cpdag_from_dag(&[vec![], vec![0], vec![1]]);
        assert!(g.is_undirected(0, 1) && g.is_undirected(1, 2));
    }
}
