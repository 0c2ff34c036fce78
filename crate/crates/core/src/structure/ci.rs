//! G² conditional-independence test on discrete data.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::dataset::Dataset;
use crate::potential::{Odometer, PotentialTable};

/// Joint count tables up to this many cells are cached per edge.
pub const JOINT_CACHE_CELLS: usize = 1 << 20;

/// Outcome of one conditional-independence test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub independent: bool,
}

impl CiResult {
    fn skipped() -> Self {
        CiResult { statistic: 0.0, dof: 0, p_value: 1.0, independent: true }
    }
}

/// Upper tail of the chi-square distribution.
pub fn chi_square_sf(statistic: f64, dof: usize) -> f64 {
    if dof == 0 || statistic <= 0.0 {
        return 1.0;
    }
    let d = ChiSquared::new(dof as f64).expect("dof > 0");
    d.sf(statistic).clamp(0.0, 1.0)
}

/// Unadjusted degrees of freedom `(|X|-1)(|Y|-1)Π|Z|`.
pub fn raw_dof(data: &Dataset, x: usize, y: usize, z: &[usize]) -> u128 {
    let mut dof = ((data.card(x) - 1) * (data.card(y) - 1)) as u128;
    for &v in z {
        dof = dof.saturating_mul(data.card(v) as u128);
    }
    dof
}

/// Count table laid out `[z-config][x][y]`, z variables ascending by id with
/// the last one fastest.
fn count_direct(data: &Dataset, x: usize, y: usize, z: &[usize]) -> Vec<f64> {
    let (cx, cy) = (data.card(x), data.card(y));
    let nz: usize = z.iter().map(|&v| data.card(v)).product();
    let mut counts = vec![0u64; nz * cx * cy];
    let (colx, coly) = (data.column(x), data.column(y));
    let zcols: Vec<(&[u16], usize)> = z.iter().map(|&v| (data.column(v), data.card(v))).collect();
    for r in 0..data.n_rows() {
        let mut zi = 0usize;
        for (col, card) in &zcols {
            zi = zi * card + col[r] as usize;
        }
        counts[(zi * cx + colx[r] as usize) * cy + coly[r] as usize] += 1;
    }
    counts.into_iter().map(|c| c as f64).collect()
}

/// Joint count table over `vars` (ascending) as a potential table.
fn count_joint(data: &Dataset, vars: &[usize]) -> PotentialTable {
    let cards: Vec<usize> = vars.iter().map(|&v| data.card(v)).collect();
    let len: usize = cards.iter().product();
    let mut counts = vec![0u64; len];
    let cols: Vec<(&[u16], usize)> = vars.iter().map(|&v| (data.column(v), data.card(v))).collect();
    for r in 0..data.n_rows() {
        let mut idx = 0usize;
        for (col, card) in &cols {
            idx = idx * card + col[r] as usize;
        }
        counts[idx] += 1;
    }
    PotentialTable::from_canonical(
        vars.to_vec(),
        cards,
        counts.into_iter().map(|c| c as f64).collect(),
    )
}

/// Re-lay a count table over `{x, y} ∪ z` as `[z-config][x][y]`.
fn relayout(t: &PotentialTable, x: usize, y: usize) -> Vec<f64> {
    let mut order: Vec<usize> = t.scope().iter().copied().filter(|v| *v != x && *v != y).collect();
    order.push(x);
    order.push(y);
    let cards: Vec<usize> = order.iter().map(|v| t.card_of(*v).expect("in scope")).collect();
    let maps = [order
        .iter()
        .map(|v| t.strides()[t.position(*v).expect("in scope")])
        .collect::<Vec<_>>()];
    let mut od = Odometer::starting_at(&cards, &maps, 0);
    let mut out = Vec::with_capacity(t.len());
    for _ in 0..t.len() {
        out.push(t.values()[od.offsets[0]]);
        od.advance();
    }
    out
}

/// G² statistic and structural-zero-adjusted dof from a `[z][x][y]` table.
fn g2_from_counts(counts: &[f64], cx: usize, cy: usize) -> (f64, usize) {
    let cell = cx * cy;
    let mut g = 0.0;
    let mut dof = 0usize;
    let mut rows = vec![0.0; cx];
    let mut cols = vec![0.0; cy];
    for block in counts.chunks(cell) {
        rows.iter_mut().for_each(|r| *r = 0.0);
        cols.iter_mut().for_each(|c| *c = 0.0);
        for i in 0..cx {
            for j in 0..cy {
                let o = block[i * cy + j];
                rows[i] += o;
                cols[j] += o;
            }
        }
        let total: f64 = rows.iter().sum();
        if total == 0.0 {
            continue;
        }
        for i in 0..cx {
            for j in 0..cy {
                let o = block[i * cy + j];
                if o > 0.0 {
                    let e = rows[i] * cols[j] / total;
                    g += o * (o / e).ln();
                }
            }
        }
        let nr = rows.iter().filter(|r| **r > 0.0).count();
        let nc = cols.iter().filter(|c| **c > 0.0).count();
        dof += nr.saturating_sub(1) * nc.saturating_sub(1);
    }
    ((2.0 * g).max(0.0), dof)
}

fn finish(statistic: f64, dof: usize, alpha: f64) -> CiResult {
    let dof = if dof == 0 && statistic > 0.0 { 1 } else { dof };
    let p_value = chi_square_sf(statistic, dof);
    CiResult { statistic, dof, p_value, independent: p_value > alpha }
}

/// G² test of `x ⊥ y | z` without any small-sample guard.
///
/// Cells with zero observations contribute nothing. Degrees of freedom are
/// summed per conditioning configuration over the rows and columns with
/// nonzero marginals; the total is floored at 1 when the statistic is
/// positive.
pub fn ci_test(data: &Dataset, x: usize, y: usize, z: &[usize], alpha: f64) -> CiResult {
    assert!(x != y && !z.contains(&x) && !z.contains(&y), "x, y and z must be disjoint");
    let mut z = z.to_vec();
    z.sort_unstable();
    let counts = count_direct(data, x, y, &z);
    let (g2, dof) = g2_from_counts(&counts, data.card(x), data.card(y));
    finish(g2, dof, alpha)
}

/// Test runner used by the skeleton search: applies the small-sample guard
/// and shares one joint count pass across the tests of an edge.
pub(crate) struct CiTester<'a> {
    pub data: &'a Dataset,
    pub alpha: f64,
    /// Skip tests with raw dof above `n_rows / rows_per_dof`; 0 disables.
    pub rows_per_dof: f64,
}

impl<'a> CiTester<'a> {
    fn guarded(&self, x: usize, y: usize, z: &[usize]) -> bool {
        self.rows_per_dof > 0.0
            && raw_dof(self.data, x, y, z) as f64 > self.data.n_rows() as f64 / self.rows_per_dof
    }

    /// A counting context for all tests on edge `(x, y)` whose conditioning
    /// sets are drawn from `pool`.
    pub fn edge(&self, x: usize, y: usize, pool: &[usize], n_tests: usize) -> EdgeCounts<'_, 'a> {
        let mut vars: Vec<usize> = pool.to_vec();
        vars.push(x);
        vars.push(y);
        vars.sort_unstable();
        vars.dedup();
        let cells: u128 = vars.iter().map(|&v| self.data.card(v) as u128).product();
        let joint = (n_tests > 1 && cells <= JOINT_CACHE_CELLS as u128)
            .then(|| count_joint(self.data, &vars));
        EdgeCounts { tester: self, x, y, joint }
    }
}

pub(crate) struct EdgeCounts<'t, 'a> {
    tester: &'t CiTester<'a>,
    x: usize,
    y: usize,
    joint: Option<PotentialTable>,
}

impl EdgeCounts<'_, '_> {
    /// `z` must be sorted ascending.
    pub fn test(&self, z: &[usize]) -> CiResult {
        let t = self.tester;
        let (x, y) = (self.x, self.y);
        if t.guarded(x, y, z) {
            return CiResult::skipped();
        }
        let counts = match &self.joint {
            Some(joint) => {
                let mut keep = z.to_vec();
                keep.push(x);
                keep.push(y);
                let m = joint.marginalize(&keep).expect("subset of cached scope");
                relayout(&m, x, y)
            }
            None => count_direct(t.data, x, y, z),
        };
        let (g2, dof) = g2_from_counts(&counts, t.data.card(x), t.data.card(y));
        finish(g2, dof, t.alpha)
    }
}
