use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{PgmError, Result};
use crate::exec;
use crate::network::{Evidence, Network};
use crate::potential::PotentialTable;

use super::lbp::{run_lbp, LbpOptions};
use super::{Diagnostics, MarginalSet, Posterior, SamplerConfig};

/// Samples per tally block. Blocks are tallied independently and merged in
/// block order, so results do not depend on the worker count.
const BLOCK: usize = 1024;

const AIS_EPSILON: f64 = 0.04;
const EPIS_EPSILON: f64 = 0.01;

/// One node of the sampling layout, stored in topological order.
struct Node {
    var: usize,
    card: usize,
    parents: Vec<usize>,
    strides: Vec<usize>,
    cpt: Vec<f64>,
    evidence: Option<usize>,
    marg_offset: usize,
    family_offset: usize,
}

struct Layout {
    nodes: Vec<Node>,
    n_vars: usize,
    marg_len: usize,
    family_len: usize,
}

impl Layout {
    fn new(net: &Network, ev: &Evidence) -> Self {
        let mut nodes = Vec::with_capacity(net.n());
        let mut marg_offset = 0;
        let mut family_offset = 0;
        let mut offsets = vec![0usize; net.n()];
        for v in 0..net.n() {
            offsets[v] = marg_offset;
            marg_offset += net.card(v);
        }
        for &v in net.topological_order() {
            let parents = net.parents(v).to_vec();
            let mut strides = vec![0usize; parents.len()];
            let mut s = 1;
            for (k, &p) in parents.iter().enumerate().rev() {
                strides[k] = s;
                s *= net.card(p);
            }
            let cpt = net.cpt_rows(v);
            let len = cpt.len();
            nodes.push(Node {
                var: v,
                card: net.card(v),
                parents,
                strides,
                cpt,
                evidence: ev.get(v),
                marg_offset: offsets[v],
                family_offset,
            });
            family_offset += len;
        }
        Layout { nodes, n_vars: net.n(), marg_len: marg_offset, family_len: family_offset }
    }
}

#[inline]
fn parent_row(node: &Node, states: &[usize]) -> usize {
    node.parents.iter().zip(&node.strides).map(|(&p, &s)| states[p] * s).sum()
}

#[inline]
fn draw(row: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (k, &q) in row.iter().enumerate() {
        if q > 0.0 {
            acc += q;
            last = k;
            if u < acc {
                return k;
            }
        }
    }
    last
}

/// Importance distribution: one row-major table per variable with the same
/// layout as [`Network::cpt_rows`]. Rows of observed variables are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct Proposal {
    rows: Vec<Vec<f64>>,
}

impl Proposal {
    /// The network's own CPTs.
    pub fn prior(net: &Network) -> Self {
        Proposal { rows: (0..net.n()).map(|v| net.cpt_rows(v)).collect() }
    }

    pub fn rows(&self, v: usize) -> &[f64] {
        &self.rows[v]
    }

    /// Replace the table of `v`. Every row must sum to one.
    pub fn set_rows(&mut self, v: usize, rows: Vec<f64>) -> Result<()> {
        if rows.len() != self.rows[v].len() {
            return Err(PgmError::InvalidConfig(format!(
                "proposal table for variable {v} needs {} entries",
                self.rows[v].len()
            )));
        }
        self.rows[v] = rows;
        Ok(())
    }
}

/// Raise entries in `(0, eps)` to `eps`, taking the mass proportionally from
/// the larger entries. Zero entries stay zero.
pub fn apply_epsilon_cutoff(row: &mut [f64], eps: f64) {
    let positive = row.iter().filter(|&&p| p > 0.0).count();
    if positive == 0 {
        return;
    }
    if eps * positive as f64 >= 1.0 {
        for p in row.iter_mut().filter(|p| **p > 0.0) {
            *p = 1.0 / positive as f64;
        }
        return;
    }
    // Shrinking the large entries may push one of them under eps; repeat.
    let mut fixed = vec![false; row.len()];
    loop {
        let mut changed = false;
        for (p, f) in row.iter_mut().zip(fixed.iter_mut()) {
            if *p > 0.0 && *p < eps && !*f {
                *f = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let low_mass = fixed.iter().filter(|&&f| f).count() as f64 * eps;
        let free: f64 = row.iter().zip(&fixed).filter(|(_, f)| !**f).map(|(p, _)| *p).sum();
        let scale = (1.0 - low_mass) / free;
        for (p, &f) in row.iter_mut().zip(&fixed) {
            if f {
                *p = eps;
            } else {
                *p *= scale;
            }
        }
    }
}

#[derive(Clone)]
struct Tally {
    marg: Vec<f64>,
    family: Vec<f64>,
    w_sum: f64,
    w2_sum: f64,
    accepted: u64,
}

impl Tally {
    fn zero(layout: &Layout, family: bool) -> Self {
        Tally {
            marg: vec![0.0; layout.marg_len],
            family: if family { vec![0.0; layout.family_len] } else { Vec::new() },
            w_sum: 0.0,
            w2_sum: 0.0,
            accepted: 0,
        }
    }

    fn merge(&mut self, o: &Tally) {
        for (a, b) in self.marg.iter_mut().zip(&o.marg) {
            *a += b;
        }
        for (a, b) in self.family.iter_mut().zip(&o.family) {
            *a += b;
        }
        self.w_sum += o.w_sum;
        self.w2_sum += o.w2_sum;
        self.accepted += o.accepted;
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    /// Sample every node from its CPT and reject on an evidence mismatch.
    Reject,
    /// Sample unobserved nodes from the proposal and weight by `P/Q`.
    Weight,
}

struct Run<'a> {
    layout: &'a Layout,
    proposal: &'a Proposal,
    mode: Mode,
    base: ChaCha8Rng,
    track_family: bool,
}

impl Run<'_> {
    /// Tally samples `start..start + count`. Sample `i` uses stream `i` of the
    /// seeded generator.
    fn tally(&self, start: usize, count: usize) -> Tally {
        let blocks = count.div_ceil(BLOCK);
        let parts = exec::map_range(blocks, |b| {
            let lo = start + b * BLOCK;
            let hi = (lo + BLOCK).min(start + count);
            self.block(lo, hi)
        });
        let mut total = Tally::zero(self.layout, self.track_family);
        for p in &parts {
            total.merge(p);
        }
        total
    }

    fn block(&self, lo: usize, hi: usize) -> Tally {
        let layout = self.layout;
        let mut t = Tally::zero(layout, self.track_family);
        let mut states = vec![0usize; layout.n_vars];
        let mut rows = vec![0usize; layout.nodes.len()];
        'samples: for i in lo..hi {
            let mut rng = self.base.clone();
            rng.set_stream(i as u64);
            let mut w = 1.0f64;
            for (k, node) in layout.nodes.iter().enumerate() {
                let r = parent_row(node, &states);
                rows[k] = r;
                let cpt = &node.cpt[r * node.card..(r + 1) * node.card];
                match (self.mode, node.evidence) {
                    (Mode::Reject, e) => {
                        let s = draw(cpt, rng.random::<f64>());
                        if e.is_some_and(|e| e != s) {
                            continue 'samples;
                        }
                        states[node.var] = s;
                    }
                    (Mode::Weight, Some(e)) => {
                        states[node.var] = e;
                        w *= cpt[e];
                    }
                    (Mode::Weight, None) => {
                        let q = &self.proposal.rows[node.var][r * node.card..(r + 1) * node.card];
                        let s = draw(q, rng.random::<f64>());
                        states[node.var] = s;
                        w *= cpt[s] / q[s];
                    }
                }
            }
            t.accepted += 1;
            if w == 0.0 {
                continue;
            }
            t.w_sum += w;
            t.w2_sum += w * w;
            for (k, node) in layout.nodes.iter().enumerate() {
                if node.evidence.is_some() {
                    continue;
                }
                let s = states[node.var];
                t.marg[node.marg_offset + s] += w;
                if self.track_family {
                    t.family[node.family_offset + rows[k] * node.card + s] += w;
                }
            }
        }
        t
    }
}

fn base_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn marginals_from(net: &Network, layout: &Layout, t: &Tally) -> Result<MarginalSet> {
    let mut out = MarginalSet::new();
    for node in &layout.nodes {
        if node.evidence.is_some() {
            continue;
        }
        let vals: Vec<f64> = t.marg[node.marg_offset..node.marg_offset + node.card]
            .iter()
            .map(|x| x / t.w_sum)
            .collect();
        out.insert(node.var, PotentialTable::new(&[(node.var, net.card(node.var))], vals)?);
    }
    Ok(out)
}

fn finish(net: &Network, layout: &Layout, t: &Tally, n: usize) -> Result<Posterior> {
    if t.w_sum == 0.0 {
        return Err(PgmError::ZeroTotalWeight);
    }
    Ok(Posterior {
        marginals: marginals_from(net, layout, t)?,
        diagnostics: Diagnostics {
            samples: n,
            effective_sample_size: Some(t.w_sum * t.w_sum / t.w2_sum),
            ..Default::default()
        },
    })
}

fn prepare(net: &Network, ev: &Evidence, cfg: &SamplerConfig) -> Result<Layout> {
    cfg.validate()?;
    ev.validate(net)?;
    Ok(Layout::new(net, ev))
}

/// Forward sampling with rejection of samples that contradict the evidence.
pub fn probabilistic_logic_sampling(net: &Network, ev: &Evidence, cfg: &SamplerConfig) -> Result<Posterior> {
    let layout = prepare(net, ev, cfg)?;
    let proposal = Proposal::prior(net);
    let run = Run { layout: &layout, proposal: &proposal, mode: Mode::Reject, base: base_rng(cfg.seed), track_family: false };
    let t = run.tally(0, cfg.n_samples);
    let rate = t.accepted as f64 / cfg.n_samples as f64;
    if t.accepted == 0 {
        return Err(PgmError::AllSamplesRejected { rejection_rate: 1.0 - rate });
    }
    Ok(Posterior {
        marginals: marginals_from(net, &layout, &t)?,
        diagnostics: Diagnostics {
            samples: cfg.n_samples,
            acceptance_rate: Some(rate),
            effective_sample_size: Some(t.accepted as f64),
            ..Default::default()
        },
    })
}

/// Importance sampling with a fixed proposal. Observed nodes are clamped and
/// contribute their CPT entry to the weight.
pub fn importance_sampling(
    net: &Network,
    ev: &Evidence,
    cfg: &SamplerConfig,
    proposal: &Proposal,
) -> Result<Posterior> {
    let layout = prepare(net, ev, cfg)?;
    check_proposal(net, proposal)?;
    let run = Run { layout: &layout, proposal, mode: Mode::Weight, base: base_rng(cfg.seed), track_family: false };
    let t = run.tally(0, cfg.n_samples);
    finish(net, &layout, &t, cfg.n_samples)
}

fn check_proposal(net: &Network, p: &Proposal) -> Result<()> {
    if p.rows.len() != net.n() || (0..net.n()).any(|v| p.rows[v].len() != net.cpt(v).len()) {
        return Err(PgmError::InvalidConfig("proposal does not match the network".into()));
    }
    Ok(())
}

/// Importance sampling with the prior as proposal.
pub fn likelihood_weighting(net: &Network, ev: &Evidence, cfg: &SamplerConfig) -> Result<Posterior> {
    importance_sampling(net, ev, cfg, &Proposal::prior(net))
}

/// Blend `rows` toward the per-row normalized `counts` with weight `rate`.
/// Rows without weight are left alone.
fn update_rows(rows: &mut [f64], counts: &[f64], card: usize, rate: f64) {
    for (row, c) in rows.chunks_mut(card).zip(counts.chunks(card)) {
        let total: f64 = c.iter().sum();
        if total <= 0.0 {
            continue;
        }
        for (q, &x) in row.iter_mut().zip(c) {
            *q += rate * (x / total - *q);
        }
    }
}

fn update_proposal(layout: &Layout, proposal: &mut Proposal, family: &[f64], rate: f64) {
    for node in layout.nodes.iter().filter(|n| n.evidence.is_none()) {
        let len = node.cpt.len();
        let counts = &family[node.family_offset..node.family_offset + len];
        update_rows(&mut proposal.rows[node.var], counts, node.card, rate);
    }
}

/// Self-importance sampling: every `update_interval` samples the proposal is
/// blended toward the weighted family frequencies of all samples so far.
/// All samples contribute to the estimate.
pub fn self_importance_sampling(net: &Network, ev: &Evidence, cfg: &SamplerConfig) -> Result<Posterior> {
    let layout = prepare(net, ev, cfg)?;
    let n = cfg.n_samples;
    let interval = cfg.update_interval.unwrap_or((n / 10).max(1));
    let mut proposal = Proposal::prior(net);
    let mut total = Tally::zero(&layout, true);
    let mut start = 0;
    while start < n {
        let count = interval.min(n - start);
        let run = Run { layout: &layout, proposal: &proposal, mode: Mode::Weight, base: base_rng(cfg.seed), track_family: true };
        let t = run.tally(start, count);
        total.merge(&t);
        start += count;
        if start < n {
            update_proposal(&layout, &mut proposal, &total.family, cfg.sis_blend);
        }
    }
    finish(net, &layout, &total, n)
}

/// AIS-BN starting proposal: unobserved parents of observed nodes get
/// uniform rows, then every unobserved row gets the ε-cutoff. Without
/// evidence the prior is already the target and is returned unchanged.
pub fn ais_initial_proposal(net: &Network, ev: &Evidence, eps: f64) -> Proposal {
    let mut p = Proposal::prior(net);
    for (e, _) in ev.iter() {
        for &u in net.parents(e) {
            if !ev.contains(u) {
                let k = net.card(u);
                p.rows[u].iter_mut().for_each(|x| *x = 1.0 / k as f64);
            }
        }
    }
    if !ev.is_empty() {
        cutoff_all(net, ev, &mut p, eps);
    }
    p
}

fn cutoff_all(net: &Network, ev: &Evidence, p: &mut Proposal, eps: f64) {
    for v in (0..net.n()).filter(|&v| !ev.contains(v)) {
        let k = net.card(v);
        p.rows[v].chunks_mut(k).for_each(|r| apply_epsilon_cutoff(r, eps));
    }
}

/// Adaptive importance sampling. With `learning_rate_start > 0` the proposal
/// is learned over `ais_stages` stages of `update_interval` samples, each
/// stage updating toward its own weighted family frequencies with rate
/// `a·(b/a)^(k/k_max)`; those samples are then discarded and the rest are
/// drawn from the learned proposal. Learning never uses more than half the
/// budget. With a zero start rate all samples come from the initial proposal.
pub fn ais_bn(net: &Network, ev: &Evidence, cfg: &SamplerConfig) -> Result<Posterior> {
    let layout = prepare(net, ev, cfg)?;
    let n = cfg.n_samples;
    let eps = cfg.epsilon_cutoff.unwrap_or(AIS_EPSILON);
    let k_max = cfg.ais_stages;
    let mut proposal = ais_initial_proposal(net, ev, eps);
    let (a, b) = (cfg.learning_rate_start, cfg.learning_rate_end);
    let mut start = 0;
    if a > 0.0 {
        let interval = cfg.update_interval.unwrap_or((n / (2 * k_max)).max(1));
        let budget = (interval * k_max).min(n / 2);
        for k in 0..k_max {
            let count = interval.min(budget - start);
            if count == 0 {
                break;
            }
            let run = Run { layout: &layout, proposal: &proposal, mode: Mode::Weight, base: base_rng(cfg.seed), track_family: true };
            let t = run.tally(start, count);
            start += count;
            let eta = a * (b / a).powf(k as f64 / k_max as f64);
            update_proposal(&layout, &mut proposal, &t.family, eta);
        }
    }
    let run = Run { layout: &layout, proposal: &proposal, mode: Mode::Weight, base: base_rng(cfg.seed), track_family: false };
    let t = run.tally(start, n - start);
    finish(net, &layout, &t, n - start)
}

/// EPIS-BN proposal: each CPT row reweighted by the loopy-BP messages that
/// reach the node from its children's factors, then ε-cutoff. Without
/// evidence the messages are uniform and the prior is used as is.
pub fn epis_proposal(net: &Network, ev: &Evidence, cfg: &SamplerConfig) -> Result<(Proposal, bool, usize)> {
    ev.validate(net)?;
    let lbp = run_lbp(net, ev, &LbpOptions::from(cfg));
    let mut p = Proposal::prior(net);
    if ev.is_empty() {
        return Ok((p, lbp.converged, lbp.iterations));
    }
    for v in (0..net.n()).filter(|&v| !ev.contains(v)) {
        let k = net.card(v);
        let lambda = lbp.child_messages(net, v);
        for row in p.rows[v].chunks_mut(k) {
            let scaled: Vec<f64> = row.iter().zip(&lambda).map(|(q, l)| q * l).collect();
            let total: f64 = scaled.iter().sum();
            if total > 0.0 {
                row.iter_mut().zip(&scaled).for_each(|(q, s)| *q = s / total);
            }
        }
    }
    cutoff_all(net, ev, &mut p, cfg.epsilon_cutoff.unwrap_or(EPIS_EPSILON));
    Ok((p, lbp.converged, lbp.iterations))
}

/// Importance sampling from the LBP-informed proposal of [`epis_proposal`].
pub fn epis_bn(net: &Network, ev: &Evidence, cfg: &SamplerConfig) -> Result<Posterior> {
    cfg.validate()?;
    let (proposal, converged, iterations) = epis_proposal(net, ev, cfg)?;
    let mut out = importance_sampling(net, ev, cfg, &proposal)?;
    out.diagnostics.converged = Some(converged);
    out.diagnostics.iterations = Some(iterations);
    Ok(out)
}
