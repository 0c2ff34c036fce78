use crate::error::{PgmError, Result};
use crate::exec;
use crate::network::{Evidence, Network};
use crate::potential::PotentialTable;

use super::{MarginalSet, SamplerConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbpOptions {
    pub max_iters: usize,
    pub tol: f64,
    /// Weight kept from the previous message, in `[0, 1)`.
    pub damping: f64,
}

impl Default for LbpOptions {
    fn default() -> Self {
        LbpOptions { max_iters: 100, tol: 1e-6, damping: 0.0 }
    }
}

impl From<&SamplerConfig> for LbpOptions {
    fn from(c: &SamplerConfig) -> Self {
        LbpOptions { max_iters: c.lbp_iters, tol: c.lbp_tol, damping: c.lbp_damping }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LbpResult {
    pub marginals: MarginalSet,
    pub converged: bool,
    pub iterations: usize,
}

/// Message state after a run. Factor `v` is the evidence-reduced CPT of `v`.
pub(crate) struct LbpState {
    factors: Vec<PotentialTable>,
    /// `to_var[f][k]`: message from factor `f` to the `k`-th variable of its scope.
    to_var: Vec<Vec<Vec<f64>>>,
    pub converged: bool,
    pub iterations: usize,
}

impl LbpState {
    /// Product of the messages sent to `v` by the factors of its children.
    pub fn child_messages(&self, net: &Network, v: usize) -> Vec<f64> {
        let mut out = vec![1.0; net.card(v)];
        for c in net.children(v) {
            let k = self.factors[c].position(v).expect("parent in family");
            out.iter_mut().zip(&self.to_var[c][k]).for_each(|(o, m)| *o *= m);
        }
        out
    }

    fn belief(&self, net: &Network, v: usize) -> Vec<f64> {
        let mut out = self.child_messages(net, v);
        let k = self.factors[v].position(v).expect("own family");
        out.iter_mut().zip(&self.to_var[v][k]).for_each(|(o, m)| *o *= m);
        out
    }
}

fn normalize_in_place(m: &mut [f64]) {
    let s: f64 = m.iter().sum();
    if s > 0.0 {
        m.iter_mut().for_each(|x| *x /= s);
    } else {
        let u = 1.0 / m.len() as f64;
        m.iter_mut().for_each(|x| *x = u);
    }
}

/// All outgoing messages of one factor given its incoming messages.
fn factor_messages(t: &PotentialTable, incoming: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let cards = t.cards();
    let s = cards.len();
    let mut out: Vec<Vec<f64>> = cards.iter().map(|&c| vec![0.0; c]).collect();
    let mut digits = vec![0usize; s];
    let mut prefix = vec![1.0; s + 1];
    let mut suffix = vec![1.0; s + 1];
    for &val in t.values() {
        if val != 0.0 {
            for j in 0..s {
                prefix[j + 1] = prefix[j] * incoming[j][digits[j]];
            }
            for j in (0..s).rev() {
                suffix[j] = suffix[j + 1] * incoming[j][digits[j]];
            }
            for k in 0..s {
                out[k][digits[k]] += val * prefix[k] * suffix[k + 1];
            }
        }
        // Scope is canonical with the last variable fastest.
        for j in (0..s).rev() {
            digits[j] += 1;
            if digits[j] < cards[j] {
                break;
            }
            digits[j] = 0;
        }
    }
    out.iter_mut().for_each(|m| normalize_in_place(m));
    out
}

pub(crate) fn run_lbp(net: &Network, ev: &Evidence, opts: &LbpOptions) -> LbpState {
    let n = net.n();
    let factors: Vec<PotentialTable> = (0..n).map(|v| net.cpt(v).reduce(ev)).collect();
    // (factor, position) pairs touching each variable.
    let mut attached: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (f, t) in factors.iter().enumerate() {
        for (k, &u) in t.scope().iter().enumerate() {
            attached[u].push((f, k));
        }
    }
    let uniform = |t: &PotentialTable| -> Vec<Vec<f64>> {
        t.cards().iter().map(|&c| vec![1.0 / c as f64; c]).collect()
    };
    let mut to_factor: Vec<Vec<Vec<f64>>> = factors.iter().map(uniform).collect();
    let mut to_var: Vec<Vec<Vec<f64>>> = factors.iter().map(uniform).collect();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iters {
        iterations += 1;
        let mut fresh = exec::map_range(n, |f| factor_messages(&factors[f], &to_factor[f]));
        let mut delta = 0.0f64;
        for (new_f, old_f) in fresh.iter_mut().zip(&to_var) {
            for (new, old) in new_f.iter_mut().zip(old_f) {
                for (x, &o) in new.iter_mut().zip(old) {
                    if opts.damping > 0.0 {
                        *x = (1.0 - opts.damping) * *x + opts.damping * o;
                    }
                    delta = delta.max((*x - o).abs());
                }
            }
        }
        to_var = fresh;
        for (u, list) in attached.iter().enumerate() {
            for &(f, k) in list {
                let mut m = vec![1.0; net.card(u)];
                for &(g, j) in list {
                    if g != f {
                        m.iter_mut().zip(&to_var[g][j]).for_each(|(a, b)| *a *= b);
                    }
                }
                normalize_in_place(&mut m);
                to_factor[f][k] = m;
            }
        }
        if delta < opts.tol {
            converged = true;
            break;
        }
    }
    LbpState { factors, to_var, converged, iterations }
}

/// Sum-product loopy belief propagation on the factor graph of the CPTs,
/// flooding schedule, normalized messages. Exact on polytrees once
/// converged. Returns beliefs for the unobserved variables; a run that hits
/// `max_iters` reports `converged = false` rather than failing.
pub fn loopy_belief_propagation(net: &Network, ev: &Evidence, opts: &LbpOptions) -> Result<LbpResult> {
    ev.validate(net)?;
    if opts.max_iters == 0 || !(opts.tol > 0.0) || !(0.0..1.0).contains(&opts.damping) {
        return Err(PgmError::InvalidConfig(
            "lbp needs max_iters >= 1, tol > 0 and damping in [0, 1)".into(),
        ));
    }
    // A factor with every entry zero after reduction rules the evidence out
    // even when no unobserved variable would expose it through a belief.
    if (0..net.n()).any(|v| net.cpt(v).reduce(ev).sum() == 0.0) {
        return Err(PgmError::ImpossibleEvidence);
    }
    let state = run_lbp(net, ev, opts);
    let mut marginals = MarginalSet::new();
    for v in (0..net.n()).filter(|&v| !ev.contains(v)) {
        let b = state.belief(net, v);
        let t = PotentialTable::new(&[(v, net.card(v))], b)?;
        marginals.insert(v, t.normalize().map_err(|_| PgmError::ImpossibleEvidence)?);
    }
    Ok(LbpResult { marginals, converged: state.converged, iterations: state.iterations })
}
