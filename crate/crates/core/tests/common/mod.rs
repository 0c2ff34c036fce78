//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use pgmkit::{Evidence, Network};

/// Product of CPT entries for a full assignment, indexing the row-major
/// CPT rows directly.
pub fn joint(net: &Network, rows: &[Vec<f64>], states: &[usize]) -> f64 {
    let mut p = 1.0;
    for v in 0..net.n() {
        let mut r = 0;
        for &u in net.parents(v) {
            r = r * net.card(u) + states[u];
        }
        p *= rows[v][r * net.card(v) + states[v]];
    }
    p
}

/// Posterior of every variable by summing the full joint. Observed
/// variables get a one-hot vector. Returns `None` for zero-probability
/// evidence.
pub fn brute_force(net: &Network, ev: &Evidence) -> Option<Vec<Vec<f64>>> {
    let n = net.n();
    let rows: Vec<Vec<f64>> = (0..n).map(|v| net.cpt_rows(v)).collect();
    let mut acc: Vec<Vec<f64>> = (0..n).map(|v| vec![0.0; net.card(v)]).collect();
    let mut states = vec![0usize; n];
    let mut total = 0.0;
    loop {
        if ev.iter().all(|(v, s)| states[v] == s) {
            let p = joint(net, &rows, &states);
            total += p;
            for v in 0..n {
                acc[v][states[v]] += p;
            }
        }
        let mut k = 0;
        loop {
            if k == n {
                if total == 0.0 {
                    return None;
                }
                for a in &mut acc {
                    a.iter_mut().for_each(|x| *x /= total);
                }
                return Some(acc);
            }
            states[k] += 1;
            if states[k] < net.card(k) {
                break;
            }
            states[k] = 0;
            k += 1;
        }
    }
}

/// Probability of the evidence by enumeration.
pub fn evidence_probability(net: &Network, ev: &Evidence) -> f64 {
    let n = net.n();
    let rows: Vec<Vec<f64>> = (0..n).map(|v| net.cpt_rows(v)).collect();
    let mut states = vec![0usize; n];
    let mut total = 0.0;
    loop {
        if ev.iter().all(|(v, s)| states[v] == s) {
            total += joint(net, &rows, &states);
        }
        let mut k = 0;
        loop {
            if k == n {
                return total;
            }
            states[k] += 1;
            if states[k] < net.card(k) {
                break;
            }
            states[k] = 0;
            k += 1;
        }
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Plain Hellinger distance, written out independently of the library.
pub fn hellinger(p: &[f64], q: &[f64]) -> f64 {
    let s: f64 = p.iter().zip(q).map(|(a, b)| (a.sqrt() - b.sqrt()).powi(2)).sum();
    (s / 2.0).sqrt()
}
