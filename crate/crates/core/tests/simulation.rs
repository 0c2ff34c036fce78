mod common;

use std::collections::HashMap;

use pgmkit::simulate::generate_dataset;
use pgmkit::{fixtures, Network, Variable};

#[test]
fn root_frequency_matches_cpt() {
    let net = fixtures::two_node();
    let d = generate_dataset(&net, 1_000_000, 0).unwrap();
    let p = d.column(0).iter().filter(|&&s| s == 1).count() as f64 / 1e6;
    assert!((p - 0.3).abs() <= 0.002, "{p}");
}

#[test]
fn deterministic_network_repeats_one_row() {
    let vars: Vec<Variable> = (0..3).map(|i| Variable::with_card(i, format!("D{i}"), 2).unwrap()).collect();
    let net = Network::from_rows(
        "det",
        vars,
        vec![vec![], vec![0], vec![1]],
        vec![vec![0.0, 1.0], vec![1.0, 0.0, 1.0, 0.0], vec![0.0, 1.0, 1.0, 0.0]],
    )
    .unwrap();
    let d = generate_dataset(&net, 5000, 9).unwrap();
    for r in 0..d.n_rows() {
        assert_eq!(d.row(r), vec![1, 0, 1]);
    }
}

#[test]
fn same_seed_same_bytes() {
    let net = fixtures::asia_like();
    let a = generate_dataset(&net, 20_000, 77).unwrap().to_csv();
    let b = generate_dataset(&net, 20_000, 77).unwrap().to_csv();
    assert_eq!(a, b);
    let c = generate_dataset(&net, 20_000, 78).unwrap().to_csv();
    assert_ne!(a, c);
}

/// Exact joint of `vars` by enumerating the full joint.
fn exact_joint(net: &Network, vars: &[usize]) -> HashMap<Vec<usize>, f64> {
    let rows: Vec<Vec<f64>> = (0..net.n()).map(|v| net.cpt_rows(v)).collect();
    let mut out = HashMap::new();
    let mut states = vec![0usize; net.n()];
    loop {
        let key: Vec<usize> = vars.iter().map(|&v| states[v]).collect();
        *out.entry(key).or_insert(0.0) += common::joint(net, &rows, &states);
        let mut k = 0;
        while k < net.n() {
            states[k] += 1;
            if states[k] < net.card(k) {
                break;
            }
            states[k] = 0;
            k += 1;
        }
        if k == net.n() {
            return out;
        }
    }
}

#[test]
fn small_joints_converge() {
    let net = fixtures::asia_like();
    let subsets: [&[usize]; 4] = [&[3], &[0, 6], &[1, 2, 3], &[4, 5, 7]];
    let exact: Vec<_> = subsets.iter().map(|s| exact_joint(&net, s)).collect();
    let mut tv = vec![0.0; subsets.len()];
    for seed in 0..5 {
        let d = generate_dataset(&net, 1_000_000, seed).unwrap();
        for (k, vars) in subsets.iter().enumerate() {
            let mut counts: HashMap<Vec<usize>, f64> = HashMap::new();
            for r in 0..d.n_rows() {
                let key: Vec<usize> = vars.iter().map(|&v| d.column(v)[r] as usize).collect();
                *counts.entry(key).or_insert(0.0) += 1.0;
            }
            let dist: f64 = exact[k]
                .iter()
                .map(|(key, p)| (counts.get(key).copied().unwrap_or(0.0) / 1e6 - p).abs())
                .sum::<f64>()
                / 2.0;
            tv[k] += dist / 5.0;
        }
    }
    assert!(tv.iter().all(|&t| t <= 0.01), "{tv:?}");
}
