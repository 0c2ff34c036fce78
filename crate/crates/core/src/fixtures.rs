//! Small reference networks used by tests, benches and examples.
//!
//! Variable names sort in id order so structure learning, which orders
//! variables by name, sees them in the same order as they are declared.

use crate::network::{Evidence, Network, Variable};

fn binary(names: &[&str]) -> Vec<Variable> {
    names
        .iter()
        .enumerate()
        .map(|(i, n)| Variable::new(i, *n, vec!["false".into(), "true".into()]).expect("valid"))
        .collect()
}

fn build(name: &str, names: &[&str], parents: Vec<Vec<usize>>, rows: Vec<Vec<f64>>) -> Network {
    Network::from_rows(name, binary(names), parents, rows).expect("fixture is valid")
}

/// `A -> B` with `P(A=true) = 0.3`, `P(B=true | A) = 0.2 / 0.9`.
pub fn two_node() -> Network {
    build(
        "two_node",
        &["A", "B"],
        vec![vec![], vec![0]],
        vec![vec![0.7, 0.3], vec![0.8, 0.2, 0.1, 0.9]],
    )
}

/// `A -> B -> C`, uniform root, each child copies its parent with
/// probability 0.9.
pub fn chain() -> Network {
    build(
        "chain",
        &["A", "B", "C"],
        vec![vec![], vec![0], vec![1]],
        vec![vec![0.5, 0.5], vec![0.9, 0.1, 0.1, 0.9], vec![0.9, 0.1, 0.1, 0.9]],
    )
}

/// `A -> C <- B` with a noisy-or child.
pub fn collider() -> Network {
    build(
        "collider",
        &["A", "B", "C"],
        vec![vec![], vec![], vec![0, 1]],
        vec![
            vec![0.6, 0.4],
            vec![0.5, 0.5],
            vec![0.9, 0.1, 0.2, 0.8, 0.2, 0.8, 0.05, 0.95],
        ],
    )
}

/// One uniform binary variable.
pub fn single_uniform() -> Network {
    build("single", &["A"], vec![vec![]], vec![vec![0.5, 0.5]])
}

/// Hub `A` with `k` children `B1..Bk`.
pub fn star(k: usize) -> Network {
    let names: Vec<String> = std::iter::once("A".to_string())
        .chain((1..=k).map(|i| format!("B{i}")))
        .collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut parents = vec![vec![]];
    let mut rows = vec![vec![0.5, 0.5]];
    for _ in 0..k {
        parents.push(vec![0]);
        rows.push(vec![0.8, 0.2, 0.3, 0.7]);
    }
    build("star", &refs, parents, rows)
}

/// `A -> B` where `B` always equals `A`.
pub fn deterministic_pair() -> Network {
    build(
        "deterministic",
        &["A", "B"],
        vec![vec![], vec![0]],
        vec![vec![0.5, 0.5], vec![1.0, 0.0, 0.0, 1.0]],
    )
}

const ASIA_NAMES: [&str; 8] = [
    "Asia",
    "Bronchitis",
    "Dyspnea",
    "Either",
    "Lung",
    "Smoking",
    "Tuberculosis",
    "Xray",
];

fn asia_parents() -> Vec<Vec<usize>> {
    vec![
        vec![],     // Asia
        vec![5],    // Bronchitis | Smoking
        vec![1, 3], // Dyspnea | Bronchitis, Either
        vec![4, 6], // Either | Lung, Tuberculosis
        vec![5],    // Lung | Smoking
        vec![],     // Smoking
        vec![0],    // Tuberculosis | Asia
        vec![3],    // Xray | Either
    ]
}

fn bern(p_true: &[f64]) -> Vec<f64> {
    p_true.iter().flat_map(|&p| [1.0 - p, p]).collect()
}

/// Eight binary nodes shaped like the classic chest-clinic network, with
/// moderate CPTs: every edge moves its child's probability by at least 0.3.
pub fn asia_like() -> Network {
    build(
        "asia_like",
        &ASIA_NAMES,
        asia_parents(),
        vec![
            bern(&[0.5]),
            bern(&[0.2, 0.6]),
            bern(&[0.1, 0.6, 0.6, 0.9]),
            bern(&[0.05, 0.8, 0.8, 0.95]),
            bern(&[0.1, 0.5]),
            bern(&[0.5]),
            bern(&[0.1, 0.5]),
            bern(&[0.1, 0.8]),
        ],
    )
}

/// Same graph as [`asia_like`] with rare diseases and sharp symptoms, so
/// the evidence of [`rare_evidence`] is very unlikely a priori.
pub fn asia_rare() -> Network {
    build(
        "asia_rare",
        &ASIA_NAMES,
        asia_parents(),
        vec![
            bern(&[0.01]),
            bern(&[0.3, 0.6]),
            bern(&[0.02, 0.5, 0.8, 0.9]),
            bern(&[0.0005, 0.98, 0.98, 0.99]),
            bern(&[0.0005, 0.003]),
            bern(&[0.5]),
            bern(&[0.0005, 0.02]),
            bern(&[0.005, 0.98]),
        ],
    )
}

fn evidence(net: &Network, pairs: &[(&str, &str)]) -> Evidence {
    Evidence::from_names(net, pairs).expect("fixture evidence")
}

/// Positive x-ray and dyspnea; moderately likely on [`asia_like`].
pub fn benchmark_evidence(net: &Network) -> Evidence {
    evidence(net, &[("Xray", "true"), ("Dyspnea", "true")])
}

/// Positive x-ray and dyspnea without bronchitis; very unlikely on
/// [`asia_rare`].
pub fn rare_evidence(net: &Network) -> Evidence {
    evidence(net, &[("Xray", "true"), ("Dyspnea", "true"), ("Bronchitis", "false")])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::JunctionTree;
    use crate::potential::DEFAULT_MAX_ENTRIES;

    fn p_evidence(net: &Network, ev: &Evidence) -> f64 {
        let t = JunctionTree::build(net, DEFAULT_MAX_ENTRIES).unwrap();
        t.propagate(ev).unwrap().evidence_probability()
    }

    #[test]
    fn evidence_probabilities() {
        let net = asia_like();
        assert!(p_evidence(&net, &benchmark_evidence(&net)) > 0.01);
        let rare = asia_rare();
        assert!(p_evidence(&rare, &rare_evidence(&rare)) < 1e-3);
    }

    #[test]
    fn names_sorted() {
        let mut s = ASIA_NAMES.to_vec();
        s.sort();
        assert_eq!(s, ASIA_NAMES);
    }
}
