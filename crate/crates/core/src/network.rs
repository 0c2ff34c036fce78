//! Variables, networks and evidence.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{PgmError, Result};
use crate::potential::PotentialTable;

/// Row-sum tolerance for CPTs held by a [`Network`].
pub const CPT_ROW_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub id: usize,
    pub name: String,
    pub states: Vec<String>,
}

impl Variable {
    pub fn new(id: usize, name: impl Into<String>, states: Vec<String>) -> Result<Self> {
        let v = Variable { id, name: name.into(), states };
        v.validate()?;
        Ok(v)
    }

    /// Variable with states named `"0"`, `"1"`, ...
    pub fn with_card(id: usize, name: impl Into<String>, card: usize) -> Result<Self> {
        Self::new(id, name, (0..card).map(|s| s.to_string()).collect())
    }

    pub fn card(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, state: &str) -> Option<usize> {
        self.states.iter().position(|s| s == state)
    }

    fn validate(&self) -> Result<()> {
        if self.states.len() < 2 {
            return Err(PgmError::InvalidVariable(format!(
                "{} needs at least 2 states, has {}",
                self.name,
                self.states.len()
            )));
        }
        let mut seen = self.states.clone();
        seen.sort();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(PgmError::InvalidVariable(format!(
                "{} has duplicate state names",
                self.name
            )));
        }
        Ok(())
    }
}

pub(crate) fn check_variable_ids(vars: &[Variable]) -> Result<()> {
    for (i, v) in vars.iter().enumerate() {
        if v.id != i {
            return Err(PgmError::InvalidVariable(format!(
                "variable {} has id {} at position {i}",
                v.name, v.id
            )));
        }
        v.validate()?;
    }
    let mut names: Vec<&str> = vars.iter().map(|v| v.name.as_str()).collect();
    names.sort();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(PgmError::InvalidVariable(format!("duplicate variable name {}", w[0])));
    }
    Ok(())
}

/// Topological order by Kahn's algorithm, lowest id first among ready nodes.
pub(crate) fn topological_order(parents: &[Vec<usize>]) -> Option<Vec<usize>> {
    let n = parents.len();
    let mut indeg: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut children = vec![Vec::new(); n];
    for (v, ps) in parents.iter().enumerate() {
        for &p in ps {
            if p >= n {
                return None;
            }
            children[p].push(v);
        }
    }
    let mut ready: std::collections::BTreeSet<usize> =
        (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &c in &children[v] {
            indeg[c] -= 1;
            if indeg[c] == 0 {
                ready.insert(c);
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// A DAG over named variables without parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DagStructure {
    pub variables: Vec<Variable>,
    pub parents: Vec<Vec<usize>>,
}

impl DagStructure {
    pub fn new(variables: Vec<Variable>, parents: Vec<Vec<usize>>) -> Result<Self> {
        check_variable_ids(&variables)?;
        check_parents(&variables, &parents)?;
        Ok(DagStructure { variables, parents })
    }

    pub fn n(&self) -> usize {
        self.variables.len()
    }
}

fn check_parents(vars: &[Variable], parents: &[Vec<usize>]) -> Result<()> {
    if parents.len() != vars.len() {
        return Err(PgmError::InvalidNetwork(format!(
            "{} parent lists for {} variables",
            parents.len(),
            vars.len()
        )));
    }
    for (v, ps) in parents.iter().enumerate() {
        let mut sorted = ps.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) || ps.contains(&v) {
            return Err(PgmError::InvalidNetwork(format!(
                "{} has a repeated or self parent",
                vars[v].name
            )));
        }
    }
    if topological_order(parents).is_none() {
        return Err(PgmError::InvalidNetwork("cyclic parent structure".into()));
    }
    Ok(())
}

/// Discrete Bayesian network: a DAG plus one CPT per node.
///
/// `parents[v]` keeps the declared parent order (which fixes the row layout
/// of [`Network::cpt_rows`]); `cpts[v]` is stored canonically over
/// `{v} ∪ parents[v]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub name: String,
    variables: Vec<Variable>,
    parents: Vec<Vec<usize>>,
    cpts: Vec<PotentialTable>,
    topo: Vec<usize>,
}

impl Network {
    pub fn new(
        name: impl Into<String>,
        variables: Vec<Variable>,
        parents: Vec<Vec<usize>>,
        cpts: Vec<PotentialTable>,
    ) -> Result<Self> {
        check_variable_ids(&variables)?;
        check_parents(&variables, &parents)?;
        if cpts.len() != variables.len() {
            return Err(PgmError::InvalidNetwork("one CPT per variable required".into()));
        }
        let topo = topological_order(&parents).expect("checked acyclic");
        let net = Network { name: name.into(), variables, parents, cpts, topo };
        for v in 0..net.n() {
            net.check_cpt(v)?;
        }
        Ok(net)
    }

    /// Build from per-node rows laid out parent-configuration major (first
    /// declared parent slowest) with the node's own state fastest.
    pub fn from_rows(
        name: impl Into<String>,
        variables: Vec<Variable>,
        parents: Vec<Vec<usize>>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        check_variable_ids(&variables)?;
        check_parents(&variables, &parents)?;
        if rows.len() != variables.len() {
            return Err(PgmError::InvalidNetwork("one CPT per variable required".into()));
        }
        let mut cpts = Vec::with_capacity(rows.len());
        for (v, values) in rows.into_iter().enumerate() {
            let mut scope: Vec<(usize, usize)> =
                parents[v].iter().map(|&p| (p, variables[p].card())).collect();
            scope.push((v, variables[v].card()));
            cpts.push(PotentialTable::new(&scope, values)?);
        }
        Network::new(name, variables, parents, cpts)
    }

    fn check_cpt(&self, v: usize) -> Result<()> {
        let t = &self.cpts[v];
        let mut expected: Vec<usize> = self.parents[v].clone();
        expected.push(v);
        expected.sort_unstable();
        if t.scope() != expected.as_slice() {
            return Err(PgmError::InvalidNetwork(format!(
                "CPT of {} has scope {:?}, expected {:?}",
                self.variables[v].name,
                t.scope(),
                expected
            )));
        }
        for (k, &u) in t.scope().iter().enumerate() {
            if t.cards()[k] != self.variables[u].card() {
                return Err(PgmError::InvalidNetwork(format!(
                    "CPT of {} disagrees on cardinality of {}",
                    self.variables[v].name, self.variables[u].name
                )));
            }
        }
        let card = self.card(v);
        for (r, row) in self.cpt_rows(v).chunks(card).enumerate() {
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > CPT_ROW_TOLERANCE {
                return Err(PgmError::InvalidNetwork(format!(
                    "CPT row {r} of {} sums to {s}",
                    self.variables[v].name
                )));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, v: usize) -> &Variable {
        &self.variables[v]
    }

    pub fn card(&self, v: usize) -> usize {
        self.variables[v].card()
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn all_parents(&self) -> &[Vec<usize>] {
        &self.parents
    }

    pub fn cpt(&self, v: usize) -> &PotentialTable {
        &self.cpts[v]
    }

    pub fn cpts(&self) -> &[PotentialTable] {
        &self.cpts
    }

    /// Topological order, lowest id first among ready nodes.
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn children(&self, v: usize) -> Vec<usize> {
        (0..self.n()).filter(|&c| self.parents[c].contains(&v)).collect()
    }

    pub fn find(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn structure(&self) -> DagStructure {
        DagStructure { variables: self.variables.clone(), parents: self.parents.clone() }
    }

    /// Number of parent configurations of `v`.
    pub fn n_parent_configs(&self, v: usize) -> usize {
        self.parents[v].iter().map(|&p| self.card(p)).product()
    }

    /// CPT values re-laid out parent-configuration major in declared parent
    /// order, node state fastest.
    pub fn cpt_rows(&self, v: usize) -> Vec<f64> {
        let t = &self.cpts[v];
        let mut order: Vec<usize> = self.parents[v].clone();
        order.push(v);
        let cards: Vec<usize> = order.iter().map(|&u| self.card(u)).collect();
        let src: Vec<usize> = order
            .iter()
            .map(|u| t.strides()[t.position(*u).expect("scope checked")])
            .collect();
        let len: usize = cards.iter().product();
        let mut out = Vec::with_capacity(len);
        let mut digits = vec![0usize; cards.len()];
        let mut off = 0usize;
        for _ in 0..len {
            out.push(t.values()[off]);
            for k in (0..cards.len()).rev() {
                digits[k] += 1;
                off += src[k];
                if digits[k] < cards[k] {
                    break;
                }
                off -= src[k] * cards[k];
                digits[k] = 0;
            }
        }
        out
    }

    /// Ancestors of `seeds`, including the seeds themselves.
    pub fn ancestral_set(&self, seeds: impl IntoIterator<Item = usize>) -> Vec<bool> {
        let mut keep = vec![false; self.n()];
        let mut queue: VecDeque<usize> = seeds.into_iter().collect();
        while let Some(v) = queue.pop_front() {
            if keep[v] {
                continue;
            }
            keep[v] = true;
            queue.extend(self.parents[v].iter().copied());
        }
        keep
    }
}

/// Observed states keyed by variable id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    assignments: BTreeMap<usize, usize>,
}

impl Evidence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Evidence { assignments: pairs.into_iter().collect() }
    }

    /// Parse state names: `[("B", "true")]`.
    pub fn from_names<S: AsRef<str>>(net: &Network, pairs: &[(S, S)]) -> Result<Self> {
        let mut ev = Evidence::new();
        for (var, state) in pairs {
            let (var, state) = (var.as_ref(), state.as_ref());
            let v = net
                .find(var)
                .ok_or_else(|| PgmError::InvalidEvidence(format!("unknown variable {var}")))?;
            let s = net.variable(v).state_index(state).ok_or_else(|| {
                PgmError::InvalidEvidence(format!(
                    "unknown state '{state}' for {var}; valid states: {}",
                    net.variable(v).states.join(", ")
                ))
            })?;
            if ev.assignments.insert(v, s).is_some() {
                return Err(PgmError::InvalidEvidence(format!("{var} observed twice")));
            }
        }
        Ok(ev)
    }

    pub fn insert(&mut self, var: usize, state: usize) {
        self.assignments.insert(var, state);
    }

    pub fn get(&self, var: usize) -> Option<usize> {
        self.assignments.get(&var).copied()
    }

    pub fn contains(&self, var: usize) -> bool {
        self.assignments.contains_key(&var)
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.assignments.iter().map(|(k, v)| (*k, *v))
    }

    pub fn validate(&self, net: &Network) -> Result<()> {
        for (v, s) in self.iter() {
            if v >= net.n() {
                return Err(PgmError::InvalidEvidence(format!("unknown variable id {v}")));
            }
            if s >= net.card(v) {
                return Err(PgmError::InvalidEvidence(format!(
                    "state {s} out of range for {}",
                    net.variable(v).name
                )));
            }
        }
        Ok(())
    }
}
