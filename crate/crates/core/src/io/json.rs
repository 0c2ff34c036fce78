//! JSON documents for networks, bare structures and CPDAGs.
//!
//! Network:
//! ```json
//! {"name": "asia", "variables": [
//!   {"name": "A", "states": ["no", "yes"], "parents": [], "cpt": [[0.7, 0.3]]},
//!   {"name": "B", "states": ["no", "yes"], "parents": ["A"], "cpt": [[0.8, 0.2], [0.1, 0.9]]}
//! ]}
//! ```
//! `cpt` holds one row per parent configuration (first parent slowest). A
//! structure document is the same shape without `cpt`.
//!
//! CPDAG:
//! ```json
//! {"variables": ["A", "B", "C"],
//!  "edges": [{"from": "A", "to": "B", "directed": true}]}
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{PgmError, Result};
use crate::network::{DagStructure, Network, Variable};
use crate::structure::PdagGraph;

#[derive(Debug, Serialize, Deserialize)]
struct JsonVariable {
    name: String,
    states: Vec<String>,
    #[serde(default)]
    parents: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cpt: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonNetwork {
    #[serde(default = "unknown")]
    name: String,
    variables: Vec<JsonVariable>,
}

fn unknown() -> String {
    "unknown".into()
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonEdge {
    from: String,
    to: String,
    directed: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonPdag {
    variables: Vec<String>,
    edges: Vec<JsonEdge>,
}

fn bad(e: serde_json::Error) -> PgmError {
    PgmError::parse(e.line(), e.to_string())
}

fn json_vars(vars: &[Variable], parents: &[Vec<usize>]) -> Vec<JsonVariable> {
    vars.iter()
        .zip(parents)
        .map(|(v, ps)| JsonVariable {
            name: v.name.clone(),
            states: v.states.clone(),
            parents: ps.iter().map(|&p| vars[p].name.clone()).collect(),
            cpt: None,
        })
        .collect()
}

fn resolve(doc: &JsonNetwork) -> Result<(Vec<Variable>, Vec<Vec<usize>>)> {
    let vars: Vec<Variable> = doc
        .variables
        .iter()
        .enumerate()
        .map(|(i, v)| Variable::new(i, v.name.clone(), v.states.clone()))
        .collect::<Result<_>>()?;
    let find = |name: &str| {
        vars.iter()
            .position(|v| v.name == name)
            .ok_or_else(|| PgmError::InvalidNetwork(format!("unknown variable {name}")))
    };
    let parents = doc
        .variables
        .iter()
        .map(|v| v.parents.iter().map(|p| find(p)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    Ok((vars, parents))
}

pub fn network_to_json(net: &Network) -> String {
    let mut variables = json_vars(net.variables(), net.all_parents());
    for (v, jv) in variables.iter_mut().enumerate() {
        jv.cpt = Some(net.cpt_rows(v).chunks(net.card(v)).map(<[f64]>::to_vec).collect());
    }
    let doc = JsonNetwork { name: net.name.clone(), variables };
    serde_json::to_string_pretty(&doc).expect("serializable")
}

pub fn network_from_json(text: &str) -> Result<Network> {
    let doc: JsonNetwork = serde_json::from_str(text).map_err(bad)?;
    let (vars, parents) = resolve(&doc)?;
    let rows = doc
        .variables
        .iter()
        .map(|v| {
            v.cpt
                .as_ref()
                .map(|rows| rows.concat())
                .ok_or_else(|| PgmError::InvalidNetwork(format!("{} has no cpt", v.name)))
        })
        .collect::<Result<_>>()?;
    Network::from_rows(doc.name, vars, parents, rows)
}

pub fn structure_to_json(s: &DagStructure) -> String {
    let doc = JsonNetwork { name: unknown(), variables: json_vars(&s.variables, &s.parents) };
    serde_json::to_string_pretty(&doc).expect("serializable")
}

/// Read a structure document; a full network document is accepted too and
/// its CPTs are ignored.
pub fn structure_from_json(text: &str) -> Result<DagStructure> {
    let doc: JsonNetwork = serde_json::from_str(text).map_err(bad)?;
    let (vars, parents) = resolve(&doc)?;
    DagStructure::new(vars, parents)
}

pub fn pdag_to_json(g: &PdagGraph, names: &[String]) -> String {
    let edges = g
        .edges()
        .map(|(i, j, directed)| JsonEdge { from: names[i].clone(), to: names[j].clone(), directed })
        .collect();
    let doc = JsonPdag { variables: names.to_vec(), edges };
    serde_json::to_string_pretty(&doc).expect("serializable")
}

pub fn pdag_from_json(text: &str) -> Result<(PdagGraph, Vec<String>)> {
    let doc: JsonPdag = serde_json::from_str(text).map_err(bad)?;
    let find = |name: &str| {
        doc.variables
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| PgmError::InvalidNetwork(format!("unknown variable {name}")))
    };
    let mut g = PdagGraph::new(doc.variables.len());
    for e in &doc.edges {
        let (a, b) = (find(&e.from)?, find(&e.to)?);
        if a == b || g.adjacent(a, b) {
            return Err(PgmError::InvalidNetwork(format!(
                "invalid edge {} - {}",
                e.from, e.to
            )));
        }
        if e.directed {
            g.add_directed(a, b);
        } else {
            g.add_undirected(a, b);
        }
    }
    Ok((g, doc.variables))
}
