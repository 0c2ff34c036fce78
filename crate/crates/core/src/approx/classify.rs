use serde::Serialize;

use crate::dataset::Dataset;
use crate::engine::{infer, Engine};
use crate::error::{PgmError, Result};
use crate::exact::{variable_elimination, JunctionTree};
use crate::exec;
use crate::network::{Evidence, Network};
use crate::potential::DEFAULT_MAX_ENTRIES;

use super::SamplerConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifyResult {
    pub predictions: Vec<usize>,
    pub accuracy: f64,
    /// Accuracy of always predicting the most frequent class in `data`.
    pub majority_baseline: f64,
}

/// Predict `class` for every row of `data`, observing all other columns.
/// The prediction is the posterior argmax, lowest state on ties. Columns
/// are matched to the network by name.
pub fn classify(
    net: &Network,
    data: &Dataset,
    class: usize,
    engine: Engine,
    cfg: &SamplerConfig,
) -> Result<ClassifyResult> {
    if class >= net.n() {
        return Err(PgmError::InvalidVariable(format!("unknown class variable id {class}")));
    }
    let data = data.align_to(net.variables())?;
    let tree = match engine {
        Engine::Jt => Some(JunctionTree::build(net, DEFAULT_MAX_ENTRIES)?),
        _ => None,
    };
    let predict = |r: usize| -> Result<usize> {
        let mut ev = Evidence::new();
        for v in (0..net.n()).filter(|&v| v != class) {
            ev.insert(v, data.column(v)[r] as usize);
        }
        let posterior = match (engine, &tree) {
            (Engine::Ve, _) => variable_elimination(net, class, &ev)?,
            (Engine::Jt, Some(t)) => t.propagate(&ev)?.query(class)?,
            _ => infer(net, &ev, engine, cfg)?
                .marginals
                .get(class)
                .cloned()
                .expect("class is unobserved"),
        };
        Ok(posterior.argmax())
    };
    let results = exec::map_range(data.n_rows(), predict);
    let mut predictions = Vec::with_capacity(results.len());
    for (row, r) in results.into_iter().enumerate() {
        predictions.push(r.map_err(|e| PgmError::Row { row, source: Box::new(e) })?);
    }
    let truth = data.column(class);
    let n = data.n_rows().max(1) as f64;
    let hits = predictions.iter().zip(truth).filter(|(p, t)| **p == **t as usize).count();
    let mut freq = vec![0usize; net.card(class)];
    truth.iter().for_each(|&t| freq[t as usize] += 1);
    Ok(ClassifyResult {
        predictions,
        accuracy: hits as f64 / n,
        majority_baseline: *freq.iter().max().unwrap_or(&0) as f64 / n,
    })
}
