//! Approximate inference: loopy belief propagation and importance samplers.

mod classify;
mod lbp;
mod sampling;

pub use classify::{classify, ClassifyResult};
pub use lbp::{loopy_belief_propagation, LbpOptions, LbpResult};
pub use sampling::{
    ais_bn, ais_initial_proposal, apply_epsilon_cutoff, epis_bn, epis_proposal, importance_sampling,
    likelihood_weighting, probabilistic_logic_sampling, self_importance_sampling, Proposal,
};

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{PgmError, Result};
use crate::potential::PotentialTable;

/// Sampler and LBP settings. `None` fields take the per-engine defaults
/// documented on each field.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub n_samples: usize,
    pub seed: u64,
    /// Samples between proposal updates. SIS default `n/10`; AIS default
    /// `n / (2·ais_stages)`.
    pub update_interval: Option<usize>,
    /// SIS: weight given to the current estimate when re-blending.
    pub sis_blend: f64,
    /// ε-cutoff. AIS default 0.04, EPIS default 0.01.
    pub epsilon_cutoff: Option<f64>,
    pub lbp_iters: usize,
    pub lbp_tol: f64,
    pub lbp_damping: f64,
    /// AIS learning rate `η(k) = a·(b/a)^(k/k_max)`.
    pub learning_rate_start: f64,
    pub learning_rate_end: f64,
    pub ais_stages: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            n_samples: 100_000,
            seed: 0,
            update_interval: None,
            sis_blend: 0.5,
            epsilon_cutoff: None,
            lbp_iters: 100,
            lbp_tol: 1e-6,
            lbp_damping: 0.0,
            learning_rate_start: 0.4,
            learning_rate_end: 0.14,
            ais_stages: 10,
        }
    }
}

impl SamplerConfig {
    pub fn with_samples(n_samples: usize, seed: u64) -> Self {
        SamplerConfig { n_samples, seed, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(PgmError::InvalidConfig(m.to_string()));
        if self.n_samples == 0 {
            return bad("n_samples must be positive");
        }
        if self.update_interval == Some(0) {
            return bad("update_interval must be at least 1");
        }
        if let Some(e) = self.epsilon_cutoff {
            if !(e > 0.0 && e < 0.5) {
                return bad("epsilon_cutoff must be in (0, 0.5)");
            }
        }
        if !(0.0..=1.0).contains(&self.sis_blend) {
            return bad("sis_blend must be in [0, 1]");
        }
        if self.lbp_iters == 0 || !(self.lbp_tol > 0.0) {
            return bad("lbp_iters must be at least 1 and lbp_tol positive");
        }
        if !(0.0..1.0).contains(&self.lbp_damping) {
            return bad("lbp_damping must be in [0, 1)");
        }
        if !(self.learning_rate_start >= 0.0 && self.learning_rate_end >= 0.0)
            || self.learning_rate_start > 1.0
            || self.learning_rate_end > 1.0
        {
            return bad("learning rates must be in [0, 1]");
        }
        if self.ais_stages == 0 {
            return bad("ais_stages must be at least 1");
        }
        Ok(())
    }
}

/// Per-variable normalized posteriors for the unobserved variables.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MarginalSet {
    tables: BTreeMap<usize, PotentialTable>,
}

impl MarginalSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, var: usize, table: PotentialTable) {
        self.tables.insert(var, table);
    }

    pub fn get(&self, var: usize) -> Option<&PotentialTable> {
        self.tables.get(&var)
    }

    pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.tables.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &PotentialTable)> {
        self.tables.iter().map(|(k, v)| (*k, v))
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    /// Keep only the listed variables.
    pub fn restrict(&self, vars: &[usize]) -> MarginalSet {
        MarginalSet {
            tables: self
                .tables
                .iter()
                .filter(|(k, _)| vars.contains(k))
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
    }
}

/// Run statistics reported alongside the marginals.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub acceptance_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effective_sample_size: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub marginals: MarginalSet,
    pub diagnostics: Diagnostics,
}
