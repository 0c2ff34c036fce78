//! Uniform entry point over the exact and approximate engines.

use std::fmt;
use std::str::FromStr;

use crate::approx::{self, Diagnostics, LbpOptions, MarginalSet, Posterior, SamplerConfig};
use crate::error::{PgmError, Result};
use crate::exact::{variable_elimination, JunctionTree};
use crate::network::{Evidence, Network};
use crate::potential::DEFAULT_MAX_ENTRIES;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Engine {
    Ve,
    Jt,
    Lbp,
    Pls,
    Lw,
    Sis,
    Ais,
    Epis,
}

impl Engine {
    pub const ALL: [Engine; 8] = [
        Engine::Ve,
        Engine::Jt,
        Engine::Lbp,
        Engine::Pls,
        Engine::Lw,
        Engine::Sis,
        Engine::Ais,
        Engine::Epis,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Engine::Ve => "ve",
            Engine::Jt => "jt",
            Engine::Lbp => "lbp",
            Engine::Pls => "pls",
            Engine::Lw => "lw",
            Engine::Sis => "sis",
            Engine::Ais => "ais",
            Engine::Epis => "epis",
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Engine::Ve | Engine::Jt)
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Engine {
    type Err = PgmError;

    fn from_str(s: &str) -> Result<Self> {
        Engine::ALL
            .into_iter()
            .find(|e| e.name() == s.to_ascii_lowercase())
            .ok_or_else(|| {
                let names: Vec<&str> = Engine::ALL.iter().map(|e| e.name()).collect();
                PgmError::InvalidConfig(format!("unknown engine '{s}' (expected one of {})", names.join(", ")))
            })
    }
}

/// Posterior marginals of every unobserved variable.
pub fn infer(net: &Network, ev: &Evidence, engine: Engine, cfg: &SamplerConfig) -> Result<Posterior> {
    let exact = |marginals| Posterior { marginals, diagnostics: Diagnostics::default() };
    match engine {
        Engine::Ve => {
            ev.validate(net)?;
            if ev.len() == net.n() {
                // No query runs, so check the full assignment directly.
                let full: Vec<(usize, usize)> = ev.iter().collect();
                if net.cpts().iter().any(|t| {
                    let a: Vec<(usize, usize)> =
                        full.iter().copied().filter(|&(v, _)| t.contains(v)).collect();
                    t.get(&a) == 0.0
                }) {
                    return Err(PgmError::ImpossibleEvidence);
                }
            }
            let mut m = MarginalSet::new();
            for v in (0..net.n()).filter(|&v| !ev.contains(v)) {
                m.insert(v, variable_elimination(net, v, ev)?);
            }
            Ok(exact(m))
        }
        Engine::Jt => {
            let tree = JunctionTree::build(net, DEFAULT_MAX_ENTRIES)?;
            let cal = tree.propagate(ev)?;
            let mut m = MarginalSet::new();
            for v in (0..net.n()).filter(|&v| !ev.contains(v)) {
                m.insert(v, cal.query(v)?);
            }
            Ok(exact(m))
        }
        Engine::Lbp => {
            cfg.validate()?;
            let r = approx::loopy_belief_propagation(net, ev, &LbpOptions::from(cfg))?;
            Ok(Posterior {
                marginals: r.marginals,
                diagnostics: Diagnostics {
                    converged: Some(r.converged),
                    iterations: Some(r.iterations),
                    ..Default::default()
                },
            })
        }
        Engine::Pls => approx::probabilistic_logic_sampling(net, ev, cfg),
        Engine::Lw => approx::likelihood_weighting(net, ev, cfg),
        Engine::Sis => approx::self_importance_sampling(net, ev, cfg),
        Engine::Ais => approx::ais_bn(net, ev, cfg),
        Engine::Epis => approx::epis_bn(net, ev, cfg),
    }
}
