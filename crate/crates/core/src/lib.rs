//! Discrete Bayesian networks: PC-stable structure learning, maximum
//! likelihood parameters, exact inference (variable elimination, junction
//! tree) and approximate inference (loopy BP and importance samplers).
//!
//! Table kernels, CI tests, clique propagation and samplers run on a rayon
//! pool when the `parallel` feature is on (the default). Results are
//! bitwise identical for every worker count: all reductions combine partial
//! results in a fixed order and each sample draws from its own RNG stream.
//!
//! ```
//! use pgmkit::{fixtures, exact::variable_elimination, Evidence};
//!
//! let net = fixtures::two_node();
//! let p = variable_elimination(&net, 0, &Evidence::from_pairs([(1, 1)])).unwrap();
//! assert!((p.values()[1] - 0.27 / 0.41).abs() < 1e-12);
//! ```

pub mod approx;
pub mod dataset;
pub mod engine;
pub mod error;
pub mod exact;
mod exec;
pub mod fixtures;
pub mod io;
pub mod metrics;
pub mod network;
pub mod params;
pub mod potential;
pub mod simulate;
pub mod structure;

pub use approx::{Diagnostics, MarginalSet, Posterior, SamplerConfig};
pub use dataset::{load_csv, Dataset};
pub use engine::{infer, Engine};
pub use error::{PgmError, Result};
pub use exec::Workers;
pub use network::{DagStructure, Evidence, Network, Variable};
pub use potential::PotentialTable;
