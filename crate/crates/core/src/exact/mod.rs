//! Exact inference: variable elimination and junction trees.

mod jtree;
mod order;
mod ve;

pub use jtree::{build_junction_tree, jt_propagate, jt_query, CalibratedTree, JunctionTree, Separator};
pub use order::elimination_order;
pub use ve::{variable_elimination, variable_elimination_capped};
