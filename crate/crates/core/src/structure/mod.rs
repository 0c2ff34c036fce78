//! Constraint-based structure learning (PC-stable).

mod ci;
mod orient;
mod pdag;
mod skeleton;

pub use ci::{chi_square_sf, ci_test, raw_dof, CiResult, JOINT_CACHE_CELLS};
pub use orient::{apply_meek_rules, cpdag_from_dag, extend_to_dag, orient_v_structures};
pub use pdag::{PdagGraph, SepsetMap};
pub use skeleton::{pc_stable_skeleton, SkeletonOptions, SkeletonResult};

use crate::dataset::Dataset;
use crate::error::Result;
use crate::network::DagStructure;

/// Everything produced by a full PC-stable run.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnedStructure {
    pub skeleton: PdagGraph,
    pub sepsets: SepsetMap,
    pub cpdag: PdagGraph,
    pub dag: DagStructure,
    pub ci_tests: u64,
}

/// Skeleton, v-structures, Meek completion and DAG extension.
///
/// Variables are processed in order of their names (ties impossible, names
/// are unique), and results are mapped back to the dataset's ids. Every
/// "lowest id first" rule in the pipeline therefore follows name order,
/// which makes the output independent of column order.
pub fn learn_structure(data: &Dataset, opts: &SkeletonOptions) -> Result<LearnedStructure> {
    let n = data.n_vars();
    let mut by_name: Vec<usize> = (0..n).collect();
    by_name.sort_by(|&a, &b| data.variables()[a].name.cmp(&data.variables()[b].name));
    // canonical id k is dataset column by_name[k]
    let canon = data.permute_vars(&by_name);

    let sk = pc_stable_skeleton(&canon, opts);
    let oriented = orient_v_structures(&sk.graph, &sk.sepsets);
    let cpdag = apply_meek_rules(&oriented);
    let parents_c = extend_to_dag(&cpdag)?;

    let back = &by_name;
    let mut parents = vec![Vec::new(); n];
    for (k, ps) in parents_c.iter().enumerate() {
        let mut mapped: Vec<usize> = ps.iter().map(|&p| back[p]).collect();
        mapped.sort_unstable();
        parents[back[k]] = mapped;
    }
    Ok(LearnedStructure {
        skeleton: sk.graph.relabel(back),
        sepsets: sk.sepsets.relabel(back),
        cpdag: cpdag.relabel(back),
        dag: DagStructure::new(data.variables().to_vec(), parents)?,
        ci_tests: sk.ci_tests,
    })
}
