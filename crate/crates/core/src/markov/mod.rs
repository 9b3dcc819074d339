//! Tree-structured marginal sets and quantum Markov trees.

mod factorize;
mod generate;
mod graph;
mod marginals;
mod maxent;

pub use factorize::{
    local_markov_cmi, local_qmc_conditions, mecmp_decide, petz_factorize, petz_factorize_from,
    qmt_entropy_closed_form, verify_log_condition, LocalConditions, LocalMarkovCmi,
    LogConditionReport, MecmpDecision, QmtReconstruction,
};
pub use generate::{random_qmt, EdgeDims, QmtInstance, QmtOptions, MAX_QMT_DIM};
pub use graph::{
    all_spanning_trees, complete_graph, constructive_order, count_3chains_complete,
    count_3chains_path, count_3chains_star, default_labels, path_graph, random_tree, star_graph,
    tree_from_prufer, AssociatedGraph, Chain3, ConstructiveOrder,
};
pub use marginals::{pair_key, MarginalSet, PairKey};
pub use maxent::{maxent_bruteforce, MaxEntOptions, MaxEntResult, MAX_BRUTEFORCE_DIM};

#[cfg(test)]
mod tests;
