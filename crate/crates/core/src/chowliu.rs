//! Quantum Chow-Liu: mutual-information weights, maximum spanning tree and
//! Petz reconstruction over the learned tree.

use std::collections::BTreeMap;

use petgraph::unionfind::UnionFind;

use crate::error::{Error, Result};
use crate::info::{relative_entropy, von_neumann_entropy};
use crate::markov::{
    all_spanning_trees, pair_key, petz_factorize_from, qmt_entropy_closed_form, AssociatedGraph,
    MarginalSet, PairKey, QmtReconstruction,
};
use crate::operator::{trace_distance, DensityOperator};

/// Weights closer than this (in bits) count as tied and fall back to the
/// lexicographic edge order.
pub const WEIGHT_RESOLUTION: f64 = 1e-10;

/// Largest node count accepted by [`brute_force_best_tree`].
pub const MAX_BRUTE_FORCE_NODES: usize = 5;

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    pub nodes: Vec<String>,
    pub weights: BTreeMap<PairKey, f64>,
}

impl WeightedGraph {
    pub fn weight(&self, a: &str, b: &str) -> Option<f64> {
        self.weights.get(&pair_key(a, b)).copied()
    }

    pub fn total_weight(&self, tree: &AssociatedGraph) -> f64 {
        tree.edges()
            .iter()
            .filter_map(|e| self.weights.get(e))
            .sum()
    }
}

/// `I(X_i : X_j)` for every pair, from a complete pairwise marginal set.
pub fn mi_weights(set: &MarginalSet) -> Result<WeightedGraph> {
    let nodes = set.labels();
    let mut node_entropy = BTreeMap::new();
    for n in &nodes {
        node_entropy.insert(n.clone(), von_neumann_entropy(&set.node_marginal(n)?)?);
    }
    let mut weights = BTreeMap::new();
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            let pair = set.pair(a, b)?;
            let w = node_entropy[a] + node_entropy[b] - von_neumann_entropy(&pair)?;
            weights.insert(pair_key(a, b), w);
        }
    }
    Ok(WeightedGraph { nodes, weights })
}

/// Pairwise weights straight from a global state.
pub fn mi_weights_of_state(rho: &DensityOperator) -> Result<WeightedGraph> {
    mi_weights(&MarginalSet::all_pairs_of(rho, 1e-9)?)
}

/// Maximum-weight spanning tree by greedy insertion (Kruskal). Edges are
/// taken by decreasing weight; weights within [`WEIGHT_RESOLUTION`] are
/// ordered lexicographically by edge.
pub fn max_spanning_tree(g: &WeightedGraph) -> Result<AssociatedGraph> {
    let index: BTreeMap<&str, usize> = g
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let mut edges: Vec<(i64, &PairKey)> = g
        .weights
        .iter()
        .map(|(e, &w)| ((w / WEIGHT_RESOLUTION).round() as i64, e))
        .collect();
    edges.sort_by(|(wa, ea), (wb, eb)| wb.cmp(wa).then_with(|| ea.cmp(eb)));

    let mut uf = UnionFind::<usize>::new(g.nodes.len());
    let mut chosen = Vec::new();
    for (_, e) in edges {
        let (a, b) = (
            *index.get(e.0.as_str()).ok_or_else(|| Error::UnknownLabel(e.0.clone()))?,
            *index.get(e.1.as_str()).ok_or_else(|| Error::UnknownLabel(e.1.clone()))?,
        );
        if uf.union(a, b) {
            chosen.push((e.0.as_str(), e.1.as_str()));
        }
    }
    if chosen.len() + 1 != g.nodes.len() {
        return Err(Error::Disconnected);
    }
    let nodes: Vec<&str> = g.nodes.iter().map(String::as_str).collect();
    AssociatedGraph::new(&nodes, &chosen)
}

#[derive(Clone, Debug)]
pub struct ChowLiuResult {
    pub tree: AssociatedGraph,
    pub weights: WeightedGraph,
    pub reconstruction: QmtReconstruction,
}

/// Learns the maximum mutual-information tree and reconstructs the Markov
/// tree state on it. Fails with the offending 3-chain when the learned tree
/// violates the Markov hypothesis; no alternative trees are searched.
pub fn quantum_chow_liu(set: &MarginalSet, tol: f64) -> Result<ChowLiuResult> {
    let weights = mi_weights(set)?;
    let tree = max_spanning_tree(&weights)?;
    let tree_set = set.restricted_to(tree.edges())?;
    let reconstruction = petz_factorize_from(&tree_set, &tree.nodes()[0], tol)?;
    Ok(ChowLiuResult {
        tree,
        weights,
        reconstruction,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DivergenceIdentity {
    /// `S(rho || rho_T)`.
    pub lhs: f64,
    /// `S(rho_T) - S(rho)`.
    pub rhs: f64,
    pub residual: f64,
}

/// Largest trace distance between the tree marginals of `rho` and of the
/// reconstruction.
fn tree_marginal_mismatch(rho: &DensityOperator, rec: &DensityOperator, tree: &AssociatedGraph) -> Result<f64> {
    let mut worst = 0.0f64;
    for (a, b) in tree.edges() {
        let labels = [a.as_str(), b.as_str()];
        worst = worst.max(trace_distance(&*rho.reduce_to(&labels)?, &*rec.reduce_to(&labels)?)?);
    }
    Ok(worst)
}

const COMPATIBILITY_TOL: f64 = 1e-8;

/// Checks `S(rho || rho_T) = S(rho_T) - S(rho)` for a reconstruction that
/// shares `rho`'s marginals on its tree.
pub fn relative_entropy_gap(rho: &DensityOperator, reconstruction: &QmtReconstruction) -> Result<DivergenceIdentity> {
    let tree = tree_of(reconstruction);
    let mismatch = tree_marginal_mismatch(rho, &reconstruction.rho, &tree)?;
    if mismatch > COMPATIBILITY_TOL {
        return Err(Error::InconsistentMarginals {
            labels: "tree".into(),
            residual: mismatch,
            tol: COMPATIBILITY_TOL,
        });
    }
    let lhs = relative_entropy(rho, &reconstruction.rho)?;
    let rhs = von_neumann_entropy(&reconstruction.rho)? - von_neumann_entropy(rho)?;
    Ok(DivergenceIdentity {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
    })
}

fn tree_of(rec: &QmtReconstruction) -> AssociatedGraph {
    let edges: Vec<(&str, &str)> = rec
        .order
        .parent
        .iter()
        .map(|(c, p)| (c.as_str(), p.as_str()))
        .collect();
    let nodes: Vec<&str> = rec.order.order.iter().map(String::as_str).collect();
    AssociatedGraph::new(&nodes, &edges).expect("order nodes are distinct")
}

/// `ΔS = sum S(rho_ij) - sum (deg - 1) S(rho_i) - S(rho_tilde)` for a state
/// compatible with the tree marginal set `set_t`.
pub fn delta_s(set_t: &MarginalSet, rho_tilde: &DensityOperator) -> Result<f64> {
    let graph = AssociatedGraph::from_marginals(set_t);
    let mut mismatch = 0.0f64;
    for ((a, b), target) in set_t.pairs() {
        let got = rho_tilde.reduce_to(&[a.as_str(), b.as_str()])?;
        mismatch = mismatch.max(trace_distance(&got, target)?);
    }
    if mismatch > COMPATIBILITY_TOL {
        return Err(Error::InconsistentMarginals {
            labels: "tree".into(),
            residual: mismatch,
            tol: COMPATIBILITY_TOL,
        });
    }
    Ok(qmt_entropy_closed_form(set_t, &graph)? - von_neumann_entropy(rho_tilde)?)
}

#[derive(Clone, Debug)]
pub struct BruteForceResult {
    pub tree: AssociatedGraph,
    pub divergence: f64,
    pub trees_enumerated: usize,
    /// Trees whose 3-chains are not all Markov-compatible, with the reason.
    pub skipped: Vec<(AssociatedGraph, String)>,
}

/// Exhaustive search over every labeled spanning tree for the one whose
/// Markov-tree reconstruction minimizes `S(rho || rho_T)`.
pub fn brute_force_best_tree(rho: &DensityOperator, tol: f64) -> Result<BruteForceResult> {
    let labels = rho.layout().label_vec();
    if labels.len() > MAX_BRUTE_FORCE_NODES {
        return Err(Error::InvalidArgument(format!(
            "brute force limited to {MAX_BRUTE_FORCE_NODES} nodes"
        )));
    }
    let trees = all_spanning_trees(&labels)?;
    let trees_enumerated = trees.len();
    let mut best: Option<(AssociatedGraph, f64)> = None;
    let mut skipped = Vec::new();
    for tree in trees {
        let pairs: Vec<(&str, &str)> = tree.edges().iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let set = MarginalSet::from_state(rho, &pairs, 1e-9)?;
        let rec = match petz_factorize_from(&set, &labels[0], tol) {
            Ok(r) => r,
            Err(e @ (Error::OutsideTractableClass { .. } | Error::NormalityFailure { .. })) => {
                skipped.push((tree, e.to_string()));
                continue;
            }
            Err(e) => return Err(e),
        };
        let d = relative_entropy(rho, &rec.rho)?;
        let better = match &best {
            None => true,
            Some((_, b)) => d < b - WEIGHT_RESOLUTION,
        };
        if better {
            best = Some((tree, d));
        }
    }
    let (tree, divergence) = best.ok_or_else(|| {
        Error::InvalidArgument("no spanning tree satisfies the Markov hypothesis".into())
    })?;
    Ok(BruteForceResult {
        tree,
        divergence,
        trees_enumerated,
        skipped,
    })
}
