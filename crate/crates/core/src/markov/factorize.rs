use std::collections::BTreeMap;

use faer::c64;

use super::graph::{constructive_order, AssociatedGraph, Chain3, ConstructiveOrder};
use super::marginals::MarginalSet;
use crate::error::{Error, Result};
use crate::info::{conditional_mutual_information, von_neumann_entropy};
use crate::operator::{normality, trace_distance, DensityOperator, Operator};
use crate::petz::{qmc_exists, QmcVerdict, ThreeChainMarginals};
use crate::spectral::{op_func_from_spectrum, MatrixFunction};

/// Per-3-chain Markov verdicts on a tree-structured marginal set.
#[derive(Clone, Debug)]
pub struct LocalConditions {
    pub verdicts: BTreeMap<Chain3, QmcVerdict>,
}

impl LocalConditions {
    pub fn all_pass(&self) -> bool {
        self.verdicts.values().all(|v| v.exists)
    }

    /// First failing chain (in chain order) and its normality residual.
    pub fn first_failure(&self) -> Option<(&Chain3, f64)> {
        self.verdicts
            .iter()
            .find(|(_, v)| !v.exists)
            .map(|(c, v)| (c, v.normality_residual))
    }

    pub fn max_normality_residual(&self) -> f64 {
        self.verdicts
            .values()
            .map(|v| v.normality_residual)
            .fold(0.0, f64::max)
    }
}

/// Runs the 3-chain Markov test on `{rho_ij, rho_jk}` for every 3-chain
/// `i - j - k` of the (tree) associated graph.
pub fn local_qmc_conditions(set: &MarginalSet, tol: f64) -> Result<LocalConditions> {
    let graph = AssociatedGraph::from_marginals(set);
    graph.ensure_tree()?;
    let mut verdicts = BTreeMap::new();
    for chain in graph.enumerate_3chains() {
        let left = set.pair(&chain.left, &chain.center)?;
        let right = set.pair(&chain.center, &chain.right)?;
        let marginals =
            ThreeChainMarginals::new(left, right, set.consistency_tol())?.with_cutoff(set.cutoff());
        verdicts.insert(chain, qmc_exists(&marginals, tol)?);
    }
    Ok(LocalConditions { verdicts })
}

/// Output of the Petz tree factorization.
#[derive(Clone, Debug)]
pub struct QmtReconstruction {
    pub order: ConstructiveOrder,
    /// Two-body factors `Δ_k = rho_{X_k Y_k}^{1/2} rho_{Y_k}^{-1/2}` for
    /// `k = 3..n`, in order of application.
    pub delta_factors: Vec<Operator>,
    pub theta: Operator,
    pub rho: DensityOperator,
    pub closed_form_entropy_bits: f64,
    pub entropy_bits: f64,
    pub residuals: BTreeMap<String, f64>,
}

/// `Θ = Δ_n ... Δ_3 (rho_{X_1 X_2}^{1/2} ⊗ I)` along `order`, and
/// `rho = ΘΘ^dagger`. The marginal set's associated graph must be a tree
/// whose 3-chains all pass [`local_qmc_conditions`].
pub fn petz_factorize(set: &MarginalSet, order: &ConstructiveOrder, tol: f64) -> Result<QmtReconstruction> {
    let graph = AssociatedGraph::from_marginals(set);
    graph.ensure_tree()?;
    if !order.is_prefix_connected(&graph) || order.order.len() != graph.node_count() {
        return Err(Error::InvalidArgument(
            "ordering is not a constructive ordering of the associated graph".into(),
        ));
    }
    if graph.node_count() < 2 {
        return Err(Error::InvalidArgument("need at least two nodes".into()));
    }
    let local = local_qmc_conditions(set, tol)?;
    if let Some((chain, residual)) = local.first_failure() {
        return Err(Error::OutsideTractableClass {
            chain: chain.to_string(),
            residual,
        });
    }

    let cutoff = set.cutoff();
    let layout = set.layout();
    let x1 = &order.order[0];
    let x2 = &order.order[1];
    let root_pair = set.pair(x1, x2)?;
    let mut theta = root_pair
        .func_on_support(MatrixFunction::Sqrt, cutoff)?
        .embed_into(layout)?;
    let mut prefixes = vec![theta.clone()];
    let mut delta_factors = Vec::new();
    for xk in &order.order[2..] {
        let yk = &order.parent[xk];
        let pair = set.pair(xk, yk)?;
        let sqrt_pair = pair.func_on_support(MatrixFunction::Sqrt, cutoff)?;
        let inv_sqrt_y = pair
            .reduce_to(&[yk.as_str()])?
            .func_on_support(MatrixFunction::InvSqrt, cutoff)?;
        theta = theta.apply_left(&inv_sqrt_y)?.apply_left(&sqrt_pair)?;
        delta_factors.push(sqrt_pair.matmul(&inv_sqrt_y.embed_into(sqrt_pair.layout())?)?);
        prefixes.push(theta.clone());
    }

    let (aad, _, normality_residual) = normality(theta.matrix());
    if normality_residual > tol {
        // locate the first prefix product that stops being normal
        let (k, node) = prefixes
            .iter()
            .enumerate()
            .find(|(_, p)| normality(p.matrix()).2 > tol)
            .map(|(i, _)| (i + 2, order.order[i + 1].clone()))
            .unwrap_or((order.order.len(), order.order.last().cloned().unwrap_or_default()));
        return Err(Error::NormalityFailure {
            k,
            node,
            residual: normality_residual,
        });
    }

    let rho_op = Operator::from_parts(layout.clone(), aad).hermitian_part();
    let trace_residual = (rho_op.trace().re - 1.0).abs();
    let rho = DensityOperator::trusted(rho_op.scale(c64::new(1.0 / rho_op.trace().re, 0.0)));

    let mut residuals = BTreeMap::new();
    residuals.insert("normality".to_owned(), normality_residual);
    residuals.insert("trace".to_owned(), trace_residual);
    let mut worst_marginal = 0.0f64;
    for ((a, b), target) in set.pairs() {
        let got = rho.reduce_to(&[a.as_str(), b.as_str()])?;
        let r = trace_distance(&got, target)? + trace_residual;
        worst_marginal = worst_marginal.max(r);
        residuals.insert(format!("marginal:{a},{b}"), r);
    }
    residuals.insert("max_marginal".to_owned(), worst_marginal);
    if worst_marginal > tol {
        return Err(Error::InconsistentMarginals {
            labels: "reconstruction".into(),
            residual: worst_marginal,
            tol,
        });
    }
    let closed = qmt_entropy_closed_form(set, &graph)?;
    let entropy = von_neumann_entropy(&rho)?;
    residuals.insert("closed_form_vs_direct".to_owned(), (closed - entropy).abs());
    residuals.insert(
        "local_max_normality".to_owned(),
        local.max_normality_residual(),
    );
    Ok(QmtReconstruction {
        order: order.clone(),
        delta_factors,
        theta,
        rho,
        closed_form_entropy_bits: closed,
        entropy_bits: entropy,
        residuals,
    })
}

/// Factorizes along the breadth-first order from `root`.
pub fn petz_factorize_from(set: &MarginalSet, root: &str, tol: f64) -> Result<QmtReconstruction> {
    let graph = AssociatedGraph::from_marginals(set);
    let order = constructive_order(&graph, root)?;
    petz_factorize(set, &order, tol)
}

/// `sum_edges S(rho_ij) - sum_i (deg(i) - 1) S(rho_i)`.
pub fn qmt_entropy_closed_form(set: &MarginalSet, graph: &AssociatedGraph) -> Result<f64> {
    graph.ensure_tree()?;
    let mut s = 0.0;
    for (a, b) in graph.edges() {
        s += von_neumann_entropy(&set.pair(a, b)?)?;
    }
    for node in graph.nodes() {
        let deg = graph.degree(node) as f64;
        if deg != 1.0 {
            s -= (deg - 1.0) * von_neumann_entropy(&set.node_marginal(node)?)?;
        }
    }
    Ok(s)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogConditionReport {
    /// `|Π (log rho - sum_edges log rho_ij + sum_i (deg-1) log rho_i) Π|_F`,
    /// base 2, on the support of `rho`.
    pub residual: f64,
    /// Largest trace distance between `rho`'s pair marginals and the set.
    pub marginal_residual: f64,
    pub compatible: bool,
}

pub fn verify_log_condition(rho: &DensityOperator, set: &MarginalSet, tol: f64) -> Result<LogConditionReport> {
    let graph = AssociatedGraph::from_marginals(set);
    graph.ensure_tree()?;
    let rho = rho.aligned_to(set.layout())?;
    let layout = set.layout();
    let cutoff = set.cutoff();
    let mut marginal_residual = 0.0f64;
    for ((a, b), target) in set.pairs() {
        let got = rho.reduce_to(&[a.as_str(), b.as_str()])?;
        marginal_residual = marginal_residual.max(trace_distance(&got, target)?);
    }
    let spec = rho.spectrum(cutoff)?;
    let mut diff = Operator::from_parts(
        layout.clone(),
        op_func_from_spectrum(&spec, MatrixFunction::Log2)?,
    );
    for (a, b) in graph.edges() {
        let log_pair = set
            .pair(a, b)?
            .func_on_support(MatrixFunction::Log2, cutoff)?
            .embed_into(layout)?;
        diff = diff.sub(&log_pair)?;
    }
    for node in graph.nodes() {
        let deg = graph.degree(node);
        if deg == 1 {
            continue;
        }
        let log_node = set
            .node_marginal(node)?
            .func_on_support(MatrixFunction::Log2, cutoff)?
            .embed_into(layout)?;
        diff = diff.add(&log_node.scale(c64::new(deg as f64 - 1.0, 0.0)))?;
    }
    let proj = spec.support_projector();
    let restricted = &proj * diff.matrix() * &proj;
    Ok(LogConditionReport {
        residual: restricted.norm_l2(),
        marginal_residual,
        compatible: marginal_residual <= tol,
    })
}

/// Conditional mutual informations that vanish on a Markov tree.
#[derive(Clone, Debug, Default)]
pub struct LocalMarkovCmi {
    /// `I(X_i : X_k | X_j)` for every 3-chain `i - j - k`.
    pub chains: BTreeMap<Chain3, f64>,
    /// `I(X_k : earlier nodes except Y_k | Y_k)` along the constructive
    /// order, keyed by `X_k`.
    pub order: BTreeMap<String, f64>,
}

impl LocalMarkovCmi {
    pub fn max(&self) -> f64 {
        self.chains
            .values()
            .chain(self.order.values())
            .copied()
            .fold(0.0, f64::max)
    }
}

/// Evaluates the local Markov conditions of `graph` on a global state, with
/// the constructive order rooted at `graph`'s first node.
pub fn local_markov_cmi(rho: &DensityOperator, graph: &AssociatedGraph) -> Result<LocalMarkovCmi> {
    graph.ensure_tree()?;
    let mut out = LocalMarkovCmi::default();
    for chain in graph.enumerate_3chains() {
        let v = conditional_mutual_information(
            rho,
            &[chain.left.as_str()],
            &[chain.right.as_str()],
            &[chain.center.as_str()],
        )?;
        out.chains.insert(chain, v);
    }
    let order = constructive_order(graph, &graph.nodes()[0])?;
    for (k, xk) in order.order.iter().enumerate().skip(2) {
        let yk = order.parent[xk].as_str();
        let rest: Vec<&str> = order.order[..k]
            .iter()
            .map(String::as_str)
            .filter(|n| *n != yk)
            .collect();
        let v = conditional_mutual_information(rho, &[xk.as_str()], &rest, &[yk])?;
        out.order.insert(xk.clone(), v);
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct MecmpDecision {
    pub accept: bool,
    pub entropy_bits: f64,
    pub threshold: f64,
    pub certificate: QmtReconstruction,
}

/// Is the maximum entropy over states compatible with `set` at least `k`?
/// Only decided for trees whose 3-chains are all Markov-compatible; other
/// inputs are refused with an error. Accepts when the closed-form entropy is
/// at least `k - tol`.
pub fn mecmp_decide(set: &MarginalSet, k: f64, tol: f64) -> Result<MecmpDecision> {
    let graph = AssociatedGraph::from_marginals(set);
    graph.ensure_tree()?;
    let root = graph.nodes()[0].clone();
    let certificate = petz_factorize_from(set, &root, tol)?;
    let entropy = certificate.closed_form_entropy_bits;
    Ok(MecmpDecision {
        accept: entropy >= k - tol,
        entropy_bits: entropy,
        threshold: k,
        certificate,
    })
}
