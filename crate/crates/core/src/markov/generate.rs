//! Product-edge Markov trees: every node is a tensor product of one factor
//! per incident edge, and the global state is a product of edge states
//! followed by local unitaries on each node.

use std::collections::BTreeMap;

use super::graph::AssociatedGraph;
use super::marginals::{MarginalSet, PairKey};
use crate::error::{Error, Result};
use crate::layout::SystemLayout;
use crate::operator::{DensityOperator, Operator};
use crate::random::{random_density_on, random_unitary, seeded_rng};

/// Largest global dimension [`random_qmt`] will build.
pub const MAX_QMT_DIM: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub enum EdgeDims {
    /// Every edge factor has this dimension on both ends.
    Uniform(usize),
    /// Per edge `(smaller label, larger label)`: factor dimensions at each end.
    PerEdge(BTreeMap<PairKey, (usize, usize)>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct QmtOptions {
    pub edge_dims: EdgeDims,
    /// Use pure edge states instead of full-rank ones.
    pub pure_edges: bool,
    /// Conjugate each node by a random unitary.
    pub local_unitaries: bool,
    /// Weight of the maximally mixed state blended into each full-rank edge
    /// state, keeping its smallest eigenvalue at least `edge_floor / d`.
    pub edge_floor: f64,
}

impl Default for QmtOptions {
    fn default() -> Self {
        Self {
            edge_dims: EdgeDims::Uniform(2),
            pure_edges: false,
            local_unitaries: true,
            edge_floor: 0.05,
        }
    }
}

#[derive(Clone, Debug)]
pub struct QmtInstance {
    pub rho: DensityOperator,
    pub marginals: MarginalSet,
    pub tree: AssociatedGraph,
}

fn factor_label(node: &str, edge: usize) -> String {
    format!("{node}#{edge}")
}

pub fn random_qmt(tree: &AssociatedGraph, options: &QmtOptions, seed: u64) -> Result<QmtInstance> {
    tree.ensure_tree()?;
    if !(0.0..=1.0).contains(&options.edge_floor) {
        return Err(Error::InvalidArgument("edge_floor must lie in [0, 1]".into()));
    }
    let edges: Vec<&PairKey> = tree.edges().iter().collect();
    let dims_of = |e: &PairKey| -> Result<(usize, usize)> {
        match &options.edge_dims {
            EdgeDims::Uniform(d) => Ok((*d, *d)),
            EdgeDims::PerEdge(map) => map
                .get(e)
                .copied()
                .ok_or_else(|| Error::MissingPair(e.0.clone(), e.1.clone())),
        }
    };

    let mut node_dims: BTreeMap<&str, usize> = tree.nodes().iter().map(|n| (n.as_str(), 1)).collect();
    let mut total: usize = 1;
    for e in &edges {
        let (du, dv) = dims_of(e)?;
        if du == 0 || dv == 0 {
            return Err(Error::InvalidArgument("edge factor dimensions must be positive".into()));
        }
        *node_dims.get_mut(e.0.as_str()).expect("edge endpoint") *= du;
        *node_dims.get_mut(e.1.as_str()).expect("edge endpoint") *= dv;
        total = total
            .checked_mul(du * dv)
            .filter(|&t| t <= MAX_QMT_DIM)
            .ok_or_else(|| {
                Error::InvalidArgument(format!("global dimension exceeds the cap {MAX_QMT_DIM}"))
            })?;
    }

    let mut rng = seeded_rng(seed);
    let mut state: Option<DensityOperator> = None;
    for (k, e) in edges.iter().enumerate() {
        let (du, dv) = dims_of(e)?;
        let layout = SystemLayout::new([(factor_label(&e.0, k), du), (factor_label(&e.1, k), dv)])?;
        let sigma = if options.pure_edges {
            random_density_on(layout, 1, &mut rng)?
        } else {
            let sigma = random_density_on(layout.clone(), du * dv, &mut rng)?;
            let floor = options.edge_floor;
            DensityOperator::mixture(&[1.0 - floor, floor], &[sigma, DensityOperator::maximally_mixed(layout)])?
        };
        state = Some(match state {
            None => sigma,
            Some(s) => s.tensor(&sigma)?,
        });
    }
    let state = state.ok_or_else(|| Error::InvalidArgument("tree has no edges".into()))?;

    // group edge factors by node, in node order, then merge each group
    let mut grouped = Vec::new();
    for node in tree.nodes() {
        for (k, e) in edges.iter().enumerate() {
            if &e.0 == node || &e.1 == node {
                grouped.push(factor_label(node, k));
            }
        }
    }
    let state = state.permute(&grouped)?;
    let layout = SystemLayout::new(tree.nodes().iter().map(|n| (n.clone(), node_dims[n.as_str()])))?;
    let mut rho = DensityOperator::trusted(Operator::new(layout, state.into_operator().into_matrix())?);

    if options.local_unitaries {
        for node in tree.nodes() {
            let d = node_dims[node.as_str()];
            let u = Operator::new(SystemLayout::new([(node.clone(), d)])?, random_unitary(d, &mut rng))?;
            rho = rho.conjugate_by_unitary(&u)?;
        }
    }

    let pairs: Vec<(&str, &str)> = edges.iter().map(|e| (e.0.as_str(), e.1.as_str())).collect();
    let marginals = MarginalSet::from_state(&rho, &pairs, 1e-9)?;
    Ok(QmtInstance {
        rho,
        marginals,
        tree: tree.clone(),
    })
}
