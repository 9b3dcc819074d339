use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::layout::SystemLayout;
use crate::operator::{trace_distance, DensityOperator};
use crate::spectral::DEFAULT_CUTOFF;

/// Unordered label pair stored with the smaller label first.
pub type PairKey = (String, String);

pub fn pair_key(a: &str, b: &str) -> PairKey {
    if a <= b {
        (a.to_owned(), b.to_owned())
    } else {
        (b.to_owned(), a.to_owned())
    }
}

/// Family of two-body marginals over a global layout.
///
/// Pairs sharing a node must agree on that node's marginal within
/// `consistency_tol` (trace distance).
#[derive(Clone, Debug)]
pub struct MarginalSet {
    layout: SystemLayout,
    pairs: BTreeMap<PairKey, DensityOperator>,
    consistency_tol: f64,
    cutoff: f64,
    max_inconsistency: f64,
}

impl MarginalSet {
    pub fn new(
        layout: SystemLayout,
        pairs: impl IntoIterator<Item = DensityOperator>,
        consistency_tol: f64,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for op in pairs {
            if op.layout().len() != 2 {
                return Err(Error::InvalidArgument(format!(
                    "marginal on [{}] is not two-body",
                    op.layout()
                )));
            }
            layout.positions_of(op.layout())?;
            let labels = op.layout().label_vec();
            let key = pair_key(&labels[0], &labels[1]);
            let op = op.permute(&[key.0.as_str(), key.1.as_str()])?;
            if map.insert(key.clone(), op).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "duplicate marginal for ({}, {})",
                    key.0, key.1
                )));
            }
        }
        let mut set = Self {
            layout,
            pairs: map,
            consistency_tol,
            cutoff: DEFAULT_CUTOFF,
            max_inconsistency: 0.0,
        };
        set.max_inconsistency = set.check_consistency()?;
        Ok(set)
    }

    /// Exact marginals of `rho` on the given pairs.
    pub fn from_state<S: AsRef<str>>(
        rho: &DensityOperator,
        pairs: &[(S, S)],
        consistency_tol: f64,
    ) -> Result<Self> {
        let ops = pairs
            .iter()
            .map(|(a, b)| rho.reduce_to(&[a.as_ref(), b.as_ref()]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(rho.layout().clone(), ops, consistency_tol)
    }

    /// Exact marginals of `rho` on every pair of subsystems.
    pub fn all_pairs_of(rho: &DensityOperator, consistency_tol: f64) -> Result<Self> {
        let labels = rho.layout().label_vec();
        let mut pairs = Vec::new();
        for (i, a) in labels.iter().enumerate() {
            for b in &labels[i + 1..] {
                pairs.push((a.as_str(), b.as_str()));
            }
        }
        Self::from_state(rho, &pairs, consistency_tol)
    }

    pub fn with_cutoff(mut self, cutoff: f64) -> Self {
        self.cutoff = cutoff;
        self
    }

    fn check_consistency(&self) -> Result<f64> {
        let mut worst = 0.0f64;
        for node in self.layout.labels() {
            let mut first: Option<DensityOperator> = None;
            for (key, op) in &self.pairs {
                if key.0 != node && key.1 != node {
                    continue;
                }
                let m = op.reduce_to(&[node])?;
                match &first {
                    None => first = Some(m),
                    Some(f) => {
                        let r = trace_distance(f, &m)?;
                        worst = worst.max(r);
                        if r > self.consistency_tol {
                            return Err(Error::InconsistentMarginals {
                                labels: node.to_owned(),
                                residual: r,
                                tol: self.consistency_tol,
                            });
                        }
                    }
                }
            }
        }
        Ok(worst)
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn labels(&self) -> Vec<String> {
        self.layout.label_vec()
    }

    pub fn pairs(&self) -> &BTreeMap<PairKey, DensityOperator> {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn consistency_tol(&self) -> f64 {
        self.consistency_tol
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// Largest single-node disagreement observed at construction.
    pub fn max_inconsistency(&self) -> f64 {
        self.max_inconsistency
    }

    /// The marginal on `{a, b}`, with `a` first.
    pub fn pair(&self, a: &str, b: &str) -> Result<DensityOperator> {
        let key = pair_key(a, b);
        let op = self
            .pairs
            .get(&key)
            .ok_or_else(|| Error::MissingPair(key.0.clone(), key.1.clone()))?;
        if key.0 == a {
            Ok(op.clone())
        } else {
            op.permute(&[a, b])
        }
    }

    pub fn has_pair(&self, a: &str, b: &str) -> bool {
        self.pairs.contains_key(&pair_key(a, b))
    }

    /// Single-node marginal taken from the first pair (in key order) that
    /// contains `node`.
    pub fn node_marginal(&self, node: &str) -> Result<DensityOperator> {
        if !self.layout.contains(node) {
            return Err(Error::UnknownLabel(node.to_owned()));
        }
        let (_, op) = self
            .pairs
            .iter()
            .find(|(k, _)| k.0 == node || k.1 == node)
            .ok_or_else(|| Error::InvalidArgument(format!("no marginal contains `{node}`")))?;
        op.reduce_to(&[node])
    }

    /// Subset of the pairs, e.g. the edges of a tree.
    pub fn restricted_to<'a>(&self, keys: impl IntoIterator<Item = &'a PairKey>) -> Result<Self> {
        let mut ops = Vec::new();
        for k in keys {
            ops.push(self.pair(&k.0, &k.1)?);
        }
        Ok(Self::new(self.layout.clone(), ops, self.consistency_tol)?.with_cutoff(self.cutoff))
    }
}
