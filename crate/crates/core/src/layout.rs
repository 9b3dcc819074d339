//! Labeled tensor-product layouts and the mixed-radix index arithmetic behind
//! partial traces, identity padding and subsystem permutations.
//!
//! Basis index convention: the first subsystem is the most significant digit,
//! matching the Kronecker product `A ⊗ B`.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subsystem {
    pub label: String,
    pub dim: usize,
}

/// Ordered list of labeled subsystems. The order is the tensor order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SystemLayout {
    subsystems: Vec<Subsystem>,
}

impl SystemLayout {
    pub fn new<I, S>(parts: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut seen = BTreeSet::new();
        let mut subsystems = Vec::new();
        for (label, dim) in parts {
            let label = label.into();
            if dim == 0 {
                return Err(Error::ZeroDimension { label });
            }
            if !seen.insert(label.clone()) {
                return Err(Error::LabelCollision(label));
            }
            subsystems.push(Subsystem { label, dim });
        }
        Ok(Self { subsystems })
    }

    /// Layout with no subsystems; its total dimension is 1.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.subsystems.iter().map(|s| s.dim).product()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|s| s.dim).collect()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.subsystems.iter().map(|s| s.label.as_str())
    }

    pub fn label_vec(&self) -> Vec<String> {
        self.labels().map(str::to_owned).collect()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.subsystems.iter().position(|s| s.label == label)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.position(label).is_some()
    }

    pub fn dim_of(&self, label: &str) -> Option<usize> {
        self.position(label).map(|p| self.subsystems[p].dim)
    }

    /// Same labels with the same dimensions, in any order.
    pub fn same_systems(&self, other: &SystemLayout) -> bool {
        self.len() == other.len()
            && other
                .subsystems
                .iter()
                .all(|s| self.dim_of(&s.label) == Some(s.dim))
    }

    pub fn concat(&self, other: &SystemLayout) -> Result<Self> {
        Self::new(
            self.subsystems
                .iter()
                .chain(other.subsystems.iter())
                .map(|s| (s.label.clone(), s.dim)),
        )
    }

    /// Sub-layout holding exactly `labels`, in the order given.
    pub fn select<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        let mut parts = Vec::with_capacity(labels.len());
        for l in labels {
            let l = l.as_ref();
            let dim = self
                .dim_of(l)
                .ok_or_else(|| Error::UnknownLabel(l.to_owned()))?;
            parts.push((l.to_owned(), dim));
        }
        Self::new(parts)
    }

    /// Sub-layout holding `labels`, in this layout's order.
    pub fn restrict<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        let keep = self.check_labels(labels)?;
        Self::new(
            self.subsystems
                .iter()
                .filter(|s| keep.contains(s.label.as_str()))
                .map(|s| (s.label.clone(), s.dim)),
        )
    }

    /// Sub-layout with `labels` removed.
    pub fn without<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        let drop = self.check_labels(labels)?;
        Self::new(
            self.subsystems
                .iter()
                .filter(|s| !drop.contains(s.label.as_str()))
                .map(|s| (s.label.clone(), s.dim)),
        )
    }

    fn check_labels<'a, S: AsRef<str>>(&self, labels: &'a [S]) -> Result<BTreeSet<&'a str>> {
        let mut set = BTreeSet::new();
        for l in labels {
            let l = l.as_ref();
            if !self.contains(l) {
                return Err(Error::UnknownLabel(l.to_owned()));
            }
            if !set.insert(l) {
                return Err(Error::LabelCollision(l.to_owned()));
            }
        }
        Ok(set)
    }

    pub(crate) fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.len()];
        for k in (0..self.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.subsystems[k + 1].dim;
        }
        strides
    }

    pub(crate) fn positions_of(&self, sub: &SystemLayout) -> Result<Vec<usize>> {
        sub.subsystems
            .iter()
            .map(|s| match self.position(&s.label) {
                Some(p) if self.subsystems[p].dim == s.dim => Ok(p),
                Some(p) => Err(Error::DimensionMismatch {
                    expected: self.subsystems[p].dim,
                    actual: s.dim,
                }),
                None => Err(Error::UnknownLabel(s.label.clone())),
            })
            .collect()
    }
}

impl fmt::Display for SystemLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .subsystems
            .iter()
            .map(|s| format!("{}:{}", s.label, s.dim))
            .collect();
        write!(f, "{}", parts.join(", "))
    }
}

/// Decomposition of every global basis index `g` into a local index over a
/// chosen list of subsystems and a "rest" base `b`, with `g = b + offsets[local[g]]`.
#[derive(Clone, Debug)]
pub(crate) struct IndexSplit {
    pub local: Vec<usize>,
    pub offsets: Vec<usize>,
    /// Distinct bases, i.e. global indices whose local digits are all zero.
    pub bases: Vec<usize>,
    pub local_dim: usize,
}

impl IndexSplit {
    /// `positions` lists subsystem positions of `layout` in local (most
    /// significant first) order.
    pub fn new(layout: &SystemLayout, positions: &[usize]) -> Self {
        let dims = layout.dims();
        let strides = layout.strides();
        let total = layout.total_dim();
        let local_dims: Vec<usize> = positions.iter().map(|&p| dims[p]).collect();
        let local_dim: usize = local_dims.iter().product();

        let mut local_strides = vec![1; positions.len()];
        for k in (0..positions.len().saturating_sub(1)).rev() {
            local_strides[k] = local_strides[k + 1] * local_dims[k + 1];
        }

        let mut offsets = vec![0; local_dim];
        for (l, off) in offsets.iter_mut().enumerate() {
            let mut rem = l;
            for k in 0..positions.len() {
                let digit = rem / local_strides[k];
                rem %= local_strides[k];
                *off += digit * strides[positions[k]];
            }
        }

        let mut local = vec![0; total];
        let mut bases = Vec::with_capacity(total / local_dim.max(1));
        for (g, slot) in local.iter_mut().enumerate() {
            let mut l = 0;
            for (k, &p) in positions.iter().enumerate() {
                let digit = (g / strides[p]) % dims[p];
                l += digit * local_strides[k];
            }
            *slot = l;
            if l == 0 {
                bases.push(g);
            }
        }
        Self {
            local,
            offsets,
            bases,
            local_dim,
        }
    }
}
