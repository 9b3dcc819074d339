//! JSON persistence for operators, marginal sets, graphs and 3-chains.
//!
//! Operators are stored row-major as separate real and imaginary parts:
//! `{"labels": [["A", 2], ["B", 2]], "matrix_re": [[..]], "matrix_im": [[..]]}`.
//! `matrix_im` may be omitted for real matrices. Floats are written in
//! shortest round-trip form, so save/load is bit-exact.

use std::fs;
use std::path::Path;

use faer::Mat;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::c64;
use crate::error::{Error, Result};
use crate::layout::SystemLayout;
use crate::markov::{AssociatedGraph, MarginalSet};
use crate::operator::{DensityOperator, Operator, Tolerances};
use crate::petz::ThreeChainMarginals;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorJson {
    pub labels: Vec<(String, usize)>,
    pub matrix_re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix_im: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginalSetJson {
    pub layout: Vec<(String, usize)>,
    pub pairs: Vec<PairJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairJson {
    pub labels: (String, String),
    pub operator: OperatorJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphJson {
    pub nodes: Vec<String>,
    pub edges: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainJson {
    pub rho_ab: OperatorJson,
    pub rho_bc: OperatorJson,
}

impl From<&Operator> for OperatorJson {
    fn from(op: &Operator) -> Self {
        let m = op.matrix();
        let rows = |f: fn(&c64) -> f64| -> Vec<Vec<f64>> {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        let im = rows(|z| z.im);
        let has_im = im.iter().flatten().any(|&x| x != 0.0);
        Self {
            labels: op
                .layout()
                .subsystems()
                .iter()
                .map(|s| (s.label.clone(), s.dim))
                .collect(),
            matrix_re: rows(|z| z.re),
            matrix_im: has_im.then_some(im),
        }
    }
}

fn layout_from(parts: &[(String, usize)], field: &str) -> Result<SystemLayout> {
    if parts.is_empty() {
        return Err(Error::Parse(format!("{field}: no subsystems")));
    }
    SystemLayout::new(parts.iter().cloned()).map_err(|e| Error::Parse(format!("{field}: {e}")))
}

fn check_shape(rows: &[Vec<f64>], d: usize, field: &str) -> Result<()> {
    if rows.len() != d {
        return Err(Error::Parse(format!(
            "{field}: expected {d} rows for the declared dims, got {}",
            rows.len()
        )));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != d) {
        return Err(Error::Parse(format!(
            "{field}: row {i} has {} entries, expected {d}",
            r.len()
        )));
    }
    Ok(())
}

impl OperatorJson {
    pub fn to_operator(&self) -> Result<Operator> {
        let layout = layout_from(&self.labels, "labels")?;
        let d = layout.total_dim();
        check_shape(&self.matrix_re, d, "matrix_re")?;
        if let Some(im) = &self.matrix_im {
            check_shape(im, d, "matrix_im")?;
        }
        let m = Mat::from_fn(d, d, |i, j| {
            let im = self.matrix_im.as_ref().map_or(0.0, |im| im[i][j]);
            c64::new(self.matrix_re[i][j], im)
        });
        Operator::new(layout, m)
    }

    pub fn to_density(&self, tol: Tolerances) -> Result<DensityOperator> {
        DensityOperator::with_tolerances(self.to_operator()?, tol)
    }
}

impl From<&MarginalSet> for MarginalSetJson {
    fn from(set: &MarginalSet) -> Self {
        Self {
            layout: set
                .layout()
                .subsystems()
                .iter()
                .map(|s| (s.label.clone(), s.dim))
                .collect(),
            pairs: set
                .pairs()
                .iter()
                .map(|(key, op)| PairJson {
                    labels: key.clone(),
                    operator: OperatorJson::from(&**op),
                })
                .collect(),
        }
    }
}

impl MarginalSetJson {
    pub fn to_marginal_set(&self, tol: Tolerances, consistency_tol: f64) -> Result<MarginalSet> {
        let layout = layout_from(&self.layout, "layout")?;
        let ops = self
            .pairs
            .iter()
            .enumerate()
            .map(|(k, pair)| {
                let op = pair.operator.to_density(tol).map_err(|e| match e {
                    Error::Parse(msg) => Error::Parse(format!("pairs[{k}].operator.{msg}")),
                    other => other,
                })?;
                let mut declared = [pair.labels.0.as_str(), pair.labels.1.as_str()];
                let mut actual: Vec<&str> = op.layout().labels().collect();
                declared.sort_unstable();
                actual.sort_unstable();
                if actual != declared {
                    return Err(Error::Parse(format!(
                        "pairs[{k}].labels: ({}, {}) does not match the operator layout [{}]",
                        pair.labels.0,
                        pair.labels.1,
                        op.layout()
                    )));
                }
                Ok(op)
            })
            .collect::<Result<Vec<_>>>()?;
        MarginalSet::new(layout, ops, consistency_tol)
    }
}

impl From<&AssociatedGraph> for GraphJson {
    fn from(g: &AssociatedGraph) -> Self {
        Self {
            nodes: g.nodes().to_vec(),
            edges: g.edges().iter().cloned().collect(),
        }
    }
}

impl GraphJson {
    pub fn to_graph(&self) -> Result<AssociatedGraph> {
        let edges: Vec<(&str, &str)> = self.edges.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let nodes: Vec<&str> = self.nodes.iter().map(String::as_str).collect();
        AssociatedGraph::new(&nodes, &edges)
    }
}

impl ChainJson {
    pub fn to_chain(&self, tol: Tolerances, consistency_tol: f64) -> Result<ThreeChainMarginals> {
        ThreeChainMarginals::new(
            self.rho_ab.to_density(tol)?,
            self.rho_bc.to_density(tol)?,
            consistency_tol,
        )
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))
}

pub fn from_json_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    from_json_str(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn save_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = to_json_string(value)?;
    text.push('\n');
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::Io(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn load_operator(path: &Path) -> Result<DensityOperator> {
    load_json::<OperatorJson>(path)?.to_density(Tolerances::default())
}

pub fn save_operator(op: &Operator, path: &Path) -> Result<()> {
    save_json(&OperatorJson::from(op), path)
}

pub fn load_marginal_set(path: &Path, consistency_tol: f64) -> Result<MarginalSet> {
    load_json::<MarginalSetJson>(path)?.to_marginal_set(Tolerances::default(), consistency_tol)
}

pub fn save_marginal_set(set: &MarginalSet, path: &Path) -> Result<()> {
    save_json(&MarginalSetJson::from(set), path)
}
