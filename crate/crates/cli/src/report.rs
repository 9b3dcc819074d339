use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use qmtree::{Error, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Machine-readable result of one subcommand. Everything except
/// `wall_time_ms` is a pure function of the inputs and the seed.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    pub tolerances: BTreeMap<String, f64>,
    pub results: Value,
    pub residuals: BTreeMap<String, f64>,
    pub seed: Option<u64>,
    pub wall_time_ms: u64,
}

/// Outcome class, mapped onto the process exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Negative,
    Violated,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Success => 0,
            Outcome::Negative => 1,
            Outcome::Violated => 2,
        }
    }

    pub fn from_verdict(positive: bool) -> Self {
        if positive {
            Outcome::Success
        } else {
            Outcome::Negative
        }
    }
}

/// Collects inputs, results and residuals while a subcommand runs.
#[derive(Debug, Default)]
pub struct Recorder {
    pub inputs: BTreeMap<String, String>,
    pub results: serde_json::Map<String, Value>,
    pub residuals: BTreeMap<String, f64>,
}

impl Recorder {
    /// Reads a file and records its SHA-256 under `name`.
    pub fn read_input(&mut self, name: &str, path: &Path) -> Result<()> {
        let bytes = fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.inputs.insert(name.to_owned(), sha256_hex(&bytes));
        Ok(())
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) {
        let value = serde_json::to_value(value).expect("report values serialize");
        self.results.insert(key.to_owned(), value);
    }

    pub fn residual(&mut self, key: &str, value: f64) {
        self.residuals.insert(key.to_owned(), value);
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Structured error for stderr.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub command: String,
    pub kind: &'static str,
    pub message: String,
}

pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::LabelCollision(_) => "label_collision",
        Error::UnknownLabel(_) => "unknown_label",
        Error::ZeroDimension { .. } => "zero_dimension",
        Error::DimensionMismatch { .. } => "dimension_mismatch",
        Error::NotSquare { .. } => "not_square",
        Error::LayoutMismatch { .. } => "layout_mismatch",
        Error::NonFinite => "non_finite",
        Error::NotHermitian { .. } => "not_hermitian",
        Error::NotPsd { .. } => "not_psd",
        Error::TraceMismatch { .. } => "trace_mismatch",
        Error::EigenFailure => "eigen_failure",
        Error::SupportMismatch { .. } => "support_mismatch",
        Error::InconsistentMarginals { .. } => "inconsistent_marginals",
        Error::NotATree => "not_a_tree",
        Error::Disconnected => "disconnected",
        Error::MissingPair(..) => "missing_pair",
        Error::OutsideTractableClass { .. } => "outside_tractable_class",
        Error::NormalityFailure { .. } => "normality_failure",
        Error::NonConvergence { .. } => "non_convergence",
        Error::InvalidArgument(_) => "invalid_argument",
        Error::Parse(_) => "parse",
        Error::Io(_) => "io",
    }
}
