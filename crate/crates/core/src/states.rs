//! Named states used throughout examples and tests.

use faer::c64;

use crate::error::Result;
use crate::layout::SystemLayout;
use crate::operator::DensityOperator;

pub fn qubit_layout<S: AsRef<str>>(labels: &[S]) -> Result<SystemLayout> {
    SystemLayout::new(labels.iter().map(|l| (l.as_ref().to_owned(), 2)))
}

/// `(|0...0> + |1...1>) / √2` on qubits.
pub fn ghz<S: AsRef<str>>(labels: &[S]) -> Result<DensityOperator> {
    let layout = qubit_layout(labels)?;
    let d = layout.total_dim();
    let mut v = vec![c64::new(0.0, 0.0); d];
    v[0] = c64::new(1.0, 0.0);
    v[d - 1] = c64::new(1.0, 0.0);
    DensityOperator::pure(layout, &v)
}

/// `½ (|0...0><0...0| + |1...1><1...1|)`, the classical part of GHZ.
pub fn classical_ghz<S: AsRef<str>>(labels: &[S]) -> Result<DensityOperator> {
    let layout = qubit_layout(labels)?;
    let d = layout.total_dim();
    let mut p = vec![0.0; d];
    p[0] = 0.5;
    p[d - 1] = 0.5;
    DensityOperator::diagonal(layout, &p)
}

/// `|φ+> = (|00> + |11>) / √2`.
pub fn bell(a: &str, b: &str) -> Result<DensityOperator> {
    ghz(&[a, b])
}

/// Tensor product of the given states, in order.
pub fn product(states: &[DensityOperator]) -> Result<DensityOperator> {
    let mut it = states.iter();
    let mut acc = it
        .next()
        .cloned()
        .ok_or_else(|| crate::Error::InvalidArgument("empty product".into()))?;
    for s in it {
        acc = acc.tensor(s)?;
    }
    Ok(acc)
}
