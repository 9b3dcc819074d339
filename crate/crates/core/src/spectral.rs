//! Hermitian eigendecomposition and operator functions restricted to the support.
//!
//! Inverse powers and logarithms act as pseudo-functions: they are applied to
//! eigenvalues above the support cutoff and map the kernel to zero. Everything
//! here is a function of spectral projectors, so the (arbitrary) choice of
//! eigenvectors inside a degenerate eigenspace never leaks into results.

use faer::{c64, Mat, Side};

use crate::error::{Error, Result};
use crate::CMatrix;

/// Default relative support cutoff: eigenvalues `<= DEFAULT_CUTOFF * lambda_max`
/// are treated as zero.
pub const DEFAULT_CUTOFF: f64 = 1e-10;
/// Hermiticity tolerance for spectral input, relative to `max(1, |A|_max)`.
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Largest negative eigenvalue tolerated before an operator counts as not PSD,
/// relative to `max(1, lambda_max)`.
pub const PSD_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct Spectrum {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Columns are orthonormal eigenvectors, matching `eigenvalues`.
    pub eigenvectors: CMatrix,
    /// Absolute cutoff; the support is `eigenvalues > support_cutoff`.
    pub support_cutoff: f64,
}

/// Scalar functions that can be lifted to PSD operators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MatrixFunction {
    Sqrt,
    InvSqrt,
    Log2,
    Ln,
    /// `lambda^z = exp(z ln lambda)` on the support.
    Power(c64),
}

pub(crate) fn hermitian_residual(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in j..n {
            let d = a[(i, j)] - a[(j, i)].conj();
            worst = worst.max(d.norm());
        }
    }
    worst
}

pub(crate) fn max_abs(a: &CMatrix) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

fn check_hermitian(a: &CMatrix) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let tol = HERMITIAN_TOL * max_abs(a).max(1.0);
    let residual = hermitian_residual(a);
    if residual.is_nan() || residual > tol {
        return Err(Error::NotHermitian { residual, tol });
    }
    Ok(())
}

fn hermitian_part(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    Mat::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

pub(crate) fn absolute_cutoff(eigenvalues_desc: &[f64], rel_cutoff: f64) -> f64 {
    let top = eigenvalues_desc.first().copied().unwrap_or(0.0).max(0.0);
    rel_cutoff * top
}

/// Eigenvalues only, descending. Cheaper than [`spectral`].
pub fn eigenvalues_desc(a: &CMatrix) -> Result<Vec<f64>> {
    check_hermitian(a)?;
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    let h = hermitian_part(a);
    let mut vals = h
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::EigenFailure)?;
    vals.reverse();
    Ok(vals)
}

pub fn spectral(a: &CMatrix, rel_cutoff: f64) -> Result<Spectrum> {
    check_hermitian(a)?;
    let n = a.nrows();
    let h = hermitian_part(a);
    let evd = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::EigenFailure)?;
    let s = evd.S().column_vector();
    let u = evd.U();
    // faer returns ascending order
    let eigenvalues: Vec<f64> = (0..n).rev().map(|k| s[k].re).collect();
    let eigenvectors = Mat::from_fn(n, n, |i, j| u[(i, n - 1 - j)]);
    let support_cutoff = absolute_cutoff(&eigenvalues, rel_cutoff);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
        support_cutoff,
    })
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn support_rank(&self) -> usize {
        self.eigenvalues
            .iter()
            .filter(|&&l| l > self.support_cutoff)
            .count()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    /// `V diag(f(lambda)) V^dagger`, with `f` evaluated only on the support.
    pub fn apply_on_support(&self, f: impl Fn(f64) -> c64) -> CMatrix {
        let n = self.dim();
        let cols: Vec<usize> = (0..n)
            .filter(|&k| self.eigenvalues[k] > self.support_cutoff)
            .collect();
        let weights: Vec<c64> = cols.iter().map(|&k| f(self.eigenvalues[k])).collect();
        self.weighted_outer(&cols, &weights)
    }

    /// `V diag(f(lambda)) V^dagger` over every eigenvalue.
    pub fn apply_all(&self, f: impl Fn(f64) -> c64) -> CMatrix {
        let cols: Vec<usize> = (0..self.dim()).collect();
        let weights: Vec<c64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        self.weighted_outer(&cols, &weights)
    }

    pub fn support_projector(&self) -> CMatrix {
        self.apply_on_support(|_| c64::new(1.0, 0.0))
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.apply_all(|l| c64::new(l, 0.0))
    }

    fn weighted_outer(&self, cols: &[usize], weights: &[c64]) -> CMatrix {
        let n = self.dim();
        if cols.is_empty() {
            return Mat::zeros(n, n);
        }
        let v = &self.eigenvectors;
        let left = Mat::from_fn(n, cols.len(), |i, j| v[(i, cols[j])] * weights[j]);
        let right = Mat::from_fn(n, cols.len(), |i, j| v[(i, cols[j])]);
        &left * right.adjoint()
    }
}

/// Applies `f` eigenvalue-wise on the support of a PSD operator.
pub fn op_func_on_support(a: &CMatrix, f: MatrixFunction, rel_cutoff: f64) -> Result<CMatrix> {
    let spec = spectral(a, rel_cutoff)?;
    op_func_from_spectrum(&spec, f)
}

pub fn op_func_from_spectrum(spec: &Spectrum, f: MatrixFunction) -> Result<CMatrix> {
    let tol = PSD_TOL * spec.max_eigenvalue().max(1.0);
    if spec.min_eigenvalue() < -tol {
        return Err(Error::NotPsd {
            min_eigenvalue: spec.min_eigenvalue(),
            tol,
        });
    }
    let out = match f {
        MatrixFunction::Sqrt => spec.apply_on_support(|l| c64::new(l.sqrt(), 0.0)),
        MatrixFunction::InvSqrt => spec.apply_on_support(|l| c64::new(1.0 / l.sqrt(), 0.0)),
        MatrixFunction::Log2 => spec.apply_on_support(|l| c64::new(l.log2(), 0.0)),
        MatrixFunction::Ln => spec.apply_on_support(|l| c64::new(l.ln(), 0.0)),
        MatrixFunction::Power(z) => spec.apply_on_support(|l| (z * l.ln()).exp()),
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, random_hermitian, seeded_rng};

    fn diag(values: &[f64]) -> CMatrix {
        let n = values.len();
        Mat::from_fn(n, n, |i, j| {
            if i == j {
                c64::new(values[i], 0.0)
            } else {
                c64::new(0.0, 0.0)
            }
        })
    }

    fn dist(a: &CMatrix, b: &CMatrix) -> f64 {
        (a - b).norm_l2()
    }

    #[test]
    fn maximally_mixed_qubit() {
        let s = spectral(&diag(&[0.5, 0.5]), DEFAULT_CUTOFF).unwrap();
        assert_eq!(s.eigenvalues.len(), 2);
        for l in &s.eigenvalues {
            assert!((l - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn diagonal_sorted_descending_with_standard_basis() {
        let s = spectral(&diag(&[0.3, 0.7]), DEFAULT_CUTOFF).unwrap();
        assert!((s.eigenvalues[0] - 0.7).abs() < 1e-15);
        assert!((s.eigenvalues[1] - 0.3).abs() < 1e-15);
        assert!((s.eigenvectors[(1, 0)].norm() - 1.0).abs() < 1e-14);
        assert!((s.eigenvectors[(0, 1)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_hermitian_reconstructs() {
        let mut rng = seeded_rng(7);
        for n in [1, 2, 5, 16, 40] {
            let h = random_hermitian(n, &mut rng);
            let s = spectral(&h, DEFAULT_CUTOFF).unwrap();
            assert!(dist(&s.reconstruct(), &h) <= 1e-10 * h.norm_l2().max(1.0));
            assert!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut a = diag(&[1.0, 0.0]);
        a[(0, 1)] = c64::new(1.0, 0.0);
        assert!(matches!(
            spectral(&a, DEFAULT_CUTOFF),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn sqrt_of_quarter_identity() {
        let r = op_func_on_support(&diag(&[0.25; 4]), MatrixFunction::Sqrt, DEFAULT_CUTOFF).unwrap();
        assert!(dist(&r, &diag(&[0.5; 4])) < 1e-14);
    }

    #[test]
    fn log2_zero_on_kernel() {
        let r = op_func_on_support(
            &diag(&[0.5, 0.5, 0.0, 0.0]),
            MatrixFunction::Log2,
            DEFAULT_CUTOFF,
        )
        .unwrap();
        assert!(dist(&r, &diag(&[-1.0, -1.0, 0.0, 0.0])) < 1e-14);
    }

    #[test]
    fn imaginary_power_is_unitary_on_support() {
        let rho = random_density(6, 4, 3).unwrap();
        let spec = spectral(rho.matrix(), DEFAULT_CUTOFF).unwrap();
        let u = op_func_from_spectrum(&spec, MatrixFunction::Power(c64::new(0.0, 0.8))).unwrap();
        let uu = &u * u.adjoint();
        assert!(dist(&uu, &spec.support_projector()) <= 1e-10);
    }

    #[test]
    fn negative_eigenvalue_rejected() {
        let a = diag(&[1.1, -0.1]);
        assert!(matches!(
            op_func_on_support(&a, MatrixFunction::Sqrt, DEFAULT_CUTOFF),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn sqrt_squared_reproduces_input() {
        let rho = random_density(8, 5, 11).unwrap();
        let s = op_func_on_support(rho.matrix(), MatrixFunction::Sqrt, DEFAULT_CUTOFF).unwrap();
        assert!(dist(&(&s * &s), rho.matrix()) <= 1e-10);
    }

    #[test]
    fn spectral_is_deterministic() {
        let mut rng = seeded_rng(99);
        let h = random_hermitian(12, &mut rng);
        let a = spectral(&h, DEFAULT_CUTOFF).unwrap();
        let b = spectral(&h, DEFAULT_CUTOFF).unwrap();
        assert_eq!(a.eigenvalues, b.eigenvalues);
        assert!(dist(&a.eigenvectors, &b.eigenvectors) == 0.0);
    }
}
