//! Operators and density operators tagged with a [`SystemLayout`].

use std::ops::Deref;

use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::layout::{IndexSplit, SystemLayout};
use crate::spectral::{self, hermitian_residual, Spectrum};
use crate::CMatrix;

pub(crate) const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: c64 = c64 { re: 1.0, im: 0.0 };

/// Default tolerances recorded on every validated [`DensityOperator`].
pub const DEFAULT_HERM_TOL: f64 = 1e-9;
pub const DEFAULT_PSD_TOL: f64 = 1e-9;
pub const DEFAULT_TRACE_TOL: f64 = 1e-9;

/// A square complex matrix acting on the Hilbert space described by `layout`.
#[derive(Clone, Debug)]
pub struct Operator {
    layout: SystemLayout,
    matrix: CMatrix,
}

fn layout_mismatch(a: &SystemLayout, b: &SystemLayout) -> Error {
    Error::LayoutMismatch {
        left: a.to_string(),
        right: b.to_string(),
    }
}

pub(crate) fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (br, bc) = (b.nrows(), b.ncols());
    Mat::from_fn(a.nrows() * br, a.ncols() * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

impl Operator {
    pub fn new(layout: SystemLayout, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        if matrix.nrows() != layout.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.total_dim(),
                actual: matrix.nrows(),
            });
        }
        for j in 0..matrix.ncols() {
            for i in 0..matrix.nrows() {
                let z = matrix[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite);
                }
            }
        }
        Ok(Self { layout, matrix })
    }

    /// Skips validation; callers guarantee shape agreement.
    pub(crate) fn from_parts(layout: SystemLayout, matrix: CMatrix) -> Self {
        debug_assert_eq!(matrix.nrows(), layout.total_dim());
        Self { layout, matrix }
    }

    pub fn identity(layout: SystemLayout) -> Self {
        let d = layout.total_dim();
        Self::from_parts(layout, Mat::identity(d, d))
    }

    pub fn zeros(layout: SystemLayout) -> Self {
        let d = layout.total_dim();
        Self::from_parts(layout, Mat::zeros(d, d))
    }

    pub fn from_diagonal(layout: SystemLayout, diag: &[f64]) -> Result<Self> {
        let d = layout.total_dim();
        if diag.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: diag.len(),
            });
        }
        let m = Mat::from_fn(d, d, |i, j| if i == j { c64::new(diag[i], 0.0) } else { ZERO });
        Self::new(layout, m)
    }

    /// `|psi><phi|`.
    pub fn outer(layout: SystemLayout, psi: &[c64], phi: &[c64]) -> Result<Self> {
        let d = layout.total_dim();
        for v in [psi, phi] {
            if v.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: v.len(),
                });
            }
        }
        let m = Mat::from_fn(d, d, |i, j| psi[i] * phi[j].conj());
        Self::new(layout, m)
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> c64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)]).sum()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_parts(self.layout.clone(), self.matrix.adjoint().to_owned())
    }

    pub fn scale(&self, s: c64) -> Self {
        let d = self.dim();
        Self::from_parts(
            self.layout.clone(),
            Mat::from_fn(d, d, |i, j| self.matrix[(i, j)] * s),
        )
    }

    pub fn add(&self, other: &Operator) -> Result<Self> {
        let other = other.aligned_to(&self.layout)?;
        Ok(Self::from_parts(
            self.layout.clone(),
            &self.matrix + &other.matrix,
        ))
    }

    pub fn sub(&self, other: &Operator) -> Result<Self> {
        let other = other.aligned_to(&self.layout)?;
        Ok(Self::from_parts(
            self.layout.clone(),
            &self.matrix - &other.matrix,
        ))
    }

    pub fn matmul(&self, other: &Operator) -> Result<Self> {
        let other = other.aligned_to(&self.layout)?;
        Ok(Self::from_parts(
            self.layout.clone(),
            &self.matrix * &other.matrix,
        ))
    }

    /// `(A + A^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let d = self.dim();
        let m = &self.matrix;
        Self::from_parts(
            self.layout.clone(),
            Mat::from_fn(d, d, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5),
        )
    }

    pub fn hermitian_residual(&self) -> f64 {
        hermitian_residual(&self.matrix)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm_l2()
    }

    /// Schatten-1 norm of a Hermitian operator (sum of absolute eigenvalues).
    pub fn trace_norm_hermitian(&self) -> Result<f64> {
        let h = self.hermitian_part();
        Ok(spectral::eigenvalues_desc(&h.matrix)?
            .iter()
            .map(|l| l.abs())
            .sum())
    }

    /// Kronecker product; the layout is the concatenation.
    pub fn tensor(&self, other: &Operator) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        Ok(Self::from_parts(layout, kron(&self.matrix, &other.matrix)))
    }

    /// Traces out `discard`; the result keeps the remaining labels in layout order.
    pub fn partial_trace<S: AsRef<str>>(&self, discard: &[S]) -> Result<Self> {
        let kept = self.layout.without(discard)?;
        Ok(self.trace_to(kept))
    }

    /// Reduced operator on `keep`, in this layout's order.
    pub fn reduce_to<S: AsRef<str>>(&self, keep: &[S]) -> Result<Self> {
        let kept = self.layout.restrict(keep)?;
        Ok(self.trace_to(kept))
    }

    fn trace_to(&self, kept: SystemLayout) -> Self {
        let positions = self
            .layout
            .positions_of(&kept)
            .expect("kept layout is a sub-layout");
        let split = IndexSplit::new(&self.layout, &positions);
        let dk = split.local_dim;
        let m = &self.matrix;
        let mut out = Mat::<c64>::zeros(dk, dk);
        for j in 0..dk {
            let oj = split.offsets[j];
            for i in 0..dk {
                let oi = split.offsets[i];
                let mut acc = ZERO;
                for &b in &split.bases {
                    acc += m[(b + oi, b + oj)];
                }
                out[(i, j)] = acc;
            }
        }
        Self::from_parts(kept, out)
    }

    /// Reorders subsystems to follow `labels`, which must be a permutation of
    /// this layout's labels.
    pub fn permute<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        let target = self.layout.select(labels)?;
        if target.len() != self.layout.len() {
            return Err(layout_mismatch(&self.layout, &target));
        }
        Ok(self.permuted_to(target))
    }

    fn permuted_to(&self, target: SystemLayout) -> Self {
        if target == self.layout {
            return self.clone();
        }
        let positions = self
            .layout
            .positions_of(&target)
            .expect("target is a permutation");
        let split = IndexSplit::new(&self.layout, &positions);
        let d = self.dim();
        let mut new_to_old = vec![0; d];
        for (g, &l) in split.local.iter().enumerate() {
            new_to_old[l] = g;
        }
        let m = &self.matrix;
        let out = Mat::from_fn(d, d, |i, j| m[(new_to_old[i], new_to_old[j])]);
        Self::from_parts(target, out)
    }

    /// The same operator expressed in `layout`, which must hold the same
    /// subsystems in any order.
    pub fn aligned_to(&self, layout: &SystemLayout) -> Result<std::borrow::Cow<'_, Operator>> {
        if &self.layout == layout {
            return Ok(std::borrow::Cow::Borrowed(self));
        }
        if !self.layout.same_systems(layout) {
            return Err(layout_mismatch(&self.layout, layout));
        }
        Ok(std::borrow::Cow::Owned(self.permuted_to(layout.clone())))
    }

    /// `self ⊗ I` padded with identities on the labels of `target` that this
    /// operator does not act on, arranged in `target`'s order.
    pub fn embed_into(&self, target: &SystemLayout) -> Result<Self> {
        let positions = target.positions_of(&self.layout)?;
        let split = IndexSplit::new(target, &positions);
        let d = target.total_dim();
        let m = &self.matrix;
        let mut out = Mat::<c64>::zeros(d, d);
        for &b in &split.bases {
            for j in 0..split.local_dim {
                let gj = b + split.offsets[j];
                for i in 0..split.local_dim {
                    out[(b + split.offsets[i], gj)] = m[(i, j)];
                }
            }
        }
        Ok(Self::from_parts(target.clone(), out))
    }

    /// `(L ⊗ I) self` where `local` acts on a subset of this layout's labels.
    /// Costs `O(D^2 d_L)` instead of a full matrix product.
    pub fn apply_left(&self, local: &Operator) -> Result<Self> {
        let positions = self.layout.positions_of(&local.layout)?;
        let split = IndexSplit::new(&self.layout, &positions);
        let l = &local.matrix;
        let m = &self.matrix;
        let dl = split.local_dim;
        let d = self.dim();
        let mut out = Mat::<c64>::zeros(d, d);
        let mut buf = vec![ZERO; dl];
        for h in 0..d {
            for &b in &split.bases {
                for (k, v) in buf.iter_mut().enumerate() {
                    *v = m[(b + split.offsets[k], h)];
                }
                for i in 0..dl {
                    let mut acc = ZERO;
                    for (k, v) in buf.iter().enumerate() {
                        acc += l[(i, k)] * v;
                    }
                    out[(b + split.offsets[i], h)] = acc;
                }
            }
        }
        Ok(Self::from_parts(self.layout.clone(), out))
    }

    /// `self (L ⊗ I)`; see [`Operator::apply_left`].
    pub fn apply_right(&self, local: &Operator) -> Result<Self> {
        let positions = self.layout.positions_of(&local.layout)?;
        let split = IndexSplit::new(&self.layout, &positions);
        let l = &local.matrix;
        let m = &self.matrix;
        let dl = split.local_dim;
        let d = self.dim();
        let mut out = Mat::<c64>::zeros(d, d);
        let mut buf = vec![ZERO; dl];
        for &b in &split.bases {
            for g in 0..d {
                for (k, v) in buf.iter_mut().enumerate() {
                    *v = m[(g, b + split.offsets[k])];
                }
                for j in 0..dl {
                    let mut acc = ZERO;
                    for (k, v) in buf.iter().enumerate() {
                        acc += v * l[(k, j)];
                    }
                    out[(g, b + split.offsets[j])] = acc;
                }
            }
        }
        Ok(Self::from_parts(self.layout.clone(), out))
    }

    /// `(L ⊗ I) self (L ⊗ I)^dagger`.
    pub fn conjugate_by(&self, local: &Operator) -> Result<Self> {
        self.apply_left(local)?.apply_right(&local.adjoint())
    }

    /// `f` applied on the support of this (Hermitian PSD) operator.
    pub fn func_on_support(&self, f: spectral::MatrixFunction, rel_cutoff: f64) -> Result<Self> {
        Ok(Self::from_parts(
            self.layout.clone(),
            spectral::op_func_on_support(&self.matrix, f, rel_cutoff)?,
        ))
    }

    /// Normality residual `|AA^dagger - A^dagger A|_F / max(1, |A|_F^2)` and
    /// whether it is within `tol`.
    pub fn is_normal(&self, tol: f64) -> (bool, f64) {
        let (_, _, residual) = normality(&self.matrix);
        (residual <= tol, residual)
    }
}

/// `(A A^dagger, A^dagger A, normalized residual)`.
pub(crate) fn normality(a: &CMatrix) -> (CMatrix, CMatrix, f64) {
    let aad = a * a.adjoint();
    let ada = a.adjoint() * a;
    let scale = a.norm_l2().powi(2).max(1.0);
    let residual = (&aad - &ada).norm_l2() / scale;
    (aad, ada, residual)
}

/// Hermitian, positive semidefinite, unit-trace operator. The tolerances used
/// at validation time are kept alongside the matrix.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    op: Operator,
    herm_tol: f64,
    psd_tol: f64,
    trace_tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub herm_tol: f64,
    pub psd_tol: f64,
    pub trace_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm_tol: DEFAULT_HERM_TOL,
            psd_tol: DEFAULT_PSD_TOL,
            trace_tol: DEFAULT_TRACE_TOL,
        }
    }
}

impl Deref for DensityOperator {
    type Target = Operator;
    fn deref(&self) -> &Operator {
        &self.op
    }
}

impl DensityOperator {
    pub fn new(op: Operator) -> Result<Self> {
        Self::with_tolerances(op, Tolerances::default())
    }

    pub fn with_tolerances(op: Operator, tol: Tolerances) -> Result<Self> {
        let residual = op.hermitian_residual();
        if residual > tol.herm_tol {
            return Err(Error::NotHermitian {
                residual,
                tol: tol.herm_tol,
            });
        }
        let trace = op.trace().re;
        if (trace - 1.0).abs() > tol.trace_tol {
            return Err(Error::TraceMismatch {
                trace,
                tol: tol.trace_tol,
            });
        }
        let op = op.hermitian_part();
        let evs = spectral::eigenvalues_desc(op.matrix())?;
        let min = evs.last().copied().unwrap_or(0.0);
        if min < -tol.psd_tol {
            return Err(Error::NotPsd {
                min_eigenvalue: min,
                tol: tol.psd_tol,
            });
        }
        Ok(Self {
            op,
            herm_tol: tol.herm_tol,
            psd_tol: tol.psd_tol,
            trace_tol: tol.trace_tol,
        })
    }

    /// Wraps an operator that is a density operator by construction
    /// (marginals, products, conjugations of validated states). Only
    /// Hermitizes; no spectral check.
    pub(crate) fn trusted(op: Operator) -> Self {
        let t = Tolerances::default();
        Self {
            op: op.hermitian_part(),
            herm_tol: t.herm_tol,
            psd_tol: t.psd_tol,
            trace_tol: t.trace_tol,
        }
    }

    /// Divides by the trace and validates.
    pub fn normalized(op: Operator) -> Result<Self> {
        let tr = op.trace().re;
        if tr.is_nan() || tr <= 0.0 {
            return Err(Error::TraceMismatch {
                trace: tr,
                tol: DEFAULT_TRACE_TOL,
            });
        }
        Self::new(op.scale(c64::new(1.0 / tr, 0.0)))
    }

    pub fn maximally_mixed(layout: SystemLayout) -> Self {
        let d = layout.total_dim() as f64;
        Self::trusted(Operator::identity(layout).scale(c64::new(1.0 / d, 0.0)))
    }

    pub fn pure(layout: SystemLayout, psi: &[c64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm.is_nan() || norm <= 0.0 {
            return Err(Error::InvalidArgument("zero state vector".into()));
        }
        let v: Vec<c64> = psi.iter().map(|z| z / norm).collect();
        Ok(Self::trusted(Operator::outer(layout, &v, &v)?))
    }

    /// `|index><index|` in the computational basis.
    pub fn basis_state(layout: SystemLayout, index: usize) -> Result<Self> {
        let d = layout.total_dim();
        if index >= d {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for dimension {d}"
            )));
        }
        let mut v = vec![ZERO; d];
        v[index] = ONE;
        Self::pure(layout, &v)
    }

    pub fn diagonal(layout: SystemLayout, probs: &[f64]) -> Result<Self> {
        Self::new(Operator::from_diagonal(layout, probs)?)
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            herm_tol: self.herm_tol,
            psd_tol: self.psd_tol,
            trace_tol: self.trace_tol,
        }
    }

    pub fn as_operator(&self) -> &Operator {
        &self.op
    }

    pub fn into_operator(self) -> Operator {
        self.op
    }

    pub fn spectrum(&self, rel_cutoff: f64) -> Result<Spectrum> {
        spectral::spectral(self.op.matrix(), rel_cutoff)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        spectral::eigenvalues_desc(self.op.matrix())
    }

    pub fn tensor(&self, other: &DensityOperator) -> Result<Self> {
        Ok(Self::trusted(self.op.tensor(&other.op)?))
    }

    pub fn partial_trace<S: AsRef<str>>(&self, discard: &[S]) -> Result<Self> {
        Ok(Self::trusted(self.op.partial_trace(discard)?))
    }

    pub fn reduce_to<S: AsRef<str>>(&self, keep: &[S]) -> Result<Self> {
        Ok(Self::trusted(self.op.reduce_to(keep)?))
    }

    pub fn permute<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        Ok(Self::trusted(self.op.permute(labels)?))
    }

    pub fn aligned_to(&self, layout: &SystemLayout) -> Result<Self> {
        Ok(Self::trusted(self.op.aligned_to(layout)?.into_owned()))
    }

    /// `(U ⊗ I) rho (U ⊗ I)^dagger` for a unitary `u` on a subset of labels.
    pub fn conjugate_by_unitary(&self, u: &Operator) -> Result<Self> {
        Ok(Self::trusted(self.op.conjugate_by(u)?))
    }

    /// `sum_i w_i rho_i` for states on the same systems.
    pub fn mixture(weights: &[f64], states: &[DensityOperator]) -> Result<Self> {
        if weights.len() != states.len() || states.is_empty() {
            return Err(Error::InvalidArgument(
                "mixture needs one weight per state and at least one state".into(),
            ));
        }
        let layout = states[0].layout().clone();
        let mut acc = Operator::zeros(layout);
        for (w, s) in weights.iter().zip(states) {
            acc = acc.add(&s.scale(c64::new(*w, 0.0)))?;
        }
        Self::new(acc)
    }
}

/// `½ |rho - sigma|_1`. Layouts must hold the same subsystems; `sigma` is
/// permuted into `rho`'s order if needed.
pub fn trace_distance(rho: &Operator, sigma: &Operator) -> Result<f64> {
    Ok(0.5 * rho.sub(sigma)?.trace_norm_hermitian()?)
}
