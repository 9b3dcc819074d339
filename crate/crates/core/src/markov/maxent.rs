//! Maximum-entropy state under linear marginal constraints, by gradient
//! descent on the convex dual
//! `F(h) = ln Tr exp(sum_J h_J ⊗ I) - sum_J Tr(h_J rho_J)`.
//! The gradient in `h_J` is `Tr_{not J} rho(h) - rho_J`.

use faer::{c64, Mat};

use super::marginals::MarginalSet;
use crate::error::{Error, Result};
use crate::operator::{DensityOperator, Operator};
use crate::spectral::spectral;
use crate::CMatrix;

/// Largest global dimension accepted by [`maxent_bruteforce`].
pub const MAX_BRUTEFORCE_DIM: usize = 64;

#[derive(Clone, Copy, Debug)]
pub struct MaxEntOptions {
    pub max_iter: usize,
    /// Stop once every constraint's trace-norm violation is below this.
    pub violation_tol: f64,
    /// Stop once the dual gradient's Frobenius norm is below this.
    pub step_tol: f64,
}

impl Default for MaxEntOptions {
    fn default() -> Self {
        Self {
            max_iter: 20_000,
            violation_tol: 1e-6,
            step_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MaxEntResult {
    pub rho: DensityOperator,
    pub iterations: usize,
    pub max_violation: f64,
    pub gradient_norm: f64,
}

struct DualPoint {
    value: f64,
    rho: Operator,
    grads: Vec<Operator>,
}

struct Problem<'a> {
    set: &'a MarginalSet,
    targets: Vec<DensityOperator>,
}

fn inner(a: &[Operator], b: &[Operator]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let (x, y) = (x.matrix(), y.matrix());
        for j in 0..x.ncols() {
            for i in 0..x.nrows() {
                s += (x[(i, j)].conj() * y[(i, j)]).re;
            }
        }
    }
    s
}

fn axpy(h: &[Operator], alpha: f64, d: &[Operator]) -> Vec<Operator> {
    h.iter()
        .zip(d)
        .map(|(x, y)| {
            let (xm, ym) = (x.matrix(), y.matrix());
            let n = xm.nrows();
            Operator::new(
                x.layout().clone(),
                Mat::from_fn(n, n, |i, j| xm[(i, j)] + ym[(i, j)] * alpha),
            )
            .expect("same shape")
        })
        .collect()
}

fn diff(a: &[Operator], b: &[Operator]) -> Vec<Operator> {
    axpy(a, -1.0, b)
}

impl Problem<'_> {
    fn evaluate(&self, h: &[Operator]) -> Result<DualPoint> {
        let layout = self.set.layout();
        let d = layout.total_dim();
        let mut big: CMatrix = Mat::zeros(d, d);
        for hj in h {
            let e = hj.embed_into(layout)?;
            big = &big + e.matrix();
        }
        let spec = spectral(&big, 0.0)?;
        let top = spec.max_eigenvalue();
        let z: f64 = spec.eigenvalues.iter().map(|l| (l - top).exp()).sum();
        let log_z = top + z.ln();
        let rho = Operator::from_parts(
            layout.clone(),
            spec.apply_all(|l| c64::new((l - top).exp() / z, 0.0)),
        );
        let mut value = log_z;
        let mut grads = Vec::with_capacity(h.len());
        for (hj, target) in h.iter().zip(&self.targets) {
            value -= crate::info::trace_of_product(hj, target).re;
            let labels: Vec<&str> = target.layout().labels().collect();
            let moment = rho.reduce_to(&labels)?.aligned_to(target.layout())?.into_owned();
            grads.push(moment.sub(target)?.hermitian_part());
        }
        Ok(DualPoint { value, rho, grads })
    }
}

fn max_violation(grads: &[Operator]) -> Result<f64> {
    let mut worst = 0.0f64;
    for g in grads {
        worst = worst.max(g.trace_norm_hermitian()?);
    }
    Ok(worst)
}

/// Maximum-entropy state compatible with every marginal in `set`, found by
/// Barzilai-Borwein gradient descent with Armijo backtracking on the dual.
/// Intended as an independent oracle at small dimension.
pub fn maxent_bruteforce(set: &MarginalSet, options: MaxEntOptions) -> Result<MaxEntResult> {
    let d = set.layout().total_dim();
    if d > MAX_BRUTEFORCE_DIM {
        return Err(Error::InvalidArgument(format!(
            "global dimension {d} exceeds the brute-force limit {MAX_BRUTEFORCE_DIM}"
        )));
    }
    let targets: Vec<DensityOperator> = set.pairs().values().cloned().collect();
    let problem = Problem { set, targets };
    let mut h: Vec<Operator> = problem
        .targets
        .iter()
        .map(|t| Operator::zeros(t.layout().clone()))
        .collect();
    let mut point = problem.evaluate(&h)?;
    let mut step = 1.0;
    let mut prev: Option<(Vec<Operator>, Vec<Operator>)> = None;
    let mut violation = max_violation(&point.grads)?;
    let mut gnorm = inner(&point.grads, &point.grads).sqrt();
    let mut iterations = 0;
    while iterations < options.max_iter {
        if violation <= options.violation_tol || gnorm <= options.step_tol {
            break;
        }
        iterations += 1;
        if let Some((h_prev, g_prev)) = &prev {
            let s = diff(&h, h_prev);
            let y = diff(&point.grads, g_prev);
            let sy = inner(&s, &y);
            if sy > 0.0 {
                step = inner(&s, &s) / sy;
            }
        }
        let g2 = gnorm * gnorm;
        let mut alpha = step;
        let (next_h, next_point) = loop {
            let cand = axpy(&h, -alpha, &point.grads);
            let p = problem.evaluate(&cand)?;
            if p.value <= point.value - 1e-4 * alpha * g2 || alpha < 1e-12 {
                break (cand, p);
            }
            alpha *= 0.5;
        };
        prev = Some((std::mem::replace(&mut h, next_h), point.grads.clone()));
        point = next_point;
        violation = max_violation(&point.grads)?;
        gnorm = inner(&point.grads, &point.grads).sqrt();
    }
    if violation > options.violation_tol && gnorm > options.step_tol {
        return Err(Error::NonConvergence {
            iterations,
            gap: violation,
        });
    }
    Ok(MaxEntResult {
        rho: DensityOperator::trusted(point.rho),
        iterations,
        max_violation: violation,
        gradient_norm: gnorm,
    })
}
