//! Seeded random matrices and states. All generators draw from a
//! ChaCha8 stream so instances are reproducible across platforms.

use faer::{c64, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::layout::SystemLayout;
use crate::operator::{DensityOperator, Operator};
use crate::CMatrix;

pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal_c64<R: Rng + ?Sized>(rng: &mut R) -> c64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64::new(re, im)
}

/// Matrix of i.i.d. standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    // draw in a fixed row-major order independent of faer's storage
    let mut m = Mat::<c64>::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = normal_c64(rng);
        }
    }
    m
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(n, n, rng);
    Mat::from_fn(n, n, |i, j| (g[(i, j)] + g[(j, i)].conj()) * 0.5)
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `R`'s diagonal moved into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(n, n, rng);
    let qr = g.qr();
    let q = qr.compute_Q();
    let r = qr.R();
    let phases: Vec<c64> = (0..n)
        .map(|k| {
            let d = r[(k, k)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                c64::new(1.0, 0.0)
            }
        })
        .collect();
    Mat::from_fn(n, n, |i, j| q[(i, j)] * phases[j])
}

pub fn random_state_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<c64> {
    let v: Vec<c64> = (0..dim).map(|_| normal_c64(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// `G G^dagger / Tr` with `G` a `dim x rank` Ginibre matrix.
pub fn random_density_on<R: Rng + ?Sized>(
    layout: SystemLayout,
    rank: usize,
    rng: &mut R,
) -> Result<DensityOperator> {
    let dim = layout.total_dim();
    if rank == 0 || rank > dim {
        return Err(Error::InvalidArgument(format!(
            "rank {rank} outside 1..={dim}"
        )));
    }
    let g = ginibre(dim, rank, rng);
    let m = &g * g.adjoint();
    let tr: f64 = (0..dim).map(|i| m[(i, i)].re).sum();
    let m = Mat::from_fn(dim, dim, |i, j| m[(i, j)] / tr);
    Ok(DensityOperator::trusted(Operator::from_parts(layout, m)))
}

pub fn random_pure_on<R: Rng + ?Sized>(layout: SystemLayout, rng: &mut R) -> Result<DensityOperator> {
    let v = random_state_vector(layout.total_dim(), rng);
    DensityOperator::pure(layout, &v)
}

/// Random density on a single subsystem labeled `S`.
pub fn random_density(dim: usize, rank: usize, seed: u64) -> Result<DensityOperator> {
    if dim == 0 {
        return Err(Error::ZeroDimension { label: "S".into() });
    }
    let layout = SystemLayout::new([("S", dim)])?;
    random_density_on(layout, rank, &mut seeded_rng(seed))
}
