//! Entropic functionals. Entropies are in bits except [`fannes_bound`] and
//! [`von_neumann_entropy_nats`].

use std::collections::BTreeSet;

use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::layout::SystemLayout;
use crate::operator::{trace_distance, DensityOperator, Operator};
use crate::spectral::{self, MatrixFunction, Spectrum};

/// Support-leak threshold above which relative entropy is `+inf`.
pub const SUPPORT_LEAK_TOL: f64 = 1e-9;

/// Entropy together with the spectrum it was computed from.
#[derive(Clone, Debug)]
pub struct EntropyReport {
    pub value_bits: f64,
    pub spectrum: Spectrum,
    pub cutoff: f64,
}

fn entropy_of_eigenvalues(eigs: &[f64], log: impl Fn(f64) -> f64) -> f64 {
    let s: f64 = eigs
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * log(l))
        .sum();
    s.max(0.0)
}

pub fn shannon_entropy(p: &[f64]) -> f64 {
    entropy_of_eigenvalues(p, f64::log2)
}

pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    Ok(entropy_of_eigenvalues(&rho.eigenvalues()?, f64::log2))
}

pub fn von_neumann_entropy_nats(rho: &DensityOperator) -> Result<f64> {
    Ok(entropy_of_eigenvalues(&rho.eigenvalues()?, f64::ln))
}

pub fn entropy_report(rho: &DensityOperator, rel_cutoff: f64) -> Result<EntropyReport> {
    let spectrum = rho.spectrum(rel_cutoff)?;
    let support: Vec<f64> = spectrum
        .eigenvalues
        .iter()
        .copied()
        .filter(|&l| l > spectrum.support_cutoff)
        .collect();
    Ok(EntropyReport {
        value_bits: entropy_of_eigenvalues(&support, f64::log2),
        cutoff: spectrum.support_cutoff,
        spectrum,
    })
}

/// `Tr(A B)` without forming the product.
pub(crate) fn trace_of_product(a: &Operator, b: &Operator) -> c64 {
    let (a, b) = (a.matrix(), b.matrix());
    let n = a.nrows();
    let mut acc = c64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// `Tr rho (log2 rho - log2 sigma)`, or `+inf` when the support of `rho`
/// leaks out of the support of `sigma` by more than [`SUPPORT_LEAK_TOL`].
pub fn relative_entropy(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    let sigma = sigma.aligned_to(rho.layout())?;
    let spec = sigma.spectrum(spectral::DEFAULT_CUTOFF)?;
    let proj = Operator::from_parts(rho.layout().clone(), spec.support_projector());
    let leak = 1.0 - trace_of_product(rho, &proj).re;
    if leak > SUPPORT_LEAK_TOL {
        return Ok(f64::INFINITY);
    }
    let log_sigma = Operator::from_parts(
        rho.layout().clone(),
        spectral::op_func_from_spectrum(&spec, MatrixFunction::Log2)?,
    );
    let cross = trace_of_product(rho, &log_sigma).re;
    let value = -von_neumann_entropy(rho)? - cross;
    Ok(value.max(0.0))
}

fn label_set<'a, S: AsRef<str>>(labels: &'a [S], layout: &SystemLayout) -> Result<BTreeSet<&'a str>> {
    let mut set = BTreeSet::new();
    for l in labels {
        let l = l.as_ref();
        if !layout.contains(l) {
            return Err(Error::UnknownLabel(l.to_owned()));
        }
        if !set.insert(l) {
            return Err(Error::LabelCollision(l.to_owned()));
        }
    }
    Ok(set)
}

fn disjoint_groups<S: AsRef<str>>(layout: &SystemLayout, groups: &[&[S]]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for g in groups {
        if g.is_empty() {
            return Err(Error::InvalidArgument("empty label group".into()));
        }
        for l in label_set(g, layout)? {
            if !seen.insert(l) {
                return Err(Error::InvalidArgument(format!(
                    "label `{l}` appears in more than one group"
                )));
            }
        }
    }
    Ok(())
}

fn entropy_of<S: AsRef<str>>(rho: &DensityOperator, keep: &[S]) -> Result<f64> {
    if keep.len() == rho.layout().len() {
        return von_neumann_entropy(rho);
    }
    von_neumann_entropy(&rho.reduce_to(keep)?)
}

fn union<S: AsRef<str>>(groups: &[&[S]]) -> Vec<String> {
    groups
        .iter()
        .flat_map(|g| g.iter().map(|l| l.as_ref().to_owned()))
        .collect()
}

/// `S(A) + S(B) - S(AB)`; labels outside `a ∪ b` are traced out first.
pub fn mutual_information<S: AsRef<str>>(rho: &DensityOperator, a: &[S], b: &[S]) -> Result<f64> {
    disjoint_groups(rho.layout(), &[a, b])?;
    let ab = union(&[a, b]);
    Ok(entropy_of(rho, a)? + entropy_of(rho, b)? - entropy_of(rho, &ab)?)
}

/// `I(A:C|B) = S(AB) + S(BC) - S(B) - S(ABC)`, unclamped. Labels outside the
/// three groups are traced out first. An empty `b` gives `I(A:C)`.
pub fn conditional_mutual_information<S: AsRef<str>>(
    rho: &DensityOperator,
    a: &[S],
    c: &[S],
    b: &[S],
) -> Result<f64> {
    if b.is_empty() {
        return mutual_information(rho, a, c);
    }
    disjoint_groups(rho.layout(), &[a, c, b])?;
    let s_ab = entropy_of(rho, &union(&[a, b]))?;
    let s_bc = entropy_of(rho, &union(&[b, c]))?;
    let s_b = entropy_of(rho, b)?;
    let s_abc = entropy_of(rho, &union(&[a, b, c]))?;
    Ok(s_ab + s_bc - s_b - s_abc)
}

/// Clamps values in `(-tol, 0)` to zero for reporting.
pub fn clamp_small_negative(value: f64, tol: f64) -> f64 {
    if value < 0.0 && value > -tol {
        0.0
    } else {
        value
    }
}

pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("probability {p} outside [0, 1]")));
    }
    Ok(shannon_entropy(&[p, 1.0 - p]))
}

/// `t (ln d - ln t)` in nats, the Fannes bound on `|S(rho) - S(sigma)|`.
///
/// `t` is the Schatten-1 norm `|rho - sigma|_1`; `dim` is real so formal
/// values such as `d = e` are accepted.
pub fn fannes_bound(t: f64, dim: f64) -> Result<f64> {
    if !(t > 0.0 && t <= std::f64::consts::E.recip()) {
        return Err(Error::InvalidArgument(format!("t = {t} outside (0, 1/e]")));
    }
    if dim.is_nan() || dim < 1.0 {
        return Err(Error::InvalidArgument(format!("dimension {dim} < 1")));
    }
    Ok(t * (dim.ln() - t.ln()))
}

/// Block state `sum_i p_i |i><i| ⊗ rho_i` with the classical register
/// `flag` placed first.
pub fn cq_state(flag: &str, p: &[f64], rhos: &[DensityOperator]) -> Result<DensityOperator> {
    check_probabilities(p, rhos.len())?;
    let inner = rhos[0].layout().clone();
    for r in rhos {
        if r.layout() != &inner {
            return Err(Error::LayoutMismatch {
                left: inner.to_string(),
                right: r.layout().to_string(),
            });
        }
    }
    let layout = SystemLayout::new([(flag.to_owned(), p.len())])?.concat(&inner)?;
    let d = inner.total_dim();
    let mut m = Mat::<c64>::zeros(layout.total_dim(), layout.total_dim());
    for (k, (pk, r)) in p.iter().zip(rhos).enumerate() {
        for j in 0..d {
            for i in 0..d {
                m[(k * d + i, k * d + j)] = r.matrix()[(i, j)] * *pk;
            }
        }
    }
    Ok(DensityOperator::trusted(Operator::from_parts(layout, m)))
}

fn check_probabilities(p: &[f64], n: usize) -> Result<()> {
    if p.is_empty() || p.len() != n {
        return Err(Error::InvalidArgument(format!(
            "{} probabilities for {n} states",
            p.len()
        )));
    }
    let total: f64 = p.iter().sum();
    if p.iter().any(|&x| x.is_nan() || x < 0.0) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "probabilities must be nonnegative and sum to 1 (sum {total})"
        )));
    }
    Ok(())
}

/// `H(p) + sum_i p_i S(rho_i)`.
pub fn cq_mixture_entropy(p: &[f64], rhos: &[DensityOperator]) -> Result<f64> {
    check_probabilities(p, rhos.len())?;
    let mut s = shannon_entropy(p);
    for (pk, r) in p.iter().zip(rhos) {
        if r.layout() != rhos[0].layout() {
            return Err(Error::LayoutMismatch {
                left: rhos[0].layout().to_string(),
                right: r.layout().to_string(),
            });
        }
        s += pk * von_neumann_entropy(r)?;
    }
    Ok(s)
}

/// `½[S(rho0) + S(rho1)] + 1 - H(½ + T/2)` with `T` the trace distance; a
/// lower bound on `S(½ rho0 + ½ rho1)`.
pub fn mixture_entropy_lower_bound(rho0: &DensityOperator, rho1: &DensityOperator) -> Result<f64> {
    let td = trace_distance(rho0, rho1)?.clamp(0.0, 1.0);
    let s0 = von_neumann_entropy(rho0)?;
    let s1 = von_neumann_entropy(rho1)?;
    Ok(0.5 * (s0 + s1) + 1.0 - binary_entropy(0.5 + 0.5 * td)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::ZERO;
    use crate::random::{random_density_on, seeded_rng};

    fn qubits(labels: &[&str]) -> SystemLayout {
        SystemLayout::new(labels.iter().map(|l| (*l, 2))).unwrap()
    }

    fn ghz() -> DensityOperator {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = vec![ZERO; 8];
        v[0] = c64::new(s, 0.0);
        v[7] = c64::new(s, 0.0);
        DensityOperator::pure(qubits(&["A", "B", "C"]), &v).unwrap()
    }

    fn bell() -> DensityOperator {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = [c64::new(s, 0.0), ZERO, ZERO, c64::new(s, 0.0)];
        DensityOperator::pure(qubits(&["A", "B"]), &v).unwrap()
    }

    #[test]
    fn entropy_examples() {
        for d in [2, 3, 5] {
            let rho = DensityOperator::maximally_mixed(SystemLayout::new([("A", d)]).unwrap());
            assert!((von_neumann_entropy(&rho).unwrap() - (d as f64).log2()).abs() < 1e-12);
        }
        let rho = DensityOperator::diagonal(qubits(&["A"]), &[0.7, 0.3]).unwrap();
        let h = -(0.7f64 * 0.7f64.log2() + 0.3 * 0.3f64.log2());
        assert!((von_neumann_entropy(&rho).unwrap() - h).abs() < 1e-12);
        assert!((h - 0.881_290_899_230_693).abs() < 1e-12);
        assert!(von_neumann_entropy(&bell()).unwrap() < 1e-12);
    }

    #[test]
    fn relative_entropy_examples() {
        let l = qubits(&["A"]);
        let mix = DensityOperator::maximally_mixed(l.clone());
        let sigma = DensityOperator::diagonal(l.clone(), &[0.75, 0.25]).unwrap();
        let expected = -1.0 - 0.5 * (0.75f64.log2() + 0.25f64.log2());
        assert!((relative_entropy(&mix, &sigma).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.207_518_749_639_422).abs() < 1e-12);
        assert!(relative_entropy(&sigma, &sigma).unwrap().abs() < 1e-12);
        let pure = DensityOperator::basis_state(l, 0).unwrap();
        assert_eq!(relative_entropy(&mix, &pure).unwrap(), f64::INFINITY);
        assert!(relative_entropy(&pure, &mix).unwrap().is_finite());
    }

    #[test]
    fn mutual_information_examples() {
        let mut rng = seeded_rng(1);
        let a = random_density_on(qubits(&["A"]), 2, &mut rng).unwrap();
        let b = random_density_on(qubits(&["B"]), 2, &mut rng).unwrap();
        let prod = a.tensor(&b).unwrap();
        assert!(mutual_information(&prod, &["A"], &["B"]).unwrap().abs() < 1e-12);
        assert!((mutual_information(&bell(), &["A"], &["B"]).unwrap() - 2.0).abs() < 1e-12);
        let cl = DensityOperator::diagonal(qubits(&["A", "B"]), &[0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!((mutual_information(&cl, &["A"], &["B"]).unwrap() - 1.0).abs() < 1e-12);
        assert!(mutual_information(&cl, &["A"], &["A"]).is_err());
    }

    #[test]
    fn cmi_examples() {
        let g = ghz();
        let v = conditional_mutual_information(&g, &["A"], &["C"], &["B"]).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let mut rng = seeded_rng(2);
        let parts: Vec<DensityOperator> = ["A", "B", "C"]
            .iter()
            .map(|l| random_density_on(qubits(&[l]), 2, &mut rng).unwrap())
            .collect();
        let prod = parts[0].tensor(&parts[1]).unwrap().tensor(&parts[2]).unwrap();
        let v = conditional_mutual_information(&prod, &["A"], &["C"], &["B"]).unwrap();
        assert!(v.abs() < 1e-12);
        assert!(conditional_mutual_information(&prod, &["A"], &["A"], &["B"]).is_err());
    }

    #[test]
    fn binary_entropy_examples() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.5).unwrap() - 1.0).abs() < 1e-15);
        let p: f64 = 0.11;
        let direct = -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
        assert!((binary_entropy(p).unwrap() - direct).abs() < 1e-15);
        assert!((direct - 0.499_915_958_164_528).abs() < 1e-12);
        assert!(binary_entropy(1.5).is_err());
    }

    #[test]
    fn fannes_examples() {
        let e = std::f64::consts::E;
        assert!((fannes_bound(1.0 / e, e).unwrap() - 2.0 / e).abs() < 1e-15);
        assert!(fannes_bound(1e-300, 4.0).unwrap() < 1e-296);
        assert!(fannes_bound(0.0, 4.0).is_err());
        assert!(fannes_bound(0.5, 4.0).is_err());
    }

    #[test]
    fn fannes_holds_on_nearby_pairs() {
        let mut rng = seeded_rng(3);
        let l = SystemLayout::new([("A", 4)]).unwrap();
        for _ in 0..50 {
            let rho = random_density_on(l.clone(), 4, &mut rng).unwrap();
            let tau = random_density_on(l.clone(), 4, &mut rng).unwrap();
            let sigma = DensityOperator::mixture(&[0.95, 0.05], &[rho.clone(), tau]).unwrap();
            let t = 2.0 * trace_distance(&rho, &sigma).unwrap();
            let gap = (von_neumann_entropy_nats(&rho).unwrap()
                - von_neumann_entropy_nats(&sigma).unwrap())
            .abs();
            assert!(gap <= fannes_bound(t, 4.0).unwrap() + 1e-12);
        }
    }

    #[test]
    fn cq_mixture_examples() {
        let mut rng = seeded_rng(4);
        let r = random_density_on(qubits(&["A"]), 2, &mut rng).unwrap();
        let s = von_neumann_entropy(&r).unwrap();
        assert!((cq_mixture_entropy(&[1.0], std::slice::from_ref(&r)).unwrap() - s).abs() < 1e-15);
        let mix = DensityOperator::maximally_mixed(qubits(&["A"]));
        let v = cq_mixture_entropy(&[0.5, 0.5], &[mix.clone(), mix]).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let z = DensityOperator::basis_state(qubits(&["A"]), 0).unwrap();
        let o = DensityOperator::basis_state(qubits(&["A"]), 1).unwrap();
        let v = cq_mixture_entropy(&[0.5, 0.5], &[z, o]).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        assert!(cq_mixture_entropy(&[0.3, 0.3], &[r.clone(), r]).is_err());
    }

    #[test]
    fn cq_mixture_matches_block_state() {
        let mut rng = seeded_rng(5);
        let l = SystemLayout::new([("A", 3)]).unwrap();
        let rhos: Vec<_> = (1..=3)
            .map(|k| random_density_on(l.clone(), k, &mut rng).unwrap())
            .collect();
        let p = [0.2, 0.5, 0.3];
        let block = cq_state("F", &p, &rhos).unwrap();
        let direct = von_neumann_entropy(&block).unwrap();
        assert!((direct - cq_mixture_entropy(&p, &rhos).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn mixture_bound_examples() {
        let mut rng = seeded_rng(6);
        let r = random_density_on(qubits(&["A"]), 2, &mut rng).unwrap();
        let b = mixture_entropy_lower_bound(&r, &r).unwrap();
        assert!((b - von_neumann_entropy(&r).unwrap()).abs() < 1e-12);
        let z = DensityOperator::basis_state(qubits(&["A"]), 0).unwrap();
        let o = DensityOperator::basis_state(qubits(&["A"]), 1).unwrap();
        assert!((mixture_entropy_lower_bound(&z, &o).unwrap() - 1.0).abs() < 1e-12);
        let m = DensityOperator::mixture(&[0.5, 0.5], &[z, o]).unwrap();
        assert!((von_neumann_entropy(&m).unwrap() - 1.0).abs() < 1e-12);
    }
}
