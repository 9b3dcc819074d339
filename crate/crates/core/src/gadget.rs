//! Entropy-difference gadget on three-chain compatible states, and the
//! promise decision between two tripartite states.

use crate::error::{Error, Result};
use crate::info::{
    cq_state, fannes_bound, mixture_entropy_lower_bound, von_neumann_entropy,
    von_neumann_entropy_nats,
};
use crate::layout::SystemLayout;
use crate::operator::{trace_distance, DensityOperator, Operator};
use crate::states::qubit_layout;
use crate::c64;

/// Promised entropy separation between the two states of a 3cQED instance.
pub const PROMISE_GAP: f64 = 0.5;

/// `½(|00><00| + |11><11|)`, the even mixture of `|φ+>` and `|φ->`.
pub fn build_zeta() -> DensityOperator {
    let layout = qubit_layout(&["Z1", "Z2"]).expect("distinct labels");
    DensityOperator::diagonal(layout, &[0.5, 0.0, 0.0, 0.5]).expect("valid distribution")
}

/// Flattens `mu` onto one subsystem `label` of the same total dimension.
fn as_single_system(mu: &DensityOperator, label: &str) -> Result<DensityOperator> {
    let layout = SystemLayout::new([(label, mu.dim())])?;
    Ok(DensityOperator::trusted(Operator::new(layout, mu.matrix().clone())?))
}

fn check_same_layout(mu0: &DensityOperator, mu1: &DensityOperator) -> Result<()> {
    if mu0.layout() != mu1.layout() {
        return Err(Error::LayoutMismatch {
            left: mu0.layout().to_string(),
            right: mu1.layout().to_string(),
        });
    }
    Ok(())
}

/// `xi0 = ½ mu0 + ½ mu1` and `xi1 = ½|0><0| ⊗ mu0 + ½|1><1| ⊗ mu1`, the
/// latter with a flag qubit `F` in front of the `mu` register `M`.
pub fn build_xi(mu0: &DensityOperator, mu1: &DensityOperator) -> Result<(DensityOperator, DensityOperator)> {
    check_same_layout(mu0, mu1)?;
    let xi0 = DensityOperator::mixture(&[0.5, 0.5], &[mu0.clone(), mu1.clone()])?;
    let m0 = as_single_system(mu0, "M")?;
    let m1 = as_single_system(mu1, "M")?;
    let xi1 = cq_state("F", &[0.5, 0.5], &[m0, m1])?;
    Ok((xi0, xi1))
}

#[derive(Clone, Debug)]
pub struct GadgetPair {
    /// `xi0^A ⊗ zeta^{AC} ⊗ xi0^C ⊗ |0><0|_B` on `A ⊗ B ⊗ C`.
    pub rho_prime: DensityOperator,
    /// `xi1^{AC} ⊗ xi1^{CA} ⊗ |0><0|_B` on `A ⊗ B ⊗ C`.
    pub rho_doubleprime: DensityOperator,
    pub mu0: DensityOperator,
    pub mu1: DensityOperator,
    /// Polarization parameter of the inputs, recorded only.
    pub m0: Option<u32>,
}

/// Fine labels: `A` is `(Aq, Am)` and `C` is `(Cq, Cm)`, a qubit and a
/// `mu`-sized register each.
const FINE_ORDER: [&str; 5] = ["Aq", "Am", "B", "Cq", "Cm"];

/// Merges the fine subsystems into `A (2d) ⊗ B (2) ⊗ C (2d)`.
fn coarsen(fine: DensityOperator, d: usize) -> Result<DensityOperator> {
    let fine = fine.permute(&FINE_ORDER)?;
    let layout = SystemLayout::new([("A", 2 * d), ("B", 2), ("C", 2 * d)])?;
    Ok(DensityOperator::trusted(Operator::new(
        layout,
        fine.into_operator().into_matrix(),
    )?))
}

fn relabel(rho: &DensityOperator, labels: &[&str]) -> Result<DensityOperator> {
    let layout = SystemLayout::new(labels.iter().zip(rho.layout().dims()).map(|(l, d)| (*l, d)))?;
    Ok(DensityOperator::trusted(Operator::new(layout, rho.matrix().clone())?))
}

pub fn build_gadget_pair(mu0: &DensityOperator, mu1: &DensityOperator) -> Result<GadgetPair> {
    let (xi0, xi1) = build_xi(mu0, mu1)?;
    let d = mu0.dim();
    let b0 = DensityOperator::basis_state(qubit_layout(&["B"])?, 0)?;

    let xi0_a = as_single_system(&xi0, "Am")?;
    let xi0_c = as_single_system(&xi0, "Cm")?;
    let zeta = relabel(&build_zeta(), &["Aq", "Cq"])?;
    let prime = xi0_a.tensor(&zeta)?.tensor(&xi0_c)?.tensor(&b0)?;

    // xi1^{AC}: flag in A, register in C; xi1^{CA}: flag in C, register in A
    let xi1_ac = relabel(&xi1, &["Aq", "Cm"])?;
    let xi1_ca = relabel(&xi1, &["Cq", "Am"])?;
    let doubleprime = xi1_ac.tensor(&xi1_ca)?.tensor(&b0)?;

    Ok(GadgetPair {
        rho_prime: coarsen(prime, d)?,
        rho_doubleprime: coarsen(doubleprime, d)?,
        mu0: mu0.clone(),
        mu1: mu1.clone(),
        m0: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarginalResiduals {
    /// Trace distance of the `BC` marginals (`A` traced out).
    pub trace_a: f64,
    /// Trace distance of the `AB` marginals (`C` traced out).
    pub trace_c: f64,
}

pub fn marginal_residuals(rho0: &DensityOperator, rho1: &DensityOperator) -> Result<MarginalResiduals> {
    let labels = tripartite_labels(rho0)?;
    let rho1 = rho1.aligned_to(rho0.layout())?;
    let (a, c) = (labels[0].as_str(), labels[2].as_str());
    Ok(MarginalResiduals {
        trace_a: trace_distance(&*rho0.partial_trace(&[a])?, &*rho1.partial_trace(&[a])?)?,
        trace_c: trace_distance(&*rho0.partial_trace(&[c])?, &*rho1.partial_trace(&[c])?)?,
    })
}

fn tripartite_labels(rho: &DensityOperator) -> Result<Vec<String>> {
    let labels = rho.layout().label_vec();
    if labels.len() != 3 {
        return Err(Error::InvalidArgument(format!(
            "expected a tripartite state, got {} subsystems",
            labels.len()
        )));
    }
    Ok(labels)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyGap {
    /// `S(rho'') - S(rho')` from the assembled states.
    pub direct: f64,
    /// `2(S(xi1) - S(xi0)) - 1`.
    pub identity: f64,
    pub residual: f64,
}

pub fn entropy_gap(pair: &GadgetPair) -> Result<EntropyGap> {
    let direct = von_neumann_entropy(&pair.rho_doubleprime)? - von_neumann_entropy(&pair.rho_prime)?;
    let (xi0, xi1) = build_xi(&pair.mu0, &pair.mu1)?;
    let identity = 2.0 * (von_neumann_entropy(&xi1)? - von_neumann_entropy(&xi0)?) - 1.0;
    Ok(EntropyGap {
        direct,
        identity,
        residual: (direct - identity).abs(),
    })
}

/// Slacks of the entropy inequalities around the gadget; a slack is
/// `bound - value` (or `value - bound`) so nonnegative means satisfied.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InequalitySlacks {
    /// `|S(xi1) - ½(S(mu0) + S(mu1)) - 1|`.
    pub joint_entropy_residual: f64,
    /// Fannes between `xi0` and `mu1`; `None` when `|xi0 - mu1|_1` is
    /// zero or above `1/e`.
    pub fannes: Option<f64>,
    /// `S(xi0)` minus its mixture lower bound.
    pub mixture: f64,
}

pub fn inequality_slacks(mu0: &DensityOperator, mu1: &DensityOperator) -> Result<InequalitySlacks> {
    let (xi0, xi1) = build_xi(mu0, mu1)?;
    let s0 = von_neumann_entropy(mu0)?;
    let s1 = von_neumann_entropy(mu1)?;
    let joint_entropy_residual = (von_neumann_entropy(&xi1)? - 0.5 * (s0 + s1) - 1.0).abs();

    let t = 2.0 * trace_distance(&xi0, mu1)?;
    let fannes = if t > 0.0 && t <= std::f64::consts::E.recip() {
        let gap = (von_neumann_entropy_nats(&xi0)? - von_neumann_entropy_nats(mu1)?).abs();
        Some(fannes_bound(t, mu0.dim() as f64)? - gap)
    } else {
        None
    };

    let mixture = von_neumann_entropy(&xi0)? - mixture_entropy_lower_bound(mu0, mu1)?;
    Ok(InequalitySlacks {
        joint_entropy_residual,
        fannes,
        mixture,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject,
    ViolatedPromise,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThreeCqedDecision {
    pub verdict: Verdict,
    /// `S(rho0) - S(rho1)`.
    pub entropy_difference: f64,
    pub residuals: MarginalResiduals,
    /// Human-readable description of each failed promise.
    pub violations: Vec<String>,
}

/// Accepts iff `S(rho0) - S(rho1) >= ½`, provided the `AB` and `BC`
/// marginals agree within `tol` and the entropies differ by at least ½.
pub fn decide_3cqed(rho0: &DensityOperator, rho1: &DensityOperator, tol: f64) -> Result<ThreeCqedDecision> {
    if !rho0.layout().same_systems(rho1.layout()) {
        return Err(Error::LayoutMismatch {
            left: rho0.layout().to_string(),
            right: rho1.layout().to_string(),
        });
    }
    let residuals = marginal_residuals(rho0, rho1)?;
    let entropy_difference = von_neumann_entropy(rho0)? - von_neumann_entropy(rho1)?;

    let mut violations = Vec::new();
    if residuals.trace_a > tol {
        violations.push(format!("Tr_A marginals differ by {:e}", residuals.trace_a));
    }
    if residuals.trace_c > tol {
        violations.push(format!("Tr_C marginals differ by {:e}", residuals.trace_c));
    }
    if entropy_difference.abs() < PROMISE_GAP - tol {
        violations.push(format!("entropy difference {entropy_difference} below {PROMISE_GAP}"));
    }
    let verdict = if !violations.is_empty() {
        Verdict::ViolatedPromise
    } else if entropy_difference >= PROMISE_GAP - tol {
        Verdict::Accept
    } else {
        Verdict::Reject
    };
    Ok(ThreeCqedDecision {
        verdict,
        entropy_difference,
        residuals,
        violations,
    })
}

/// Pure qubit-register state `cos(θ/2)|0> + sin(θ/2)|1>` padded to
/// dimension `d`; two of them at angle `θ` have trace distance `sin(θ/2)`.
pub fn pure_at_angle(label: &str, d: usize, theta: f64) -> Result<DensityOperator> {
    if d < 2 {
        return Err(Error::InvalidArgument("register dimension must be at least 2".into()));
    }
    let mut v = vec![c64::new(0.0, 0.0); d];
    v[0] = c64::new((theta / 2.0).cos(), 0.0);
    v[1] = c64::new((theta / 2.0).sin(), 0.0);
    DensityOperator::pure(SystemLayout::new([(label, d)])?, &v)
}
