use std::path::Path;

use qmtree::chowliu::{brute_force_best_tree, delta_s, quantum_chow_liu, relative_entropy_gap};
use qmtree::gadget::{build_gadget_pair, decide_3cqed as decide_pair, entropy_gap, Verdict};
use qmtree::info::{conditional_mutual_information, entropy_report, relative_entropy, von_neumann_entropy};
use qmtree::io::{
    load_json, save_operator, ChainJson, GraphJson, MarginalSetJson, OperatorJson,
};
use qmtree::markov::{
    local_qmc_conditions, maxent_bruteforce, mecmp_decide, petz_factorize_from, AssociatedGraph,
    MarginalSet, MaxEntOptions,
};
use qmtree::petz::{petz_map_apply, qmc_exists, reconstruction_entropy, rotated_petz_apply, ThreeChainMarginals};
use qmtree::{trace_distance, DensityOperator, Error, Operator, Result, Tolerances};
use serde_json::json;

use crate::report::{Outcome, Recorder};
use crate::{GlobalOpts, Groups, OptionalGroups};

/// Largest trace distance or entropy gap tolerated between the Petz
/// reconstruction and the dual-ascent oracle.
const ORACLE_TOL: f64 = 1e-3;

fn load_density(rec: &mut Recorder, name: &str, path: &Path) -> Result<DensityOperator> {
    rec.read_input(name, path)?;
    load_json::<OperatorJson>(path)?.to_density(Tolerances::default())
}

fn load_set(rec: &mut Recorder, path: &Path, g: &GlobalOpts) -> Result<MarginalSet> {
    rec.read_input("marginals", path)?;
    Ok(load_json::<MarginalSetJson>(path)?
        .to_marginal_set(Tolerances::default(), g.tol)?
        .with_cutoff(g.cutoff))
}

fn load_chain(rec: &mut Recorder, path: &Path, g: &GlobalOpts) -> Result<ThreeChainMarginals> {
    rec.read_input("chain", path)?;
    Ok(load_json::<ChainJson>(path)?
        .to_chain(Tolerances::default(), g.tol)?
        .with_cutoff(g.cutoff))
}

/// Writes `op` to `out` when given, otherwise inlines it in the results.
fn emit_operator(rec: &mut Recorder, key: &str, op: &Operator, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            save_operator(op, path)?;
            rec.result(key, path.display().to_string());
        }
        None => rec.result(key, OperatorJson::from(op)),
    }
    Ok(())
}

fn edges_of(g: &AssociatedGraph) -> Vec<[String; 2]> {
    g.edges().iter().map(|(a, b)| [a.clone(), b.clone()]).collect()
}

pub fn entropy(rho: &Path, g: &GlobalOpts, rec: &mut Recorder) -> Result<Outcome> {
    let rho = load_density(rec, "rho", rho)?;
    let report = entropy_report(&rho, g.cutoff)?;
    rec.result("entropy_bits", report.value_bits);
    rec.result("support_rank", report.spectrum.support_rank());
    rec.result("eigenvalues", &report.spectrum.eigenvalues);
    rec.result("layout", rho.layout().to_string());
    Ok(Outcome::Success)
}

pub fn cmi(rho: &Path, groups: &Groups, rec: &mut Recorder) -> Result<Outcome> {
    let rho = load_density(rec, "rho", rho)?;
    let value = conditional_mutual_information(&rho, &groups.a, &groups.c, &groups.b)?;
    rec.result("cmi_bits", value);
    rec.residual("ssa", value);
    Ok(Outcome::Success)
}

pub fn check_qmc(
    chain: Option<&Path>,
    rho: Option<&Path>,
    groups: &OptionalGroups,
    g: &GlobalOpts,
    rec: &mut Recorder,
) -> Result<Outcome> {
    let chain = match (chain, rho) {
        (Some(path), _) => load_chain(rec, path, g)?,
        (None, Some(path)) => {
            let rho = load_density(rec, "rho", path)?;
            ThreeChainMarginals::from_state(&rho, &groups.a, &groups.b, &groups.c, g.tol)?.with_cutoff(g.cutoff)
        }
        (None, None) => return Err(Error::InvalidArgument("either --chain or --rho is required".into())),
    };
    let v = qmc_exists(&chain, g.tol)?;
    rec.result("chain", chain.name());
    rec.result("exists", v.exists);
    rec.result("rank_deficient", v.rank_deficient);
    rec.result("reconstruction_entropy_bits", reconstruction_entropy(&v)?);
    rec.residual("normality", v.normality_residual);
    rec.residual("trace", v.trace_residual);
    rec.residual("marginal_ab", v.marginal_residual_ab);
    rec.residual("marginal_bc", v.marginal_residual_bc);
    rec.residual("b_marginal", v.b_marginal_residual);
    rec.residual("cmi_of_reconstruction", v.cmi_of_reconstruction);
    Ok(Outcome::from_verdict(v.exists))
}

pub fn petz(
    chain: &Path,
    x: Option<&Path>,
    t: f64,
    out: Option<&Path>,
    g: &GlobalOpts,
    rec: &mut Recorder,
) -> Result<Outcome> {
    let chain = load_chain(rec, chain, g)?;
    let x = match x {
        Some(path) => load_density(rec, "x", path)?,
        None => chain.rho_ab().clone(),
    };
    let y = if t == 0.0 {
        petz_map_apply(chain.rho_bc(), chain.rho_b(), &x)?
    } else {
        rotated_petz_apply(chain.rho_bc(), chain.rho_b(), &x, t)?
    };
    rec.result("t", t);
    rec.result("trace", y.trace().re);
    rec.result("layout", y.layout().to_string());
    emit_operator(rec, "output", &y, out)?;
    Ok(Outcome::Success)
}

pub fn maxent_tree(
    marginals: &Path,
    root: Option<&str>,
    oracle: bool,
    out: Option<&Path>,
    g: &GlobalOpts,
    rec: &mut Recorder,
) -> Result<Outcome> {
    let set = load_set(rec, marginals, g)?;
    let root = root.map_or_else(|| set.labels()[0].clone(), str::to_owned);
    let local = local_qmc_conditions(&set, g.tol)?;
    let r = petz_factorize_from(&set, &root, g.tol)?;
    rec.result("order", &r.order.order);
    rec.result("entropy_bits", r.entropy_bits);
    rec.result("closed_form_entropy_bits", r.closed_form_entropy_bits);
    rec.result("chains_checked", local.verdicts.len());
    for (k, v) in &r.residuals {
        rec.residual(k, *v);
    }
    emit_operator(rec, "reconstruction", &r.rho, out)?;

    let mut outcome = Outcome::Success;
    if oracle {
        let o = maxent_bruteforce(&set, MaxEntOptions::default())?;
        let distance = trace_distance(&r.rho, &o.rho)?;
        let gap = (von_neumann_entropy(&o.rho)? - r.entropy_bits).abs();
        let agree = distance <= ORACLE_TOL && gap <= ORACLE_TOL;
        rec.result(
            "oracle",
            json!({
                "agreement": agree,
                "iterations": o.iterations,
                "max_violation": o.max_violation,
                "entropy_bits": von_neumann_entropy(&o.rho)?,
            }),
        );
        rec.residual("oracle_trace_distance", distance);
        rec.residual("oracle_entropy_gap", gap);
        outcome = Outcome::from_verdict(agree);
    }
    Ok(outcome)
}

pub fn decide(marginals: &Path, k: f64, g: &GlobalOpts, rec: &mut Recorder) -> Result<Outcome> {
    let set = load_set(rec, marginals, g)?;
    let d = mecmp_decide(&set, k, g.tol)?;
    rec.result("accept", d.accept);
    rec.result("k", k);
    rec.result("entropy_bits", d.entropy_bits);
    rec.result("threshold", d.threshold);
    rec.result("certificate_order", &d.certificate.order.order);
    Ok(Outcome::from_verdict(d.accept))
}

pub fn chains(graph: &Path, rec: &mut Recorder) -> Result<Outcome> {
    rec.read_input("graph", graph)?;
    let graph = load_json::<GraphJson>(graph)?.to_graph()?;
    let chains: Vec<String> = graph.enumerate_3chains().iter().map(ToString::to_string).collect();
    rec.result("count", chains.len());
    rec.result("chains", chains);
    rec.result("is_tree", graph.is_tree());
    Ok(Outcome::Success)
}

pub fn chowliu(
    marginals: &Path,
    truth: Option<&Path>,
    oracle: bool,
    g: &GlobalOpts,
    rec: &mut Recorder,
) -> Result<Outcome> {
    let set = load_set(rec, marginals, g)?;
    let res = quantum_chow_liu(&set, g.tol)?;
    rec.result("tree_edges", edges_of(&res.tree));
    let weights: Vec<_> = res
        .weights
        .weights
        .iter()
        .map(|((a, b), w)| json!({ "edge": [a, b], "weight_bits": w }))
        .collect();
    rec.result("weights", weights);
    rec.result("entropy_bits", res.reconstruction.entropy_bits);
    rec.result("closed_form_entropy_bits", res.reconstruction.closed_form_entropy_bits);
    for (k, v) in &res.reconstruction.residuals {
        rec.residual(k, *v);
    }

    let Some(truth) = truth else {
        return Ok(Outcome::Success);
    };
    let rho = load_density(rec, "truth", truth)?;
    let id = relative_entropy_gap(&rho, &res.reconstruction)?;
    let tree_set = set.restricted_to(res.tree.edges())?;
    rec.result(
        "divergence_identity",
        json!({ "relative_entropy": id.lhs, "entropy_gap": id.rhs }),
    );
    rec.result("delta_s", delta_s(&tree_set, &rho)?);
    rec.residual("divergence_identity", id.residual);

    if !oracle {
        return Ok(Outcome::Success);
    }
    let bf = brute_force_best_tree(&rho, g.tol)?;
    let learned = relative_entropy(&rho, &res.reconstruction.rho)?;
    let gap = (learned - bf.divergence).abs();
    let agree = bf.tree == res.tree || gap <= g.tol;
    rec.result(
        "oracle",
        json!({
            "agreement": agree,
            "tree_edges": edges_of(&bf.tree),
            "divergence": bf.divergence,
            "trees_enumerated": bf.trees_enumerated,
            "trees_skipped": bf.skipped.len(),
        }),
    );
    rec.residual("oracle_divergence_gap", gap);
    Ok(Outcome::from_verdict(agree))
}

pub fn gadget(mu0: &Path, mu1: &Path, out_dir: Option<&Path>, rec: &mut Recorder) -> Result<Outcome> {
    let mu0 = load_density(rec, "mu0", mu0)?;
    let mu1 = load_density(rec, "mu1", mu1)?;
    let pair = build_gadget_pair(&mu0, &mu1)?;
    let r = qmtree::gadget::marginal_residuals(&pair.rho_prime, &pair.rho_doubleprime)?;
    let gap = entropy_gap(&pair)?;
    rec.result("entropy_gap", gap.direct);
    rec.result("entropy_gap_identity", gap.identity);
    rec.result("m0", pair.m0);
    rec.residual("trace_a", r.trace_a);
    rec.residual("trace_c", r.trace_c);
    rec.residual("entropy_gap", gap.residual);
    let (p1, p2) = match out_dir {
        Some(dir) => (Some(dir.join("rho_prime.json")), Some(dir.join("rho_doubleprime.json"))),
        None => (None, None),
    };
    emit_operator(rec, "rho_prime", &pair.rho_prime, p1.as_deref())?;
    emit_operator(rec, "rho_doubleprime", &pair.rho_doubleprime, p2.as_deref())?;
    Ok(Outcome::Success)
}

pub fn decide_3cqed(rho0: &Path, rho1: &Path, g: &GlobalOpts, rec: &mut Recorder) -> Result<Outcome> {
    let rho0 = load_density(rec, "rho0", rho0)?;
    let rho1 = load_density(rec, "rho1", rho1)?;
    let d = decide_pair(&rho0, &rho1, g.tol)?;
    let verdict = match d.verdict {
        Verdict::Accept => "accept",
        Verdict::Reject => "reject",
        Verdict::ViolatedPromise => "violated-promise",
    };
    rec.result("verdict", verdict);
    rec.result("entropy_difference", d.entropy_difference);
    rec.result("violations", &d.violations);
    rec.residual("trace_a", d.residuals.trace_a);
    rec.residual("trace_c", d.residuals.trace_c);
    Ok(match d.verdict {
        Verdict::Accept => Outcome::Success,
        Verdict::Reject => Outcome::Negative,
        Verdict::ViolatedPromise => Outcome::Violated,
    })
}
