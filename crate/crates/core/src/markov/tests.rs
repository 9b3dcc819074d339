use super::*;
use crate::error::Error;
use crate::info::{conditional_mutual_information, von_neumann_entropy};
use crate::layout::SystemLayout;
use crate::operator::{trace_distance, DensityOperator};
use crate::random::{random_density_on, seeded_rng};
use crate::states::{classical_ghz, ghz, product, qubit_layout};

const TOL: f64 = 1e-8;

fn random_product_state(labels: &[&str], seed: u64) -> DensityOperator {
    let mut rng = seeded_rng(seed);
    let parts: Vec<DensityOperator> = labels
        .iter()
        .map(|l| random_density_on(qubit_layout(&[*l]).unwrap(), 2, &mut rng).unwrap())
        .collect();
    product(&parts).unwrap()
}

fn path_set(rho: &DensityOperator, labels: &[&str]) -> MarginalSet {
    let pairs: Vec<(&str, &str)> = labels.windows(2).map(|w| (w[0], w[1])).collect();
    MarginalSet::from_state(rho, &pairs, 1e-9).unwrap()
}

fn ghz_path_set() -> MarginalSet {
    path_set(&ghz(&["A", "B", "C"]).unwrap(), &["A", "B", "C"])
}

#[test]
fn associated_graph_of_marginals() {
    let g = AssociatedGraph::from_marginals(&ghz_path_set());
    assert!(g.is_tree());
    assert!(g.has_edge("B", "A"));
    let rho = ghz(&["A", "B", "C"]).unwrap();
    let tri = MarginalSet::all_pairs_of(&rho, 1e-9).unwrap();
    assert!(!AssociatedGraph::from_marginals(&tri).is_tree());
}

#[test]
fn local_conditions_examples() {
    let prod = random_product_state(&["A", "B", "C", "D"], 1);
    let set = path_set(&prod, &["A", "B", "C", "D"]);
    assert!(local_qmc_conditions(&set, TOL).unwrap().all_pass());

    let inst = random_qmt(&path_graph(&["A", "B", "C", "D"]), &QmtOptions::default(), 2).unwrap();
    assert!(local_qmc_conditions(&inst.marginals, TOL).unwrap().all_pass());

    let mut rng = seeded_rng(3);
    let generic = random_density_on(qubit_layout(&["A", "B", "C"]).unwrap(), 8, &mut rng).unwrap();
    let local = local_qmc_conditions(&path_set(&generic, &["A", "B", "C"]), TOL).unwrap();
    assert!(!local.all_pass());
    assert!(local.first_failure().unwrap().1 > TOL);
}

#[test]
fn factorize_product_chain() {
    let prod = random_product_state(&["A", "B", "C"], 4);
    let rec = petz_factorize_from(&path_set(&prod, &["A", "B", "C"]), "A", TOL).unwrap();
    assert!(trace_distance(&rec.rho, &prod).unwrap() < 1e-10);
    assert!(rec.delta_factors.len() == 1);
}

#[test]
fn factorize_ghz_path() {
    let rec = petz_factorize_from(&ghz_path_set(), "A", TOL).unwrap();
    let expected = classical_ghz(&["A", "B", "C"]).unwrap();
    assert!(trace_distance(&rec.rho, &expected).unwrap() < 1e-12);
    assert!((rec.closed_form_entropy_bits - 1.0).abs() < 1e-12);
    assert!((rec.entropy_bits - 1.0).abs() < 1e-10);
}

#[test]
fn factorize_round_trips_qmt_path() {
    let labels = ["X1", "X2", "X3", "X4"];
    let inst = random_qmt(&path_graph(&labels), &QmtOptions::default(), 5).unwrap();
    let rec = petz_factorize_from(&inst.marginals, "X1", TOL).unwrap();
    assert!(trace_distance(&rec.rho, &inst.rho).unwrap() <= 1e-8);
    assert!(rec.residuals["normality"] <= 1e-8);
    assert!(rec.residuals["closed_form_vs_direct"] <= 1e-8);
}

#[test]
fn factorize_refuses_non_markov_inputs() {
    let mut rng = seeded_rng(6);
    let generic = random_density_on(qubit_layout(&["A", "B", "C"]).unwrap(), 8, &mut rng).unwrap();
    let err = petz_factorize_from(&path_set(&generic, &["A", "B", "C"]), "A", TOL).unwrap_err();
    assert!(matches!(err, Error::OutsideTractableClass { .. }));
    let tri = MarginalSet::all_pairs_of(&generic, 1e-9).unwrap();
    assert_eq!(petz_factorize_from(&tri, "A", TOL).unwrap_err(), Error::NotATree);
}

#[test]
fn closed_form_examples() {
    let prod = random_product_state(&["A", "B", "C"], 7);
    let set = path_set(&prod, &["A", "B", "C"]);
    let g = AssociatedGraph::from_marginals(&set);
    let sum: f64 = ["A", "B", "C"]
        .iter()
        .map(|l| von_neumann_entropy(&prod.reduce_to(&[*l]).unwrap()).unwrap())
        .sum();
    assert!((qmt_entropy_closed_form(&set, &g).unwrap() - sum).abs() < 1e-12);

    let set = ghz_path_set();
    let g = AssociatedGraph::from_marginals(&set);
    assert!((qmt_entropy_closed_form(&set, &g).unwrap() - 1.0).abs() < 1e-12);

    let labels = default_labels(5);
    let tree = random_tree(&labels, &mut seeded_rng(8)).unwrap();
    let inst = random_qmt(&tree, &QmtOptions::default(), 9).unwrap();
    let closed = qmt_entropy_closed_form(&inst.marginals, &tree).unwrap();
    assert!((closed - von_neumann_entropy(&inst.rho).unwrap()).abs() <= 1e-8);
}

#[test]
fn log_condition_examples() {
    let prod = random_product_state(&["A", "B", "C"], 10);
    let set = path_set(&prod, &["A", "B", "C"]);
    assert!(verify_log_condition(&prod, &set, TOL).unwrap().residual <= 1e-10);

    let inst = random_qmt(&star_graph("Y", &["A", "B", "C"]), &QmtOptions::default(), 11).unwrap();
    let rec = petz_factorize_from(&inst.marginals, "Y", TOL).unwrap();
    let report = verify_log_condition(&rec.rho, &inst.marginals, TOL).unwrap();
    assert!(report.residual <= 1e-8, "{report:?}");
    assert!(report.compatible);

    let g = ghz(&["A", "B", "C"]).unwrap();
    let report = verify_log_condition(&g, &ghz_path_set(), TOL).unwrap();
    assert!(report.residual > 0.1);
}

#[test]
fn local_markov_cmi_examples() {
    let inst = random_qmt(&path_graph(&default_labels(4)), &QmtOptions::default(), 12).unwrap();
    let cmi = local_markov_cmi(&inst.rho, &inst.tree).unwrap();
    assert!(cmi.max() <= 1e-9);
    assert_eq!(cmi.chains.len(), 2);
    assert_eq!(cmi.order.len(), 2);

    let g = ghz(&["A", "B", "C"]).unwrap();
    let cmi = local_markov_cmi(&g, &path_graph(&["A", "B", "C"])).unwrap();
    let center = cmi.chains.values().next().unwrap();
    assert!((center - 1.0).abs() < 1e-10);
}

#[test]
fn chain_cmi_implies_shorter_chain_cmi() {
    // on a 4-chain A-B-C-D, I(AB:D|C) = 0 forces I(B:D|C) = 0
    for seed in 0..5 {
        let inst = random_qmt(&path_graph(&["A", "B", "C", "D"]), &QmtOptions::default(), 100 + seed)
            .unwrap();
        let long = conditional_mutual_information(&inst.rho, &["A", "B"], &["D"], &["C"]).unwrap();
        let short = conditional_mutual_information(&inst.rho, &["B"], &["D"], &["C"]).unwrap();
        assert!(long.abs() <= 1e-9);
        assert!(short.abs() <= 1e-9);
    }
}

#[test]
fn mecmp_examples() {
    let mixed = DensityOperator::maximally_mixed(qubit_layout(&["A", "B", "C"]).unwrap());
    let set = path_set(&mixed, &["A", "B", "C"]);
    let d = mecmp_decide(&set, 3.0, TOL).unwrap();
    assert!(d.accept);
    assert!((d.entropy_bits - 3.0).abs() < 1e-12);
    assert!(!mecmp_decide(&set, 3.1, TOL).unwrap().accept);

    let d = mecmp_decide(&ghz_path_set(), 1.0, TOL).unwrap();
    assert!(d.accept);
    assert!((von_neumann_entropy(&d.certificate.rho).unwrap() - 1.0).abs() < 1e-10);

    let tri = MarginalSet::all_pairs_of(&mixed, 1e-9).unwrap();
    assert_eq!(mecmp_decide(&tri, 1.0, TOL).unwrap_err(), Error::NotATree);
}

#[test]
fn maxent_oracle_examples() {
    let opts = MaxEntOptions::default();
    let prod = random_product_state(&["A", "B", "C"], 13);
    let set = path_set(&prod, &["A", "B", "C"]);
    let res = maxent_bruteforce(&set, opts).unwrap();
    assert!(trace_distance(&res.rho, &prod).unwrap() < 1e-4);
    let g = AssociatedGraph::from_marginals(&set);
    let closed = qmt_entropy_closed_form(&set, &g).unwrap();
    assert!((von_neumann_entropy(&res.rho).unwrap() - closed).abs() < 1e-4);

    let res = maxent_bruteforce(&ghz_path_set(), opts).unwrap();
    assert!((von_neumann_entropy(&res.rho).unwrap() - 1.0).abs() < 1e-3);
    let expected = classical_ghz(&["A", "B", "C"]).unwrap();
    assert!(trace_distance(&res.rho, &expected).unwrap() < 1e-3);

    let mut rng = seeded_rng(14);
    let ab = random_density_on(qubit_layout(&["A", "B"]).unwrap(), 4, &mut rng).unwrap();
    let layout = SystemLayout::new([("A", 2), ("B", 2), ("C", 3)]).unwrap();
    let set = MarginalSet::new(layout.clone(), [ab.clone()], 1e-9).unwrap();
    let res = maxent_bruteforce(&set, opts).unwrap();
    let c = DensityOperator::maximally_mixed(layout.select(&["C"]).unwrap());
    assert!(trace_distance(&res.rho, &ab.tensor(&c).unwrap()).unwrap() < 1e-6);
}

#[test]
fn qmt_generator_examples() {
    let path = path_graph(&default_labels(4));
    let opts = QmtOptions {
        pure_edges: true,
        ..QmtOptions::default()
    };
    let inst = random_qmt(&path, &opts, 15).unwrap();
    assert!(von_neumann_entropy(&inst.rho).unwrap() < 1e-9);
    assert!(local_qmc_conditions(&inst.marginals, TOL).unwrap().all_pass());
    assert_eq!(inst.rho.layout().dims(), vec![2, 4, 4, 2]);

    let labels = default_labels(4);
    let star = star_graph(&labels[0], &labels[1..]);
    let inst = random_qmt(&star, &QmtOptions::default(), 16).unwrap();
    assert!(local_qmc_conditions(&inst.marginals, TOL).unwrap().all_pass());
    let rec = petz_factorize_from(&inst.marginals, &labels[0], TOL).unwrap();
    assert!(trace_distance(&rec.rho, &inst.rho).unwrap() <= 1e-8);

    let again = random_qmt(&star, &QmtOptions::default(), 16).unwrap();
    assert_eq!(
        inst.rho.matrix().col(3).iter().collect::<Vec<_>>(),
        again.rho.matrix().col(3).iter().collect::<Vec<_>>()
    );
    assert!(trace_distance(&inst.rho, &again.rho).unwrap() == 0.0);
}

#[test]
fn reconstruction_is_order_independent() {
    let labels = default_labels(5);
    let tree = random_tree(&labels, &mut seeded_rng(17)).unwrap();
    let inst = random_qmt(&tree, &QmtOptions::default(), 18).unwrap();
    let reference = petz_factorize_from(&inst.marginals, &labels[0], TOL).unwrap();
    for root in &labels[1..] {
        let other = petz_factorize_from(&inst.marginals, root, TOL).unwrap();
        assert!(trace_distance(&reference.rho, &other.rho).unwrap() <= 1e-8);
    }
}

#[test]
fn bad_ordering_rejected() {
    let set = ghz_path_set();
    let order = ConstructiveOrder {
        order: vec!["A".into(), "C".into(), "B".into()],
        parent: [("C".to_owned(), "A".to_owned()), ("B".to_owned(), "A".to_owned())]
            .into_iter()
            .collect(),
    };
    assert!(petz_factorize(&set, &order, TOL).is_err());
}
