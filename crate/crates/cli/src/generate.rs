use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use qmtree::io::{save_json, save_marginal_set, save_operator, ChainJson, GraphJson, OperatorJson};
use qmtree::markov::{
    default_labels, path_graph, random_qmt, random_tree, star_graph, EdgeDims, MarginalSet,
    QmtOptions,
};
use qmtree::petz::random_qmc;
use qmtree::random::{random_density_on, seeded_rng};
use qmtree::{Error, Result, SystemLayout};
use serde::Serialize;
use serde_json::{json, Value};

use crate::report::{sha256_hex, Outcome, Recorder};
use crate::{GenerateArgs, GlobalOpts, Kind, Shape};

#[derive(Debug, Serialize)]
struct Manifest {
    kind: &'static str,
    seed: u64,
    params: Value,
    files: BTreeMap<String, String>,
    expected_invariants: Vec<&'static str>,
}

fn parse_block(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidArgument(format!("block `{s}` is not of the form dLxdR"));
    let (l, r) = s.split_once('x').ok_or_else(bad)?;
    Ok((l.trim().parse().map_err(|_| bad())?, r.trim().parse().map_err(|_| bad())?))
}

fn digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(sha256_hex(&bytes))
}

pub fn run(args: &GenerateArgs, g: &GlobalOpts, rec: &mut Recorder) -> Result<Outcome> {
    let seed = g.seed.unwrap_or(0);
    let dir = &args.out_dir;
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();

    let (kind, params, expected) = match args.kind {
        Kind::Density => {
            let labels = default_labels(args.dims.len());
            let layout = SystemLayout::new(labels.into_iter().zip(args.dims.iter().copied()))?;
            let rank = args.rank.unwrap_or(layout.total_dim());
            let rho = random_density_on(layout, rank, &mut seeded_rng(seed))?;
            save_operator(&rho, &dir.join("rho.json"))?;
            written.push("rho.json");
            (
                "density",
                json!({ "dims": args.dims, "rank": rank }),
                vec!["hermitian", "psd", "unit_trace", "rank"],
            )
        }
        Kind::Qmc => {
            let blocks = args.blocks.iter().map(|b| parse_block(b)).collect::<Result<Vec<_>>>()?;
            let rho = random_qmc(args.da, &blocks, args.dc, seed)?;
            save_operator(&rho, &dir.join("rho.json"))?;
            let chain = ChainJson {
                rho_ab: OperatorJson::from(&*rho.reduce_to(&["A", "B"])?),
                rho_bc: OperatorJson::from(&*rho.reduce_to(&["B", "C"])?),
            };
            save_json(&chain, &dir.join("chain.json"))?;
            written.extend(["rho.json", "chain.json"]);
            (
                "qmc",
                json!({ "da": args.da, "dc": args.dc, "blocks": blocks }),
                vec!["cmi_zero", "petz_recovery_exact", "theta_normal"],
            )
        }
        Kind::Qmt => {
            let labels = default_labels(args.n);
            let tree = match args.shape {
                Shape::Path => path_graph(&labels),
                Shape::Star => star_graph(&labels[0], &labels[1..]),
                Shape::Random => random_tree(&labels, &mut seeded_rng(seed))?,
            };
            let options = QmtOptions {
                edge_dims: EdgeDims::Uniform(args.edge_dim),
                pure_edges: args.pure_edges,
                ..QmtOptions::default()
            };
            let inst = random_qmt(&tree, &options, seed)?;
            save_operator(&inst.rho, &dir.join("rho.json"))?;
            save_marginal_set(&inst.marginals, &dir.join("marginals.json"))?;
            save_marginal_set(&MarginalSet::all_pairs_of(&inst.rho, g.tol)?, &dir.join("pairwise.json"))?;
            save_json(&GraphJson::from(&inst.tree), &dir.join("graph.json"))?;
            written.extend(["rho.json", "marginals.json", "pairwise.json", "graph.json"]);
            let shape = match args.shape {
                Shape::Path => "path",
                Shape::Star => "star",
                Shape::Random => "random",
            };
            (
                "qmt",
                json!({
                    "n": args.n,
                    "shape": shape,
                    "edge_dim": args.edge_dim,
                    "pure_edges": args.pure_edges,
                }),
                vec!["local_qmc_conditions", "log_condition", "closed_form_entropy", "order_independence"],
            )
        }
        Kind::GadgetMuPair => {
            let layout = SystemLayout::new([("S", args.mu_dim)])?;
            let mut rng = seeded_rng(seed);
            let mu0 = random_density_on(layout.clone(), args.mu_dim, &mut rng)?;
            let mu1 = random_density_on(layout, args.mu_dim, &mut rng)?;
            save_operator(&mu0, &dir.join("mu0.json"))?;
            save_operator(&mu1, &dir.join("mu1.json"))?;
            written.extend(["mu0.json", "mu1.json"]);
            (
                "gadget-mu-pair",
                json!({ "mu_dim": args.mu_dim }),
                vec!["gadget_marginal_compatibility", "joint_entropy_identity", "mixture_lower_bound"],
            )
        }
    };

    let mut files = BTreeMap::new();
    for name in written {
        files.insert(name.to_owned(), digest(&dir.join(name))?);
    }
    let manifest = Manifest {
        kind,
        seed,
        params,
        files,
        expected_invariants: expected,
    };
    save_json(&manifest, &dir.join("manifest.json"))?;
    rec.result("manifest", &manifest);
    Ok(Outcome::Success)
}
