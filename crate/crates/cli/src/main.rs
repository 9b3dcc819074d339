mod commands;
mod generate;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use report::{error_kind, ErrorReport, Outcome, Recorder, RunReport};

#[derive(Debug, Parser)]
#[command(name = "qmtree", version, about = "Quantum Markov trees from two-body marginals")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Decision tolerance for residual checks.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    /// Relative eigenvalue cutoff defining supports.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub cutoff: f64,
    /// Seed for randomized commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Von Neumann entropy and spectrum of a state.
    Entropy {
        #[arg(long)]
        rho: PathBuf,
    },
    /// Conditional mutual information I(A:C|B).
    Cmi {
        #[arg(long)]
        rho: PathBuf,
        #[command(flatten)]
        groups: Groups,
    },
    /// Decide whether a 3-chain of marginals admits a quantum Markov chain.
    CheckQmc {
        #[arg(long, conflicts_with = "rho")]
        chain: Option<PathBuf>,
        #[arg(long, requires_all = ["a", "b", "c"])]
        rho: Option<PathBuf>,
        #[command(flatten)]
        groups: OptionalGroups,
    },
    /// Apply the (rotated) Petz recovery map of a 3-chain.
    Petz {
        #[arg(long)]
        chain: PathBuf,
        /// Operator on the A and B labels; defaults to the AB marginal.
        #[arg(long)]
        x: Option<PathBuf>,
        /// Rotation parameter.
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximum-entropy reconstruction on a tree by Petz factorization.
    MaxentTree {
        #[arg(long)]
        marginals: PathBuf,
        #[arg(long)]
        root: Option<String>,
        /// Cross-check against the dual-ascent maximizer.
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether the maximum compatible entropy is at least k.
    Decide {
        #[arg(long)]
        marginals: PathBuf,
        #[arg(long)]
        k: f64,
    },
    /// List the 3-chains of a graph.
    Chains {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Learn a Markov tree from all pairwise marginals.
    Chowliu {
        #[arg(long)]
        marginals: PathBuf,
        /// Global state the marginals came from.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Compare against exhaustive search over spanning trees.
        #[arg(long, requires = "truth")]
        oracle: bool,
    },
    /// Build the entropy-gap gadget for two states.
    Gadget {
        #[arg(long)]
        mu0: PathBuf,
        #[arg(long)]
        mu1: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Decide a 3-chain compatible entropy difference instance.
    #[command(name = "decide-3cqed")]
    Decide3cqed {
        #[arg(long)]
        rho0: PathBuf,
        #[arg(long)]
        rho1: PathBuf,
    },
    /// Write a seeded random instance and its manifest.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct Groups {
    #[arg(long, value_delimiter = ',', required = true)]
    pub a: Vec<String>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub b: Vec<String>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub c: Vec<String>,
}

#[derive(Debug, Args)]
pub struct OptionalGroups {
    #[arg(long, value_delimiter = ',')]
    pub a: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub b: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub c: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Density,
    Qmc,
    Qmt,
    GadgetMuPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Shape {
    Path,
    Star,
    Random,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Subsystem dimensions for `density`.
    #[arg(long, value_delimiter = ',', default_value = "2,2")]
    pub dims: Vec<usize>,
    /// Rank for `density`; full rank when omitted.
    #[arg(long)]
    pub rank: Option<usize>,
    /// Blocks `dLxdR` of the B decomposition for `qmc`.
    #[arg(long, value_delimiter = ',', default_value = "1x2,2x1")]
    pub blocks: Vec<String>,
    #[arg(long, default_value_t = 2)]
    pub da: usize,
    #[arg(long, default_value_t = 2)]
    pub dc: usize,
    #[arg(long, value_enum, default_value = "path")]
    pub shape: Shape,
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub edge_dim: usize,
    #[arg(long)]
    pub pure_edges: bool,
    /// Dimension of each state for `gadget-mu-pair`.
    #[arg(long, default_value_t = 2)]
    pub mu_dim: usize,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Entropy { .. } => "entropy",
            Command::Cmi { .. } => "cmi",
            Command::CheckQmc { .. } => "check-qmc",
            Command::Petz { .. } => "petz",
            Command::MaxentTree { .. } => "maxent-tree",
            Command::Decide { .. } => "decide",
            Command::Chains { .. } => "chains",
            Command::Chowliu { .. } => "chowliu",
            Command::Gadget { .. } => "gadget",
            Command::Decide3cqed { .. } => "decide-3cqed",
            Command::Generate(_) => "generate",
        }
    }
}

fn dispatch(cmd: &Command, g: &GlobalOpts, rec: &mut Recorder) -> qmtree::Result<Outcome> {
    match cmd {
        Command::Entropy { rho } => commands::entropy(rho, g, rec),
        Command::Cmi { rho, groups } => commands::cmi(rho, groups, rec),
        Command::CheckQmc { chain, rho, groups } => {
            commands::check_qmc(chain.as_deref(), rho.as_deref(), groups, g, rec)
        }
        Command::Petz { chain, x, t, out } => commands::petz(chain, x.as_deref(), *t, out.as_deref(), g, rec),
        Command::MaxentTree {
            marginals,
            root,
            oracle,
            out,
        } => commands::maxent_tree(marginals, root.as_deref(), *oracle, out.as_deref(), g, rec),
        Command::Decide { marginals, k } => commands::decide(marginals, *k, g, rec),
        Command::Chains { graph } => commands::chains(graph, rec),
        Command::Chowliu {
            marginals,
            truth,
            oracle,
        } => commands::chowliu(marginals, truth.as_deref(), *oracle, g, rec),
        Command::Gadget { mu0, mu1, out_dir } => commands::gadget(mu0, mu1, out_dir.as_deref(), rec),
        Command::Decide3cqed { rho0, rho1 } => commands::decide_3cqed(rho0, rho1, g, rec),
        Command::Generate(args) => generate::run(args, g, rec),
    }
}

fn print_error(command: &str, kind: &'static str, message: String) {
    let report = ErrorReport {
        command: command.to_owned(),
        kind,
        message,
    };
    eprintln!("{}", serde_json::to_string(&report).expect("error report serializes"));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            print_error("", "usage", e.render().to_string());
            return ExitCode::from(2);
        }
    };

    let name = cli.command.name();
    let start = Instant::now();
    let mut rec = Recorder::default();
    let outcome = match dispatch(&cli.command, &cli.global, &mut rec) {
        Ok(o) => o,
        Err(e) => {
            print_error(name, error_kind(&e), e.to_string());
            return ExitCode::from(2);
        }
    };

    let seed = match &cli.command {
        Command::Generate(_) => Some(cli.global.seed.unwrap_or(0)),
        _ => cli.global.seed,
    };
    let report = RunReport {
        command: name.to_owned(),
        inputs: rec.inputs,
        tolerances: [("tol".to_owned(), cli.global.tol), ("cutoff".to_owned(), cli.global.cutoff)]
            .into_iter()
            .collect(),
        results: serde_json::Value::Object(rec.results),
        residuals: rec.residuals,
        seed,
        wall_time_ms: start.elapsed().as_millis() as u64,
    };
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    // a closed pipe downstream is not an error of the command itself
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    ExitCode::from(outcome.exit_code())
}
