mod commands;
mod error;
mod verify;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "cosetforge", version, about = "Algebra norms, coset decompositions and decision trees on finite groups")]
struct Cli {
    /// Master seed for every stochastic step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Wrap the result in a run report with inputs, version and timing.
    #[arg(long, global = true)]
    report: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build, validate or inspect groups.
    #[command(subcommand)]
    Group(GroupCmd),
    /// Norms, rounding and convolution of functions.
    #[command(subcommand)]
    Fn(FnCmd),
    /// Write an integer function as a sum of coset indicators.
    Decompose(DecomposeArgs),
    /// Compile, evaluate, prune or draw coset decision trees.
    #[command(subcommand)]
    Tree(TreeCmd),
    /// Test (k, l)-arithmetic connectivity of a set.
    Connect(ConnectArgs),
    /// Multiplicative energy of two sets.
    Energy(PairArgs),
    /// Extract a subset with small doubling from a high-energy pair.
    Bsg(BsgArgs),
    /// Monte Carlo run of the sampling lemma on a translate family.
    CsTrial(CsArgs),
    /// Run a batch of property checks: all, split, banach, coset-norm, cover, cs, ct.
    Verify { suite: String },
    /// Algebra norms of intervals [N] in Z/p with a log-slope fit.
    ApScan(ApArgs),
}

#[derive(Subcommand, Debug)]
enum GroupCmd {
    /// Emit the table of a built-in group (Z12, Z2^3, D6, S4, Z2xZ4, ...).
    Make { name: String },
    Validate {
        #[arg(long)]
        group: String,
    },
    Subgroups {
        #[arg(long)]
        group: String,
    },
}

#[derive(Subcommand, Debug)]
enum FnCmd {
    Norm {
        #[arg(long = "fn")]
        function: PathBuf,
    },
    Round {
        #[arg(long = "fn")]
        function: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
    },
    /// Mean convolution `f * g`.
    Conv {
        #[arg(long = "fn")]
        function: PathBuf,
        #[arg(long = "with")]
        other: PathBuf,
    },
}

#[derive(Args, Debug)]
struct DecomposeArgs {
    #[arg(long = "fn")]
    function: PathBuf,
    #[arg(long, default_value = "largest-subgroup")]
    strategy: String,
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    /// Also search for a minimum-cost decomposition.
    #[arg(long)]
    exact_min: bool,
    #[arg(long, default_value_t = 64)]
    cost_budget: u64,
    #[arg(long, default_value_t = 2_000_000)]
    node_budget: u64,
}

#[derive(Subcommand, Debug)]
enum TreeCmd {
    Compile {
        #[arg(long)]
        decomposition: PathBuf,
        /// Prune the compiled tree before writing it.
        #[arg(long)]
        prune: bool,
    },
    Eval {
        #[arg(long)]
        tree: PathBuf,
        /// Evaluate at one element instead of the whole group.
        #[arg(long)]
        x: Option<usize>,
    },
    Prune {
        #[arg(long)]
        tree: PathBuf,
    },
    Dot {
        #[arg(long)]
        tree: PathBuf,
    },
}

#[derive(Args, Debug)]
struct SetArgs {
    #[arg(long)]
    group: Option<String>,
    /// Comma-separated elements.
    #[arg(long)]
    set: Option<String>,
    /// Use the support of the rounded function instead of --set.
    #[arg(long = "fn")]
    function: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
}

#[derive(Args, Debug)]
struct ConnectArgs {
    #[command(flatten)]
    set: SetArgs,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    l: usize,
    /// exhaustive or samples:N
    #[arg(long, default_value = "exhaustive")]
    mode: String,
    /// Include every witness in the output.
    #[arg(long)]
    witnesses: bool,
}

#[derive(Args, Debug)]
struct PairArgs {
    #[arg(long)]
    group: String,
    #[arg(long)]
    a: String,
    /// Defaults to A.
    #[arg(long)]
    b: Option<String>,
}

#[derive(Args, Debug)]
struct BsgArgs {
    #[command(flatten)]
    pair: PairArgs,
    /// K in the requirement E(A, B) >= |A|^3 / K.
    #[arg(long)]
    threshold: f64,
}

#[derive(Args, Debug)]
struct CsArgs {
    #[arg(long, default_value = "Z64")]
    group: String,
    /// Support of the uniform measure nu; defaults to the whole group.
    #[arg(long)]
    set: Option<String>,
    /// Function whose translates form the family; random when omitted.
    #[arg(long = "fn")]
    function: Option<PathBuf>,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    /// Sample size; defaults to ceil(8p / eps^2).
    #[arg(long)]
    r: Option<usize>,
}

#[derive(Args, Debug)]
struct ApArgs {
    #[arg(long, default_value_t = 2053)]
    p: u64,
    /// Comma-separated interval lengths.
    #[arg(long, default_value = "32,64,128,256,512")]
    n: String,
}

/// A command's result: JSON, or preformatted text such as DOT or CSV.
pub enum Output {
    Json(Value),
    Text(String),
}

fn run(cli: &Cli) -> Result<Output, CliError> {
    use commands::*;
    match &cli.command {
        Command::Group(GroupCmd::Make { name }) => group_make(name),
        Command::Group(GroupCmd::Validate { group }) => group_validate(group),
        Command::Group(GroupCmd::Subgroups { group }) => group_subgroups(group),
        Command::Fn(FnCmd::Norm { function }) => fn_norm(function),
        Command::Fn(FnCmd::Round { function, epsilon }) => fn_round(function, *epsilon),
        Command::Fn(FnCmd::Conv { function, other }) => fn_conv(function, other),
        Command::Decompose(a) => decompose(a),
        Command::Tree(TreeCmd::Compile { decomposition, prune }) => tree_compile(decomposition, *prune),
        Command::Tree(TreeCmd::Eval { tree, x }) => tree_eval(tree, *x),
        Command::Tree(TreeCmd::Prune { tree }) => tree_prune(tree),
        Command::Tree(TreeCmd::Dot { tree }) => tree_dot(tree),
        Command::Connect(a) => connect(a, cli.seed),
        Command::Energy(a) => energy(a),
        Command::Bsg(a) => bsg(a),
        Command::CsTrial(a) => cs_trial(a, cli.seed),
        Command::Verify { suite } => verify::run_suite(suite, cli.seed),
        Command::ApScan(a) => ap_scan(a),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Group(_) => "group",
        Command::Fn(_) => "fn",
        Command::Decompose(_) => "decompose",
        Command::Tree(_) => "tree",
        Command::Connect(_) => "connect",
        Command::Energy(_) => "energy",
        Command::Bsg(_) => "bsg",
        Command::CsTrial(_) => "cs-trial",
        Command::Verify { .. } => "verify",
        Command::ApScan(_) => "ap-scan",
    }
}

fn emit(cli: &Cli, output: Output, started: Instant) -> Result<(), CliError> {
    let text = if cli.report {
        let payload = match output {
            Output::Json(v) => v,
            Output::Text(t) => Value::String(t),
        };
        let report = json!({
            "schema": 1,
            "command": command_name(&cli.command),
            "version": env!("CARGO_PKG_VERSION"),
            "inputs": { "args": std::env::args().skip(1).collect::<Vec<_>>(), "seed": cli.seed },
            "output": payload,
            "timing_ms": started.elapsed().as_secs_f64() * 1e3,
        });
        serde_json::to_string_pretty(&report).expect("values serialise")
    } else {
        match output {
            Output::Json(v) => serde_json::to_string_pretty(&v).expect("values serialise"),
            Output::Text(t) => t,
        }
    };
    match &cli.out {
        Some(path) => std::fs::write(path, text + "\n").map_err(|e| CliError::Write {
            path: path.clone(),
            message: e.to_string(),
        }),
        None => match writeln!(std::io::stdout().lock(), "{text}") {
            // a closed pipe downstream is not our failure
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Write {
                path: PathBuf::from("<stdout>"),
                message: e.to_string(),
            }),
            _ => Ok(()),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let result = run(&cli).and_then(|out| emit(&cli, out, started));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // a failed verification still prints its report on stdout
            if let CliError::VerifyFailed(report) = &e {
                println!("{}", serde_json::to_string_pretty(report).expect("values serialise"));
            }
            eprintln!("{}", serde_json::to_string(&e.to_json()).expect("values serialise"));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
