mod commands;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use expsearch::ratio::{self, Rational};

use commands::{OracleArgs, Output};
use error::CliError;
use report::NumberFormat;

#[derive(Parser)]
#[command(name = "expsearch", version, about = "Expanding search games on rooted networks")]
struct Cli {
    /// Print machine-readable JSON instead of tables.
    #[arg(long, global = true)]
    json: bool,
    /// Print numbers as decimals with this many places instead of exact fractions.
    #[arg(long, global = true, value_name = "N")]
    decimals: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Network JSON file.
    #[arg(long, value_name = "FILE")]
    network: Option<PathBuf>,
    /// Built-in network, e.g. `qbar` or `circle_spike:1/2`.
    #[arg(long, value_name = "NAME")]
    fixture: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Solver {
    Exact,
    Iterative,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize a network.
    Inspect {
        #[command(flatten)]
        src: Source,
        /// Print Graphviz DOT instead.
        #[arg(long)]
        dot: bool,
    },
    /// Bridges, blocks and the bridge tree.
    Decompose {
        #[command(flatten)]
        src: Source,
        /// Print the bridge tree as DOT.
        #[arg(long)]
        dot: bool,
        /// Write the bridge tree as network JSON.
        #[arg(long, value_name = "FILE")]
        tree_out: Option<PathBuf>,
    },
    /// Solve the search game on a tree.
    TreeSolve {
        #[command(flatten)]
        src: Source,
    },
    /// Optimal search of a tree against a known hider distribution.
    Bayes {
        #[command(flatten)]
        src: Source,
        #[arg(long, value_name = "FILE")]
        hider: PathBuf,
    },
    /// The two-search block strategy.
    Beta {
        #[command(flatten)]
        src: Source,
        /// Write the strategy JSON here.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// The bridge-tree strategy.
    Gamma {
        #[command(flatten)]
        src: Source,
    },
    /// Lower and upper bounds on the game value.
    Bounds {
        #[command(flatten)]
        src: Source,
    },
    /// Approximation factors as a function of the bridge ratio.
    BoundCurve {
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        /// Write CSV here.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// The circle-with-spike family solved in closed form.
    CircleSpike {
        #[arg(long, value_parser = parse_rational)]
        alpha: Rational,
    },
    /// Solve the game numerically on a discretized network.
    Oracle {
        #[command(flatten)]
        src: Source,
        /// Cell length for hider positions inside blocks; whole arcs if omitted.
        #[arg(long, value_parser = parse_rational)]
        h: Option<Rational>,
        /// Target duality gap for the iterative solver.
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        /// Largest number of searches or search states to visit.
        #[arg(long, default_value_t = 2_000_000)]
        cap: usize,
        /// Write the payoff matrix of the final restricted game as CSV.
        #[arg(long, value_name = "FILE")]
        matrix: Option<PathBuf>,
        /// Offer the hider every node and cell, not just undominated ones.
        #[arg(long)]
        no_dominance: bool,
        #[arg(long, value_enum, default_value_t = Solver::Exact)]
        solver: Solver,
        #[arg(long, default_value_t = 200_000)]
        max_iter: usize,
    },
    /// Expected time of a strategy file against a hider file.
    Evaluate {
        #[command(flatten)]
        src: Source,
        #[arg(long, value_name = "FILE")]
        strategy: PathBuf,
        #[arg(long, value_name = "FILE")]
        hider: PathBuf,
    },
    /// List built-in networks, or print one as JSON.
    Fixtures {
        name: Option<String>,
        #[arg(long)]
        dot: bool,
    },
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    ratio::parse_rational(s).map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<Output, CliError> {
    let fmt = NumberFormat { decimals: cli.decimals };
    let net = |s: &Source| commands::load_network(s.network.as_ref(), s.fixture.as_deref());
    match cli.command {
        Command::Inspect { src, dot } => Ok(commands::inspect(&net(&src)?, dot, fmt)),
        Command::Decompose { src, dot, tree_out } => commands::decompose_cmd(&net(&src)?, dot, tree_out.as_ref(), fmt),
        Command::TreeSolve { src } => commands::tree_solve(&net(&src)?, fmt),
        Command::Bayes { src, hider } => commands::bayes(&net(&src)?, &hider, fmt),
        Command::Beta { src, out } => commands::beta(&net(&src)?, out.as_ref(), fmt),
        Command::Gamma { src } => commands::gamma(&net(&src)?, fmt),
        Command::Bounds { src } => commands::bounds_cmd(&net(&src)?, fmt),
        Command::BoundCurve { step, out } => commands::bound_curve(step, out.as_ref(), cli.json, fmt),
        Command::CircleSpike { alpha } => commands::circle_spike(&alpha, fmt),
        Command::Oracle { src, h, eps, cap, matrix, no_dominance, solver, max_iter } => {
            let args = OracleArgs {
                h,
                eps,
                cap,
                no_dominance,
                iterative: matches!(solver, Solver::Iterative),
                max_iter,
                matrix,
            };
            commands::oracle_cmd(&net(&src)?, &args, fmt)
        }
        Command::Evaluate { src, strategy, hider } => commands::evaluate(&net(&src)?, &strategy, &hider, fmt),
        Command::Fixtures { name, dot } => commands::fixtures_cmd(name.as_deref(), dot),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.json;
    match run(cli) {
        Ok(Output::Report(v)) => {
            print!("{}", report::render(&v, json));
            ExitCode::SUCCESS
        }
        Ok(Output::Text(t)) => {
            print!("{t}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
