//! `magkit` command-line front end.
//!
//! Exit codes: 0 on success, 1 for unreadable or invalid input and bad
//! arguments, 2 when the requested quantity does not exist for a valid space
//! (no weighting, a positive definite space required but not given, no
//! threshold found). Set-function reports whose hypothesis fails are still
//! written and exit 0, with `hypothesis_holds: false` and a warning.
//! Point indices on the command line and in reports are 1-based.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "magkit", version, about = "Magnitude of finite metric spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct InputArgs {
    /// Distance matrix as CSV, or JSON with `points` or `dist`
    #[arg(long)]
    pub input: PathBuf,
    /// Scale factor applied to every distance
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
}

#[derive(Args, Clone)]
pub struct OutputArgs {
    /// Write the result here instead of stdout
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args, Clone)]
pub struct GridArgs {
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Number of grid points (default: 32 per decade)
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    /// f(Y) = −1/|Y|
    Inverse,
    /// f(Y) = (m − |tY|)/m² + (m − 1)/m
    Shifted,
}

#[derive(Subcommand)]
enum Command {
    /// Magnitude, weighting, definiteness, circumradius and identity residuals
    Compute {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Relative eigenvalue cutoff for the definiteness classification
        #[arg(long)]
        tol_pd: Option<f64>,
    },
    /// Similarity embedding, circumradius and the subset circumradius check
    Embed {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Seed for subset sampling when there are too many subsets
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4096)]
        max_subsets: usize,
    },
    /// Magnitude, remainder and asymptote over a log-spaced scale grid
    Sweep {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Magnitude and weighting of a subspace from the data of the whole space
    Subspace {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Points to keep, e.g. "1,2"
        #[arg(long, conflicts_with = "remove", required_unless_present = "remove")]
        subset: Option<String>,
        /// Points to remove, e.g. "3"
        #[arg(long)]
        remove: Option<String>,
    },
    /// Successive single-point deletions
    DeleteChain {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Points in deletion order, e.g. "3,1"
        #[arg(long)]
        remove: String,
    },
    /// Strong positive definiteness certificate and scale threshold
    Spd {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Also search the threshold scale up to this value
        #[arg(long)]
        t_max: Option<f64>,
    },
    /// Exhaustive submodularity and monotonicity check of a set function
    Submodular {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, value_enum, default_value_t = Kind::Inverse)]
        kind: Kind,
        /// Value of the set function on the empty set
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
    },
    /// Residuals of the matrix identities and the interlacing chain
    Identities {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Data behind the reference figures and worked examples:
    /// fig1, fig2, example-2-3, example-fb-2pt
    Reproduce {
        target: String,
        #[command(flatten)]
        output: OutputArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Similarity of the two points for example-fb-2pt
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
    },
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("MAGKIT_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("MAGKIT_THREADS must be a positive integer, got `{value}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(message) = configure_threads() {
        eprintln!("error: {message}");
        return ExitCode::from(1);
    }
    let result = match cli.command {
        Command::Compute {
            input,
            output,
            tol_pd,
        } => commands::compute(&input, &output, tol_pd),
        Command::Embed {
            input,
            output,
            seed,
            max_subsets,
        } => commands::embed(&input, &output, seed, max_subsets),
        Command::Sweep {
            input,
            grid,
            output,
        } => commands::sweep(&input, &grid, &output),
        Command::Subspace {
            input,
            output,
            subset,
            remove,
        } => commands::subspace(&input, &output, subset.as_deref(), remove.as_deref()),
        Command::DeleteChain {
            input,
            output,
            remove,
        } => commands::delete_chain(&input, &output, &remove),
        Command::Spd {
            input,
            output,
            t_max,
        } => commands::spd(&input, &output, t_max),
        Command::Submodular {
            input,
            output,
            kind,
            alpha,
        } => commands::submodular(&input, &output, kind, alpha),
        Command::Identities { input, output } => commands::identities(&input, &output),
        Command::Reproduce {
            target,
            output,
            grid,
            delta,
        } => commands::reproduce(&target, &output, &grid, delta),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.report(),
    }
}
