use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bsim_cli::commands;
use bsim_cli::config::Overrides;
use bsim_cli::error::{CliError, EXIT_CONFIG};

/// Constrained φ-divergence minimization and entropy maximization by bare simulation.
#[derive(Debug, Parser)]
#[command(name = "bsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON config file.
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Sample size.
    #[arg(long)]
    n: Option<usize>,
    /// Replications.
    #[arg(long = "L")]
    replications: Option<u64>,
    /// Result file; standard output by default.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-batch CSV trace.
    #[arg(long)]
    trace: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            threads: self.threads,
            n: self.n,
            replications: self.replications,
            out: self.out.clone(),
            trace: self.trace.clone(),
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Minimum of a divergence (or a derived quantity) over a constraint set.
    Estimate(RunArgs),
    /// Extremum of an entropy over a constraint set.
    EntropyMax(RunArgs),
    /// Quadratic-cost transport over couplings of two marginals.
    Transport(RunArgs),
    /// Relaxed linear assignment.
    Assignment(RunArgs),
    /// Separable quadratic program.
    Quadratic(RunArgs),
    /// Linear objective on a norm sphere.
    Linear(RunArgs),
    /// Lower and upper bounds on the minimum for a general generator.
    Bounds(RunArgs),
    /// Runs the acceptance suites; exits 4 on any failure.
    Validate {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
        /// Comma-separated criterion numbers; all by default.
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u8>,
        /// JSON report file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draws block sums of a weight law, one per line.
    SampleLaw {
        /// The law as JSON, e.g. '{"law":"gamma_law","scale":1}'.
        #[arg(long)]
        law: String,
        /// Number of unit weights per block sum.
        #[arg(long, default_value_t = 1.0)]
        nu: f64,
        /// Exponential tilt.
        #[arg(long, default_value_t = 0.0)]
        tau: f64,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Estimate(a) => commands::estimate(&a.config, &a.overrides()),
        Command::Bounds(a) => commands::bounds(&a.config, &a.overrides()),
        Command::EntropyMax(a) => commands::problem("entropy-max", "entropy_max", &a.config, &a.overrides()),
        Command::Transport(a) => commands::problem("transport", "transport", &a.config, &a.overrides()),
        Command::Assignment(a) => commands::problem("assignment", "assignment", &a.config, &a.overrides()),
        Command::Quadratic(a) => commands::problem("quadratic", "separable_quadratic", &a.config, &a.overrides()),
        Command::Linear(a) => commands::problem("linear", "linear_objective", &a.config, &a.overrides()),
        Command::Validate { seed, threads, criteria, out } => commands::validate(seed, threads, &criteria, out.as_deref()),
        Command::SampleLaw { law, nu, tau, count, seed, out } => {
            commands::sample_law(&law, nu, tau, count, seed, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
