use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qmall::commands::{cmd_check, cmd_gaussian, cmd_skorohod, cmd_wigner, StateSpec};
use qmall::config::{Config, Overrides};
use qmall::error::CliError;
use qmall::export::to_json;

#[derive(Parser)]
#[command(name = "qmall", version, about = "Quantum Malliavin calculus on truncated Fock spaces")]
struct Cli {
    /// JSON config file; falls back to $QMALL_CONFIG, then built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: OverrideArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OverrideArgs {
    #[arg(long, global = true)]
    modes: Option<usize>,
    #[arg(long, global = true)]
    cutoff: Option<usize>,
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    #[arg(long, global = true)]
    weyl_tolerance: Option<f64>,
    #[arg(long, global = true)]
    quadrature_l: Option<f64>,
    #[arg(long, global = true)]
    quadrature_nodes: Option<usize>,
    #[arg(long, global = true)]
    grid_l: Option<f64>,
    #[arg(long, global = true)]
    grid_nodes: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    dimension_limit: Option<usize>,
}

impl From<&OverrideArgs> for Overrides {
    fn from(a: &OverrideArgs) -> Self {
        Overrides {
            modes: a.modes,
            cutoff: a.cutoff,
            tolerance: a.tolerance,
            weyl_tolerance: a.weyl_tolerance,
            quadrature_l: a.quadrature_l,
            quadrature_nodes: a.quadrature_nodes,
            grid_l: a.grid_l,
            grid_nodes: a.grid_nodes,
            seed: a.seed,
            dimension_limit: a.dimension_limit,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StateKind {
    Vacuum,
    Gaussian,
    Vector,
}

#[derive(Subcommand)]
enum Command {
    /// Run every residual check and write the report.
    Check {
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record wall-clock time per entry (makes the report nondeterministic).
        #[arg(long)]
        timings: bool,
    },
    /// Wigner density on the configured grid, written as CSV plus a JSON sidecar.
    Wigner {
        #[arg(long, value_enum, default_value = "vacuum")]
        state: StateKind,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        lambdas: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Amplitude file for `--state vector`.
        #[arg(long)]
        vector: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        h1: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        h2: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Truncated and exact partition functions of a second-quantized Gaussian.
    Gaussian {
        #[arg(long, value_delimiter = ',', required = true)]
        lambdas: Vec<f64>,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Skorohod integral of a step process, compared with the Itô sum.
    Skorohod {
        #[arg(long)]
        process: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        dump_matrix: bool,
    },
}

fn state_spec(kind: StateKind, lambdas: Vec<f64>, t: f64, vector: Option<PathBuf>) -> Result<StateSpec, CliError> {
    match kind {
        StateKind::Vacuum => Ok(StateSpec::Vacuum),
        StateKind::Gaussian => Ok(StateSpec::Gaussian { lambdas, t }),
        StateKind::Vector => vector
            .map(StateSpec::Vector)
            .ok_or_else(|| CliError::Usage("--state vector needs --vector <file>".into())),
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let cfg = Config::load(cli.config.as_deref(), &Overrides::from(&cli.overrides))?;
    match cli.command {
        Command::Check { out, timings } => {
            let report = cmd_check(&cfg, out.as_deref(), timings)?;
            if out.is_none() {
                print!("{}", report.to_json());
            }
            eprint!("{}", report.table());
            Ok(report.all_pass())
        }
        Command::Wigner { state, lambdas, t, vector, h1, h2, out } => {
            let spec = state_spec(state, lambdas, t, vector)?;
            let side = cmd_wigner(&cfg, &spec, &h1, &h2, &out)?;
            print!("{}", to_json(&side));
            Ok(true)
        }
        Command::Gaussian { lambdas, t, out } => {
            let r = cmd_gaussian(&cfg, &lambdas, t, out.as_deref())?;
            if out.is_none() {
                print!("{}", to_json(&r));
            }
            Ok(true)
        }
        Command::Skorohod { process, out, dump_matrix } => {
            let r = cmd_skorohod(&cfg, &process, out.as_deref(), dump_matrix)?;
            if out.is_none() {
                print!("{}", to_json(&r));
            }
            Ok(r.pass)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("qmall: {e}");
            ExitCode::from(&e)
        }
    }
}
