//! `qalg`: seeded experiment runs for the contextual valuation model.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 model
//! invariant violated.

mod commands;
mod table;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qalg::bell::Model;
use qalg::SeedStream;

#[derive(Parser, Debug)]
#[command(name = "qalg", version, about = "Seeded experiments on contextual physical states")]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Master seed; identical arguments give byte-identical output.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Sample count per estimate.
    #[arg(long, global = true, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Write results here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Exact,
    Contextual,
    Lhv,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Model {
        match m {
            ModelArg::Exact => Model::Exact,
            ModelArg::Contextual => Model::Contextual,
            ModelArg::Lhv => Model::Lhv,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum StateKind {
    Pure,
    Mixed,
    Both,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// CHSH value for four measurement settings.
    Chsh {
        #[arg(long, value_enum, default_value_t = ModelArg::Contextual)]
        model: ModelArg,
        /// Planar settings a,a',b,b' in degrees from z in the x-z plane.
        #[arg(long, conflicts_with = "directions")]
        angles: Option<String>,
        /// Settings as four `x,y,z` triples separated by `;`.
        #[arg(long)]
        directions: Option<String>,
    },
    /// Both particles measured along one axis; every run must anticorrelate.
    Epr {
        /// `x`, `y`, `z` or a triple `x,y,z`.
        #[arg(long, default_value = "z")]
        axis: String,
    },
    /// E(theta) for a = z and b at theta in the x-z plane, 0 to 180 degrees.
    Correlation {
        #[arg(long, value_enum, default_value_t = ModelArg::Contextual)]
        model: ModelArg,
        /// Angle step in degrees.
        #[arg(long, default_value_t = 15.0)]
        step: f64,
    },
    /// Spin precession under H = (omega/2) sigma_z.
    Evolve {
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        #[arg(long, default_value_t = 2.0 * std::f64::consts::PI)]
        t_max: f64,
        #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(2..))]
        points: u64,
        /// Initial spin direction: `x`, `y`, `z` or a triple.
        #[arg(long, default_value = "x")]
        axis: String,
    },
    /// GNS reconstruction from random states, with randomized checks.
    Gns {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, value_enum, default_value_t = StateKind::Both)]
        state: StateKind,
    },
    /// Property harness for physical states and ensembles.
    Postulates {
        /// Random valuation cases, cycling d = 2, 4, 8.
        #[arg(long, default_value_t = 1000)]
        cases: usize,
        /// Random (state, observable) convergence trials.
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(qalg::Error),
    Io(std::io::Error),
    /// Output was produced but a checked law failed.
    Violation(String),
}

impl From<qalg::Error> for CliError {
    fn from(e: qalg::Error) -> CliError {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Violation(_) => 3,
            CliError::Core(e) if e.is_model_violation() => 3,
            CliError::Core(
                qalg::Error::InvalidArgument(_)
                | qalg::Error::InvalidDirection { .. }
                | qalg::Error::DimensionOutOfRange { .. },
            ) => 1,
            CliError::Core(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Violation(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("QALG_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("QALG_THREADS must be a non-negative integer, got `{raw}`")))?;
    qalg::parallel::configure_threads(n).map_err(CliError::Usage)
}

fn emit(common: &Common, text: &str) -> Result<(), CliError> {
    match &common.out {
        Some(path) => fs::write(path, text).map_err(CliError::Io),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(CliError::Io)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let common = &cli.common;
    let stream = SeedStream::new(common.seed);
    let outcome = match cli.command {
        Command::Chsh { model, angles, directions } => {
            commands::chsh(common, &stream, model.into(), angles.as_deref(), directions.as_deref())
        }
        Command::Epr { axis } => commands::epr(common, &stream, &axis),
        Command::Correlation { model, step } => commands::correlation(common, &stream, model.into(), step),
        Command::Evolve { omega, t_max, points, axis } => {
            commands::evolve(common, &stream, omega, t_max, points, &axis)
        }
        Command::Gns { dim, trials, state } => commands::gns(common, &stream, dim, trials, state),
        Command::Postulates { cases, trials } => commands::postulates(common, &stream, cases, trials),
    }?;
    let text = match common.format {
        Format::Csv => outcome.table.to_csv(),
        Format::Json => outcome.table.to_json(),
    };
    emit(common, &text)?;
    match outcome.violation {
        Some(m) => Err(CliError::Violation(m)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qalg: error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
