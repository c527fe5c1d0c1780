use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qbayes::properties::{run_property_suite, PropertyConfig};
use qbayes::scenarios::{
    emit_reports, run_all, run_example1, run_example2, run_frauchiger_renner, run_hardy,
    OutputFormat, PriorChoice, ScenarioOptions,
};
use qbayes::states::DensityMatrixFile;
use qbayes::Error;

#[derive(Parser, Debug)]
#[command(
    name = "qbayes",
    version,
    about = "Quantum vs classical causal reasoning on worked scenarios"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a scenario and print its report.
    Run(RunArgs),
    /// Run the seeded invariant suite on random channels.
    Check(CheckArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Scenario {
    Example1,
    Example2,
    Fr,
    Hardy,
    All,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PriorArg {
    Uniform,
    Steady,
    File,
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    scenario: Scenario,
    /// Weight of |1_S> in example 1.
    #[arg(long, default_value_t = 0.5)]
    r: f64,
    #[arg(long, default_value_t = 0.8, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, default_value_t = 0.6, allow_negative_numbers = true)]
    beta: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, default_value_t = qbayes::linalg::DEFAULT_TOL)]
    tolerance: f64,
    #[arg(long, value_enum, default_value_t = PriorArg::Uniform)]
    prior: PriorArg,
    /// JSON density matrix `{dim, entries}` used with `--prior file`.
    #[arg(long)]
    prior_file: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
struct CheckArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![2, 3, 4])]
    dims: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

const USAGE: u8 = 1;
const VIOLATION: u8 = 2;

fn failure(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        Error::InvalidParameter(_)
        | Error::DegenerateParameters(_)
        | Error::InvalidPrior(_)
        | Error::NotHermitian(_)
        | Error::NotPsd(_)
        | Error::InvalidTrace(_)
        | Error::DimensionMismatch(_) => ExitCode::from(USAGE),
        _ => ExitCode::from(VIOLATION),
    }
}

fn load_prior(args: &RunArgs) -> Result<PriorChoice, Error> {
    match (args.prior, &args.prior_file) {
        (PriorArg::Uniform, None) => Ok(PriorChoice::Uniform),
        (PriorArg::Steady, None) => Ok(PriorChoice::SteadyState),
        (PriorArg::File, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidPrior(format!("{}: {e}", path.display())))?;
            let file: DensityMatrixFile = serde_json::from_str(&text)
                .map_err(|e| Error::InvalidPrior(format!("{}: {e}", path.display())))?;
            Ok(PriorChoice::Explicit(file.to_density(None)?))
        }
        (PriorArg::File, None) => Err(Error::InvalidPrior(
            "--prior file needs --prior-file".into(),
        )),
        (_, Some(_)) => Err(Error::InvalidPrior(
            "--prior-file needs --prior file".into(),
        )),
    }
}

fn run(args: &RunArgs) -> Result<String, Error> {
    if !(args.tolerance > 0.0 && args.tolerance < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must lie in (0, 1), got {}",
            args.tolerance
        )));
    }
    let options = ScenarioOptions {
        tolerance: args.tolerance,
        prior: load_prior(args)?,
    };
    let reports = match args.scenario {
        Scenario::Example1 => vec![run_example1(args.r, &options)?],
        Scenario::Example2 => vec![run_example2(&options)?],
        Scenario::Fr => vec![run_frauchiger_renner(&options)?],
        Scenario::Hardy => vec![run_hardy(args.alpha, args.beta, &options)?],
        Scenario::All => run_all(&options)?,
    };
    let format = match args.format {
        Format::Json => OutputFormat::Json,
        Format::Text => OutputFormat::Text,
    };
    if let [single] = reports.as_slice() {
        qbayes::scenarios::emit_report(single, format)
    } else {
        emit_reports(&reports, format)
    }
}

fn check(args: &CheckArgs) -> ExitCode {
    let config = PropertyConfig {
        dims: args.dims.clone(),
        trials: args.trials,
        seed: args.seed,
    };
    match run_property_suite(&config) {
        Ok(outcomes) => {
            for o in &outcomes {
                println!("{o}");
            }
            if outcomes.iter().all(|o| o.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(VIOLATION)
            }
        }
        Err(e) => failure(&e),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match cli.command {
        Command::Run(args) => match run(&args) {
            Ok(out) => {
                print!("{out}");
                ExitCode::SUCCESS
            }
            Err(e) => failure(&e),
        },
        Command::Check(args) => check(&args),
    }
}
