mod config;
mod error;
mod lab;
mod output;
mod suite;
mod verbs;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Format, Params, RunConfig};
use error::CliError;
use output::{render, Outcome};

/// Explicit-formula and trace verification for elliptic curves over finite fields.
///
/// Exit status: 0 all checks passed, 1 a check failed, 2 configuration
/// error, 3 internal inconsistency.
#[derive(Parser, Debug)]
#[command(name = "ztrace", version)]
struct Cli {
    /// TOML file with any of the flag names as keys; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the resolved configuration, defaults included, and exit.
    #[arg(long, global = true)]
    explain: bool,
    #[command(flatten)]
    params: Params,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Frobenius trace, eigenvalue and zeros of a curve.
    Zeta,
    /// Closed points `B_d` and point counts `N_d` by degree.
    Census,
    /// Both sides of the explicit formula for one curve and test function.
    Verify,
    /// Characters and the Laplacian on `(Z/p^n)^m`.
    Padic {
        #[command(subcommand)]
        action: LabAction,
    },
    /// Quotients, duals and fixed points of the Tate lattice model.
    Tate {
        #[command(subcommand)]
        action: LabAction,
    },
    /// Trace-formula weight of an orbit iterate.
    Weights,
    /// One acceptance criterion (`1`..`8`) or `all`.
    Suite { criterion: String },
}

#[derive(Subcommand, Debug)]
enum LabAction {
    /// Run the selected `--check` list.
    Lab,
}

impl Command {
    fn name(&self) -> String {
        match self {
            Command::Zeta => "zeta".into(),
            Command::Census => "census".into(),
            Command::Verify => "verify".into(),
            Command::Padic { .. } => "padic lab".into(),
            Command::Tate { .. } => "tate lab".into(),
            Command::Weights => "weights".into(),
            Command::Suite { .. } => "suite".into(),
        }
    }
}

fn run(cli: Cli) -> Result<(Outcome, Format), CliError> {
    let file = match &cli.config {
        Some(path) => Params::from_file(path)?,
        None => Params::default(),
    };
    let cfg = RunConfig::resolve(&cli.command.name(), cli.params.over(file))?;
    if cli.explain {
        let report = serde_json::to_value(&cfg).map_err(|e| CliError::Internal(e.to_string()))?;
        return Ok((Outcome::new(report, true), Format::Json));
    }
    let outcome = match &cli.command {
        Command::Zeta => verbs::zeta(&cfg)?,
        Command::Census => verbs::census(&cfg)?,
        Command::Verify => verbs::verify(&cfg)?,
        Command::Padic { .. } => lab::padic_lab(&cfg)?,
        Command::Tate { .. } => lab::tate_lab(&cfg)?,
        Command::Weights => verbs::weights(&cfg)?,
        Command::Suite { criterion } => suite::suite(&cfg, criterion)?,
    };
    let format = if cfg.emit_plot.is_some() && matches!(cli.command, Command::Verify) {
        Format::Csv
    } else {
        cfg.format
    };
    Ok((outcome, format))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((outcome, format)) => {
            let text = render(&outcome, format);
            let mut out = std::io::stdout().lock();
            if out.write_all(text.as_bytes()).and_then(|_| out.flush()).is_err() {
                return ExitCode::from(3);
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
