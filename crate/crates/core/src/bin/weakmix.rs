use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use weakmix::cli::{self, CliError, Command, Overrides};
use weakmix::config::Format;

#[derive(Parser)]
#[command(
    name = "weakmix",
    version,
    about = "Weak measurements with mixed probe states"
)]
struct Args {
    #[command(subcommand)]
    command: Cmd,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Read --delta and --theta in degrees.
    #[arg(long, global = true)]
    degrees: bool,
    /// Post-selection phase of the interferometer setup.
    #[arg(long, global = true, allow_hyphen_values = true)]
    delta: Option<f64>,
    /// Coupling strength of the setup.
    #[arg(long, global = true, allow_hyphen_values = true)]
    theta: Option<f64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Weak value and post-selection probability.
    Weakvalue,
    /// Interferometer weak-value extraction over a range of phases.
    Sweep,
    /// Shot-level simulation against the predicted SNR.
    Montecarlo,
    /// Bloch-ball flow vectors of a qubit probe.
    Flowfield,
    /// Invariant battery.
    Verify,
}

#[derive(ValueEnum, Clone, Copy)]
enum FormatArg {
    Csv,
    Json,
}

fn run(args: Args) -> Result<(), CliError> {
    let overrides = Overrides {
        seed: args.seed,
        format: args.format.map(|f| match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }),
        out: args.out,
        delta: args.delta,
        theta: args.theta,
        degrees: args.degrees,
    };
    let cfg = cli::apply_overrides(cli::load_config(args.config.as_deref())?, &overrides)?;
    let command = match args.command {
        Cmd::Weakvalue => Command::WeakValue,
        Cmd::Sweep => Command::Sweep,
        Cmd::Montecarlo => Command::MonteCarlo,
        Cmd::Flowfield => Command::FlowField,
        Cmd::Verify => Command::Verify,
    };
    let report = cli::run(command, &cfg)?;
    cli::write_output(&cfg, &report.body)?;
    report.failure.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.kind().to_string();
            eprintln!(
                "{}",
                CliError::new(cli::EXIT_IO, "usage", format!("{msg}; see --help"))
            );
            return ExitCode::from(cli::EXIT_IO as u8);
        }
    };
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code as u8)
        }
    }
}
