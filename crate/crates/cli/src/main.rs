use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod params;

use commands::CliError;

/// Impedance, convergence and propagation in LC ladder networks
#[derive(Parser, Debug)]
#[command(name = "lcladder", version, args_override_self = true)]
struct Cli {
    #[command(flatten)]
    output: OutputArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output file (stdout when omitted)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Output format (each subcommand has its own default)
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write numbers with 17 significant digits instead of 6
    #[arg(long, global = true)]
    pub exact: bool,

    /// Flat JSON object of flag values, overridden by explicit flags
    #[arg(long, global = true, value_name = "FILE")]
    pub params: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fixed points p± of the normalized ladder recursion for a given t
    FixedPoint(commands::FixedPointArgs),
    /// Trace of the normalized recursion p_(n+1) = 1 + t p_n/(t + p_n)
    Iterate(commands::IterateArgs),
    /// Frequency sweep of the low-pass ladder
    Sweep(commands::SweepArgs),
    /// Gaussian wave packet propagated into the infinite low-pass ladder
    Packet(commands::PacketArgs),
    /// Contraction-mapping demos
    Contraction(commands::ContractionArgs),
    /// Partial sums of the resistive ladder R, pR, p²R, ...
    Resistive(commands::ResistiveArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let out = &cli.output;
    match cli.command {
        Command::FixedPoint(a) => commands::fixed_point(&a, out),
        Command::Iterate(a) => commands::iterate(&a, out),
        Command::Sweep(a) => commands::sweep(&a, out),
        Command::Packet(a) => commands::packet(&a, out),
        Command::Contraction(a) => commands::contraction(&a, out),
        Command::Resistive(a) => commands::resistive(&a, out),
    }
}

fn main() -> ExitCode {
    let args = match params::expand(std::env::args_os().collect()) {
        Ok(args) => args,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
