use clap::{Parser, Subcommand};
use std::process::ExitCode;

use curstat_cli::commands::{
    cmd_diagnose, cmd_simulate, cmd_tables, cmd_test, DiagnoseArgs, SimulateArgs, TablesArgs,
    TestArgs,
};

/// Nonparametric two-sample tests for current status data.
#[derive(Parser)]
#[command(name = "curstat", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test whether two sample groups share one event-time distribution
    Test(TestArgs),
    /// Run simulation scenarios and tabulate rejection rates
    Simulate(SimulateArgs),
    /// Second-order diagnostics on null scenarios
    Diagnose(DiagnoseArgs),
    /// Regenerate every bundled scenario table
    Tables(TablesArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Test(args) => cmd_test(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Diagnose(args) => cmd_diagnose(args),
        Command::Tables(args) => cmd_tables(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
