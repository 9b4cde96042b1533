use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use retarded_cli::commands;
use retarded_core::CouplingForm;

/// n point charges interacting through their retarded fields.
#[derive(Debug, Parser)]
#[command(name = "retarded", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Coupling {
    Derived,
    PaperLiteral,
}

impl From<Coupling> for CouplingForm {
    fn from(c: Coupling) -> Self {
        match c {
            Coupling::Derived => CouplingForm::Derived,
            Coupling::PaperLiteral => CouplingForm::PaperLiteral,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a scenario and write trajectory, diagnostics, events and summary.
    Run {
        config: PathBuf,
        /// Worker threads for the pair kernel (1 = sequential).
        #[arg(long)]
        workers: Option<usize>,
        /// Output directory (overrides `output.dir`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run oracle suites: derivative, uniform, gamma or all.
    Validate {
        suite: String,
        /// Directory for the JSON reports.
        #[arg(long, default_value = "validation")]
        out: PathBuf,
        /// Coupling form under test in the derivative oracle.
        #[arg(long, value_enum, default_value = "derived")]
        coupling: Coupling,
    },
    /// Check whether t = 0 is a nonsingular point, without running.
    Inspect { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                commands::EXIT_USAGE
            } else {
                commands::EXIT_OK
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Run { config, workers, out } => commands::cmd_run(&config, workers, out),
        Command::Validate { suite, out, coupling } => commands::cmd_validate(&suite, &out, coupling.into()),
        Command::Inspect { config } => commands::cmd_inspect(&config),
    }
}
