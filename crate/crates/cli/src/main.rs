use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hybridwigner::{run_file, verify};

#[derive(Parser)]
#[command(name = "hybridwigner", version, about = "Hybrid classical-quantum atom-field scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write its CSV.
    Run {
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run the acceptance criteria.
    Verify {
        /// Criterion id or part of its name.
        #[arg(long)]
        filter: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match cli.command {
        Command::Run { config, output, threads } => match run_file(&config, output.as_deref(), threads) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
        Command::Verify { filter } => {
            let outcomes = verify::run(filter.as_deref());
            for o in &outcomes {
                println!("{o}");
            }
            if outcomes.is_empty() {
                eprintln!("no criterion matches the filter");
                return ExitCode::from(1);
            }
            if outcomes.iter().all(|o| o.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(4)
            }
        }
    }
}
