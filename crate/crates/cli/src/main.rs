use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hawkes_cli::{list_models, run, validate, version, CliError, Overrides};

#[derive(Parser)]
#[command(name = "hawkes", about = "Scaled Hawkes process experiments", disable_version_flag = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run { config: PathBuf },
    /// Check a config file and print the assumption audit without running.
    Validate { config: PathBuf },
    /// List the kernel, intensity and experiment kinds.
    ListModels,
    Version,
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => {
            let outcome = Overrides::from_env().and_then(|o| run(&config, &o));
            match outcome {
                Ok(out) => {
                    for c in &out.report.checks {
                        let verdict = if c.pass { "PASS" } else { "FAIL" };
                        println!("{verdict} {} : {} {} {}", c.name, c.statistic, c.comparison, c.threshold);
                    }
                    println!("wrote {} files to {}", out.files.len(), out.directory.display());
                    match out.into_result() {
                        Ok(_) => ExitCode::SUCCESS,
                        Err(e) => fail(e),
                    }
                }
                Err(e) => fail(e),
            }
        }
        Command::Validate { config } => match validate(&config) {
            Ok(table) => {
                println!("{table}");
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Command::ListModels => {
            println!("{}", list_models());
            ExitCode::SUCCESS
        }
        Command::Version => {
            println!("{}", version());
            ExitCode::SUCCESS
        }
    }
}
