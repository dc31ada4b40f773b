use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bvcalc::scenarios::{self, oracle_1d, OracleCase, RunConfig};
use bvcalc::Error;

#[derive(Parser)]
#[command(name = "bvcalc", version, about = "Linear-growth functionals on BV functions: scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write report.json, tables/*.csv and *.dat.
    Run {
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 16)]
        resolution: usize,
        #[arg(long, default_value_t = 256)]
        jmax: usize,
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        output: PathBuf,
    },
    /// List the scenario catalog.
    List,
    /// Evaluate a 1D case file with the reference summation.
    Oracle {
        #[arg(long)]
        case: PathBuf,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::List => {
            for s in scenarios::scenario_catalog() {
                println!("{:<26} {}", s.id, s.summary);
            }
            ExitCode::SUCCESS
        }
        Command::Oracle { case } => {
            let parsed = std::fs::read_to_string(&case)
                .map_err(Error::from)
                .and_then(|s| serde_json::from_str::<OracleCase>(&s).map_err(Error::from));
            match parsed.and_then(|c| oracle_1d(&c)) {
                Ok(v) => {
                    println!("{v:.17e}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Command::Run {
            scenario,
            resolution,
            jmax,
            tolerance,
            seed,
            output,
        } => {
            let config = RunConfig {
                scenario,
                resolution,
                jmax,
                tolerance,
                seed,
                output,
            };
            match scenarios::run(&config) {
                Ok(report) => {
                    for c in &report.clauses {
                        println!("{} {} (expected {}, observed {})", if c.passed { "ok  " } else { "FAIL" }, c.name, c.expected, c.observed);
                    }
                    for f in &report.flags {
                        println!("flag: {f}");
                    }
                    println!("report: {}", config.output.join("report.json").display());
                    if report.passed {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e @ (Error::UnknownScenario(_) | Error::Config(_))) => {
                    eprintln!("usage error: {e}; see `bvcalc list`");
                    ExitCode::from(2)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
    }
}
