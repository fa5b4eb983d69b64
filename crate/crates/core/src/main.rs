use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fairdiv::io::{allocation_to_json, parse_allocation, parse_scenario, trace_rows_to_json};
use fairdiv::rational;
use fairdiv::verify::VerifyError;
use fairdiv::{solve, verify, Error};

/// Exact envy-free division of [0, 1).
#[derive(Parser)]
#[command(name = "fairdiv", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Divide a scenario and write the allocation with its certificate.
    Divide {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Also write the convergence trace to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Check an allocation against a scenario.
    Verify {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        allocation: PathBuf,
        /// Non-negative rational such as 1/100.
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        tolerance: String,
    },
    /// Divide a scenario and print (or write) only its convergence trace.
    Trace {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

enum Failure {
    Parse(String),
    Internal(String),
    Structural(String),
    Rejected,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Parse(_) => 1,
            Failure::Internal(_) => 2,
            Failure::Structural(_) => 3,
            Failure::Rejected => 4,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InternalInvariant(_) => Failure::Internal(e.to_string()),
            other => Failure::Parse(other.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn write(path: &Path, value: &serde_json::Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    fs::write(path, text + "\n").map_err(|e| Failure::Internal(format!("{}: {e}", path.display())))
}

fn load_scenario(path: &Path) -> Result<fairdiv::io::Scenario, Failure> {
    parse_scenario(&read(path)?).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Divide { input, output, trace } => {
            let scenario = load_scenario(&input)?;
            let solution = solve(&scenario)?;
            write(&output, &allocation_to_json(&solution.document))?;
            if let Some(path) = trace {
                write(&path, &trace_rows_to_json(&solution.trace))?;
            }
            Ok(())
        }
        Command::Verify {
            scenario,
            allocation,
            tolerance,
        } => {
            let scenario = load_scenario(&scenario)?;
            let doc = parse_allocation(&read(&allocation)?)
                .map_err(|e| Failure::Parse(format!("{}: {e}", allocation.display())))?;
            let tolerance =
                rational::parse(&tolerance).map_err(|e| Failure::Parse(format!("--tolerance: {e}")))?;
            let report = verify(&scenario, &doc, &tolerance).map_err(|e| match e {
                VerifyError::Structural(_) => Failure::Structural(e.to_string()),
                VerifyError::Tolerance => Failure::Parse(format!("--tolerance: {e}")),
            })?;
            for line in report.lines() {
                println!("{line}");
            }
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Rejected)
            }
        }
        Command::Trace { input, output } => {
            let scenario = load_scenario(&input)?;
            let rows = trace_rows_to_json(&solve(&scenario)?.trace);
            match output {
                Some(path) => write(&path, &rows),
                None => {
                    println!("{}", serde_json::to_string_pretty(&rows).expect("JSON values always serialize"));
                    Ok(())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Parse(m) | Failure::Internal(m) | Failure::Structural(m) => eprintln!("error: {m}"),
                Failure::Rejected => {}
            }
            ExitCode::from(f.code())
        }
    }
}
