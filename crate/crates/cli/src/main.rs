use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use volpres_cli::{emit_plotdata, parse_scenario, run, run_checks, sweep, Scenario};

/// Volume-preserving immersion geodesics and Euler flows.
#[derive(Parser)]
#[command(name = "volpres", version)]
struct Cli {
    /// Worker threads for `check` and `sweep`.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Overrides the scenario seed (TOML integers stop at 2^63 - 1).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(..=i64::MAX as u64))]
    seed: Option<u64>,
    /// Output directory; defaults to the scenario's `out`, else `runs/<name>`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario.
    Run { scenario: PathBuf },
    /// Run the invariant suite.
    Check,
    /// Convert a run or sweep directory into whitespace-separated plot files.
    Plotdata { run_dir: PathBuf },
    /// Run a scenario once per `sweep.dt` entry and fit the convergence order.
    Sweep { scenario: PathBuf },
}

const VALIDATION: u8 = 2;
const IO: u8 = 1;

fn load(path: &Path, cli: &Cli) -> Result<(Scenario, PathBuf), u8> {
    let text = fs::read_to_string(path).map_err(|e| {
        eprintln!("{}: {e}", path.display());
        IO
    })?;
    let mut s = parse_scenario(&text).map_err(|e| {
        eprintln!("{}:\n{e}", path.display());
        VALIDATION
    })?;
    if let Some(seed) = cli.seed {
        s.seed = seed;
    }
    let out = cli
        .out
        .clone()
        .or_else(|| s.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| Path::new("runs").join(&s.name));
    Ok((s, out))
}

fn exit(code: i32) -> ExitCode {
    ExitCode::from(u8::try_from(code).unwrap_or(1))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run { scenario } => {
            let (s, out) = match load(scenario, &cli) {
                Ok(v) => v,
                Err(code) => return ExitCode::from(code),
            };
            match run(&s, &out) {
                Ok(record) => {
                    if let Some(f) = &record.failure {
                        eprintln!("{}: {} failure: {}", s.name, if f.exit_code() == 2 { "validation" } else { "numerical" }, f.message);
                    }
                    println!("{}", out.display());
                    exit(record.exit_code())
                }
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::from(IO)
                }
            }
        }
        Command::Sweep { scenario } => {
            let (s, out) = match load(scenario, &cli) {
                Ok(v) => v,
                Err(code) => return ExitCode::from(code),
            };
            if s.sweep.is_none() {
                eprintln!("{}: scenario has no [sweep] table", scenario.display());
                return ExitCode::from(VALIDATION);
            }
            match sweep(&s, &out, cli.threads) {
                Ok(record) => {
                    println!("{} slope {:.4} (reference: {})", out.display(), record.slope, record.reference);
                    exit(record.exit_code())
                }
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::from(IO)
                }
            }
        }
        Command::Check => {
            let outcomes = run_checks(cli.threads);
            for o in &outcomes {
                println!("{o}");
            }
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            println!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
            if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
        Command::Plotdata { run_dir } => match emit_plotdata(run_dir) {
            Ok(files) => {
                for f in files {
                    println!("{}", f.display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(IO)
            }
        },
    }
}
