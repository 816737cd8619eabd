//! Command-line front end for the chakravala solver and its verification sweeps.
//!
//! Exit codes: 0 on success, 1 when a sweep finds violations, 2 on invalid input.

mod output;

use std::process::ExitCode;

use chakravala::arith::decimal;
use chakravala::oracle::OracleBudget;
use chakravala::stepgraph::{TheoremReport, Which};
use chakravala::{engine, Branch, Nat};
use clap::{Parser, Subcommand, ValueEnum};

use output::Format;

#[derive(Parser, Debug)]
#[command(name = "chakravala", version, about = "Pell's equation x^2 - n y^2 = ±1 by the chakravala cycle")]
struct Cli {
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve x^2 - n y^2 = ±1 for one n
    Solve {
        /// Nonsquare positive integer (decimal, any length)
        n: String,
        #[arg(long, value_enum, default_value_t = TwinArg::Minus)]
        twin: TwinArg,
    },
    /// Print the full stage table of a run
    Trace {
        n: String,
        /// Run both twin policies and print both tables
        #[arg(long)]
        both_branches: bool,
        /// Complete the sequence by mirroring once its midpoint is recognised
        #[arg(long)]
        shortcut: bool,
        #[arg(long, value_enum, default_value_t = TwinArg::Minus)]
        twin: TwinArg,
    },
    /// Run a verification sweep over [LO, HI]
    Verify {
        lo: u64,
        hi: u64,
        #[arg(long, value_enum, default_value_t = WhichArg::All)]
        which: WhichArg,
        /// Worker threads (default: available cores)
        #[arg(long)]
        jobs: Option<usize>,
        /// Largest y tried by the brute-force Pell oracle
        #[arg(long, default_value_t = OracleBudget::default().y_limit)]
        y_limit: u64,
    },
    /// Compare chakravala trace length with the continued-fraction period
    Compare {
        lo: u64,
        hi: u64,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TwinArg {
    Minus,
    Plus,
}

impl From<TwinArg> for Branch {
    fn from(t: TwinArg) -> Branch {
        match t {
            TwinArg::Minus => Branch::Minus,
            TwinArg::Plus => Branch::Plus,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum WhichArg {
    Prop2,
    Theorem,
    Structure,
    Oracle,
    All,
}

impl WhichArg {
    fn sweeps(self) -> Vec<Which> {
        match self {
            WhichArg::Prop2 => vec![Which::Prop2],
            WhichArg::Theorem => vec![Which::Theorem],
            WhichArg::Structure => vec![Which::Structure],
            WhichArg::Oracle => vec![Which::Oracle],
            WhichArg::All => Which::ALL.to_vec(),
        }
    }
}

const EXIT_VIOLATIONS: u8 = 1;
const EXIT_INVALID: u8 = 2;

fn invalid(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_INVALID)
}

fn parse_n(s: &str) -> Result<Nat, String> {
    let n = decimal::parse(s.trim()).ok_or_else(|| format!("{s:?} is not a positive decimal integer"))?;
    if chakravala::arith::is_square(&n) {
        return Err(chakravala::Error::NonsquareRequired(n).to_string());
    }
    Ok(n)
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, String> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err("--jobs must be at least 1".into());
        }
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| e.to_string())?;
    Ok(pool.install(f))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format;
    match cli.command {
        Command::Solve { n, twin } => {
            let n = match parse_n(&n) {
                Ok(n) => n,
                Err(e) => return invalid(e),
            };
            match engine::run(&n, twin.into()) {
                Ok(trace) => {
                    print!("{}", output::solve(&trace, format));
                    ExitCode::SUCCESS
                }
                Err(e) => invalid(e),
            }
        }
        Command::Trace { n, both_branches, shortcut, twin } => {
            let n = match parse_n(&n) {
                Ok(n) => n,
                Err(e) => return invalid(e),
            };
            let traces = if both_branches {
                engine::run_both_branches(&n).map(|b| b.traces().into_iter().cloned().collect::<Vec<_>>())
            } else if shortcut {
                engine::run_with_midpoint_shortcut(&n, twin.into()).map(|t| vec![t])
            } else {
                engine::run(&n, twin.into()).map(|t| vec![t])
            };
            match traces {
                Ok(traces) => {
                    print!("{}", output::traces(&traces, both_branches, format));
                    ExitCode::SUCCESS
                }
                Err(e) => invalid(e),
            }
        }
        Command::Verify { lo, hi, which, jobs, y_limit } => {
            if lo > hi {
                return invalid(format!("empty range: {lo} > {hi}"));
            }
            let budget = match OracleBudget::new(y_limit, 2) {
                Ok(b) => b,
                Err(e) => return invalid(e),
            };
            let reports: Vec<TheoremReport> =
                match with_pool(jobs, || which.sweeps().into_iter().map(|w| w.run(lo, hi, budget)).collect()) {
                    Ok(r) => r,
                    Err(e) => return invalid(e),
                };
            print!("{}", output::reports(&reports, format));
            for r in &reports {
                for v in &r.violations {
                    eprintln!("violation [{}] {v}", r.check);
                }
            }
            if reports.iter().all(TheoremReport::passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VIOLATIONS)
            }
        }
        Command::Compare { lo, hi, jobs } => {
            if lo > hi {
                return invalid(format!("empty range: {lo} > {hi}"));
            }
            match with_pool(jobs, || output::compare_rows(lo, hi)) {
                Ok(rows) => {
                    print!("{}", output::compare(&rows, format));
                    ExitCode::SUCCESS
                }
                Err(e) => invalid(e),
            }
        }
    }
}
