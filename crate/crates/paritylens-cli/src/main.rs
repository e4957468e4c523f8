//! Command-line fairness auditor: dataset audits, hiring-model
//! computations, policy feasibility sweeps, impossibility verification.
//!
//! Exit codes: 0 when the command succeeds and nothing is violated, 2 when
//! an audit finds a violated criterion or the verifier finds a
//! counterexample, 1 on any usage or processing error.

mod audit;
mod scenario;
mod verify;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "paritylens",
    version,
    about = "Audits binary decision data for group fairness, explores an exact hiring model, and verifies a fairness impossibility statement by enumeration"
)]
struct Cli {
    /// Emit machine-readable JSON on standard out; human-readable text
    /// moves to standard error.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Audit a decision dataset (CSV or JSON) for group fairness
    Audit(audit::AuditArgs),
    /// Exact per-gender rates of a scenario under a hiring policy
    SdRates(scenario::RatesArgs),
    /// Optimal threshold, posteriors and decision rule for a scenario
    SdOptimal(scenario::OptimalArgs),
    /// Search the policy square for points meeting a fairness goal
    SdFeasible(scenario::FeasibleArgs),
    /// Generate a synthetic decision dataset from a scenario
    SdSimulate(scenario::SimulateArgs),
    /// Exhaustively check the predictive-parity/error-rate-balance
    /// incompatibility over a small exact space
    VerifyImpossibility(verify::VerifyArgs),
}

/// Output channels: human text goes to stdout normally, to stderr in
/// `--json` mode (where stdout carries exactly one JSON document).
pub(crate) struct Out {
    json: bool,
}

impl Out {
    pub fn human(&self, text: impl AsRef<str>) {
        if self.json {
            eprintln!("{}", text.as_ref());
        } else {
            println!("{}", text.as_ref());
        }
    }

    pub fn is_json(&self) -> bool {
        self.json
    }

    /// Prints the machine document (JSON mode only). Key order inside
    /// `serde_json::Value` objects is sorted, so output is deterministic.
    pub fn machine(&self, v: &serde_json::Value) {
        if self.json {
            println!("{}", serde_json::to_string_pretty(v).expect("JSON value serializes"));
        }
    }
}

pub(crate) fn fmt_rational(r: &paritylens::Rational) -> String {
    paritylens::rational::fraction_and_decimal(r)
}

pub(crate) fn fmt_rate(v: &paritylens::RateValue) -> String {
    match v.as_defined() {
        Some(r) => fmt_rational(r),
        None => "UNDEFINED".to_string(),
    }
}

/// Exit status used when a check ran correctly but found the property
/// violated (audit violations, enumeration counterexamples).
pub(crate) const EXIT_VIOLATION: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    match std::env::var("PARITYLENS_THREADS") {
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(n) if n >= 1 => paritylens::init_thread_pool(Some(n)),
            _ => {
                eprintln!("error: PARITYLENS_THREADS must be a positive integer, got {raw:?}");
                return ExitCode::from(1);
            }
        },
        Err(_) => {}
    }

    let out = Out { json: cli.json };
    let result = match &cli.command {
        Command::Audit(args) => audit::run(args, &out),
        Command::SdRates(args) => scenario::run_rates(args, &out),
        Command::SdOptimal(args) => scenario::run_optimal(args, &out),
        Command::SdFeasible(args) => scenario::run_feasible(args, &out),
        Command::SdSimulate(args) => scenario::run_simulate(args, &out),
        Command::VerifyImpossibility(args) => verify::run(args, &out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
