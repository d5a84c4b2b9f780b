//! `suq2-bmo`: command-line driver for the `suq2-bmo` library.

mod commands;
mod config;
mod specs;
mod verify;

use std::fs::File;
use std::io::{self, Write};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use serde::Serialize;
use serde_json::Value;

use commands::{Command, Outcome};
use config::{Format, GlobalArgs, RunConfig};

const GRAMMAR: &str = "\
ELEMENTS
  An element of Pol(SU_q(2)) is a sum of terms `c * k l m`, each standing for
  c · α^k γ^l (γ*)^m, where a negative k means (α*)^|k|. A bare `k l m` has
  coefficient 1. Coefficients are exact rational expressions in q built from
  numbers, q, + - * / ^ and parentheses; a coefficient containing + must be
  parenthesized.

    \"0 1 1\"                         γ*γ
    \"1 0 0 + q * -1 0 0\"            α + q α*
    \"(1 - q^2)/2 * 0 1 1 + -3 * 0 0 0\"

MATRICES
  Rows are separated by `;`, entries by spaces; a complex entry is `re,im`:
  \"1 0; 0 -1\", \"0 1,1; 1,-1 0\".

EXIT STATUS
  0 when every check passes, 1 when a check fails, 2 on invalid input.";

#[derive(Parser, Debug)]
#[command(name = "suq2-bmo", version, about = "Harmonic analysis and BMO computations on SU_q(2)", after_long_help = GRAMMAR, after_help = "Run with --help for the element grammar.")]
struct Cli {
    #[command(flatten)]
    globals: GlobalArgs,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Serialize)]
struct Report<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    input_hash: String,
    passed: bool,
    result: Value,
}

fn write_report(cfg: &RunConfig, outcome: &Outcome) -> Result<()> {
    let sink: Box<dyn Write> = match &cfg.out {
        Some(path) => Box::new(File::create(path).with_context(|| format!("creating {}", path.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    match cfg.format {
        Format::Json => {
            let report = Report {
                tool: "suq2-bmo",
                version: env!("CARGO_PKG_VERSION"),
                config: cfg,
                input_hash: cfg.input_hash(),
                passed: outcome.passed,
                result: outcome.result.clone(),
            };
            let mut sink = sink;
            serde_json::to_writer_pretty(&mut sink, &report)?;
            writeln!(sink)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(sink);
            w.write_record(&outcome.table.header)?;
            for row in &outcome.table.rows {
                w.write_record(row)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    let cfg = RunConfig::resolve(&cli.globals, cli.command)?;
    let outcome = commands::run(&cfg)?;
    write_report(&cfg, &outcome)?;
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
