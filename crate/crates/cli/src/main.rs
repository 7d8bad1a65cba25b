//! `paramosc`: batch front-end for the propagator, invariant and
//! periodicity pipelines.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::commands::Outcome;
use crate::config::RunConfig;
use crate::output::Output;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Module(#[from] paramosc::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Parser)]
#[command(
    name = "paramosc",
    version,
    about = "Exact propagators and invariants of variable quadratic Hamiltonians"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(
        long,
        global = true,
        value_name = "DIR",
        default_value = "paramosc-out"
    )]
    out: PathBuf,
    /// Override a config value by dotted path, e.g. `model.lambda=0.5`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads for sweep entries.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: u16,
}

#[derive(Clone, Copy, Subcommand)]
enum Command {
    /// Solve the characteristic pair and write mu.csv.
    SolveMu,
    /// Classify periodic solutions of the Ince form.
    ClassifyInce,
    /// Propagator coefficients and an optional kernel slice.
    Green,
    /// Propagate a Hermite-Gaussian state.
    Propagate,
    /// Invariant eigenstate snapshots and Gram report.
    Eigenstates,
    /// Run acceptance suites.
    Validate,
}

fn run_one(command: Command, cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let out = Output::new(out)?;
    match command {
        Command::SolveMu => commands::solve_mu(cfg, &out),
        Command::ClassifyInce => commands::classify_ince(cfg, &out),
        Command::Green => commands::green(cfg, &out),
        Command::Propagate => commands::propagate(cfg, &out),
        Command::Eigenstates => commands::eigenstates(cfg, &out),
        Command::Validate => commands::validate(cfg, &out),
    }
}

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_VALIDATION: u8 = 2;

fn report(label: &str, result: &Result<Outcome, CliError>) -> u8 {
    match result {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{label}{line}");
            }
            if outcome.passed {
                EXIT_OK
            } else {
                EXIT_VALIDATION
            }
        }
        Err(e) => {
            eprintln!("{label}error: {e}");
            EXIT_ERROR
        }
    }
}

fn sweep(
    cli: &Cli,
    doc: Value,
    entries: Vec<serde_json::Map<String, Value>>,
) -> Result<u8, CliError> {
    let mut configs = Vec::with_capacity(entries.len());
    for (i, entry) in entries.iter().enumerate() {
        let mut d = doc.clone();
        for (key, value) in entry {
            config::apply_override(&mut d, key, value.clone())?;
        }
        let cfg =
            config::parse_document(d).map_err(|e| CliError::Config(format!("sweep[{i}]: {e}")))?;
        configs.push(cfg);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs as usize)
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    let results: Vec<Result<Outcome, CliError>> = pool.install(|| {
        configs
            .par_iter()
            .enumerate()
            .map(|(i, cfg)| run_one(cli.command, cfg, &cli.out.join(format!("sweep_{i:03}"))))
            .collect()
    });

    #[derive(Serialize)]
    struct Entry<'a> {
        index: usize,
        overrides: &'a serde_json::Map<String, Value>,
        status: &'static str,
        error: Option<String>,
    }
    let mut codes = Vec::new();
    let mut summary = Vec::new();
    for (i, (entry, result)) in entries.iter().zip(&results).enumerate() {
        let c = report(&format!("sweep[{i}] "), result);
        codes.push(c);
        summary.push(Entry {
            index: i,
            overrides: entry,
            status: match c {
                EXIT_OK => "ok",
                EXIT_VALIDATION => "failed_validation",
                _ => "error",
            },
            error: result.as_ref().err().map(ToString::to_string),
        });
    }
    Output::new(&cli.out)?.json("sweep.json", &summary)?;
    Ok(if codes.contains(&EXIT_ERROR) {
        EXIT_ERROR
    } else {
        codes.into_iter().max().unwrap_or(EXIT_OK)
    })
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    let mut doc = config::load(cli.config.as_deref(), &cli.set)?;
    let entries = match doc.as_object_mut().and_then(|m| m.remove("sweep")) {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(items)) => items
            .into_iter()
            .enumerate()
            .map(|(i, v)| match v {
                Value::Object(m) => Ok(m),
                _ => Err(CliError::Config(format!(
                    "sweep[{i}]: expected an object of overrides"
                ))),
            })
            .collect::<Result<_, _>>()?,
        Some(_) => return Err(CliError::Config("sweep: expected an array".into())),
    };
    if entries.is_empty() {
        let cfg = config::parse_document(doc)?;
        Ok(report("", &run_one(cli.command, &cfg, &cli.out)))
    } else {
        sweep(cli, doc, entries)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { EXIT_OK });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
