//! Command-line front end for quantimetric: behavioural distances of
//! automata, up-to witness certification, oracles, benchmarks and lifting
//! demos.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use quantimetric::QuantaleId;
use serde::Serialize;

pub mod commands;
pub mod config;
pub mod error;
pub mod inputs;

pub use error::{CliError, ExitStatus, Result};

use commands::LiftKind;
use config::{parse_upto, FileConfig, Overrides, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "quantimetric", version, about = "Behavioural distances for automata, with up-to witnesses")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Args)]
pub struct GlobalArgs {
    /// bool2, unit-rev or ext-rev
    #[arg(long, global = true)]
    pub quantale: Option<QuantaleId>,

    /// Discount factor in (0,1)
    #[arg(long = "c", global = true)]
    pub c: Option<f64>,

    #[arg(long, global = true)]
    pub tol: Option<f64>,

    #[arg(long = "max-iter", global = true)]
    pub max_iter: Option<usize>,

    /// Comma-separated up-to techniques, applied in the listed order
    #[arg(long, global = true)]
    pub upto: Option<String>,

    /// Print one JSON line instead of text
    #[arg(long, global = true)]
    pub json: bool,

    /// Also compute the brute-force or word-based reference value
    #[arg(long, global = true)]
    pub oracle: bool,

    /// Enumeration cap
    #[arg(long, global = true, env = "QUANTIMETRIC_CAP")]
    pub cap: Option<usize>,

    /// Accept techniques without a compatibility basis
    #[arg(long = "unsafe", global = true)]
    pub allow_unsafe: bool,

    /// TOML file with defaults for the options above
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Fig1,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Behavioural distance between two subset states of an automaton
    Distance {
        automaton: PathBuf,
        /// State names, e.g. `x0` or `{x0,x1}`
        left: String,
        right: String,
    },
    /// Certify a witness relation up to the techniques of --upto
    CheckWitness { automaton: PathBuf, witness: PathBuf },
    /// Length of a shortest distinguishing word
    Oracle {
        automaton: PathBuf,
        left: String,
        right: String,
    },
    /// Naive fixpoint against up-to certification on an example family
    Bench {
        #[arg(long, value_enum, default_value = "fig1")]
        family: Family,
        #[arg(long, default_value_t = 1)]
        from: usize,
        #[arg(long)]
        to: usize,
    },
    /// Lift a relation to sets or distributions
    LiftDemo {
        #[arg(value_enum)]
        kind: LiftKind,
        inputs: PathBuf,
    },
    /// Print the two-chain automaton of size n
    GenFig1 { n: usize },
    /// Print the canonical witness for the two-chain automaton of size n
    GenWitness {
        n: usize,
        /// Claimed bound instead of c^n
        #[arg(long)]
        bound: Option<f64>,
    },
}

impl GlobalArgs {
    pub fn run_config(&self) -> Result<RunConfig> {
        let file = self.config.as_deref().map(FileConfig::load).transpose()?;
        let flags = Overrides {
            quantale: self.quantale,
            c: self.c,
            tol: self.tol,
            max_iter: self.max_iter,
            upto: self.upto.as_deref().map(parse_upto),
            cap: self.cap,
        };
        RunConfig::resolve(file.as_ref(), &flags)
    }
}

fn emit<T: Serialize + std::fmt::Display>(out: &mut dyn Write, json: bool, value: &T) -> Result<()> {
    if json {
        writeln!(out, "{}", serde_json::to_string(value).map_err(|e| CliError::Output(e.to_string()))?)?;
    } else {
        writeln!(out, "{value}")?;
    }
    Ok(())
}

fn emit_json<T: Serialize>(out: &mut dyn Write, pretty: bool, value: &T) -> Result<()> {
    let text = if pretty {
        serde_json::to_string_pretty(value)
    } else {
        serde_json::to_string(value)
    }
    .map_err(|e| CliError::Output(e.to_string()))?;
    writeln!(out, "{text}")?;
    Ok(())
}

/// Runs one parsed command, writing its report to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<ExitStatus> {
    let cfg = cli.global.run_config()?;
    let json = cli.global.json;
    match &cli.command {
        Command::Distance {
            automaton,
            left,
            right,
        } => {
            let r = commands::distance(automaton, left, right, &cfg, cli.global.oracle)?;
            emit(out, json, &r)?;
        }
        Command::CheckWitness { automaton, witness } => {
            let r = commands::check_witness_file(automaton, witness, &cfg, cli.global.allow_unsafe)?;
            emit(out, json, &r)?;
            if !r.certified {
                return Ok(ExitStatus::Refuted);
            }
        }
        Command::Oracle {
            automaton,
            left,
            right,
        } => {
            let r = commands::oracle(automaton, left, right, &cfg)?;
            emit(out, json, &r)?;
        }
        Command::Bench { family: Family::Fig1, from, to } => {
            let rows = commands::bench(*from, *to, &cfg)?;
            if json {
                for row in &rows {
                    emit_json(out, false, &row.json())?;
                }
            } else {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(commands::BENCH_HEADER)?;
                for row in &rows {
                    w.write_record(row.record())?;
                }
                w.flush()?;
            }
        }
        Command::LiftDemo { kind, inputs } => {
            let rows = commands::lift_demo(*kind, inputs, &cfg, cli.global.oracle)?;
            for row in &rows {
                emit(out, json, row)?;
            }
            if rows.iter().any(|r| r.agree == Some(false)) {
                return Ok(ExitStatus::Refuted);
            }
        }
        Command::GenFig1 { n } => emit_json(out, !json, &commands::gen_fig1_json(*n)?)?,
        Command::GenWitness { n, bound } => {
            emit_json(out, !json, &commands::gen_witness_json(*n, cfg.c, *bound)?)?
        }
    }
    Ok(ExitStatus::Ok)
}
