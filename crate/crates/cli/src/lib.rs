//! Command-line front end for `balhyp-core`: file commands and the
//! experiment harness.

pub mod commands;
pub mod exit;
pub mod experiment;
pub mod formats;

use std::io::Write;

use anyhow::Result;
use clap::{Parser, Subcommand};

use commands::{BisArgs, BoundArgs, ColorArgs, ExactArgs, FallbackArgs, GenArgs, VerifyArgs};
use experiment::ExperimentSpec;

#[derive(Debug, Parser)]
#[command(
    name = "balhyp",
    version,
    about = "Balanced independent sets and colorings of k-partite hypergraphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample H(k, n, p) and write it in `khg 1` format.
    Gen(GenArgs),
    /// Validate a hypergraph file, and optionally a set or coloring for it.
    Verify(VerifyArgs),
    /// Best-of-trials balanced independent set.
    Bis(BisArgs),
    /// Two-stage balanced coloring.
    Color(ColorArgs),
    /// Balanced coloring from a perfect matching of the complement.
    FallbackColor(FallbackArgs),
    /// Brute-force oracles.
    Exact(ExactArgs),
    /// Expected number of balanced independent sets of side s in H(k, N, p).
    Bound(BoundArgs),
    /// Grid experiment with per-trial rows and a summary.
    Experiment(ExperimentSpec),
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Gen(a) => commands::cmd_gen(a, out),
        Command::Verify(a) => commands::cmd_verify(a, out),
        Command::Bis(a) => commands::cmd_bis(a, out),
        Command::Color(a) => commands::cmd_color(a, out),
        Command::FallbackColor(a) => commands::cmd_fallback(a, out),
        Command::Exact(a) => commands::cmd_exact(a, out),
        Command::Bound(a) => commands::cmd_bound(a, out),
        Command::Experiment(a) => commands::cmd_experiment(a, out),
    }
}
