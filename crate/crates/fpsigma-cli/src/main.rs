//! Command-line front end for exact intersection-rank coefficients of
//! subgroups of free products: factor-freeness checks, coefficients with LP
//! certificates, extremal witness construction and re-verification, fiber
//! intersections, and brute-force lower bounds. Inputs and reports are JSON;
//! human summaries go to standard error.

mod commands;
mod input;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "fpsigma",
    version,
    about = "Exact intersection-rank coefficients of subgroups of free products"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the input subgroup is factor-free and noncyclic.
    Check {
        /// Input JSON: {"factors": [...]} plus "generators" or "graph".
        input: PathBuf,
        /// Also write the irreducible graph alone to this file.
        #[arg(long, value_name = "FILE")]
        graph_out: Option<PathBuf>,
        /// Write the JSON report here instead of standard output.
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Compute the exact coefficient with primal and dual LP certificates.
    Sigma {
        /// Input JSON: {"factors": [...]} plus "generators" or "graph".
        input: PathBuf,
        /// Degree bound; defaults to max(factor count, largest factor order).
        #[arg(long)]
        d: Option<usize>,
        /// Embed an input with three or more factors into a two-factor product.
        #[arg(long)]
        embed: bool,
        /// Write the inequality system in LP text form to this file.
        #[arg(long, value_name = "FILE")]
        emit_lp: Option<PathBuf>,
        /// Write the JSON report here instead of standard output.
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Construct an extremal partner subgroup and verify it.
    Witness {
        /// Input JSON: {"factors": [...]} plus "generators" or "graph".
        input: PathBuf,
        /// Degree bound; defaults to max(factor count, largest factor order).
        #[arg(long)]
        d: Option<usize>,
        /// Embed an input with three or more factors into a two-factor product.
        #[arg(long)]
        embed: bool,
        /// Write the witness bundle here instead of standard output.
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Intersect two subgroups: per-component rank table of the fiber core.
    Intersect {
        /// First input, same JSON format as the other commands.
        input1: PathBuf,
        /// Second input over the same free product.
        input2: PathBuf,
        /// Write the JSON report here instead of standard output.
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Brute-force ratio table over all bounded-size partner candidates.
    Oracle {
        /// Input JSON: {"factors": [...]} plus "generators" or "graph".
        input: PathBuf,
        /// Degree bound; defaults to max(factor count, largest factor order).
        #[arg(long)]
        d: Option<usize>,
        /// Cap on secondary vertices of enumerated candidates.
        #[arg(long)]
        max_secondary: usize,
        /// Write the JSON report here instead of standard output.
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Recheck an emitted witness bundle from scratch.
    Verify {
        /// A witness bundle produced by the witness subcommand.
        bundle: PathBuf,
        /// Degree bound; defaults to the bundle's own.
        #[arg(long)]
        d: Option<usize>,
        /// Write the JSON report here instead of standard output.
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Clap exits 2 by convention; here 2 means not-factor-free, so
            // usage problems report 1 instead.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Check { input, graph_out, output } => {
            commands::cmd_check(input, graph_out.as_deref(), output.as_deref())
        }
        Command::Sigma { input, d, embed, emit_lp, output } => {
            commands::cmd_sigma(input, *d, *embed, emit_lp.as_deref(), output.as_deref())
        }
        Command::Witness { input, d, embed, output } => {
            commands::cmd_witness(input, *d, *embed, output.as_deref())
        }
        Command::Intersect { input1, input2, output } => {
            commands::cmd_intersect(input1, input2, output.as_deref())
        }
        Command::Oracle { input, d, max_secondary, output } => {
            commands::cmd_oracle(input, *d, *max_secondary, output.as_deref())
        }
        Command::Verify { bundle, d, output } => {
            commands::cmd_verify(bundle, *d, output.as_deref())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
