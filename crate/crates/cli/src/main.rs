//! `dynstr`: runs a line-protocol script from a file or standard input.

use std::io::{self, BufRead, Write};
use std::path::PathBuf;

use anyhow::Context;
use clap::Parser;
use dynstr_cli::{Options, Session};

/// Executes dynamic-string commands, one result line per command.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    /// Script to run; reads standard input when absent.
    script: Option<PathBuf>,
    /// Initial seed (a `SEED` command overrides it).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Word size of the random bits (levels are capped at twice this).
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u32).range(1..=64))]
    word_bits: u32,
    /// Start with automatic restarts off.
    #[arg(long)]
    no_restart: bool,
    /// Restarts attempted per command before a failure is reported.
    #[arg(long, default_value_t = 32)]
    max_retries: u32,
    /// Repetitions per size for `BENCH`.
    #[arg(long, default_value_t = 3)]
    bench_reps: usize,
}

fn main() -> anyhow::Result<()> {
    let args = Args::parse();
    let opts = Options {
        seed: args.seed,
        word_bits: args.word_bits,
        restart: !args.no_restart,
        max_retries: args.max_retries,
        bench_reps: args.bench_reps,
    };
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    match &args.script {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let base = path.parent().map(PathBuf::from).unwrap_or_default();
            let mut session = Session::new(opts, base);
            for line in session.run_script(&text) {
                writeln!(out, "{line}")?;
            }
        }
        None => {
            let mut session = Session::new(opts, std::env::current_dir()?);
            for (i, line) in io::stdin().lock().lines().enumerate() {
                if let Some(result) = session.run_line(i + 1, &line?) {
                    writeln!(out, "{result}")?;
                    out.flush()?;
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}
