//! `florseq`: search Florentine arrays, generate sequence families from
//! them and check their correlation properties.
//!
//! Exit codes: 0 success, 2 invalid input or configuration, 3 a
//! verification failed, 4 a search ran out of budget while `--exact` was
//! requested.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, bail};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "florseq", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exhaustive search for a Florentine array with the most rows.
    Search(SearchArgs),
    /// Check an array file against its Tuscan-k condition.
    VerifyArray(VerifyArrayArgs),
    /// Build a sequence family from a Florentine array.
    GenFamily(GenFamilyArgs),
    /// Rebuild a family and check perfection and R_c <= 2N.
    VerifyFamily(VerifyFamilyArgs),
    /// Regenerate the summary of row counts and the N = 6 example family.
    Report(ReportArgs),
}

#[derive(Debug, Args, Clone)]
struct BudgetArgs {
    /// Stop after this many search nodes.
    #[arg(long)]
    budget_nodes: Option<u64>,
    /// Stop after this many seconds.
    #[arg(long)]
    budget_secs: Option<f64>,
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[arg(long = "n", visible_alias = "N")]
    n: usize,
    #[arg(long)]
    circular: bool,
    #[command(flatten)]
    budget: BudgetArgs,
    /// Fail with exit code 4 unless maximality is proven.
    #[arg(long)]
    exact: bool,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArrayArgs {
    path: PathBuf,
}

#[derive(Debug, Args)]
struct GenFamilyArgs {
    #[arg(long = "N", visible_alias = "n")]
    n: Option<usize>,
    #[arg(long)]
    array: PathBuf,
    /// `zero`, `file:PATH` (JSON list) or `seed:INT`.
    #[arg(long, default_value = "zero")]
    sigma: SigmaSource,
    /// Comma-separated 0-based row indices; all rows by default.
    #[arg(long, value_delimiter = ',')]
    rows: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Args)]
struct VerifyFamilyArgs {
    /// A `gen-family` output directory or a family spec JSON file.
    path: PathBuf,
    /// Write the report here; defaults to `report.json` next to the spec.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Largest n for the row-count table.
    #[arg(long = "n", visible_alias = "N", default_value_t = 7)]
    n: usize,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum SigmaSource {
    Zero,
    File(PathBuf),
    Seed(u64),
}

impl FromStr for SigmaSource {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        if s == "zero" {
            return Ok(SigmaSource::Zero);
        }
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(SigmaSource::File(path.into()));
        }
        if let Some(seed) = s.strip_prefix("seed:") {
            return Ok(SigmaSource::Seed(
                seed.parse().map_err(|_| anyhow!("bad seed {seed:?}"))?,
            ));
        }
        bail!("expected zero, file:PATH or seed:INT, got {s:?}")
    }
}

/// Why a command did not succeed, mapped onto the exit code.
#[derive(Debug)]
enum Failure {
    Invalid(anyhow::Error),
    Verification(String),
    Inexact(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 2,
            Failure::Verification(_) => 3,
            Failure::Inexact(_) => 4,
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Invalid(e.into())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Search(a) => commands::search(a),
        Command::VerifyArray(a) => commands::verify_array(a),
        Command::GenFamily(a) => commands::gen_family(a),
        Command::VerifyFamily(a) => commands::verify_family(a),
        Command::Report(a) => commands::report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Invalid(e) => eprintln!("error: {e:#}"),
                Failure::Verification(m) => eprintln!("verification failed: {m}"),
                Failure::Inexact(m) => eprintln!("inexact: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_sources() {
        assert_eq!("zero".parse::<SigmaSource>().unwrap(), SigmaSource::Zero);
        assert_eq!(
            "seed:42".parse::<SigmaSource>().unwrap(),
            SigmaSource::Seed(42)
        );
        assert_eq!(
            "file:a/b.json".parse::<SigmaSource>().unwrap(),
            SigmaSource::File("a/b.json".into())
        );
        assert!("seed:x".parse::<SigmaSource>().is_err());
        assert!("random".parse::<SigmaSource>().is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
