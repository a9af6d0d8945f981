use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, Context};
use serde::{Deserialize, Serialize};

use florseq_core::arrays::{search_max_rows, SearchBudget, SearchOptions, TuscanArray};
use florseq_core::correlation::FamilyStats;
use florseq_core::family::{evaluate, sha256_json, FamilySpec, StatsReport, Theorem1Report};
use florseq_core::seqgen::{gen_frank, PhaseSeq, SigmaTable};
use florseq_core::Error;

use crate::{
    BudgetArgs, Failure, Format, GenFamilyArgs, ReportArgs, SearchArgs, SigmaSource,
    VerifyArrayArgs, VerifyFamilyArgs,
};

const EXAMPLE_ARRAY: &str = include_str!("../../../fixtures/table1_6x6.json");

type Outcome = Result<(), Failure>;

/// Florentine violations are verification failures; everything else from
/// the core is bad input.
fn classify(e: Error) -> Failure {
    match e {
        Error::NotTuscan { .. } => Failure::Verification(e.to_string()),
        other => Failure::Invalid(other.into()),
    }
}

fn pool(jobs: usize) -> anyhow::Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()?)
}

fn budget(args: &BudgetArgs) -> anyhow::Result<SearchBudget> {
    let max_time = match args.budget_secs {
        Some(s) if !(s.is_finite() && s >= 0.0) => {
            return Err(anyhow!("--budget-secs must be a non-negative number"))
        }
        Some(s) => Some(Duration::from_secs_f64(s)),
        None => None,
    };
    Ok(SearchBudget {
        max_nodes: args.budget_nodes,
        max_time,
    })
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// `search` output: the array file layout plus the exhaustion flag.
#[derive(Debug, Serialize, Deserialize)]
pub struct SearchResult {
    pub n: usize,
    pub k: usize,
    pub circular: bool,
    pub rows: Vec<Vec<usize>>,
    pub exhausted: bool,
    pub inputs_sha256: String,
}

#[derive(Serialize)]
struct SearchInputs {
    n: usize,
    circular: bool,
    budget: SearchBudget,
}

pub fn search(args: SearchArgs) -> Outcome {
    let opts = SearchOptions {
        circular: args.circular,
        budget: budget(&args.budget)?,
        jobs: args.jobs.max(1),
    };
    let out = search_max_rows(args.n, &opts).map_err(classify)?;
    let result = SearchResult {
        n: out.array.n(),
        k: out.array.k(),
        circular: out.array.circular(),
        rows: out
            .array
            .rows()
            .iter()
            .map(|r| r.as_slice().to_vec())
            .collect(),
        exhausted: out.exhausted,
        inputs_sha256: sha256_json(&SearchInputs {
            n: args.n,
            circular: args.circular,
            budget: opts.budget,
        }),
    };
    let json = to_json(&result);
    match &args.out {
        Some(path) => write(path, &json)?,
        None => print!("{json}"),
    }
    eprintln!(
        "n = {} circular = {}: {} rows, {} ({} nodes, {:.3?})",
        args.n,
        args.circular,
        result.rows.len(),
        if out.exhausted {
            "exact"
        } else {
            "lower bound"
        },
        out.nodes,
        out.elapsed
    );
    if args.exact && !out.exhausted {
        return Err(Failure::Inexact(format!(
            "budget ran out; {} rows is only a lower bound",
            result.rows.len()
        )));
    }
    Ok(())
}

pub fn verify_array(args: VerifyArrayArgs) -> Outcome {
    let array = TuscanArray::from_json(&read(&args.path)?).map_err(classify)?;
    let kind = format!(
        "{}x{} Tuscan-{}{}",
        array.row_count(),
        array.n(),
        array.k(),
        if array.circular() { " circular" } else { "" }
    );
    match array.verify().violation() {
        None => {
            println!("PASS {}: {kind}", args.path.display());
            Ok(())
        }
        Some(v) => {
            println!("FAIL {}: {kind}: {v}", args.path.display());
            Err(Failure::Verification(v.to_string()))
        }
    }
}

fn load_sigma(source: &SigmaSource, n: usize) -> anyhow::Result<SigmaTable> {
    Ok(match source {
        SigmaSource::Zero => SigmaTable::zero(n),
        SigmaSource::Seed(seed) => SigmaTable::random(n, *seed),
        SigmaSource::File(path) => {
            let sigma: SigmaTable = serde_json::from_str(&read(path)?)
                .with_context(|| format!("parsing sigma table {}", path.display()))?;
            if sigma.n() != n {
                return Err(anyhow!(
                    "sigma table has {} entries, expected {n}",
                    sigma.n()
                ));
            }
            sigma
        }
    })
}

fn seq_file(row: usize) -> String {
    format!("seq_{row:03}.csv")
}

pub fn gen_family(args: GenFamilyArgs) -> Outcome {
    let array = TuscanArray::from_json(&read(&args.array)?).map_err(classify)?;
    let n = args.n.unwrap_or(array.n());
    let sigma = load_sigma(&args.sigma, n)?;
    let mut spec = FamilySpec::new(array, sigma);
    spec.n = n;
    if let Some(rows) = args.rows {
        spec = spec.with_rows(rows);
    }

    let (stats, report) = pool(args.jobs)?
        .install(|| evaluate(&spec))
        .map_err(classify)?;

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    write(&args.out.join("family.json"), &to_json(&spec))?;
    let seqs = rebuild_sequences(&spec).map_err(classify)?;
    match args.format {
        Format::Csv => {
            for (row, seq) in spec.rows.iter().zip(&seqs) {
                write(&args.out.join(seq_file(*row)), &seq.to_csv())?;
            }
        }
        Format::Json => write(&args.out.join("sequences.json"), &to_json(&seqs))?,
    }
    write(&args.out.join("stats.json"), &to_json(&stats))?;
    print_summary(&stats.stats, &report);
    Ok(())
}

fn rebuild_sequences(spec: &FamilySpec) -> Result<Vec<PhaseSeq>, Error> {
    spec.rows
        .iter()
        .map(|&r| gen_frank(spec.n, &spec.array.rows()[r], &spec.sigma))
        .collect()
}

fn print_summary(stats: &FamilyStats, report: &Theorem1Report) {
    println!(
        "M = {}  P = {}  all perfect = {}  R_a = {:.3e}  R_c = {:.6}  2N = {}  bound holds = {}",
        stats.m,
        stats.period,
        report.all_perfect,
        stats.r_a,
        stats.r_c,
        report.cross_bound,
        report.bound_2n_holds
    );
    println!(
        "Welch bound = {:.6}  Sarwate bound = {:.6}  witness = {:?}",
        stats.welch_bound, stats.sarwate_bound, report.witness
    );
}

/// `verify-family` output.
#[derive(Debug, Serialize, Deserialize)]
pub struct VerifyReport {
    pub theorem1: Theorem1Report,
    pub stats: StatsReport,
    /// Sequence files found next to the spec and compared with the rebuild.
    pub sequences_checked: usize,
}

/// Compare stored sequences (CSV or JSON) with the rebuilt ones.
fn check_stored(dir: &Path, spec: &FamilySpec, rebuilt: &[PhaseSeq]) -> Result<usize, Failure> {
    let json = dir.join("sequences.json");
    let stored: Vec<(String, PhaseSeq)> = if json.exists() {
        let seqs: Vec<PhaseSeq> =
            serde_json::from_str(&read(&json)?).context("parsing sequences.json")?;
        if seqs.len() != rebuilt.len() {
            return Err(Failure::Verification(format!(
                "sequences.json holds {} sequences, spec selects {}",
                seqs.len(),
                rebuilt.len()
            )));
        }
        seqs.into_iter()
            .enumerate()
            .map(|(i, s)| (format!("sequences.json[{i}]"), s))
            .collect()
    } else {
        let mut found = Vec::new();
        for &row in &spec.rows {
            let path = dir.join(seq_file(row));
            if path.exists() {
                let seq = PhaseSeq::from_csv(&read(&path)?).map_err(classify)?;
                found.push((seq_file(row), seq));
            } else if !found.is_empty() {
                return Err(Failure::Verification(format!("missing {}", seq_file(row))));
            }
        }
        found
    };
    for ((name, seq), expect) in stored.iter().zip(rebuilt) {
        if seq != expect {
            return Err(Failure::Verification(format!(
                "{name} does not match the sequence rebuilt from the spec"
            )));
        }
    }
    Ok(stored.len())
}

pub fn verify_family(args: VerifyFamilyArgs) -> Outcome {
    let (spec_path, dir): (PathBuf, PathBuf) = if args.path.is_dir() {
        (args.path.join("family.json"), args.path.clone())
    } else {
        let dir = args
            .path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        (args.path.clone(), dir)
    };
    let spec: FamilySpec = serde_json::from_str(&read(&spec_path)?)
        .with_context(|| format!("parsing {}", spec_path.display()))?;

    let (stats, theorem1) = pool(args.jobs)?
        .install(|| evaluate(&spec))
        .map_err(classify)?;
    let rebuilt = rebuild_sequences(&spec).map_err(classify)?;
    let sequences_checked = check_stored(&dir, &spec, &rebuilt)?;

    print_summary(&stats.stats, &theorem1);
    let ok = theorem1.all_perfect && theorem1.bound_2n_holds;
    let verdict = format!(
        "all_perfect = {}, R_c = {} vs 2N = {}",
        theorem1.all_perfect, theorem1.r_c, theorem1.cross_bound
    );
    let report = VerifyReport {
        theorem1,
        stats,
        sequences_checked,
    };
    let out = args.out.unwrap_or_else(|| dir.join("report.json"));
    write(&out, &to_json(&report))?;
    if ok {
        Ok(())
    } else {
        Err(Failure::Verification(verdict))
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RowCountLine {
    pub n: usize,
    pub linear_rows: usize,
    pub linear_exhausted: bool,
    pub circular_rows: usize,
    pub circular_exhausted: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Summary {
    pub row_counts: Vec<RowCountLine>,
    pub example: StatsReport,
    pub example_theorem1: Theorem1Report,
}

pub fn report(args: ReportArgs) -> Outcome {
    let budget = budget(&args.budget)?;
    let mut row_counts = Vec::new();
    for n in 1..=args.n {
        let run = |circular| {
            let opts = SearchOptions {
                circular,
                budget,
                jobs: args.jobs.max(1),
            };
            search_max_rows(n, &opts).map_err(classify)
        };
        let linear = run(false)?;
        let circular = run(true)?;
        row_counts.push(RowCountLine {
            n,
            linear_rows: linear.array.row_count(),
            linear_exhausted: linear.exhausted,
            circular_rows: circular.array.row_count(),
            circular_exhausted: circular.exhausted,
        });
    }

    let array = TuscanArray::from_json(EXAMPLE_ARRAY).map_err(classify)?;
    let spec = FamilySpec::new(array, SigmaTable::zero(6));
    let (example, example_theorem1) = pool(args.jobs)?
        .install(|| evaluate(&spec))
        .map_err(classify)?;

    let mark = |rows: usize, exact: bool| {
        if exact {
            rows.to_string()
        } else {
            format!(">={rows}")
        }
    };
    println!("| n | F(n) | F_c(n) |");
    println!("|---|------|--------|");
    for line in &row_counts {
        println!(
            "| {} | {} | {} |",
            line.n,
            mark(line.linear_rows, line.linear_exhausted),
            mark(line.circular_rows, line.circular_exhausted)
        );
    }
    println!();
    println!("N = 6 example family (sigma = 0):");
    print_summary(&example.stats, &example_theorem1);

    let summary = Summary {
        row_counts,
        example,
        example_theorem1,
    };
    if let Some(path) = &args.out {
        let text = match args.format {
            Format::Json => to_json(&summary),
            Format::Csv => {
                let mut s = String::from(
                    "n,linear_rows,linear_exhausted,circular_rows,circular_exhausted\n",
                );
                for l in &summary.row_counts {
                    s.push_str(&format!(
                        "{},{},{},{},{}\n",
                        l.n,
                        l.linear_rows,
                        l.linear_exhausted,
                        l.circular_rows,
                        l.circular_exhausted
                    ));
                }
                s
            }
        };
        write(path, &text)?;
    }
    Ok(())
}
