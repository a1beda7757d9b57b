//! Command-line interface for embedding-alignment scoring.
//!
//! Reports go to standard error; scores and sweep tables go to the file
//! given with `--out` or to standard output. Exit codes: 0 on success, 1 on
//! runtime failure, 2 on usage errors (clap's default).

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use embalign::correlation::kendall_tau_b;
use embalign::dataset::{read_tsv, write_scores, write_sweep, EvaluationSet, SweepRow};
use embalign::embedding::{load_binary_filtered, load_text_filtered, EmbeddingTable};
use embalign::metrics::{self, Metric, MetricConfig, OovPolicy, SimilarityMatrix};
use embalign::text::{tokenize, Segment, TokenizePolicy};

#[derive(Parser)]
#[command(
    name = "embalign",
    version,
    about = "Score machine translation output by aligning word embeddings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score every segment pair and write per-segment scores as TSV.
    Score {
        #[command(flatten)]
        common: CommonArgs,
        /// Metric to compute.
        #[arg(long, value_enum)]
        metric: MetricArg,
        /// Alignment cutoff in [0, 1]; similarities below it count as 0.
        #[arg(long, default_value_t = 0.0, value_parser = parse_threshold)]
        threshold: f64,
        /// Output path; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Correlate metric scores against the dataset's human judgments.
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
        /// Metric to compute.
        #[arg(long, value_enum)]
        metric: MetricArg,
        /// Alignment cutoff in [0, 1]; similarities below it count as 0.
        #[arg(long, default_value_t = 0.0, value_parser = parse_threshold)]
        threshold: f64,
    },
    /// Evaluate across a threshold grid and write per-point tau as CSV.
    #[command(name = "sweep-threshold")]
    SweepThreshold {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated metrics; all three when omitted.
        #[arg(long, value_enum, value_delimiter = ',')]
        metrics: Option<Vec<MetricArg>>,
        /// Comma-separated thresholds; 0.0 through 0.9 in steps of 0.1 when
        /// omitted.
        #[arg(long, value_delimiter = ',', value_parser = parse_threshold)]
        grid: Option<Vec<f64>>,
        /// Output path; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// Embedding file in word2vec text or binary format.
    #[arg(long)]
    emb: PathBuf,
    /// Embedding file format; auto picks binary for a .bin extension.
    #[arg(long, value_enum, default_value_t = FormatArg::Auto)]
    format: FormatArg,
    /// How hypothesis and reference text is tokenized.
    #[arg(long, value_enum, default_value_t = TokenizerArg::Punct)]
    tokenizer: TokenizerArg,
    /// Similarity for word pairs missing from the embeddings.
    #[arg(long, value_enum, default_value_t = OovArg::Surface)]
    oov: OovArg,
    /// Retry failed lookups with the lowercased token.
    #[arg(long)]
    lowercase_fallback: bool,
    /// Load every embedding instead of only those for dataset tokens.
    #[arg(long)]
    full_vocab: bool,
    /// Dataset TSV: segment_id, hypothesis, reference, optional human score.
    dataset: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MetricArg {
    Aas,
    Mas,
    Has,
}

impl MetricArg {
    fn metric(self) -> Metric {
        match self {
            MetricArg::Aas => Metric::Aas,
            MetricArg::Mas => Metric::Mas,
            MetricArg::Has => Metric::Has,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Auto,
    Bin,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum TokenizerArg {
    Whitespace,
    Punct,
}

impl TokenizerArg {
    fn policy(self) -> TokenizePolicy {
        match self {
            TokenizerArg::Whitespace => TokenizePolicy::Whitespace,
            TokenizerArg::Punct => TokenizePolicy::WhitespacePunct,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OovArg {
    Surface,
    Zero,
}

impl OovArg {
    fn policy(self) -> OovPolicy {
        match self {
            OovArg::Surface => OovPolicy::SurfaceMatch,
            OovArg::Zero => OovPolicy::Zero,
        }
    }
}

fn parse_threshold(raw: &str) -> Result<f64, String> {
    let value: f64 = raw.parse().map_err(|_| format!("{raw:?} is not a number"))?;
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(format!("threshold {value} lies outside [0, 1]"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Score {
            common,
            metric,
            threshold,
            out,
        } => cmd_score(&common, metric.metric(), threshold, out.as_deref()),
        Command::Evaluate {
            common,
            metric,
            threshold,
        } => cmd_evaluate(&common, metric.metric(), threshold),
        Command::SweepThreshold {
            common,
            metrics,
            grid,
            out,
        } => cmd_sweep(&common, metrics, grid, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

/// Dataset, tokenized segment pairs, and the (vocabulary-restricted)
/// embedding table.
struct Prepared {
    set: EvaluationSet,
    pairs: Vec<(Segment, Segment)>,
    table: EmbeddingTable,
}

fn prepare(common: &CommonArgs) -> Result<Prepared> {
    let file = File::open(&common.dataset)
        .with_context(|| format!("cannot open dataset {}", common.dataset.display()))?;
    let name = common
        .dataset
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    let set = read_tsv(BufReader::new(file), name)
        .with_context(|| format!("cannot parse dataset {}", common.dataset.display()))?;

    let policy = common.tokenizer.policy();
    let pairs: Vec<(Segment, Segment)> = set
        .items()
        .iter()
        .map(|item| {
            (
                tokenize(&item.hypothesis, policy),
                tokenize(&item.reference, policy),
            )
        })
        .collect();

    let vocab = if common.full_vocab {
        None
    } else {
        let mut tokens: HashSet<String> = HashSet::new();
        for (hyp, reference) in &pairs {
            for token in hyp.tokens().iter().chain(reference.tokens()) {
                if common.lowercase_fallback {
                    tokens.insert(token.to_lowercase());
                }
                tokens.insert(token.clone());
            }
        }
        Some(tokens)
    };

    let table = load_table(common, vocab.as_ref())?;
    Ok(Prepared { set, pairs, table })
}

fn load_table(common: &CommonArgs, vocab: Option<&HashSet<String>>) -> Result<EmbeddingTable> {
    let file = File::open(&common.emb)
        .with_context(|| format!("cannot open embeddings {}", common.emb.display()))?;
    let reader = BufReader::new(file);
    let binary = match common.format {
        FormatArg::Bin => true,
        FormatArg::Text => false,
        FormatArg::Auto => common.emb.extension().is_some_and(|e| e == "bin"),
    };
    let table = if binary {
        load_binary_filtered(reader, vocab)
    } else {
        load_text_filtered(reader, vocab)
    }
    .with_context(|| format!("cannot load embeddings {}", common.emb.display()))?;
    Ok(table)
}

fn build_config(common: &CommonArgs, metric: Metric, threshold: f64) -> Result<MetricConfig> {
    Ok(MetricConfig::new(metric, threshold)?
        .with_oov_policy(common.oov.policy())
        .with_lowercase_fallback(common.lowercase_fallback))
}

struct RunReport {
    dataset: String,
    metric: String,
    threshold: String,
    items: usize,
    oov_tokens: usize,
    total_tokens: usize,
    elapsed: Duration,
    tau: Option<f64>,
}

impl RunReport {
    fn new(set: &EvaluationSet, matrices: &[SimilarityMatrix], start: Instant) -> Self {
        Self {
            dataset: set.name().to_string(),
            metric: String::new(),
            threshold: String::new(),
            items: set.len(),
            oov_tokens: matrices.iter().map(SimilarityMatrix::oov_tokens).sum(),
            total_tokens: matrices.iter().map(SimilarityMatrix::token_count).sum(),
            elapsed: start.elapsed(),
            tau: None,
        }
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "dataset={} items={} metric={} threshold={} oov_tokens={}/{} elapsed={:.2}s",
            self.dataset,
            self.items,
            self.metric,
            self.threshold,
            self.oov_tokens,
            self.total_tokens,
            self.elapsed.as_secs_f64(),
        )?;
        if let Some(tau) = self.tau {
            write!(f, " tau={tau:.4}")?;
        }
        Ok(())
    }
}

fn cmd_score(
    common: &CommonArgs,
    metric: Metric,
    threshold: f64,
    out: Option<&std::path::Path>,
) -> Result<()> {
    let start = Instant::now();
    let prepared = prepare(common)?;
    let config = build_config(common, metric, threshold)?;
    let matrices = metrics::canonical_matrices(&prepared.pairs, &prepared.table, config);
    let scores = metrics::scores_at(&matrices, metric, threshold);

    match out {
        Some(path) => {
            let file = File::create(path)
                .with_context(|| format!("cannot create {}", path.display()))?;
            let mut writer = BufWriter::new(file);
            write_scores(&prepared.set, &scores, &mut writer)?;
            writer.flush()?;
        }
        None => {
            let stdout = io::stdout();
            write_scores(&prepared.set, &scores, stdout.lock())?;
        }
    }

    if prepared.set.is_empty() {
        eprintln!("warning: dataset {} contains no items", prepared.set.name());
    }
    let mut report = RunReport::new(&prepared.set, &matrices, start);
    report.metric = metric.as_str().to_ascii_lowercase();
    report.threshold = threshold.to_string();
    eprintln!("{report}");
    Ok(())
}

fn human_scores(set: &EvaluationSet) -> Result<Vec<f64>> {
    set.items()
        .iter()
        .map(|item| {
            item.human_score
                .ok_or_else(|| anyhow!("segment {} has no human score", item.segment_id))
        })
        .collect()
}

fn cmd_evaluate(common: &CommonArgs, metric: Metric, threshold: f64) -> Result<()> {
    let start = Instant::now();
    let prepared = prepare(common)?;
    let human = human_scores(&prepared.set)?;
    let config = build_config(common, metric, threshold)?;
    let matrices = metrics::canonical_matrices(&prepared.pairs, &prepared.table, config);
    let scores = metrics::scores_at(&matrices, metric, threshold);

    let pairs: Vec<(f64, f64)> = human.into_iter().zip(scores).collect();
    let tau = kendall_tau_b(&pairs)?;
    println!(
        "metric={} threshold={} tau={:.4} n={}",
        metric.as_str().to_ascii_lowercase(),
        threshold,
        tau,
        pairs.len()
    );

    let mut report = RunReport::new(&prepared.set, &matrices, start);
    report.metric = metric.as_str().to_ascii_lowercase();
    report.threshold = threshold.to_string();
    report.tau = Some(tau);
    eprintln!("{report}");
    Ok(())
}

fn cmd_sweep(
    common: &CommonArgs,
    metrics_arg: Option<Vec<MetricArg>>,
    grid: Option<Vec<f64>>,
    out: Option<&std::path::Path>,
) -> Result<()> {
    let start = Instant::now();
    let chosen: Vec<Metric> = metrics_arg
        .map(|list| list.into_iter().map(MetricArg::metric).collect())
        .unwrap_or_else(|| Metric::ALL.to_vec());
    let grid = grid.unwrap_or_else(|| (0..10).map(|k| k as f64 / 10.0).collect());

    let prepared = prepare(common)?;
    let human = human_scores(&prepared.set)?;
    let config = build_config(common, chosen[0], 0.0)?;
    // Similarity matrices are threshold-independent; build once, rescore per
    // grid point.
    let matrices = metrics::canonical_matrices(&prepared.pairs, &prepared.table, config);

    let mut rows = Vec::with_capacity(chosen.len() * grid.len());
    let mut best: Vec<(Metric, f64, f64)> = Vec::with_capacity(chosen.len());
    for &metric in &chosen {
        let mut best_here: Option<(f64, f64)> = None;
        for &theta in &grid {
            let scores = metrics::scores_at(&matrices, metric, theta);
            let pairs: Vec<(f64, f64)> = human.iter().copied().zip(scores).collect();
            let tau = kendall_tau_b(&pairs)
                .with_context(|| format!("{metric} at threshold {theta}"))?;
            rows.push(SweepRow {
                threshold: theta,
                metric: metric.as_str().to_string(),
                tau,
            });
            if best_here.is_none_or(|(_, best_tau)| tau > best_tau) {
                best_here = Some((theta, tau));
            }
        }
        let (theta, tau) = best_here.expect("grid is nonempty");
        best.push((metric, theta, tau));
    }

    match out {
        Some(path) => {
            let file = File::create(path)
                .with_context(|| format!("cannot create {}", path.display()))?;
            let mut writer = BufWriter::new(file);
            write_sweep(&rows, &mut writer)?;
            writer.flush()?;
        }
        None => {
            let stdout = io::stdout();
            write_sweep(&rows, stdout.lock())?;
        }
    }

    let mut report = RunReport::new(&prepared.set, &matrices, start);
    report.metric = chosen
        .iter()
        .map(|m| m.as_str().to_ascii_lowercase())
        .collect::<Vec<_>>()
        .join(",");
    report.threshold = grid
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(",");
    eprintln!("{report}");
    let summary = best
        .iter()
        .map(|(metric, theta, tau)| format!("{metric} theta={theta} tau={tau:.4}"))
        .collect::<Vec<_>>()
        .join(" | ");
    eprintln!("best: {summary}");
    Ok(())
}
