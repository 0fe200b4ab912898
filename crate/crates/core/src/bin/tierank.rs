use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::info;

use tierank::corpus::{load_corpus, CorpusFormat};
use tierank::eval::{evaluate_run, Metric};
use tierank::harness::{
    generate_tie_corpus, run_latency_benchmark, run_topics, run_variability_experiment,
    ExperimentConfig, RunModel, TieCorpusParams,
};
use tierank::index::{build_index, BuildOptions, Index};
use tierank::search::{
    Rm3Params, TieBreakPolicy, WeightedQuery, DEFAULT_B, DEFAULT_K, DEFAULT_K1, DEFAULT_MU,
};
use tierank::trec_io::{format_run, read_topics};
use tierank::Result;

#[derive(Parser)]
#[command(
    name = "tierank",
    version,
    about = "Ranking with deterministic tie-breaking"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a binary index from a JSONL or TRECTEXT corpus.
    Index(IndexArgs),
    /// Rank topics against an index and write a TREC run file.
    Search(SearchArgs),
    /// Score a run file against qrels; prints per-topic TSV.
    Eval(EvalArgs),
    /// Measure metric variability across indexes built in different orders.
    Experiment(ExperimentArgs),
    /// Measure per-topic latency of the two tie-breaking policies.
    Bench(ExperimentArgs),
    /// Write a synthetic corpus with planted score ties.
    GenCorpus(GenArgs),
}

#[derive(Args)]
struct IndexArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "jsonl")]
    format: CorpusFormat,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Insert documents in a seeded shuffled order.
    #[arg(long, conflicts_with = "workers")]
    order_seed: Option<u64>,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    topics: PathBuf,
    /// bm25, bm25+rm3, ql or ql+rm3
    #[arg(long, default_value = "bm25")]
    model: RunModel,
    /// internal_id, external_id or reverse_chronological
    #[arg(long, default_value = "external_id")]
    policy: TieBreakPolicy,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    /// Run file path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value = "tierank")]
    tag: String,
    #[arg(long, default_value_t = DEFAULT_K1)]
    k1: f64,
    #[arg(long, default_value_t = DEFAULT_B)]
    b: f64,
    #[arg(long, default_value_t = DEFAULT_MU)]
    mu: f64,
    #[arg(long, default_value_t = 10)]
    fb_docs: usize,
    #[arg(long, default_value_t = 10)]
    fb_terms: usize,
    #[arg(long, default_value_t = 0.5)]
    original_weight: f64,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    run: PathBuf,
    #[arg(long)]
    qrels: PathBuf,
    /// Comma-separated subset of ap, p30, ndcg20.
    #[arg(long, default_value = "ap,p30,ndcg20")]
    metrics: String,
}

#[derive(Args)]
struct ExperimentArgs {
    /// TOML experiment config.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Comma-separated seeds; also sets the number of indexes.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Comma-separated models.
    #[arg(long, value_delimiter = ',')]
    models: Option<Vec<RunModel>>,
    #[arg(long)]
    repeatable_policy: Option<TieBreakPolicy>,
    /// Build each index with real worker threads instead of a seeded order.
    #[arg(long)]
    true_threads: bool,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    warmup_trials: Option<usize>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    output_dir: PathBuf,
    #[arg(long, default_value_t = 1000)]
    num_docs: usize,
    #[arg(long, default_value_t = 500)]
    vocab: usize,
    #[arg(long, default_value_t = 0.3)]
    tie_fraction: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 25)]
    num_topics: usize,
    /// Attach timestamps to every document.
    #[arg(long)]
    chronological: bool,
    /// Give every distinct document its own length (tie-free control corpora).
    #[arg(long)]
    unique_lengths: bool,
}

fn load_config(args: &ExperimentArgs) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::from_file(&args.config)?;
    if let Some(dir) = &args.output_dir {
        config.output_dir = Some(dir.clone());
    }
    if let Some(seeds) = &args.seeds {
        config.num_indexes = seeds.len();
        config.seeds = seeds.clone();
    }
    if let Some(models) = &args.models {
        config.models = models.clone();
    }
    if let Some(p) = args.repeatable_policy {
        config.repeatable_policy = p;
    }
    config.true_threads |= args.true_threads;
    if let Some(w) = args.workers {
        config.workers = w;
    }
    if let Some(t) = args.trials {
        config.trials = t;
    }
    if let Some(w) = args.warmup_trials {
        config.warmup_trials = w;
    }
    config.validate()?;
    Ok(config)
}

fn cmd_index(args: IndexArgs) -> Result<()> {
    let start = Instant::now();
    let docs = load_corpus(&args.input, args.format)?;
    let options = match args.order_seed {
        Some(seed) => BuildOptions::seeded(seed),
        None => BuildOptions::threaded(args.workers),
    };
    // The lazy reader yields Result items; stop at the first error.
    let mut failure = None;
    let index = build_index(
        docs.map_while(|d| d.map_err(|e| failure = Some(e)).ok()),
        options,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let index = index?;
    index.save(&args.output)?;
    info!(
        "indexed {} documents, {} terms in {:.2?}",
        index.doc_count(),
        index.stats().vocabulary_size(),
        start.elapsed()
    );
    Ok(())
}

fn cmd_search(args: SearchArgs) -> Result<()> {
    let index = Index::load(&args.index)?;
    args.policy.check(&index)?;
    let topics = read_topics(&args.topics)?;
    let mut config = ExperimentConfig::new("", "", "");
    config.k = args.k;
    config.k1 = args.k1;
    config.b = args.b;
    config.mu = args.mu;
    config.rm3 = Rm3Params {
        fb_docs: args.fb_docs,
        fb_terms: args.fb_terms,
        original_weight: args.original_weight,
    };
    config.tag = args.tag.clone();
    config.validate()?;
    let queries: Vec<(String, WeightedQuery)> = topics
        .iter()
        .map(|t| (t.topic_id.clone(), WeightedQuery::from_text(&t.query_text)))
        .collect();
    let lists = run_topics(&index, args.model, &queries, &config, args.policy)?;
    let text = format_run(&lists, &args.tag)?;
    match &args.output {
        Some(path) => std::fs::write(path, text).map_err(|e| tierank::Error::Io {
            path: path.clone(),
            source: e,
        })?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let metrics = Metric::parse_list(&args.metrics)?;
    let scores = evaluate_run(&args.run, &args.qrels)?;
    print!("{}", scores.to_tsv(&metrics));
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs) -> Result<()> {
    let config = load_config(&args)?;
    let outcome = run_variability_experiment(&config)?;
    for runs in &outcome.runs {
        info!(
            "{}: {} distinct non-repeatable run files out of {}",
            runs.model,
            runs.distinct_nonrepeatable(),
            runs.nonrepeatable.len()
        );
    }
    print!("{}", outcome.report.to_table());
    Ok(())
}

fn cmd_bench(args: ExperimentArgs) -> Result<()> {
    let config = load_config(&args)?;
    let report = run_latency_benchmark(&config)?;
    print!("{}", report.to_table());
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let corpus = generate_tie_corpus(&TieCorpusParams {
        num_docs: args.num_docs,
        vocab: args.vocab,
        tie_fraction: args.tie_fraction,
        seed: args.seed,
        num_topics: args.num_topics,
        chronological: args.chronological,
        unique_lengths: args.unique_lengths,
        ..TieCorpusParams::default()
    })?;
    for path in corpus.write_to(&args.output_dir)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Index(a) => cmd_index(a),
        Command::Search(a) => cmd_search(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Bench(a) => cmd_bench(a),
        Command::GenCorpus(a) => cmd_gen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
