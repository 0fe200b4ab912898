use std::time::{Duration, Instant};

use super::report::{LatencyReport, LatencyRow, REFERENCE_OVERHEAD_PERCENT};
use super::{build_indexes, load_inputs, run_model, ExperimentConfig};
use crate::error::{Error, Result};
use crate::index::Index;
use crate::search::{TieBreakPolicy, WeightedQuery};
use crate::trec_io::Topic;

/// Smallest observable step of the monotonic clock.
pub fn timer_resolution() -> Duration {
    let mut best = Duration::MAX;
    for _ in 0..64 {
        let start = Instant::now();
        let mut now = Instant::now();
        while now == start {
            now = Instant::now();
        }
        best = best.min(now - start);
    }
    best
}

pub fn run_latency_benchmark(config: &ExperimentConfig) -> Result<LatencyReport> {
    config.validate()?;
    let inputs = load_inputs(config)?;
    let mut single = config.clone();
    single.num_indexes = 1;
    single.seeds = vec![config.effective_seeds()[0]];
    let index = build_indexes(&inputs.documents, &single)?
        .pop()
        .expect("one index");
    let report = benchmark_index(&index, &inputs.topics, config)?;
    if let Some(dir) = &config.output_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, text: String| {
            let path = dir.join(name);
            std::fs::write(&path, text).map_err(|e| Error::io(path, e))
        };
        write("latency.tsv", report.to_tsv())?;
        write("latency.txt", report.to_table())?;
        write(
            "latency.json",
            serde_json::to_string_pretty(&report).expect("report serializes"),
        )?;
    }
    Ok(report)
}

/// Measures mean per-topic latency on the calling thread. For each model,
/// `warmup_trials` unmeasured passes per policy precede `trials` measured
/// passes, alternating the two policies. Queries are analyzed before timing
/// starts and results are discarded after the clock stops.
pub fn benchmark_index(
    index: &Index,
    topics: &[Topic],
    config: &ExperimentConfig,
) -> Result<LatencyReport> {
    config.validate()?;
    if topics.is_empty() {
        return Err(Error::Config(
            "latency benchmark needs at least one topic".into(),
        ));
    }
    let resolution = timer_resolution();
    if resolution > Duration::from_micros(1) {
        return Err(Error::Config(format!(
            "monotonic clock resolution {resolution:?} is coarser than 1µs"
        )));
    }
    let queries: Vec<WeightedQuery> = topics
        .iter()
        .map(|t| WeightedQuery::from_text(&t.query_text))
        .collect();
    let policies = [config.nonrepeatable_policy, config.repeatable_policy];
    for policy in policies {
        policy.check(index)?;
    }

    let mut rows = Vec::new();
    for &model in &config.models {
        let pass = |policy: TieBreakPolicy| -> Result<f64> {
            let mut total = Duration::ZERO;
            for query in &queries {
                let start = Instant::now();
                let ranking = run_model(index, model, query, config, policy)?;
                total += start.elapsed();
                std::hint::black_box(ranking);
            }
            Ok(total.as_secs_f64() / queries.len() as f64)
        };
        for _ in 0..config.warmup_trials {
            for policy in policies {
                pass(policy)?;
            }
        }
        let mut nonrepeatable = Vec::with_capacity(config.trials);
        let mut repeatable = Vec::with_capacity(config.trials);
        for _ in 0..config.trials {
            nonrepeatable.push(pass(policies[0])?);
            repeatable.push(pass(policies[1])?);
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (n, r) = (mean(&nonrepeatable), mean(&repeatable));
        rows.push(LatencyRow {
            model,
            mean_latency_nonrepeatable: n,
            mean_latency_repeatable: r,
            delta_percent: (r / n - 1.0) * 100.0,
            trial_means_nonrepeatable: nonrepeatable,
            trial_means_repeatable: repeatable,
        });
    }

    Ok(LatencyReport {
        trials: config.trials,
        warmup_trials: config.warmup_trials,
        topics: topics.len(),
        nonrepeatable_policy: policies[0],
        repeatable_policy: policies[1],
        reference_overhead_percent: REFERENCE_OVERHEAD_PERCENT,
        rows,
    })
}
