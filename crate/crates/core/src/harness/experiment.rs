use std::path::Path;

use super::report::{VariabilityReport, VariabilityRow};
use super::{run_model, ExperimentConfig, RunModel};
use crate::corpus::{read_corpus, Document};
use crate::error::{Error, Result};
use crate::eval::{evaluate_entries, Metric, TopicScores};
use crate::index::{build_index, BuildOptions, Index};
use crate::search::{RankedList, TieBreakPolicy, WeightedQuery};
use crate::trec_io::{format_run, parse_run, read_qrels, read_topics, Qrels, Topic};

/// Everything an experiment reads from disk.
#[derive(Debug, Clone)]
pub struct ExperimentInputs {
    pub documents: Vec<Document>,
    pub topics: Vec<Topic>,
    pub qrels: Qrels,
}

pub fn load_inputs(config: &ExperimentConfig) -> Result<ExperimentInputs> {
    Ok(ExperimentInputs {
        documents: read_corpus(&config.corpus, config.format)?,
        topics: read_topics(&config.topics)?,
        qrels: read_qrels(&config.qrels)?,
    })
}

/// Run files produced for one model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelRuns {
    pub model: RunModel,
    /// Non-repeatable run file text, one per index in seed order.
    pub nonrepeatable: Vec<String>,
    /// Repeatable run file text from every index; all entries are identical.
    pub repeatable: Vec<String>,
}

impl ModelRuns {
    /// Number of distinct non-repeatable run files.
    pub fn distinct_nonrepeatable(&self) -> usize {
        let mut texts: Vec<&String> = self.nonrepeatable.iter().collect();
        texts.sort();
        texts.dedup();
        texts.len()
    }
}

#[derive(Debug, Clone)]
pub struct VariabilityOutcome {
    pub report: VariabilityReport,
    pub runs: Vec<ModelRuns>,
}

/// One index per seed, built in parallel. With `true_threads`, each index is
/// built by `workers` threads and seeds only label the builds.
pub fn build_indexes(documents: &[Document], config: &ExperimentConfig) -> Result<Vec<Index>> {
    let seeds = config.effective_seeds();
    std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| {
                let options = if config.true_threads {
                    BuildOptions::threaded(config.workers)
                } else {
                    BuildOptions::seeded(seed)
                };
                scope.spawn(move || build_index(documents.iter().cloned(), options))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("index build thread panicked"))
            .collect()
    })
}

/// Ranks every topic with `model` under `policy`.
pub fn run_topics(
    index: &Index,
    model: RunModel,
    queries: &[(String, WeightedQuery)],
    config: &ExperimentConfig,
    policy: TieBreakPolicy,
) -> Result<Vec<RankedList>> {
    queries
        .iter()
        .map(|(topic_id, query)| {
            Ok(run_model(index, model, query, config, policy)?.with_topic_id(topic_id.clone()))
        })
        .collect()
}

fn evaluate_text(run: &str, qrels: &Qrels) -> Result<TopicScores> {
    evaluate_entries(&parse_run(run, "<run>")?, qrels)
}

pub fn run_variability_experiment(config: &ExperimentConfig) -> Result<VariabilityOutcome> {
    config.validate()?;
    let inputs = load_inputs(config)?;
    let outcome = run_variability_on(config, &inputs)?;
    if let Some(dir) = &config.output_dir {
        persist(dir, config, &outcome)?;
    }
    Ok(outcome)
}

/// The variability experiment over already loaded inputs. Nothing is written
/// to disk.
pub fn run_variability_on(
    config: &ExperimentConfig,
    inputs: &ExperimentInputs,
) -> Result<VariabilityOutcome> {
    config.validate()?;
    let indexes = build_indexes(&inputs.documents, config)?;
    let queries: Vec<(String, WeightedQuery)> = inputs
        .topics
        .iter()
        .map(|t| (t.topic_id.clone(), WeightedQuery::from_text(&t.query_text)))
        .collect();

    let mut rows = Vec::new();
    let mut runs = Vec::new();
    for &model in &config.models {
        let mut nonrepeatable = Vec::with_capacity(indexes.len());
        let mut repeatable = Vec::with_capacity(indexes.len());
        for index in &indexes {
            let lists = run_topics(index, model, &queries, config, config.nonrepeatable_policy)?;
            nonrepeatable.push(format_run(&lists, &config.tag)?);
            let lists = run_topics(index, model, &queries, config, config.repeatable_policy)?;
            repeatable.push(format_run(&lists, &config.tag)?);
        }
        if repeatable.iter().any(|r| r != &repeatable[0]) {
            return Err(Error::RepeatabilityViolated {
                model: model.to_string(),
            });
        }

        let reference = evaluate_text(&repeatable[0], &inputs.qrels)?;
        let per_index: Vec<TopicScores> = nonrepeatable
            .iter()
            .map(|r| evaluate_text(r, &inputs.qrels))
            .collect::<Result<_>>()?;
        for metric in Metric::ALL {
            let values = per_index.iter().map(|s| s.mean(metric)).collect();
            rows.push(VariabilityRow::new(
                model,
                metric,
                reference.mean(metric),
                values,
            ));
        }
        runs.push(ModelRuns {
            model,
            nonrepeatable,
            repeatable,
        });
    }

    Ok(VariabilityOutcome {
        report: VariabilityReport {
            seeds: config.effective_seeds(),
            nonrepeatable_policy: config.nonrepeatable_policy,
            repeatable_policy: config.repeatable_policy,
            rows,
        },
        runs,
    })
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes run files and reports under `dir`:
/// `runs/<model>.<policy>.<seed>.txt`, `runs/<model>.<repeatable policy>.txt`,
/// `variability.tsv`, `variability.txt` and `variability.json`.
pub(crate) fn persist(
    dir: &Path,
    config: &ExperimentConfig,
    outcome: &VariabilityOutcome,
) -> Result<()> {
    let run_dir = dir.join("runs");
    std::fs::create_dir_all(&run_dir).map_err(|e| Error::io(&run_dir, e))?;
    let seeds = config.effective_seeds();
    for runs in &outcome.runs {
        for (seed, text) in seeds.iter().zip(&runs.nonrepeatable) {
            let name = format!(
                "{}.{}.{seed}.txt",
                runs.model.slug(),
                config.nonrepeatable_policy
            );
            write(&run_dir.join(name), text)?;
        }
        let name = format!("{}.{}.txt", runs.model.slug(), config.repeatable_policy);
        write(&run_dir.join(name), &runs.repeatable[0])?;
    }
    write(&dir.join("variability.tsv"), &outcome.report.to_tsv())?;
    write(&dir.join("variability.txt"), &outcome.report.to_table())?;
    let json = serde_json::to_string_pretty(&outcome.report).expect("report serializes");
    write(&dir.join("variability.json"), &json)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trec_io::parse_qrels;

    fn inputs(docs: Vec<Document>, topics: &[(&str, &str)], qrels: &str) -> ExperimentInputs {
        ExperimentInputs {
            documents: docs,
            topics: topics
                .iter()
                .map(|&(id, q)| Topic {
                    topic_id: id.into(),
                    query_text: q.into(),
                })
                .collect(),
            qrels: parse_qrels(qrels, "q").unwrap(),
        }
    }

    fn config() -> ExperimentConfig {
        ExperimentConfig::new("unused", "unused", "unused")
    }

    #[test]
    fn tie_free_corpus_has_zero_delta() {
        // distinct lengths and term counts: no two documents tie
        let docs = (0..12)
            .map(|i| {
                let body = vec!["apple"; i + 1].join(" ") + &" filler".repeat(2 * i + 3);
                Document::new(format!("d{i:02}"), body)
            })
            .collect();
        let inputs = inputs(
            docs,
            &[("1", "apple"), ("2", "filler apple")],
            "1 0 d03 1\n1 0 d07 2\n2 0 d11 1\n",
        );
        let outcome = run_variability_on(&config(), &inputs).unwrap();
        for row in &outcome.report.rows {
            assert_eq!(row.delta, 0.0, "{row:?}");
            assert_eq!(row.min, row.repeatable_value);
            assert_eq!(row.max, row.repeatable_value);
        }
        for runs in &outcome.runs {
            assert_eq!(runs.distinct_nonrepeatable(), 1);
        }
    }

    #[test]
    fn exact_duplicates_vary_under_internal_ids() {
        let mut docs: Vec<Document> = (0..8)
            .map(|i| Document::new(format!("dup{i}"), "target word"))
            .collect();
        docs.push(Document::new("other", "unrelated text"));
        let inputs = inputs(docs, &[("1", "target")], "1 0 dup5 1\n");
        let mut c = config();
        c.seeds = vec![11, 12, 13, 14, 15];
        let outcome = run_variability_on(&c, &inputs).unwrap();
        let bm25 = &outcome.runs[0];
        assert!(bm25.distinct_nonrepeatable() >= 2);
        assert!(
            outcome
                .report
                .row(RunModel::Bm25, Metric::Ap)
                .unwrap()
                .delta
                > 0.0
        );
        // the repeatable order is lexicographic: dup5 sits at rank 6
        let ap = outcome
            .report
            .row(RunModel::Bm25, Metric::Ap)
            .unwrap()
            .repeatable_value;
        assert!((ap - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn persisted_files() {
        let docs = vec![Document::new("a", "x y"), Document::new("b", "x")];
        let inputs = inputs(docs, &[("1", "x")], "1 0 a 1\n");
        let mut c = config();
        c.models = vec![RunModel::Bm25];
        c.num_indexes = 2;
        let outcome = run_variability_on(&c, &inputs).unwrap();
        let dir = tempfile::tempdir().unwrap();
        persist(dir.path(), &c, &outcome).unwrap();
        for name in [
            "runs/bm25.internal_id.1.txt",
            "runs/bm25.internal_id.2.txt",
            "runs/bm25.external_id.txt",
            "variability.tsv",
            "variability.txt",
            "variability.json",
        ] {
            assert!(dir.path().join(name).exists(), "{name}");
        }
        let json = std::fs::read_to_string(dir.path().join("variability.json")).unwrap();
        let back: VariabilityReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, outcome.report);
    }
}
