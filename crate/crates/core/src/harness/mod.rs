//! Experiment orchestration: effectiveness variability across index builds,
//! latency of repeatable versus non-repeatable tie-breaking, and a synthetic
//! corpus generator that plants exact score ties.

mod bench;
mod config;
mod experiment;
mod generate;
mod report;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::Index;
use crate::search::{search, search_rm3, Model, RankedList, TieBreakPolicy, WeightedQuery};

pub use bench::{benchmark_index, run_latency_benchmark, timer_resolution};
pub use config::{ExperimentConfig, DEFAULT_NUM_INDEXES, DEFAULT_TRIALS, DEFAULT_WARMUP_TRIALS};
pub use experiment::{
    build_indexes, load_inputs, run_topics, run_variability_experiment, run_variability_on,
    ExperimentInputs, ModelRuns, VariabilityOutcome,
};
pub use generate::{generate_tie_corpus, GeneratedCorpus, TieCorpusParams};
pub use report::{
    LatencyReport, LatencyRow, VariabilityReport, VariabilityRow, REFERENCE_OVERHEAD_PERCENT,
};

/// A ranking model as run by the harness: a base model, optionally with RM3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RunModel {
    #[serde(rename = "bm25")]
    Bm25,
    #[serde(rename = "bm25+rm3")]
    Bm25Rm3,
    #[serde(rename = "ql")]
    Ql,
    #[serde(rename = "ql+rm3")]
    QlRm3,
}

impl RunModel {
    pub const ALL: [RunModel; 4] = [
        RunModel::Bm25,
        RunModel::Bm25Rm3,
        RunModel::Ql,
        RunModel::QlRm3,
    ];

    pub fn base(self) -> Model {
        match self {
            RunModel::Bm25 | RunModel::Bm25Rm3 => Model::Bm25,
            RunModel::Ql | RunModel::QlRm3 => Model::Ql,
        }
    }

    pub fn uses_rm3(self) -> bool {
        matches!(self, RunModel::Bm25Rm3 | RunModel::QlRm3)
    }

    pub fn name(self) -> &'static str {
        match self {
            RunModel::Bm25 => "bm25",
            RunModel::Bm25Rm3 => "bm25+rm3",
            RunModel::Ql => "ql",
            RunModel::QlRm3 => "ql+rm3",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            RunModel::Bm25 => "BM25",
            RunModel::Bm25Rm3 => "BM25+RM3",
            RunModel::Ql => "QL",
            RunModel::QlRm3 => "QL+RM3",
        }
    }

    /// File-name friendly form.
    pub fn slug(self) -> &'static str {
        match self {
            RunModel::Bm25 => "bm25",
            RunModel::Bm25Rm3 => "bm25_rm3",
            RunModel::Ql => "ql",
            RunModel::QlRm3 => "ql_rm3",
        }
    }
}

impl fmt::Display for RunModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RunModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "+").as_str() {
            "bm25" => Ok(RunModel::Bm25),
            "bm25+rm3" => Ok(RunModel::Bm25Rm3),
            "ql" => Ok(RunModel::Ql),
            "ql+rm3" => Ok(RunModel::QlRm3),
            other => Err(Error::InvalidArgument(format!(
                "unknown model {other:?} (expected bm25, bm25+rm3, ql, ql+rm3)"
            ))),
        }
    }
}

/// Runs one query with `model` under `policy`.
pub fn run_model(
    index: &Index,
    model: RunModel,
    query: &WeightedQuery,
    config: &ExperimentConfig,
    policy: TieBreakPolicy,
) -> Result<RankedList> {
    let params = config.scoring_params(model.base());
    if model.uses_rm3() {
        search_rm3(index, query, &params, &config.rm3, policy, config.k)
    } else {
        search(index, query, &params, policy, config.k)
    }
}
