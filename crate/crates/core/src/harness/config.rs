use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::RunModel;
use crate::corpus::CorpusFormat;
use crate::error::{Error, Result};
use crate::search::{
    Model, Rm3Params, ScoringParams, TieBreakPolicy, DEFAULT_B, DEFAULT_K, DEFAULT_K1, DEFAULT_MU,
};

pub const DEFAULT_NUM_INDEXES: usize = 5;
pub const DEFAULT_TRIALS: usize = 5;
pub const DEFAULT_WARMUP_TRIALS: usize = 2;

/// Declarative description of an experiment. Loaded from TOML; relative
/// paths are resolved against the config file's directory.
///
/// ```toml
/// corpus = "corpus.jsonl"
/// format = "jsonl"            # or "trectext"
/// topics = "topics.tsv"
/// qrels = "qrels.txt"
/// models = ["bm25", "bm25+rm3", "ql", "ql+rm3"]
/// num_indexes = 5
/// seeds = [1, 2, 3, 4, 5]     # defaults to 1..=num_indexes
/// repeatable_policy = "external_id"   # or "reverse_chronological"
/// k = 1000
/// output_dir = "out"          # optional; run files and reports land here
/// true_threads = false        # build with real worker threads instead of seeds
/// workers = 4                 # worker threads when true_threads is set
/// trials = 5                  # latency benchmark
/// warmup_trials = 2
/// tag = "tierank"
/// k1 = 0.9
/// b = 0.4
/// mu = 1000.0
///
/// [rm3]
/// fb_docs = 10
/// fb_terms = 10
/// original_weight = 0.5
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub corpus: PathBuf,
    #[serde(default = "default_format")]
    pub format: CorpusFormat,
    pub topics: PathBuf,
    pub qrels: PathBuf,
    #[serde(default = "default_models")]
    pub models: Vec<RunModel>,
    #[serde(default = "default_num_indexes")]
    pub num_indexes: usize,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default = "default_nonrepeatable")]
    pub nonrepeatable_policy: TieBreakPolicy,
    #[serde(default = "default_repeatable")]
    pub repeatable_policy: TieBreakPolicy,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub true_threads: bool,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_warmup")]
    pub warmup_trials: usize,
    #[serde(default = "default_tag")]
    pub tag: String,
    #[serde(default = "default_k1")]
    pub k1: f64,
    #[serde(default = "default_b")]
    pub b: f64,
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default)]
    pub rm3: Rm3Params,
}

fn default_format() -> CorpusFormat {
    CorpusFormat::Jsonl
}
fn default_models() -> Vec<RunModel> {
    RunModel::ALL.to_vec()
}
fn default_num_indexes() -> usize {
    DEFAULT_NUM_INDEXES
}
fn default_nonrepeatable() -> TieBreakPolicy {
    TieBreakPolicy::InternalId
}
fn default_repeatable() -> TieBreakPolicy {
    TieBreakPolicy::ExternalId
}
fn default_k() -> usize {
    DEFAULT_K
}
fn default_workers() -> usize {
    4
}
fn default_trials() -> usize {
    DEFAULT_TRIALS
}
fn default_warmup() -> usize {
    DEFAULT_WARMUP_TRIALS
}
fn default_tag() -> String {
    "tierank".into()
}
fn default_k1() -> f64 {
    DEFAULT_K1
}
fn default_b() -> f64 {
    DEFAULT_B
}
fn default_mu() -> f64 {
    DEFAULT_MU
}

impl ExperimentConfig {
    /// A config with every optional field at its default.
    pub fn new(
        corpus: impl Into<PathBuf>,
        topics: impl Into<PathBuf>,
        qrels: impl Into<PathBuf>,
    ) -> Self {
        ExperimentConfig {
            corpus: corpus.into(),
            format: default_format(),
            topics: topics.into(),
            qrels: qrels.into(),
            models: default_models(),
            num_indexes: DEFAULT_NUM_INDEXES,
            seeds: Vec::new(),
            nonrepeatable_policy: default_nonrepeatable(),
            repeatable_policy: default_repeatable(),
            k: DEFAULT_K,
            output_dir: None,
            true_threads: false,
            workers: default_workers(),
            trials: DEFAULT_TRIALS,
            warmup_trials: DEFAULT_WARMUP_TRIALS,
            tag: default_tag(),
            k1: DEFAULT_K1,
            b: DEFAULT_B,
            mu: DEFAULT_MU,
            rm3: Rm3Params::default(),
        }
    }

    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.resolve_paths(base_dir);
        Ok(config)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_toml_str(&text, base)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.corpus);
        fix(&mut self.topics);
        fix(&mut self.qrels);
        if let Some(out) = self.output_dir.as_mut() {
            fix(out);
        }
    }

    /// Seeds in use: the configured list, or `1..=num_indexes`.
    pub fn effective_seeds(&self) -> Vec<u64> {
        if self.seeds.is_empty() {
            (1..=self.num_indexes as u64).collect()
        } else {
            self.seeds.clone()
        }
    }

    pub fn scoring_params(&self, model: Model) -> ScoringParams {
        ScoringParams {
            model,
            k1: self.k1,
            b: self.b,
            mu: self.mu,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.num_indexes == 0 {
            return bad("num_indexes must be >= 1".into());
        }
        let seeds = self.effective_seeds();
        if seeds.len() != self.num_indexes {
            return bad(format!(
                "{} seeds given for {} indexes",
                seeds.len(),
                self.num_indexes
            ));
        }
        if seeds.iter().collect::<HashSet<_>>().len() != seeds.len() {
            return bad("seeds must be pairwise distinct".into());
        }
        if self.models.is_empty() {
            return bad("no models selected".into());
        }
        if self.k == 0 {
            return bad("k must be >= 1".into());
        }
        if !self.repeatable_policy.is_repeatable() {
            return bad(format!(
                "{} is not a repeatable policy",
                self.repeatable_policy
            ));
        }
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if self.workers == 0 {
            return bad("workers must be >= 1".into());
        }
        if self.tag.is_empty() || self.tag.chars().any(char::is_whitespace) {
            return bad(format!("tag {:?} must be a single word", self.tag));
        }
        self.scoring_params(Model::Bm25).validate()?;
        self.rm3.validate()
    }
}
