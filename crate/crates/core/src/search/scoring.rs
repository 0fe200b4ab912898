use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::analyze;
use crate::error::{Error, Result};
use crate::index::{Index, InternalDocId, TermStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Bm25,
    Ql,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Bm25 => "bm25",
            Model::Ql => "ql",
        })
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bm25" => Ok(Model::Bm25),
            "ql" => Ok(Model::Ql),
            other => Err(Error::InvalidArgument(format!("unknown model {other:?}"))),
        }
    }
}

/// Ranking function and its parameters. `k1`/`b` apply to BM25, `mu` to
/// Dirichlet-smoothed query likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoringParams {
    pub model: Model,
    pub k1: f64,
    pub b: f64,
    pub mu: f64,
}

pub const DEFAULT_K1: f64 = 0.9;
pub const DEFAULT_B: f64 = 0.4;
pub const DEFAULT_MU: f64 = 1000.0;

impl ScoringParams {
    pub fn bm25() -> Self {
        ScoringParams {
            model: Model::Bm25,
            k1: DEFAULT_K1,
            b: DEFAULT_B,
            mu: DEFAULT_MU,
        }
    }

    pub fn ql() -> Self {
        ScoringParams {
            model: Model::Ql,
            ..Self::bm25()
        }
    }

    pub fn for_model(model: Model) -> Self {
        match model {
            Model::Bm25 => Self::bm25(),
            Model::Ql => Self::ql(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k1.is_finite() && self.k1 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "k1 must be positive, got {}",
                self.k1
            )));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return Err(Error::InvalidArgument(format!(
                "b must lie in [0,1], got {}",
                self.b
            )));
        }
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "mu must be positive, got {}",
                self.mu
            )));
        }
        Ok(())
    }
}

impl Default for ScoringParams {
    fn default() -> Self {
        Self::bm25()
    }
}

/// Query terms with positive weights. Iteration is in ascending term order,
/// which fixes the floating-point summation order of every score.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WeightedQuery {
    terms: BTreeMap<String, f64>,
}

impl WeightedQuery {
    /// Analyzes `text`; each term's weight is its number of occurrences.
    pub fn from_text(text: &str) -> Self {
        let mut terms = BTreeMap::new();
        for term in analyze(text).into_terms() {
            *terms.entry(term).or_insert(0.0) += 1.0;
        }
        WeightedQuery { terms }
    }

    pub fn from_weights<I, S>(weights: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut terms = BTreeMap::new();
        for (term, weight) in weights {
            let term = term.into();
            if !(weight.is_finite() && weight > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "query weight for {term:?} must be positive and finite, got {weight}"
                )));
            }
            *terms.entry(term).or_insert(0.0) += weight;
        }
        Ok(WeightedQuery { terms })
    }

    pub(crate) fn from_map_unchecked(terms: BTreeMap<String, f64>) -> Self {
        WeightedQuery { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, f64)> {
        self.terms.iter().map(|(t, &w)| (t.as_str(), w))
    }

    pub fn weight(&self, term: &str) -> Option<f64> {
        self.terms.get(term).copied()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.terms.values().sum()
    }

    /// Weights rescaled to sum to one.
    pub fn normalized(&self) -> Self {
        let total = self.total_weight();
        WeightedQuery {
            terms: self
                .terms
                .iter()
                .map(|(t, &w)| (t.clone(), w / total))
                .collect(),
        }
    }
}

/// Per-term constants of the ranking function, precomputed once per query.
#[derive(Debug, Clone, Copy)]
pub(crate) enum TermScorer {
    Bm25 {
        weighted_idf: f64,
        k1: f64,
        b: f64,
        avg_doc_len: f64,
    },
    Ql {
        weight: f64,
        mu: f64,
        collection_prob: f64,
    },
}

impl TermScorer {
    /// `None` when the term never occurs in the collection.
    pub(crate) fn new(
        index: &Index,
        term_stats: Option<TermStats>,
        weight: f64,
        params: &ScoringParams,
    ) -> Option<Self> {
        let ts = term_stats.filter(|s| s.cf > 0)?;
        let stats = index.stats();
        Some(match params.model {
            Model::Bm25 => {
                let n = f64::from(stats.doc_count);
                let df = f64::from(ts.df);
                let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
                TermScorer::Bm25 {
                    weighted_idf: weight * idf,
                    k1: params.k1,
                    b: params.b,
                    avg_doc_len: stats.avg_doc_len,
                }
            }
            Model::Ql => TermScorer::Ql {
                weight,
                mu: params.mu,
                collection_prob: ts.cf as f64 / stats.total_terms as f64,
            },
        })
    }

    /// Contribution of one query term to a document's score. BM25 callers
    /// must skip `tf == 0`; query likelihood counts absent terms too.
    #[inline]
    pub(crate) fn contribution(&self, tf: u32, doc_len: u32) -> f64 {
        let tf = f64::from(tf);
        let dl = f64::from(doc_len);
        match *self {
            TermScorer::Bm25 {
                weighted_idf,
                k1,
                b,
                avg_doc_len,
            } => weighted_idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * dl / avg_doc_len)),
            TermScorer::Ql {
                weight,
                mu,
                collection_prob,
            } => weight * ((tf + mu * collection_prob) / (dl + mu)).ln(),
        }
    }

    #[inline]
    pub(crate) fn counts_absent_terms(&self) -> bool {
        matches!(self, TermScorer::Ql { .. })
    }
}

/// Scores one document directly from its term vector.
///
/// BM25 sums over query terms present in the document. Query likelihood sums
/// over query terms present in the collection; retrieval only considers
/// documents containing at least one query term, but this function evaluates
/// the formula for any document.
pub fn score_doc(
    index: &Index,
    doc: InternalDocId,
    query: &WeightedQuery,
    params: &ScoringParams,
) -> Result<f64> {
    if !index.contains(doc) {
        return Err(Error::InvalidArgument(format!(
            "no document with internal id {doc}"
        )));
    }
    let vector = index.doc_vector(doc);
    let doc_len = index.doc_len(doc);
    let mut score = 0.0;
    for (term, weight) in query.terms() {
        let Some(scorer) = TermScorer::new(index, index.stats().term(term), weight, params) else {
            continue;
        };
        let tf = vector.get(term).copied().unwrap_or(0);
        if tf > 0 || scorer.counts_absent_terms() {
            score += scorer.contribution(tf, doc_len);
        }
    }
    Ok(score)
}
