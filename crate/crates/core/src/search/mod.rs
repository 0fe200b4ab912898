//! Query evaluation: BM25 and query likelihood scoring, score tie-breaking
//! policies, bounded top-k selection, and RM3 two-stage retrieval.
//!
//! A tie is exact floating-point equality of scores. The tie-break policy
//! decides the order inside a group of equal scores:
//!
//! - [`TieBreakPolicy::InternalId`]: ascending internal id. Cheapest, but
//!   internal ids depend on arrival order at index time, so the ranking can
//!   change between builds of the same collection.
//! - [`TieBreakPolicy::ExternalId`]: byte-wise ascending external id.
//! - [`TieBreakPolicy::ReverseChronological`]: most recent timestamp first,
//!   then ascending external id.
//!
//! The last two produce identical rankings across builds. The policy takes
//! part in top-k eviction, so the external id is consulted in the inner loop
//! of postings traversal whenever a candidate reaches the current threshold.

mod rm3;
mod scoring;
mod topk;

use std::cmp::{Ordering, Reverse};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{Index, InternalDocId, Posting};

pub use rm3::{estimate_rm3, search_rm3, search_rm3_traced, Rm3Params, Rm3Trace};
pub use scoring::{
    score_doc, Model, ScoringParams, WeightedQuery, DEFAULT_B, DEFAULT_K1, DEFAULT_MU,
};

use scoring::TermScorer;
use topk::{score_desc, TopK};

/// Number of hits retrieved per topic unless told otherwise.
pub const DEFAULT_K: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreakPolicy {
    InternalId,
    ExternalId,
    ReverseChronological,
}

impl TieBreakPolicy {
    pub fn is_repeatable(self) -> bool {
        !matches!(self, TieBreakPolicy::InternalId)
    }

    pub fn check(self, index: &Index) -> Result<()> {
        if self == TieBreakPolicy::ReverseChronological && !index.has_timestamps() {
            return Err(Error::MissingTimestamps);
        }
        Ok(())
    }
}

impl fmt::Display for TieBreakPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TieBreakPolicy::InternalId => "internal_id",
            TieBreakPolicy::ExternalId => "external_id",
            TieBreakPolicy::ReverseChronological => "reverse_chronological",
        })
    }
}

impl FromStr for TieBreakPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "internal_id" | "internal" => Ok(TieBreakPolicy::InternalId),
            "external_id" | "external" => Ok(TieBreakPolicy::ExternalId),
            "reverse_chronological" | "recency" => Ok(TieBreakPolicy::ReverseChronological),
            other => Err(Error::InvalidArgument(format!(
                "unknown tie-break policy {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredDoc {
    pub doc: InternalDocId,
    pub external_id: String,
    pub score: f64,
}

/// Fully ordered results for one topic.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RankedList {
    pub topic_id: String,
    pub entries: Vec<ScoredDoc>,
}

impl RankedList {
    pub fn with_topic_id(mut self, topic_id: impl Into<String>) -> Self {
        self.topic_id = topic_id.into();
        self
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn external_ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.external_id.as_str())
    }
}

/// Total order of two scored documents: score descending, then the policy's
/// tie key.
pub fn compare(
    a: &ScoredDoc,
    b: &ScoredDoc,
    policy: TieBreakPolicy,
    index: &Index,
) -> Result<Ordering> {
    policy.check(index)?;
    Ok(score_desc(a.score, b.score).then_with(|| match policy {
        TieBreakPolicy::InternalId => a.doc.cmp(&b.doc),
        TieBreakPolicy::ExternalId => index.external_id(a.doc).cmp(index.external_id(b.doc)),
        TieBreakPolicy::ReverseChronological => {
            recency_key(index, a.doc).cmp(&recency_key(index, b.doc))
        }
    }))
}

#[inline]
fn recency_key(index: &Index, doc: InternalDocId) -> (Reverse<i64>, &str) {
    (
        Reverse(index.timestamp(doc).expect("policy checked")),
        index.external_id(doc),
    )
}

/// Top-`k` documents matching at least one query term, under the policy's
/// total order.
pub fn search(
    index: &Index,
    query: &WeightedQuery,
    params: &ScoringParams,
    policy: TieBreakPolicy,
    k: usize,
) -> Result<RankedList> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    params.validate()?;
    policy.check(index)?;

    let hits = match policy {
        TieBreakPolicy::InternalId => traverse(index, query, params, TopK::new(k, |d| d)),
        TieBreakPolicy::ExternalId => {
            traverse(index, query, params, TopK::new(k, |d| index.external_id(d)))
        }
        TieBreakPolicy::ReverseChronological => traverse(
            index,
            query,
            params,
            TopK::new(k, |d| recency_key(index, d)),
        ),
    };
    Ok(RankedList {
        topic_id: String::new(),
        entries: hits
            .into_iter()
            .map(|(doc, score)| ScoredDoc {
                doc,
                external_id: index.external_id(doc).to_string(),
                score,
            })
            .collect(),
    })
}

struct Cursor<'a> {
    postings: &'a [Posting],
    pos: usize,
    scorer: TermScorer,
}

impl Cursor<'_> {
    #[inline]
    fn current(&self) -> Option<&Posting> {
        self.postings.get(self.pos)
    }
}

/// Document-at-a-time traversal. Cursors stay in ascending term order so each
/// score is summed in the same order as [`score_doc`].
fn traverse<T: Ord, F: Fn(InternalDocId) -> T>(
    index: &Index,
    query: &WeightedQuery,
    params: &ScoringParams,
    mut top: TopK<T, F>,
) -> Vec<(InternalDocId, f64)> {
    let mut cursors: Vec<Cursor> = query
        .terms()
        .filter_map(|(term, weight)| {
            let scorer = TermScorer::new(index, index.stats().term(term), weight, params)?;
            Some(Cursor {
                postings: index.postings_for(term),
                pos: 0,
                scorer,
            })
        })
        .collect();

    while let Some(doc) = cursors
        .iter()
        .filter_map(|c| c.current())
        .map(|p| p.doc)
        .min()
    {
        let doc_len = index.doc_len(doc);
        let mut score = 0.0;
        for cursor in cursors.iter_mut() {
            let tf = match cursor.current() {
                Some(p) if p.doc == doc => {
                    let tf = p.tf;
                    cursor.pos += 1;
                    tf
                }
                _ => 0,
            };
            if tf > 0 || cursor.scorer.counts_absent_terms() {
                score += cursor.scorer.contribution(tf, doc_len);
            }
        }
        top.offer(doc, score);
    }
    top.into_sorted()
}
