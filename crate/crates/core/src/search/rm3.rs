//! RM3 pseudo-relevance feedback.
//!
//! Stage one retrieves with the original query. The first `fb_docs` results
//! form the feedback set, so whatever order a tie-break policy gives at that
//! cutoff decides which documents feed the relevance model. Feedback
//! documents are weighted by a softmax over their retrieval scores, the
//! relevance model is the weighted mean of their length-normalized term
//! vectors, and the `fb_terms` most probable terms (ties by ascending term)
//! are renormalized and interpolated with the normalized original query.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{search, RankedList, ScoringParams, TieBreakPolicy, WeightedQuery};
use crate::error::{Error, Result};
use crate::index::Index;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rm3Params {
    pub fb_docs: usize,
    pub fb_terms: usize,
    /// Interpolation weight of the original query.
    pub original_weight: f64,
}

impl Default for Rm3Params {
    fn default() -> Self {
        Rm3Params {
            fb_docs: 10,
            fb_terms: 10,
            original_weight: 0.5,
        }
    }
}

impl Rm3Params {
    pub fn validate(&self) -> Result<()> {
        if self.fb_docs == 0 || self.fb_terms == 0 {
            return Err(Error::InvalidArgument(
                "fb_docs and fb_terms must be >= 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.original_weight) {
            return Err(Error::InvalidArgument(format!(
                "original_weight must lie in [0,1], got {}",
                self.original_weight
            )));
        }
        Ok(())
    }
}

/// Builds the expanded query from an initial ranking.
pub fn estimate_rm3(
    index: &Index,
    initial: &RankedList,
    original: &WeightedQuery,
    rm3: &Rm3Params,
) -> Result<WeightedQuery> {
    rm3.validate()?;
    if initial.is_empty() {
        return Err(Error::InvalidArgument(
            "RM3 needs a non-empty initial ranking".into(),
        ));
    }
    if original.is_empty() {
        return Err(Error::InvalidArgument(
            "RM3 needs a non-empty original query".into(),
        ));
    }

    let feedback = &initial.entries[..rm3.fb_docs.min(initial.len())];
    let max_score = feedback
        .iter()
        .map(|e| e.score)
        .fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = feedback
        .iter()
        .map(|e| (e.score - max_score).exp())
        .collect();
    let norm: f64 = exps.iter().sum();

    let mut relevance: BTreeMap<&str, f64> = BTreeMap::new();
    for (entry, e) in feedback.iter().zip(&exps) {
        let doc_weight = e / norm;
        let doc_len = index.doc_len(entry.doc);
        if doc_len == 0 {
            continue;
        }
        let doc_len = f64::from(doc_len);
        for (term, &tf) in index.doc_vector(entry.doc) {
            *relevance.entry(term.as_str()).or_insert(0.0) +=
                doc_weight * (f64::from(tf) / doc_len);
        }
    }

    let mut ranked: Vec<(&str, f64)> = relevance.into_iter().collect();
    ranked.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.0.cmp(b.0))
    });
    ranked.truncate(rm3.fb_terms);
    let kept_mass: f64 = ranked.iter().map(|(_, p)| p).sum();

    let alpha = rm3.original_weight;
    let original = original.normalized();
    let mut weights: BTreeMap<String, (f64, f64)> = BTreeMap::new();
    for (term, w) in original.terms() {
        weights.entry(term.to_string()).or_default().0 = w;
    }
    for (term, p) in ranked {
        weights.entry(term.to_string()).or_default().1 = p / kept_mass;
    }
    let combined = weights
        .into_iter()
        .map(|(term, (o, p))| (term, alpha * o + (1.0 - alpha) * p))
        .filter(|(_, w)| *w > 0.0)
        .collect();
    Ok(WeightedQuery::from_map_unchecked(combined))
}

/// Both stages of an RM3 run.
#[derive(Debug, Clone, PartialEq)]
pub struct Rm3Trace {
    pub initial: RankedList,
    /// `None` when the first stage retrieved nothing.
    pub expanded: Option<WeightedQuery>,
    pub ranking: RankedList,
}

pub fn search_rm3_traced(
    index: &Index,
    original: &WeightedQuery,
    params: &ScoringParams,
    rm3: &Rm3Params,
    policy: TieBreakPolicy,
    k: usize,
) -> Result<Rm3Trace> {
    rm3.validate()?;
    let initial = search(index, original, params, policy, k)?;
    if initial.is_empty() {
        return Ok(Rm3Trace {
            ranking: initial.clone(),
            initial,
            expanded: None,
        });
    }
    let expanded = estimate_rm3(index, &initial, original, rm3)?;
    let ranking = search(index, &expanded, params, policy, k)?;
    Ok(Rm3Trace {
        initial,
        expanded: Some(expanded),
        ranking,
    })
}

/// Two-stage retrieval; both stages use `policy`. An empty first stage is
/// returned as is.
pub fn search_rm3(
    index: &Index,
    original: &WeightedQuery,
    params: &ScoringParams,
    rm3: &Rm3Params,
    policy: TieBreakPolicy,
    k: usize,
) -> Result<RankedList> {
    Ok(search_rm3_traced(index, original, params, rm3, policy, k)?.ranking)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;
    use crate::index::{build_index, BuildOptions};
    use crate::search::ScoredDoc;

    fn list(index: &Index, entries: &[(&str, f64)]) -> RankedList {
        RankedList {
            topic_id: "t".into(),
            entries: entries
                .iter()
                .map(|&(ext, score)| ScoredDoc {
                    doc: index.internal_id(ext).unwrap(),
                    external_id: ext.into(),
                    score,
                })
                .collect(),
        }
    }

    #[test]
    fn single_feedback_doc_alpha_zero() {
        let index = build_index(
            vec![Document::new("d", "a a b"), Document::new("e", "c")],
            BuildOptions::sequential(),
        )
        .unwrap();
        let rm3 = Rm3Params {
            fb_docs: 1,
            fb_terms: 2,
            original_weight: 0.0,
        };
        let q = estimate_rm3(
            &index,
            &list(&index, &[("d", 3.0)]),
            &WeightedQuery::from_text("a"),
            &rm3,
        )
        .unwrap();
        let got: Vec<(&str, f64)> = q.terms().collect();
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].0, "a");
        assert!((got[0].1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(got[1].0, "b");
        assert!((got[1].1 - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn alpha_one_returns_normalized_original() {
        let index = build_index(
            vec![Document::new("d", "a a b q"), Document::new("e", "c q")],
            BuildOptions::sequential(),
        )
        .unwrap();
        let original = WeightedQuery::from_text("q q c");
        let rm3 = Rm3Params {
            original_weight: 1.0,
            ..Rm3Params::default()
        };
        let initial = list(&index, &[("d", 2.0), ("e", 1.0)]);
        let q = estimate_rm3(&index, &initial, &original, &rm3).unwrap();
        assert_eq!(q, original.normalized());
    }

    #[test]
    fn equal_scores_average_the_vectors() {
        let index = build_index(
            vec![Document::new("d", "a a b b"), Document::new("e", "a c")],
            BuildOptions::sequential(),
        )
        .unwrap();
        let rm3 = Rm3Params {
            fb_docs: 2,
            fb_terms: 10,
            original_weight: 0.0,
        };
        let q = estimate_rm3(
            &index,
            &list(&index, &[("d", 1.25), ("e", 1.25)]),
            &WeightedQuery::from_text("a"),
            &rm3,
        )
        .unwrap();
        // d: a 1/2, b 1/2; e: a 1/2, c 1/2; averaged: a 1/2, b 1/4, c 1/4
        let expect = [("a", 0.5), ("b", 0.25), ("c", 0.25)];
        for (term, w) in expect {
            assert!((q.weight(term).unwrap() - w).abs() < 1e-15, "{term}");
        }
        assert_eq!(q.len(), 3);
    }

    #[test]
    fn term_selection_ties_are_lexicographic() {
        let index = build_index(
            vec![Document::new("d", "z y x w")],
            BuildOptions::sequential(),
        )
        .unwrap();
        let rm3 = Rm3Params {
            fb_docs: 1,
            fb_terms: 2,
            original_weight: 0.0,
        };
        let q = estimate_rm3(
            &index,
            &list(&index, &[("d", 0.0)]),
            &WeightedQuery::from_text("z"),
            &rm3,
        )
        .unwrap();
        let terms: Vec<&str> = q.terms().map(|(t, _)| t).collect();
        assert_eq!(terms, ["w", "x"]);
    }

    #[test]
    fn weights_sum_to_one() {
        let docs: Vec<Document> = (0..30)
            .map(|i| {
                Document::new(
                    format!("d{i}"),
                    format!("q t{} t{} t{}", i % 4, i % 9, i % 13),
                )
            })
            .collect();
        let index = build_index(docs, BuildOptions::sequential()).unwrap();
        for params in [ScoringParams::bm25(), ScoringParams::ql()] {
            let trace = search_rm3_traced(
                &index,
                &WeightedQuery::from_text("q t1"),
                &params,
                &Rm3Params::default(),
                TieBreakPolicy::ExternalId,
                100,
            )
            .unwrap();
            let expanded = trace.expanded.unwrap();
            assert!((expanded.total_weight() - 1.0).abs() < 1e-9);
            assert!(expanded.terms().all(|(_, w)| w > 0.0));
        }
    }

    #[test]
    fn errors() {
        let index = build_index(vec![Document::new("d", "a")], BuildOptions::sequential()).unwrap();
        let empty = RankedList::default();
        assert!(estimate_rm3(
            &index,
            &empty,
            &WeightedQuery::from_text("a"),
            &Rm3Params::default()
        )
        .is_err());
        let bad = Rm3Params {
            original_weight: 1.5,
            ..Rm3Params::default()
        };
        let l = list(&index, &[("d", 1.0)]);
        assert!(estimate_rm3(&index, &l, &WeightedQuery::from_text("a"), &bad).is_err());
        let none = search_rm3(
            &index,
            &WeightedQuery::from_text("zzz"),
            &ScoringParams::bm25(),
            &Rm3Params::default(),
            TieBreakPolicy::ExternalId,
            10,
        )
        .unwrap();
        assert!(none.is_empty());
    }
}
