//! Effectiveness metrics with trec_eval / gdeval semantics.
//!
//! - AP over the first 1000 ranks; unjudged documents count as non-relevant.
//! - P@k divides by k even when fewer than k documents were retrieved.
//! - NDCG@k uses gain `2^grade - 1` and discount `log2(rank + 1)`, with
//!   negative grades clamped to zero.
//!
//! Topics without relevant documents are left out of the means. When a run
//! file is evaluated, each topic's lines are re-sorted by score descending
//! with ties broken by descending document id, as trec_eval does.

use std::collections::{HashMap, HashSet};
use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::search::RankedList;
use crate::trec_io::{cmp_topic_ids, read_qrels, read_run, Qrels, RunEntry, TopicQrels};

pub const AP_CUTOFF: usize = 1000;
pub const P_DEPTH: usize = 30;
pub const NDCG_DEPTH: usize = 20;

fn check_unique<S: AsRef<str>>(run: &[S]) -> Result<()> {
    let mut seen = HashSet::with_capacity(run.len());
    for doc in run {
        if !seen.insert(doc.as_ref()) {
            return Err(Error::DuplicateInRun(doc.as_ref().to_string()));
        }
    }
    Ok(())
}

pub fn average_precision<S: AsRef<str>>(
    run: &[S],
    qrels: &TopicQrels,
    cutoff: usize,
) -> Result<f64> {
    check_unique(run)?;
    let relevant = qrels.relevant_count();
    if relevant == 0 {
        return Ok(0.0);
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, doc) in run.iter().take(cutoff).enumerate() {
        if qrels.is_relevant(doc.as_ref()) {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    Ok(sum / relevant as f64)
}

pub fn precision_at<S: AsRef<str>>(run: &[S], qrels: &TopicQrels, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument(
            "precision depth must be >= 1".into(),
        ));
    }
    check_unique(run)?;
    let hits = run
        .iter()
        .take(k)
        .filter(|d| qrels.is_relevant(d.as_ref()))
        .count();
    Ok(hits as f64 / k as f64)
}

fn gain(grade: i32) -> f64 {
    2f64.powi(grade.max(0)) - 1.0
}

fn discount(rank: usize) -> f64 {
    ((rank + 1) as f64).log2()
}

/// NDCG at depth `k`; 0 when no judged document has a positive grade.
pub fn ndcg_at<S: AsRef<str>>(run: &[S], qrels: &TopicQrels, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("NDCG depth must be >= 1".into()));
    }
    check_unique(run)?;
    let dcg: f64 = run
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, d)| gain(qrels.grade(d.as_ref()).unwrap_or(0)) / discount(i + 1))
        .sum();
    let ideal: f64 = qrels
        .ideal_grades()
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(i, g)| gain(g) / discount(i + 1))
        .sum();
    if ideal == 0.0 {
        return Ok(0.0);
    }
    Ok(dcg / ideal)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Ap,
    P30,
    Ndcg20,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Ap, Metric::P30, Metric::Ndcg20];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Ap => "ap",
            Metric::P30 => "p30",
            Metric::Ndcg20 => "ndcg20",
        }
    }

    /// Column label used in report tables.
    pub fn label(self) -> &'static str {
        match self {
            Metric::Ap => "AP",
            Metric::P30 => "P30",
            Metric::Ndcg20 => "NDCG@20",
        }
    }

    pub fn parse_list(s: &str) -> Result<Vec<Metric>> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let m: Metric = part.parse()?;
            if !out.contains(&m) {
                out.push(m);
            }
        }
        if out.is_empty() {
            return Err(Error::InvalidArgument("no metrics requested".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ap" | "map" => Ok(Metric::Ap),
            "p30" | "p_30" | "p@30" => Ok(Metric::P30),
            "ndcg20" | "ndcg@20" | "ndcg_20" => Ok(Metric::Ndcg20),
            other => Err(Error::InvalidArgument(format!("unknown metric {other:?}"))),
        }
    }
}

/// Metric values for one topic; `None` marks a topic excluded from that
/// metric's mean.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TopicMetrics {
    pub ap: Option<f64>,
    pub p30: Option<f64>,
    pub ndcg20: Option<f64>,
}

impl TopicMetrics {
    pub fn get(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Ap => self.ap,
            Metric::P30 => self.p30,
            Metric::Ndcg20 => self.ndcg20,
        }
    }
}

/// Per-topic metrics in topic-id order plus their means.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TopicScores {
    pub topics: Vec<(String, TopicMetrics)>,
}

impl TopicScores {
    pub fn topic(&self, topic_id: &str) -> Option<&TopicMetrics> {
        self.topics
            .iter()
            .find(|(id, _)| id == topic_id)
            .map(|(_, m)| m)
    }

    /// Mean over topics that count for `metric`; 0 when none do.
    pub fn mean(&self, metric: Metric) -> f64 {
        let values: Vec<f64> = self
            .topics
            .iter()
            .filter_map(|(_, m)| m.get(metric))
            .collect();
        if values.is_empty() {
            0.0
        } else {
            values.iter().sum::<f64>() / values.len() as f64
        }
    }

    pub fn is_empty(&self) -> bool {
        self.topics.is_empty()
    }

    /// Tab-separated report with one row per topic and a final `all` row,
    /// values rounded to four decimals.
    pub fn to_tsv(&self, metrics: &[Metric]) -> String {
        let mut out = String::from("topic");
        for m in metrics {
            write!(out, "\t{m}").unwrap();
        }
        out.push('\n');
        for (id, values) in &self.topics {
            out.push_str(id);
            for &m in metrics {
                match values.get(m) {
                    Some(v) => write!(out, "\t{v:.4}").unwrap(),
                    None => out.push_str("\tNA"),
                }
            }
            out.push('\n');
        }
        out.push_str("all");
        for &m in metrics {
            write!(out, "\t{:.4}", self.mean(m)).unwrap();
        }
        out.push('\n');
        out
    }
}

fn topic_metrics<S: AsRef<str>>(ranking: &[S], qrels: &TopicQrels) -> Result<TopicMetrics> {
    let counts = qrels.relevant_count() > 0;
    Ok(TopicMetrics {
        ap: counts
            .then(|| average_precision(ranking, qrels, AP_CUTOFF))
            .transpose()?,
        p30: counts
            .then(|| precision_at(ranking, qrels, P_DEPTH))
            .transpose()?,
        ndcg20: counts
            .then(|| ndcg_at(ranking, qrels, NDCG_DEPTH))
            .transpose()?,
    })
}

fn assemble(mut rows: Vec<(String, TopicMetrics)>) -> TopicScores {
    rows.sort_by(|a, b| cmp_topic_ids(&a.0, &b.0));
    TopicScores { topics: rows }
}

/// Evaluates in-memory rankings in their given order.
pub fn evaluate_rankings(lists: &[RankedList], qrels: &Qrels) -> Result<TopicScores> {
    let mut rows = Vec::new();
    for list in lists {
        let Some(judged) = qrels.topic(&list.topic_id) else {
            log::warn!("topic {} has no judgments; skipped", list.topic_id);
            continue;
        };
        let ids: Vec<&str> = list.external_ids().collect();
        rows.push((list.topic_id.clone(), topic_metrics(&ids, judged)?));
    }
    if rows.is_empty() && !lists.is_empty() {
        log::warn!("no topic in the run has judgments");
    }
    Ok(assemble(rows))
}

/// Evaluates parsed run lines. Each topic is re-sorted by written score
/// descending, ties by document id descending.
pub fn evaluate_entries(entries: &[RunEntry], qrels: &Qrels) -> Result<TopicScores> {
    let mut by_topic: HashMap<&str, Vec<&RunEntry>> = HashMap::new();
    for e in entries {
        by_topic.entry(e.topic_id.as_str()).or_default().push(e);
    }
    let mut rows = Vec::new();
    for (topic, mut lines) in by_topic {
        let Some(judged) = qrels.topic(topic) else {
            log::warn!("topic {topic} has no judgments; skipped");
            continue;
        };
        lines.sort_by(|a, b| {
            b.written_score
                .partial_cmp(&a.written_score)
                .expect("parsed scores are finite")
                .then_with(|| b.external_id.cmp(&a.external_id))
        });
        let ids: Vec<&str> = lines.iter().map(|e| e.external_id.as_str()).collect();
        rows.push((topic.to_string(), topic_metrics(&ids, judged)?));
    }
    if rows.is_empty() && !entries.is_empty() {
        log::warn!("no topic in the run has judgments");
    }
    Ok(assemble(rows))
}

pub fn evaluate_run(
    run_path: impl AsRef<Path>,
    qrels_path: impl AsRef<Path>,
) -> Result<TopicScores> {
    let entries = read_run(run_path)?;
    let qrels = read_qrels(qrels_path)?;
    evaluate_entries(&entries, &qrels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trec_io::parse_qrels;
    use proptest::prelude::*;

    fn judged(pairs: &[(&str, i32)]) -> Qrels {
        let mut q = Qrels::default();
        for &(d, g) in pairs {
            q.insert("t", d, g);
        }
        q
    }

    #[test]
    fn ap_examples() {
        let q = judged(&[("r1", 1), ("r2", 1), ("n", 0)]);
        let t = q.topic("t").unwrap();
        let ap = average_precision(&["r1", "n", "r2"], t, AP_CUTOFF).unwrap();
        assert!((ap - 5.0 / 6.0).abs() < 1e-12);
        assert_eq!(average_precision(&["n", "x"], t, AP_CUTOFF).unwrap(), 0.0);
        assert_eq!(
            average_precision(&["r2", "r1", "n"], t, AP_CUTOFF).unwrap(),
            1.0
        );
        assert!(matches!(
            average_precision(&["r1", "r1"], t, AP_CUTOFF),
            Err(Error::DuplicateInRun(d)) if d == "r1"
        ));
        // cutoff drops the late relevant document
        let ap = average_precision(&["r1", "n", "r2"], t, 2).unwrap();
        assert!((ap - 0.5).abs() < 1e-12);
    }

    #[test]
    fn precision_examples() {
        let rel: Vec<String> = (0..15).map(|i| format!("r{i}")).collect();
        let mut q = Qrels::default();
        for d in &rel {
            q.insert("t", d.as_str(), 1);
        }
        let t = q.topic("t").unwrap();
        assert!((precision_at(&rel, t, 30).unwrap() - 0.5).abs() < 1e-12);
        let mut run: Vec<String> = rel[..10].to_vec();
        run.extend((0..20).map(|i| format!("n{i}")));
        assert!((precision_at(&run, t, 30).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        let empty: [&str; 0] = [];
        assert_eq!(precision_at(&empty, t, 30).unwrap(), 0.0);
    }

    #[test]
    fn ndcg_examples() {
        let q = judged(&[("g", 1)]);
        let t = q.topic("t").unwrap();
        assert_eq!(ndcg_at(&["g"], t, 20).unwrap(), 1.0);
        let v = ndcg_at(&["x", "g"], t, 20).unwrap();
        assert!((v - 1.0 / 3f64.log2()).abs() < 1e-12);
        assert!((v - 0.6309).abs() < 1e-4);
        assert_eq!(ndcg_at(&["x", "y"], t, 20).unwrap(), 0.0);
        let neg = judged(&[("bad", -2), ("ok", 0)]);
        assert_eq!(ndcg_at(&["bad"], neg.topic("t").unwrap(), 20).unwrap(), 0.0);
    }

    #[test]
    fn foreign_run_ties_sort_by_docid_descending() {
        let qrels = parse_qrels("1 0 a 1\n1 0 b 0\n", "q").unwrap();
        // a and b tie; trec_eval order is b then a, so AP = 1/2
        let run = vec![
            RunEntry {
                topic_id: "1".into(),
                external_id: "a".into(),
                rank: 1,
                written_score: 3.0,
                tag: "x".into(),
            },
            RunEntry {
                topic_id: "1".into(),
                external_id: "b".into(),
                rank: 2,
                written_score: 3.0,
                tag: "x".into(),
            },
        ];
        let scores = evaluate_entries(&run, &qrels).unwrap();
        assert_eq!(scores.topic("1").unwrap().ap, Some(0.5));
    }

    #[test]
    fn no_overlap_is_empty() {
        let qrels = parse_qrels("1 0 a 1\n", "q").unwrap();
        let run = vec![RunEntry {
            topic_id: "9".into(),
            external_id: "a".into(),
            rank: 1,
            written_score: 1.0,
            tag: "x".into(),
        }];
        let scores = evaluate_entries(&run, &qrels).unwrap();
        assert!(scores.is_empty());
        assert_eq!(
            scores.to_tsv(&Metric::ALL),
            "topic\tap\tp30\tndcg20\nall\t0.0000\t0.0000\t0.0000\n"
        );
    }

    #[test]
    fn topics_without_relevant_docs_are_excluded() {
        let qrels = parse_qrels("1 0 a 1\n2 0 b 0\n", "q").unwrap();
        let mk = |t: &str, d: &str| RunEntry {
            topic_id: t.into(),
            external_id: d.into(),
            rank: 1,
            written_score: 1.0,
            tag: "x".into(),
        };
        let scores = evaluate_entries(&[mk("1", "a"), mk("2", "b")], &qrels).unwrap();
        assert_eq!(scores.mean(Metric::Ap), 1.0);
        assert_eq!(scores.topic("2").unwrap().ndcg20, None);
        let tsv = scores.to_tsv(&[Metric::Ap]);
        assert_eq!(tsv, "topic\tap\n1\t1.0000\n2\tNA\nall\t1.0000\n");
    }

    #[test]
    fn metric_list_parsing() {
        assert_eq!(Metric::parse_list("ap,p30,ndcg20").unwrap(), Metric::ALL);
        assert!(Metric::parse_list("ap,err").is_err());
    }

    /// Term-by-term DCG written independently of `ndcg_at`.
    fn brute_ndcg(run: &[String], grades: &HashMap<String, i32>, k: usize) -> f64 {
        let mut dcg = 0.0;
        for rank in 1..=k.min(run.len()) {
            let g = *grades.get(&run[rank - 1]).unwrap_or(&0);
            let g = if g < 0 { 0 } else { g };
            dcg += (2f64.powf(g as f64) - 1.0) / (rank as f64 + 1.0).log2();
        }
        let mut ideal: Vec<i32> = grades
            .values()
            .map(|&g| if g < 0 { 0 } else { g })
            .collect();
        ideal.sort();
        ideal.reverse();
        let mut idcg = 0.0;
        for rank in 1..=k.min(ideal.len()) {
            idcg += (2f64.powf(ideal[rank - 1] as f64) - 1.0) / (rank as f64 + 1.0).log2();
        }
        if idcg == 0.0 {
            0.0
        } else {
            dcg / idcg
        }
    }

    proptest! {
        #[test]
        fn ndcg_matches_brute_force(
            order in Just((0..40).collect::<Vec<usize>>()).prop_shuffle(),
            len in 0usize..40,
            grades in prop::collection::vec(-1i32..4, 40),
            judged_mask in prop::collection::vec(any::<bool>(), 40),
        ) {
            let mut q = Qrels::default();
            let mut map = HashMap::new();
            for i in 0..40 {
                if judged_mask[i] {
                    q.insert("t", format!("d{i}"), grades[i]);
                    map.insert(format!("d{i}"), grades[i]);
                }
            }
            let run: Vec<String> = order[..len].iter().map(|i| format!("d{i}")).collect();
            let t = q.topic("t").cloned().unwrap_or_default();
            let got = ndcg_at(&run, &t, NDCG_DEPTH).unwrap();
            prop_assert!((got - brute_ndcg(&run, &map, NDCG_DEPTH)).abs() < 1e-12);
            for v in [got, average_precision(&run, &t, AP_CUTOFF).unwrap(), precision_at(&run, &t, P_DEPTH).unwrap()] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }

        #[test]
        fn ap_and_p30_ignore_nonrelevant_permutations_below_last_hit(
            seed_order in Just((0..12).collect::<Vec<usize>>()).prop_shuffle(),
            tail in Just((12..30).collect::<Vec<usize>>()).prop_shuffle(),
        ) {
            // d0..d3 relevant; the tail contains only non-relevant documents
            let mut q = Qrels::default();
            for i in 0..4 {
                q.insert("t", format!("d{i}"), 1);
            }
            let t = q.topic("t").unwrap();
            let head: Vec<String> = seed_order.iter().map(|i| format!("d{i}")).collect();
            let mut a = head.clone();
            a.extend((12..30).map(|i| format!("d{i}")));
            let mut b = head;
            b.extend(tail.iter().map(|i| format!("d{i}")));
            prop_assert_eq!(average_precision(&a, t, AP_CUTOFF).unwrap(), average_precision(&b, t, AP_CUTOFF).unwrap());
            prop_assert_eq!(precision_at(&a, t, P_DEPTH).unwrap(), precision_at(&b, t, P_DEPTH).unwrap());
        }
    }
}
