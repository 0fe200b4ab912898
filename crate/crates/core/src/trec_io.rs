//! TREC-style files: tab-separated topics, qrels, and run files.
//!
//! Run files are written with strictly decreasing scores. Tied scores are
//! stepped down one ULP at a time, so any tool that re-sorts a run by score
//! reproduces our ranking instead of applying its own tie-break.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::search::RankedList;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topic {
    pub topic_id: String,
    pub query_text: String,
}

/// Orders topic ids numerically when both are unsigned integers, otherwise
/// byte-wise.
pub fn cmp_topic_ids(a: &str, b: &str) -> Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        _ => a.cmp(b),
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn read_topics(path: impl AsRef<Path>) -> Result<Vec<Topic>> {
    let path = path.as_ref();
    parse_topics(&read_text(path)?, &path.display().to_string())
}

/// Parses `topic_id<TAB>query` lines; blank lines and `#` comments are skipped.
pub fn parse_topics(content: &str, source: &str) -> Result<Vec<Topic>> {
    let mut topics = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in content.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((id, query)) = line.split_once('\t') else {
            return Err(Error::malformed(
                format!("{source}:{}", i + 1),
                "expected topic_id<TAB>query",
            ));
        };
        let id = id.trim();
        if id.is_empty() {
            return Err(Error::malformed(
                format!("{source}:{}", i + 1),
                "empty topic id",
            ));
        }
        if !seen.insert(id.to_string()) {
            return Err(Error::DuplicateTopicId(id.to_string()));
        }
        topics.push(Topic {
            topic_id: id.to_string(),
            query_text: query.to_string(),
        });
    }
    Ok(topics)
}

pub fn format_topics(topics: &[Topic]) -> String {
    topics
        .iter()
        .map(|t| format!("{}\t{}\n", t.topic_id, t.query_text))
        .collect()
}

/// Judgments for one topic.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TopicQrels {
    grades: HashMap<String, i32>,
}

impl TopicQrels {
    pub fn grade(&self, doc: &str) -> Option<i32> {
        self.grades.get(doc).copied()
    }

    pub fn is_relevant(&self, doc: &str) -> bool {
        self.grade(doc).is_some_and(|g| g > 0)
    }

    /// Documents judged with grade > 0.
    pub fn relevant_count(&self) -> usize {
        self.grades.values().filter(|&&g| g > 0).count()
    }

    pub fn judged_count(&self) -> usize {
        self.grades.len()
    }

    /// Grades clamped at zero, best first.
    pub fn ideal_grades(&self) -> Vec<i32> {
        let mut grades: Vec<i32> = self.grades.values().map(|&g| g.max(0)).collect();
        grades.sort_unstable_by(|a, b| b.cmp(a));
        grades
    }

    pub fn judgments(&self) -> impl Iterator<Item = (&str, i32)> {
        self.grades.iter().map(|(d, &g)| (d.as_str(), g))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Qrels {
    topics: BTreeMap<String, TopicQrels>,
}

impl Qrels {
    /// Later judgments for the same (topic, doc) pair replace earlier ones.
    pub fn insert(&mut self, topic_id: impl Into<String>, doc: impl Into<String>, grade: i32) {
        self.topics
            .entry(topic_id.into())
            .or_default()
            .grades
            .insert(doc.into(), grade);
    }

    pub fn topic(&self, topic_id: &str) -> Option<&TopicQrels> {
        self.topics.get(topic_id)
    }

    pub fn judgment(&self, topic_id: &str, doc: &str) -> Option<i32> {
        self.topic(topic_id)?.grade(doc)
    }

    pub fn topic_ids(&self) -> impl Iterator<Item = &str> {
        self.topics.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.topics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.topics.is_empty()
    }

    /// TREC qrels text with topics in id order and documents byte-wise.
    pub fn to_trec_string(&self) -> String {
        let mut ids: Vec<&String> = self.topics.keys().collect();
        ids.sort_by(|a, b| cmp_topic_ids(a, b));
        let mut out = String::new();
        for id in ids {
            let mut docs: Vec<(&str, i32)> = self.topics[id].judgments().collect();
            docs.sort_unstable();
            for (doc, grade) in docs {
                writeln!(out, "{id} 0 {doc} {grade}").unwrap();
            }
        }
        out
    }
}

pub fn read_qrels(path: impl AsRef<Path>) -> Result<Qrels> {
    let path = path.as_ref();
    parse_qrels(&read_text(path)?, &path.display().to_string())
}

/// Parses whitespace-separated `topic iteration docid grade` lines.
pub fn parse_qrels(content: &str, source: &str) -> Result<Qrels> {
    let mut qrels = Qrels::default();
    for (i, line) in content.lines().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let location = || format!("{source}:{}", i + 1);
        if fields.len() < 4 {
            return Err(Error::malformed(
                location(),
                "expected `topic 0 docid grade`",
            ));
        }
        let grade: i32 = fields[3].parse().map_err(|_| {
            Error::malformed(
                location(),
                format!("grade {:?} is not an integer", fields[3]),
            )
        })?;
        qrels.insert(fields[0], fields[2], grade);
    }
    Ok(qrels)
}

/// One line of a run file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunEntry {
    pub topic_id: String,
    pub external_id: String,
    pub rank: usize,
    pub written_score: f64,
    pub tag: String,
}

/// Makes a non-increasing score sequence strictly decreasing by stepping each
/// score that does not fall below its predecessor's written value to the next
/// representable value beneath it.
pub fn perturbed_scores(scores: &[f64]) -> Result<Vec<f64>> {
    let mut written: Vec<f64> = Vec::with_capacity(scores.len());
    for (i, &score) in scores.iter().enumerate() {
        if !score.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "non-finite score {score} at position {i}"
            )));
        }
        if i > 0 && score > scores[i - 1] {
            return Err(Error::NotSorted {
                position: i,
                previous: scores[i - 1],
                current: score,
            });
        }
        let value = match written.last() {
            Some(&prev) if score >= prev => prev.next_down(),
            _ => score,
        };
        written.push(value);
    }
    Ok(written)
}

/// Run entries for one ranked list with tie-perturbed scores and 1-based
/// ranks, preserving the list's order.
pub fn perturb_scores(list: &RankedList, tag: &str) -> Result<Vec<RunEntry>> {
    let scores: Vec<f64> = list.entries.iter().map(|e| e.score).collect();
    let written = perturbed_scores(&scores)?;
    Ok(list
        .entries
        .iter()
        .zip(written)
        .enumerate()
        .map(|(i, (entry, written_score))| RunEntry {
            topic_id: list.topic_id.clone(),
            external_id: entry.external_id.clone(),
            rank: i + 1,
            written_score,
            tag: tag.to_string(),
        })
        .collect())
}

/// Run-file text: `topic Q0 docid rank score tag`, topics in ascending id
/// order, scores in shortest round-trip decimal form.
pub fn format_run(runs: &[RankedList], tag: &str) -> Result<String> {
    if tag.is_empty() || tag.chars().any(char::is_whitespace) {
        return Err(Error::InvalidArgument(format!(
            "run tag {tag:?} must be a non-empty word"
        )));
    }
    let mut order: Vec<&RankedList> = runs.iter().collect();
    order.sort_by(|a, b| cmp_topic_ids(&a.topic_id, &b.topic_id));
    let mut out = String::new();
    for list in order {
        if list.topic_id.is_empty() || list.topic_id.chars().any(char::is_whitespace) {
            return Err(Error::InvalidArgument(format!(
                "bad topic id {:?}",
                list.topic_id
            )));
        }
        for e in perturb_scores(list, tag)? {
            writeln!(
                out,
                "{} Q0 {} {} {} {}",
                e.topic_id, e.external_id, e.rank, e.written_score, e.tag
            )
            .unwrap();
        }
    }
    Ok(out)
}

pub fn write_run(runs: &[RankedList], tag: &str, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = format_run(runs, tag)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_run(path: impl AsRef<Path>) -> Result<Vec<RunEntry>> {
    let path = path.as_ref();
    parse_run(&read_text(path)?, &path.display().to_string())
}

pub fn parse_run(content: &str, source: &str) -> Result<Vec<RunEntry>> {
    let mut entries = Vec::new();
    for (i, line) in content.lines().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let location = || format!("{source}:{}", i + 1);
        if fields.len() != 6 {
            return Err(Error::malformed(
                location(),
                "expected `topic Q0 docid rank score tag`",
            ));
        }
        let rank = fields[3]
            .parse()
            .map_err(|_| Error::malformed(location(), format!("bad rank {:?}", fields[3])))?;
        let written_score: f64 = fields[4]
            .parse()
            .ok()
            .filter(|s: &f64| s.is_finite())
            .ok_or_else(|| Error::malformed(location(), format!("bad score {:?}", fields[4])))?;
        entries.push(RunEntry {
            topic_id: fields[0].to_string(),
            external_id: fields[2].to_string(),
            rank,
            written_score,
            tag: fields[5].to_string(),
        });
    }
    Ok(entries)
}
