//! Synthetic corpora with planted exact score ties.
//!
//! Terms are `w0 .. w{vocab-1}`, drawn with Zipf-like weights `1/(rank+1)`.
//! A `tie_fraction` share of the documents is arranged in groups of 2 to 4
//! that share one token multiset (each copy with its own word order), so
//! every member of a group receives the same score for any query. All other
//! documents have pairwise distinct multisets. External ids are `D00000`
//! style labels assigned in a shuffled order, so id order, file order and
//! group membership are unrelated. Topics use 1 to 3 mid-frequency terms;
//! qrels judge a random subset of the documents matching a topic with grades
//! 0, 1 or 2, drawn independently per document so tie groups mix grades.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::trec_io::{format_topics, Qrels, Topic};

#[derive(Debug, Clone, PartialEq)]
pub struct TieCorpusParams {
    pub num_docs: usize,
    pub vocab: usize,
    pub tie_fraction: f64,
    pub seed: u64,
    pub num_topics: usize,
    /// Attach epoch-millisecond timestamps to every document.
    pub chronological: bool,
    /// Give every distinct multiset its own length. Used for tie-free
    /// control corpora.
    pub unique_lengths: bool,
    pub min_len: usize,
    pub max_len: usize,
}

impl Default for TieCorpusParams {
    fn default() -> Self {
        TieCorpusParams {
            num_docs: 1000,
            vocab: 500,
            tie_fraction: 0.3,
            seed: 42,
            num_topics: 25,
            chronological: false,
            unique_lengths: false,
            min_len: 8,
            max_len: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedCorpus {
    pub documents: Vec<Document>,
    pub topics: Vec<Topic>,
    pub qrels: Qrels,
}

#[derive(Serialize)]
struct JsonRecord<'a> {
    id: &'a str,
    text: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<i64>,
}

impl GeneratedCorpus {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for d in &self.documents {
            let record = JsonRecord {
                id: &d.external_id,
                text: &d.text,
                timestamp: d.timestamp,
            };
            out.push_str(&serde_json::to_string(&record).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    /// Writes `corpus.jsonl`, `topics.tsv` and `qrels.txt` into `dir`,
    /// returning their paths in that order.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<[PathBuf; 3]> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let paths = [
            dir.join("corpus.jsonl"),
            dir.join("topics.tsv"),
            dir.join("qrels.txt"),
        ];
        let contents = [
            self.to_jsonl(),
            format_topics(&self.topics),
            self.qrels.to_trec_string(),
        ];
        for (path, text) in paths.iter().zip(contents) {
            std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
        }
        Ok(paths)
    }
}

const MAX_ATTEMPTS: usize = 200;
const BASE_TIMESTAMP: i64 = 1_300_000_000_000;

fn group_sizes(tied: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut sizes = Vec::new();
    let mut remaining = tied;
    while remaining > 0 {
        let mut size = if remaining <= 4 {
            remaining
        } else {
            rng.random_range(2..=4)
        };
        if remaining - size == 1 {
            size = if size < 4 { size + 1 } else { size - 1 };
        }
        sizes.push(size);
        remaining -= size;
    }
    sizes
}

pub fn generate_tie_corpus(params: &TieCorpusParams) -> Result<GeneratedCorpus> {
    let invalid = |m: String| Err(Error::InvalidArgument(m));
    if params.num_docs == 0 || params.vocab == 0 || params.num_topics == 0 {
        return invalid("num_docs, vocab and num_topics must be positive".into());
    }
    if !(0.0..=1.0).contains(&params.tie_fraction) {
        return invalid(format!(
            "tie_fraction {} outside [0,1]",
            params.tie_fraction
        ));
    }
    if params.min_len == 0 || params.min_len > params.max_len {
        return invalid("need 1 <= min_len <= max_len".into());
    }
    let tied = (params.tie_fraction * params.num_docs as f64).ceil() as usize;
    let tied = if tied == 1 { 2 } else { tied };
    if tied > params.num_docs {
        return invalid(format!(
            "cannot place {tied} tied documents in a corpus of {}",
            params.num_docs
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let sizes = group_sizes(tied, &mut rng);
    let distinct = sizes.len() + (params.num_docs - tied);

    let lengths: Vec<usize> = if params.unique_lengths {
        let mut l: Vec<usize> = (params.min_len..params.min_len + distinct).collect();
        l.shuffle(&mut rng);
        l
    } else {
        (0..distinct)
            .map(|_| rng.random_range(params.min_len..=params.max_len))
            .collect()
    };

    let zipf = WeightedIndex::new((0..params.vocab).map(|r| 1.0 / (r as f64 + 1.0)))
        .expect("positive weights");
    let mut seen: HashSet<Vec<usize>> = HashSet::with_capacity(distinct);
    let mut multisets: Vec<Vec<usize>> = Vec::with_capacity(distinct);
    for &len in &lengths {
        let mut attempt = 0;
        loop {
            let mut tokens: Vec<usize> = (0..len).map(|_| zipf.sample(&mut rng)).collect();
            tokens.sort_unstable();
            if seen.insert(tokens.clone()) {
                multisets.push(tokens);
                break;
            }
            attempt += 1;
            if attempt == MAX_ATTEMPTS {
                return invalid(format!(
                    "vocab of {} terms is too small for {distinct} distinct documents",
                    params.vocab
                ));
            }
        }
    }

    // Expand groups, then the singletons.
    let mut bodies: Vec<Vec<usize>> = Vec::with_capacity(params.num_docs);
    for (group, &size) in sizes.iter().enumerate() {
        for _ in 0..size {
            bodies.push(multisets[group].clone());
        }
    }
    bodies.extend(multisets[sizes.len()..].iter().cloned());
    bodies.shuffle(&mut rng);

    let mut labels: Vec<usize> = (0..params.num_docs).collect();
    labels.shuffle(&mut rng);
    let documents: Vec<Document> = bodies
        .into_iter()
        .zip(labels)
        .map(|(mut tokens, label)| {
            tokens.shuffle(&mut rng);
            let text: Vec<String> = tokens.iter().map(|t| format!("w{t}")).collect();
            let mut doc = Document::new(format!("D{label:05}"), text.join(" "));
            if params.chronological {
                doc = doc.with_timestamp(BASE_TIMESTAMP + rng.random_range(0..1_000_000_000));
            }
            doc
        })
        .collect();

    let (topics, qrels) = topics_and_qrels(&documents, params, &mut rng);
    Ok(GeneratedCorpus {
        documents,
        topics,
        qrels,
    })
}

fn topics_and_qrels(
    documents: &[Document],
    params: &TieCorpusParams,
    rng: &mut impl Rng,
) -> (Vec<Topic>, Qrels) {
    let lo = 3.min(params.vocab - 1);
    let hi = 60.min(params.vocab).max(lo + 1);
    let token_sets: Vec<HashSet<&str>> = documents
        .iter()
        .map(|d| d.text.split(' ').collect())
        .collect();
    let mut topics = Vec::with_capacity(params.num_topics);
    let mut qrels = Qrels::default();
    for t in 0..params.num_topics {
        let topic_id = (301 + t).to_string();
        let n_terms = rng.random_range(1..=3usize).min(hi - lo);
        let mut terms: Vec<usize> = (lo..hi).collect();
        terms.shuffle(rng);
        terms.truncate(n_terms);
        let words: Vec<String> = terms.iter().map(|t| format!("w{t}")).collect();

        let mut any_relevant = false;
        let mut first_match = None;
        for (doc, tokens) in documents.iter().zip(&token_sets) {
            if !words.iter().any(|w| tokens.contains(w.as_str())) {
                continue;
            }
            first_match.get_or_insert(doc);
            if rng.random::<f64>() < 0.6 {
                let roll: f64 = rng.random();
                let grade = if roll < 0.5 {
                    0
                } else if roll < 0.85 {
                    1
                } else {
                    2
                };
                any_relevant |= grade > 0;
                qrels.insert(topic_id.clone(), doc.external_id.clone(), grade);
            }
        }
        if let (false, Some(doc)) = (any_relevant, first_match) {
            qrels.insert(topic_id.clone(), doc.external_id.clone(), 1);
        }
        topics.push(Topic {
            topic_id,
            query_text: words.join(" "),
        });
    }
    (topics, qrels)
}
