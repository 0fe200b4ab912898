//! Document ingestion: corpus readers, the analyzer, and seeded shuffling of
//! insertion order.
//!
//! Two on-disk formats are understood:
//!
//! - **JSONL**: one object per line with `id` (string), `text` (string) and an
//!   optional integer `timestamp` (epoch milliseconds). Blank lines are skipped.
//! - **TRECTEXT**: `<DOC><DOCNO>..</DOCNO><TEXT>..</TEXT></DOC>` blocks. Tags
//!   are matched case-insensitively, the DOCNO is whitespace-trimmed, and
//!   multiple TEXT sections in one DOC are joined with a newline.
//!
//! Either reader yields documents lazily in file order and stops at the first
//! error. Duplicate ids and a mix of timestamped and untimestamped documents
//! are reported as errors.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Lines};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The unit of ingestion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub external_id: String,
    pub timestamp: Option<i64>,
    pub text: String,
}

impl Document {
    pub fn new(external_id: impl Into<String>, text: impl Into<String>) -> Self {
        Document {
            external_id: external_id.into(),
            timestamp: None,
            text: text.into(),
        }
    }

    pub fn with_timestamp(mut self, timestamp: i64) -> Self {
        self.timestamp = Some(timestamp);
        self
    }
}

/// Analyzed terms of one document, in text order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenStream(Vec<String>);

impl TokenStream {
    pub fn terms(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_terms(self) -> Vec<String> {
        self.0
    }
}

/// Lowercases `text` and splits it on every non-alphanumeric codepoint.
///
/// No stemming and no stopword removal.
pub fn analyze(text: &str) -> TokenStream {
    TokenStream(
        text.split(|c: char| !c.is_alphanumeric())
            .filter(|fragment| !fragment.is_empty())
            .map(str::to_lowercase)
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Jsonl,
    TrecText,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" => Ok(CorpusFormat::Jsonl),
            "trectext" => Ok(CorpusFormat::TrecText),
            other => Err(Error::InvalidArgument(format!(
                "unknown corpus format {other:?} (expected jsonl or trectext)"
            ))),
        }
    }
}

impl fmt::Display for CorpusFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorpusFormat::Jsonl => "jsonl",
            CorpusFormat::TrecText => "trectext",
        })
    }
}

/// Opens a corpus and returns a lazy, file-ordered document sequence.
pub fn load_corpus(path: impl AsRef<Path>, format: CorpusFormat) -> Result<Documents> {
    let path = path.as_ref().to_path_buf();
    let source = match format {
        CorpusFormat::Jsonl => {
            let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
            Source::Jsonl {
                lines: BufReader::new(file).lines(),
                line_no: 0,
            }
        }
        CorpusFormat::TrecText => {
            let content = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            Source::TrecText(TrecTextCursor::new(content))
        }
    };
    Ok(Documents {
        path,
        source,
        seen: HashSet::new(),
        timestamped: None,
        done: false,
    })
}

/// Loads a whole corpus into memory.
pub fn read_corpus(path: impl AsRef<Path>, format: CorpusFormat) -> Result<Vec<Document>> {
    load_corpus(path, format)?.collect()
}

/// Lazy document sequence returned by [`load_corpus`].
pub struct Documents {
    path: PathBuf,
    source: Source,
    seen: HashSet<String>,
    timestamped: Option<bool>,
    done: bool,
}

enum Source {
    Jsonl {
        lines: Lines<BufReader<File>>,
        line_no: usize,
    },
    TrecText(TrecTextCursor),
}

#[derive(Deserialize)]
struct JsonRecord {
    id: String,
    text: String,
    #[serde(default)]
    timestamp: Option<i64>,
}

impl Documents {
    fn next_raw(&mut self) -> Option<Result<Document>> {
        match &mut self.source {
            Source::Jsonl { lines, line_no } => loop {
                let line = lines.next()?;
                *line_no += 1;
                let line = match line {
                    Ok(line) => line,
                    Err(e) => return Some(Err(Error::io(&self.path, e))),
                };
                if line.trim().is_empty() {
                    continue;
                }
                let location = format!("{}:{}", self.path.display(), line_no);
                let record: JsonRecord = match serde_json::from_str(&line) {
                    Ok(record) => record,
                    Err(e) => return Some(Err(Error::malformed(location, e.to_string()))),
                };
                if record.id.is_empty() {
                    return Some(Err(Error::malformed(location, "empty document id")));
                }
                return Some(Ok(Document {
                    external_id: record.id,
                    timestamp: record.timestamp,
                    text: record.text,
                }));
            },
            Source::TrecText(cursor) => cursor.next_doc().map(|r| {
                r.map_err(|(line, message)| {
                    Error::malformed(format!("{}:{}", self.path.display(), line), message)
                })
            }),
        }
    }
}

impl Iterator for Documents {
    type Item = Result<Document>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let item = match self.next_raw()? {
            Ok(doc) => self.validate(doc),
            Err(e) => Err(e),
        };
        if item.is_err() {
            self.done = true;
        }
        Some(item)
    }
}

impl Documents {
    fn validate(&mut self, doc: Document) -> Result<Document> {
        let has_ts = doc.timestamp.is_some();
        match self.timestamped {
            None => self.timestamped = Some(has_ts),
            Some(expected) if expected != has_ts => {
                return Err(Error::MixedTimestamps(doc.external_id));
            }
            Some(_) => {}
        }
        if !self.seen.insert(doc.external_id.clone()) {
            return Err(Error::DuplicateDocId(doc.external_id));
        }
        Ok(doc)
    }
}

/// Scans TRECTEXT content. Tag search runs over an ASCII-lowercased copy,
/// which keeps byte offsets aligned with the original.
struct TrecTextCursor {
    content: String,
    lower: String,
    pos: usize,
}

impl TrecTextCursor {
    fn new(content: String) -> Self {
        let lower = content.to_ascii_lowercase();
        TrecTextCursor {
            content,
            lower,
            pos: 0,
        }
    }

    fn line_of(&self, offset: usize) -> usize {
        self.content.as_bytes()[..offset]
            .iter()
            .filter(|&&b| b == b'\n')
            .count()
            + 1
    }

    fn find(&self, tag: &str, from: usize, to: usize) -> Option<usize> {
        self.lower[from..to].find(tag).map(|i| i + from)
    }

    fn next_doc(&mut self) -> Option<std::result::Result<Document, (usize, String)>> {
        let len = self.content.len();
        let start = self.find("<doc>", self.pos, len)?;
        let body_start = start + "<doc>".len();
        let Some(end) = self.find("</doc>", body_start, len) else {
            self.pos = len;
            return Some(Err((self.line_of(start), "<DOC> without </DOC>".into())));
        };
        self.pos = end + "</doc>".len();

        let docno = match self.section("docno", body_start, end) {
            Ok(Some((s, e))) => self.content[s..e].trim().to_string(),
            Ok(None) => return Some(Err((self.line_of(start), "DOC without DOCNO".into()))),
            Err(at) => return Some(Err((self.line_of(at), "unterminated <DOCNO>".into()))),
        };
        if docno.is_empty() {
            return Some(Err((self.line_of(start), "empty DOCNO".into())));
        }

        let mut text = String::new();
        let mut from = body_start;
        loop {
            match self.section("text", from, end) {
                Ok(Some((s, e))) => {
                    if !text.is_empty() {
                        text.push('\n');
                    }
                    text.push_str(&self.content[s..e]);
                    from = e + "</text>".len();
                }
                Ok(None) => break,
                Err(at) => return Some(Err((self.line_of(at), "unterminated <TEXT>".into()))),
            }
        }
        Some(Ok(Document {
            external_id: docno,
            timestamp: None,
            text,
        }))
    }

    /// Byte range of the first `<tag>..</tag>` body in `[from, to)`; `Err`
    /// carries the offset of an unterminated opening tag.
    fn section(
        &self,
        tag: &str,
        from: usize,
        to: usize,
    ) -> std::result::Result<Option<(usize, usize)>, usize> {
        let open = format!("<{tag}>");
        let close = format!("</{tag}>");
        let Some(s) = self.find(&open, from, to) else {
            return Ok(None);
        };
        let body = s + open.len();
        match self.find(&close, body, to) {
            Some(e) => Ok(Some((body, e))),
            None => Err(s),
        }
    }
}

/// Seeded permutation of `[0, doc_count)`.
///
/// The generator is ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64(seed)`)
/// driving a Fisher–Yates shuffle that walks `i` from `doc_count - 1` down to
/// `1` and swaps `i` with `j`, where `j` is drawn uniformly from `[0, i]` by
/// taking `next_u64() % (i + 1)` and rejecting draws at or above the largest
/// multiple of `i + 1` that fits in a `u64`.
pub fn shuffled_order(doc_count: usize, seed: u64) -> Result<Vec<usize>> {
    if doc_count == 0 {
        return Err(Error::InvalidArgument(
            "shuffled_order needs doc_count >= 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..doc_count).collect();
    for i in (1..doc_count).rev() {
        let j = uniform_below(&mut rng, i as u64 + 1) as usize;
        order.swap(i, j);
    }
    Ok(order)
}

fn uniform_below(rng: &mut impl RngCore, bound: u64) -> u64 {
    let zone = u64::MAX - (u64::MAX % bound);
    loop {
        let r = rng.next_u64();
        if r < zone {
            return r % bound;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn jsonl_field_mapping() {
        let f = write_tmp("{\"id\":\"d1\",\"text\":\"hello world\"}\n");
        let docs = read_corpus(f.path(), CorpusFormat::Jsonl).unwrap();
        assert_eq!(docs, vec![Document::new("d1", "hello world")]);
    }

    #[test]
    fn jsonl_duplicate_id_is_named() {
        let f = write_tmp(
            "{\"id\":\"d1\",\"text\":\"a\"}\n{\"id\":\"d2\",\"text\":\"b\"}\n{\"id\":\"d1\",\"text\":\"c\"}\n",
        );
        let err = read_corpus(f.path(), CorpusFormat::Jsonl).unwrap_err();
        assert!(
            matches!(&err, Error::DuplicateDocId(id) if id == "d1"),
            "{err}"
        );
        assert!(err.to_string().contains("d1"));
    }

    #[test]
    fn empty_file_is_empty_sequence() {
        let f = write_tmp("");
        assert!(read_corpus(f.path(), CorpusFormat::Jsonl)
            .unwrap()
            .is_empty());
        assert!(read_corpus(f.path(), CorpusFormat::TrecText)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn jsonl_malformed_reports_line() {
        let f = write_tmp("{\"id\":\"d1\",\"text\":\"a\"}\n\n{\"id\":\"d2\"}\n");
        let err = read_corpus(f.path(), CorpusFormat::Jsonl).unwrap_err();
        match err {
            Error::Malformed { location, .. } => assert!(location.ends_with(":3"), "{location}"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn jsonl_mixed_timestamps_rejected() {
        let f = write_tmp(
            "{\"id\":\"d1\",\"text\":\"a\",\"timestamp\":5}\n{\"id\":\"d2\",\"text\":\"b\"}\n",
        );
        let err = read_corpus(f.path(), CorpusFormat::Jsonl).unwrap_err();
        assert!(matches!(err, Error::MixedTimestamps(id) if id == "d2"));
    }

    #[test]
    fn jsonl_timestamps_and_file_order() {
        let f = write_tmp(
            "{\"id\":\"z\",\"text\":\"a\",\"timestamp\":500}\n{\"id\":\"a\",\"text\":\"b\",\"timestamp\":900}\n",
        );
        let docs = read_corpus(f.path(), CorpusFormat::Jsonl).unwrap();
        assert_eq!(docs[0].external_id, "z");
        assert_eq!(docs[0].timestamp, Some(500));
        assert_eq!(docs[1].timestamp, Some(900));
    }

    #[test]
    fn unreadable_file() {
        let err = read_corpus("/nonexistent/corpus.jsonl", CorpusFormat::Jsonl).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn trectext_case_insensitive_tags() {
        let f = write_tmp(
            "<DOC>\n<DOCNO> FBIS4-67701 </DOCNO>\n<TEXT>\nHello World\n</TEXT>\n</DOC>\n\
             <doc><docno>FT-1</docno><text>one</text><TEXT>two</TEXT></doc>\n",
        );
        let docs = read_corpus(f.path(), CorpusFormat::TrecText).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].external_id, "FBIS4-67701");
        assert_eq!(analyze(&docs[0].text).terms(), ["hello", "world"]);
        assert_eq!(docs[1].external_id, "FT-1");
        assert_eq!(docs[1].text, "one\ntwo");
    }

    #[test]
    fn trectext_errors() {
        let f = write_tmp("<DOC>\n<TEXT>x</TEXT>\n</DOC>\n");
        assert!(matches!(
            read_corpus(f.path(), CorpusFormat::TrecText),
            Err(Error::Malformed { .. })
        ));
        let f = write_tmp("<DOC><DOCNO>a</DOCNO>\n");
        assert!(matches!(
            read_corpus(f.path(), CorpusFormat::TrecText),
            Err(Error::Malformed { .. })
        ));
        let f = write_tmp("<DOC><DOCNO>a</DOCNO></DOC><DOC><DOCNO>a</DOCNO></DOC>");
        assert!(matches!(
            read_corpus(f.path(), CorpusFormat::TrecText),
            Err(Error::DuplicateDocId(id)) if id == "a"
        ));
    }

    #[test]
    fn analyzer_examples() {
        assert_eq!(analyze("Hello, World!").terms(), ["hello", "world"]);
        assert_eq!(
            analyze("BM25-scores BM25").terms(),
            ["bm25", "scores", "bm25"]
        );
        assert!(analyze("").is_empty());
    }

    #[test]
    fn shuffle_single_doc() {
        for seed in [0, 1, u64::MAX] {
            assert_eq!(shuffled_order(1, seed).unwrap(), vec![0]);
        }
    }

    #[test]
    fn shuffle_rejects_zero() {
        assert!(shuffled_order(0, 1).is_err());
    }

    #[test]
    fn shuffle_is_deterministic() {
        assert_eq!(shuffled_order(4, 7).unwrap(), shuffled_order(4, 7).unwrap());
    }

    #[test]
    fn shuffle_seeds_produce_distinct_permutations() {
        let distinct: HashSet<Vec<usize>> = (0..10u64)
            .map(|seed| shuffled_order(4, seed).unwrap())
            .collect();
        assert!(distinct.len() >= 2, "only {} distinct", distinct.len());
    }

    proptest! {
        #[test]
        fn analyzer_terms_are_clean(s in "\\PC{0,64}") {
            let a = analyze(&s);
            prop_assert_eq!(&a, &analyze(&s));
            for t in a.terms() {
                prop_assert!(!t.is_empty());
                prop_assert!(!t.chars().any(char::is_whitespace));
                prop_assert_eq!(t.to_lowercase(), t.clone());
            }
        }

        #[test]
        fn shuffle_is_a_permutation(n in 1usize..200, seed in any::<u64>()) {
            let mut order = shuffled_order(n, seed).unwrap();
            order.sort_unstable();
            prop_assert_eq!(order, (0..n).collect::<Vec<_>>());
        }
    }
}
