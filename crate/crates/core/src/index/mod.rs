//! Immutable in-memory inverted index.
//!
//! Internal document ids are dense and handed out at a single commit point in
//! arrival order. With one worker and no order seed, arrival order is file
//! order. With an order seed the documents are permuted by
//! [`shuffled_order`](crate::corpus::shuffled_order) before a single-threaded
//! commit. With several workers, arrival order is whatever the thread
//! interleaving produced, so two builds of the same collection generally
//! disagree on which internal id each document holds. Everything else the
//! index exposes (statistics, lengths, term vectors keyed by external id) is
//! independent of arrival order.

mod format;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::sync::Mutex;

use crate::corpus::{analyze, shuffled_order, Document};
use crate::error::{Error, Result};

pub use format::{read_index, write_index, FORMAT_VERSION, MAGIC};

/// Dense, build-local document number.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize,
)]
#[serde(transparent)]
pub struct InternalDocId(pub u32);

impl InternalDocId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for InternalDocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub doc: InternalDocId,
    pub tf: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TermStats {
    /// Number of documents containing the term.
    pub df: u32,
    /// Total occurrences of the term in the collection.
    pub cf: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollectionStats {
    pub doc_count: u32,
    pub total_terms: u64,
    pub avg_doc_len: f64,
    terms: HashMap<String, TermStats>,
}

impl CollectionStats {
    pub fn term(&self, term: &str) -> Option<TermStats> {
        self.terms.get(term).copied()
    }

    pub fn df(&self, term: &str) -> u32 {
        self.term(term).map_or(0, |s| s.df)
    }

    pub fn cf(&self, term: &str) -> u64 {
        self.term(term).map_or(0, |s| s.cf)
    }

    pub fn vocabulary_size(&self) -> usize {
        self.terms.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    pub workers: usize,
    pub order_seed: Option<u64>,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            workers: 1,
            order_seed: None,
        }
    }
}

impl BuildOptions {
    pub fn sequential() -> Self {
        Self::default()
    }

    pub fn seeded(seed: u64) -> Self {
        BuildOptions {
            workers: 1,
            order_seed: Some(seed),
        }
    }

    pub fn threaded(workers: usize) -> Self {
        BuildOptions {
            workers,
            order_seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Index {
    postings: HashMap<String, Vec<Posting>>,
    doc_len: Vec<u32>,
    external_ids: Vec<String>,
    by_external: HashMap<String, InternalDocId>,
    timestamps: Option<Vec<i64>>,
    doc_vectors: Vec<BTreeMap<String, u32>>,
    stats: CollectionStats,
}

/// Builds an index, assigning internal ids in commit arrival order.
pub fn build_index(
    docs: impl IntoIterator<Item = Document>,
    options: BuildOptions,
) -> Result<Index> {
    if options.workers == 0 {
        return Err(Error::InvalidArgument("workers must be >= 1".into()));
    }
    if options.workers > 1 && options.order_seed.is_some() {
        return Err(Error::InvalidArgument(
            "an order seed cannot be combined with more than one worker".into(),
        ));
    }

    if let Some(seed) = options.order_seed {
        let docs: Vec<Document> = docs.into_iter().collect();
        if docs.is_empty() {
            return Err(Error::EmptyCollection);
        }
        let order = shuffled_order(docs.len(), seed)?;
        let mut slots: Vec<Option<Document>> = docs.into_iter().map(Some).collect();
        let mut builder = IndexBuilder::default();
        for i in order {
            let doc = slots[i].take().expect("permutation visits each slot once");
            builder.commit(AnalyzedDoc::from(doc))?;
        }
        return builder.finish();
    }

    if options.workers == 1 {
        let mut builder = IndexBuilder::default();
        for doc in docs {
            builder.commit(AnalyzedDoc::from(doc))?;
        }
        return builder.finish();
    }

    let docs: Vec<Document> = docs.into_iter().collect();
    let queue = Mutex::new(docs.into_iter());
    let builder = Mutex::new(IndexBuilder::default());
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    std::thread::scope(|scope| {
        for _ in 0..options.workers {
            scope.spawn(|| loop {
                if failure.lock().unwrap().is_some() {
                    return;
                }
                let Some(doc) = queue.lock().unwrap().next() else {
                    return;
                };
                let analyzed = AnalyzedDoc::from(doc);
                let committed = builder.lock().unwrap().commit(analyzed);
                if let Err(e) = committed {
                    failure.lock().unwrap().get_or_insert(e);
                    return;
                }
            });
        }
    });
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    builder.into_inner().unwrap().finish()
}

struct AnalyzedDoc {
    external_id: String,
    timestamp: Option<i64>,
    vector: BTreeMap<String, u32>,
    len: u32,
}

impl From<Document> for AnalyzedDoc {
    fn from(doc: Document) -> Self {
        let tokens = analyze(&doc.text);
        let len = tokens.len() as u32;
        let mut vector = BTreeMap::new();
        for term in tokens.into_terms() {
            *vector.entry(term).or_insert(0) += 1;
        }
        AnalyzedDoc {
            external_id: doc.external_id,
            timestamp: doc.timestamp,
            vector,
            len,
        }
    }
}

/// The single commit point. Ids are assigned here, in call order.
#[derive(Default)]
struct IndexBuilder {
    postings: HashMap<String, Vec<Posting>>,
    doc_len: Vec<u32>,
    external_ids: Vec<String>,
    by_external: HashMap<String, InternalDocId>,
    timestamps: Vec<Option<i64>>,
    doc_vectors: Vec<BTreeMap<String, u32>>,
}

impl IndexBuilder {
    fn commit(&mut self, doc: AnalyzedDoc) -> Result<InternalDocId> {
        if doc.external_id.is_empty() {
            return Err(Error::InvalidArgument("empty external document id".into()));
        }
        if let Some(first) = self.timestamps.first() {
            if first.is_some() != doc.timestamp.is_some() {
                return Err(Error::MixedTimestamps(doc.external_id));
            }
        }
        let id = InternalDocId(
            u32::try_from(self.doc_len.len())
                .map_err(|_| Error::InvalidArgument("too many documents".into()))?,
        );
        if self.by_external.contains_key(&doc.external_id) {
            return Err(Error::DuplicateDocId(doc.external_id));
        }
        for (term, &tf) in &doc.vector {
            match self.postings.get_mut(term.as_str()) {
                Some(list) => list.push(Posting { doc: id, tf }),
                None => {
                    self.postings
                        .insert(term.clone(), vec![Posting { doc: id, tf }]);
                }
            }
        }
        self.by_external.insert(doc.external_id.clone(), id);
        self.external_ids.push(doc.external_id);
        self.doc_len.push(doc.len);
        self.timestamps.push(doc.timestamp);
        self.doc_vectors.push(doc.vector);
        Ok(id)
    }

    fn finish(self) -> Result<Index> {
        if self.doc_len.is_empty() {
            return Err(Error::EmptyCollection);
        }
        let timestamps = if self.timestamps[0].is_some() {
            Some(self.timestamps.into_iter().map(|t| t.unwrap()).collect())
        } else {
            None
        };
        Index::assemble(
            self.postings,
            self.doc_len,
            self.external_ids,
            self.by_external,
            timestamps,
            self.doc_vectors,
        )
    }
}

impl Index {
    fn assemble(
        postings: HashMap<String, Vec<Posting>>,
        doc_len: Vec<u32>,
        external_ids: Vec<String>,
        by_external: HashMap<String, InternalDocId>,
        timestamps: Option<Vec<i64>>,
        doc_vectors: Vec<BTreeMap<String, u32>>,
    ) -> Result<Index> {
        let doc_count = doc_len.len() as u32;
        let total_terms: u64 = doc_len.iter().map(|&l| u64::from(l)).sum();
        if total_terms == 0 {
            return Err(Error::InvalidArgument(
                "collection contains no indexable terms".into(),
            ));
        }
        let terms = postings
            .iter()
            .map(|(term, list)| {
                let cf = list.iter().map(|p| u64::from(p.tf)).sum();
                (
                    term.clone(),
                    TermStats {
                        df: list.len() as u32,
                        cf,
                    },
                )
            })
            .collect();
        Ok(Index {
            postings,
            doc_len,
            external_ids,
            by_external,
            timestamps,
            doc_vectors,
            stats: CollectionStats {
                doc_count,
                total_terms,
                avg_doc_len: total_terms as f64 / f64::from(doc_count),
                terms,
            },
        })
    }

    pub fn doc_count(&self) -> usize {
        self.doc_len.len()
    }

    pub fn stats(&self) -> &CollectionStats {
        &self.stats
    }

    /// Posting list for `term`, ascending by internal id; empty if unseen.
    pub fn postings_for(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map_or(&[], Vec::as_slice)
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.postings.keys().map(String::as_str)
    }

    #[inline]
    pub fn external_id(&self, doc: InternalDocId) -> &str {
        &self.external_ids[doc.index()]
    }

    pub fn internal_id(&self, external_id: &str) -> Option<InternalDocId> {
        self.by_external.get(external_id).copied()
    }

    pub fn external_ids(&self) -> &[String] {
        &self.external_ids
    }

    pub fn has_timestamps(&self) -> bool {
        self.timestamps.is_some()
    }

    #[inline]
    pub fn timestamp(&self, doc: InternalDocId) -> Option<i64> {
        self.timestamps.as_ref().map(|ts| ts[doc.index()])
    }

    #[inline]
    pub fn doc_len(&self, doc: InternalDocId) -> u32 {
        self.doc_len[doc.index()]
    }

    pub fn doc_vector(&self, doc: InternalDocId) -> &BTreeMap<String, u32> {
        &self.doc_vectors[doc.index()]
    }

    pub fn contains(&self, doc: InternalDocId) -> bool {
        doc.index() < self.doc_len.len()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        write_index(self, &mut out).map_err(|e| match e {
            Error::Io { source, .. } => Error::io(path, source),
            other => other,
        })?;
        std::io::Write::flush(&mut out).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Index> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        read_index(&mut std::io::BufReader::new(file)).map_err(|e| match e {
            Error::Io { source, .. } => Error::io(path, source),
            other => other,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn abc() -> Vec<Document> {
        vec![
            Document::new("a", "x y"),
            Document::new("b", "y z z"),
            Document::new("c", "x x"),
        ]
    }

    fn check_invariants(index: &Index) {
        let n = index.doc_count();
        let mut ids: Vec<&str> = index.external_ids().iter().map(String::as_str).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), n);
        for d in 0..n as u32 {
            let d = InternalDocId(d);
            assert_eq!(index.internal_id(index.external_id(d)), Some(d));
            let sum: u32 = index.doc_vector(d).values().sum();
            assert_eq!(sum, index.doc_len(d));
        }
        for term in index.terms() {
            let list = index.postings_for(term);
            assert!(list.windows(2).all(|w| w[0].doc < w[1].doc));
            assert!(list.iter().all(|p| p.tf >= 1 && index.contains(p.doc)));
            let s = index.stats().term(term).unwrap();
            assert_eq!(s.df as usize, list.len());
            assert!(s.df >= 1 && s.df as usize <= n && s.cf >= u64::from(s.df));
        }
        let stats = index.stats();
        assert_eq!(
            stats.avg_doc_len,
            stats.total_terms as f64 / f64::from(stats.doc_count)
        );
    }

    #[test]
    fn sequential_build_uses_file_order() {
        let index = build_index(abc(), BuildOptions::sequential()).unwrap();
        assert_eq!(index.external_ids(), ["a", "b", "c"]);
        check_invariants(&index);
    }

    #[test]
    fn seeded_build_follows_shuffled_order() {
        // Find a seed whose permutation of 3 is [2, 0, 1].
        let seed = (0..1000u64)
            .find(|&s| shuffled_order(3, s).unwrap() == [2, 0, 1])
            .expect("some seed yields [2,0,1]");
        let index = build_index(abc(), BuildOptions::seeded(seed)).unwrap();
        assert_eq!(index.external_ids(), ["c", "a", "b"]);
        check_invariants(&index);
    }

    #[test]
    fn threaded_builds_satisfy_invariants() {
        let docs: Vec<Document> = (0..500)
            .map(|i| Document::new(format!("d{i}"), format!("t{} t{} shared", i % 17, i % 5)))
            .collect();
        let first = build_index(docs.clone(), BuildOptions::threaded(8)).unwrap();
        let second = build_index(docs, BuildOptions::threaded(8)).unwrap();
        check_invariants(&first);
        check_invariants(&second);
        assert_eq!(first.stats(), second.stats());
    }

    #[test]
    fn postings_sorted_and_unseen_empty() {
        let index = build_index(abc(), BuildOptions::sequential()).unwrap();
        let x = index.postings_for("x");
        assert_eq!(
            x,
            [
                Posting {
                    doc: InternalDocId(0),
                    tf: 1
                },
                Posting {
                    doc: InternalDocId(2),
                    tf: 2
                }
            ]
        );
        assert!(index.postings_for("nope").is_empty());
        for term in index.terms() {
            assert_eq!(
                index.stats().df(term) as usize,
                index.postings_for(term).len()
            );
        }
    }

    #[test]
    fn build_errors() {
        assert!(matches!(
            build_index(Vec::new(), BuildOptions::sequential()),
            Err(Error::EmptyCollection)
        ));
        let dup = vec![Document::new("a", "x"), Document::new("a", "y")];
        assert!(matches!(
            build_index(dup.clone(), BuildOptions::sequential()),
            Err(Error::DuplicateDocId(id)) if id == "a"
        ));
        assert!(matches!(
            build_index(dup, BuildOptions::threaded(4)),
            Err(Error::DuplicateDocId(_))
        ));
        assert!(build_index(
            abc(),
            BuildOptions {
                workers: 2,
                order_seed: Some(1)
            }
        )
        .is_err());
        assert!(build_index(abc(), BuildOptions::threaded(0)).is_err());
        let mixed = vec![
            Document::new("a", "x").with_timestamp(1),
            Document::new("b", "y"),
        ];
        assert!(matches!(
            build_index(mixed, BuildOptions::sequential()),
            Err(Error::MixedTimestamps(_))
        ));
    }

    fn corpus_strategy() -> impl Strategy<Value = Vec<Document>> {
        prop::collection::vec(prop::collection::vec(0u8..8, 0..12), 1..30).prop_map(|docs| {
            docs.into_iter()
                .enumerate()
                .map(|(i, toks)| {
                    let text: Vec<String> = toks.iter().map(|t| format!("w{t}")).collect();
                    Document::new(format!("doc{i}"), text.join(" "))
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn statistics_do_not_depend_on_arrival_order(
            docs in corpus_strategy(),
            s1 in any::<u64>(),
            s2 in any::<u64>(),
        ) {
            prop_assume!(docs.iter().any(|d| !d.text.is_empty()));
            let a = build_index(docs.clone(), BuildOptions::seeded(s1)).unwrap();
            let b = build_index(docs, BuildOptions::seeded(s2)).unwrap();
            check_invariants(&a);
            check_invariants(&b);
            prop_assert_eq!(a.stats(), b.stats());
            let lens = |ix: &Index| {
                let mut v: Vec<(String, u32)> = (0..ix.doc_count() as u32)
                    .map(|d| (ix.external_id(InternalDocId(d)).to_string(), ix.doc_len(InternalDocId(d))))
                    .collect();
                v.sort();
                v
            };
            prop_assert_eq!(lens(&a), lens(&b));
            for ext in a.external_ids() {
                let da = a.internal_id(ext).unwrap();
                let db = b.internal_id(ext).unwrap();
                prop_assert_eq!(a.doc_vector(da), b.doc_vector(db));
            }
        }
    }
}
