//! Document ranking with explicit control over score tie-breaking.
//!
//! Search engines that break score ties by an indexer-assigned internal
//! document id can return different rankings from two indexes of the same
//! collection, because internal ids follow document arrival order and
//! multi-threaded indexing makes arrival order vary. This crate provides:
//!
//! - [`corpus`]: JSONL and TRECTEXT readers, the analyzer, seeded shuffling.
//! - [`index`]: an immutable inverted index whose internal ids follow arrival
//!   order, built single-threaded, seeded, or with real worker threads.
//! - [`search`]: BM25, Dirichlet query likelihood and RM3 with a choice of
//!   tie-break policy (internal id, external id, reverse chronological).
//! - [`trec_io`]: topics, qrels and run files; run scores are perturbed so
//!   that tools re-sorting by score keep our order.
//! - [`eval`]: AP, P@30 and NDCG@20.
//! - [`harness`]: the variability experiment across index builds, the
//!   latency benchmark, and a synthetic tie-heavy corpus generator.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod harness;
pub mod index;
pub mod search;
pub mod trec_io;

pub use error::{Error, Result};
