use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::index::InternalDocId;

/// Score descending with exact equality as a tie (`-0.0 == 0.0`).
#[inline]
pub(crate) fn score_desc(a: f64, b: f64) -> Ordering {
    b.partial_cmp(&a).expect("scores are finite")
}

/// A candidate ordered so that better-ranked compares as `Less`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Candidate<T> {
    pub score: f64,
    pub tie: T,
    pub doc: InternalDocId,
}

impl<T: Ord> Ord for Candidate<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        score_desc(self.score, other.score).then_with(|| self.tie.cmp(&other.tie))
    }
}

impl<T: Ord> PartialOrd for Candidate<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Ord> PartialEq for Candidate<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Ord> Eq for Candidate<T> {}

/// Bounded selection of the `k` best candidates. The heap root is the worst
/// retained candidate; the tie key is only computed for candidates whose score
/// reaches the current threshold.
pub(crate) struct TopK<T, F> {
    k: usize,
    heap: BinaryHeap<Candidate<T>>,
    tie_key: F,
}

impl<T: Ord, F: Fn(InternalDocId) -> T> TopK<T, F> {
    pub fn new(k: usize, tie_key: F) -> Self {
        TopK {
            k,
            heap: BinaryHeap::with_capacity(k.min(4096) + 1),
            tie_key,
        }
    }

    #[inline]
    pub fn offer(&mut self, doc: InternalDocId, score: f64) {
        if self.heap.len() < self.k {
            let tie = (self.tie_key)(doc);
            self.heap.push(Candidate { score, tie, doc });
            return;
        }
        let worst = self.heap.peek().expect("k >= 1");
        if score < worst.score {
            return;
        }
        let candidate = Candidate {
            score,
            tie: (self.tie_key)(doc),
            doc,
        };
        if candidate < *worst {
            *self.heap.peek_mut().expect("k >= 1") = candidate;
        }
    }

    /// Best first.
    pub fn into_sorted(self) -> Vec<(InternalDocId, f64)> {
        self.heap
            .into_sorted_vec()
            .into_iter()
            .map(|c| (c.doc, c.score))
            .collect()
    }
}
