use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::hash::Hash;

use rustc_hash::FxHashSet;
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// One index per subspace identifying a candidate code.
pub type Identity = SmallVec<[u16; 16]>;

/// A candidate and its asymmetric distance.
#[derive(Debug, Clone)]
pub struct CandidateEntry<I = Identity> {
    pub identity: I,
    pub priority: f64,
}

impl CandidateEntry {
    pub fn new(identity: impl Into<Identity>, priority: f64) -> Self {
        CandidateEntry {
            identity: identity.into(),
            priority,
        }
    }
}

impl<I: Ord> PartialEq for CandidateEntry<I> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<I: Ord> Eq for CandidateEntry<I> {}
impl<I: Ord> PartialOrd for CandidateEntry<I> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<I: Ord> Ord for CandidateEntry<I> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then_with(|| self.identity.cmp(&other.identity))
    }
}

/// Min-priority queue that never admits the same identity twice.
///
/// Pops return the smallest priority; equal priorities pop in ascending
/// identity order.
#[derive(Debug)]
pub struct NonDuplicateQueue<I = Identity> {
    heap: BinaryHeap<Reverse<CandidateEntry<I>>>,
    seen: FxHashSet<I>,
}

impl<I> Default for NonDuplicateQueue<I> {
    fn default() -> Self {
        NonDuplicateQueue {
            heap: BinaryHeap::new(),
            seen: FxHashSet::default(),
        }
    }
}

impl<I: Clone + Eq + Hash + Ord> NonDuplicateQueue<I> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts `e` unless its identity was pushed before. Returns whether it
    /// was inserted.
    pub fn push(&mut self, e: CandidateEntry<I>) -> bool {
        if !self.seen.insert(e.identity.clone()) {
            return false;
        }
        self.heap.push(Reverse(e));
        true
    }

    pub fn pop(&mut self) -> Result<CandidateEntry<I>> {
        self.heap.pop().map(|Reverse(e)| e).ok_or(Error::EmptyQueue)
    }

    /// Pops the minimum and also drops its identity from the duplicate
    /// filter, so a later push of it would be admitted. Only sound when the
    /// caller never pushes an identity after popping it.
    pub fn pop_retired(&mut self) -> Result<CandidateEntry<I>> {
        let e = self.pop()?;
        self.seen.remove(&e.identity);
        Ok(e)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn seen_len(&self) -> usize {
        self.seen.len()
    }
}
