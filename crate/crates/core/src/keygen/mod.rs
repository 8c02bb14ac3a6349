//! Enumerates PQ codes in non-decreasing asymmetric distance from a query.
//!
//! Each row of a sorted distance matrix is a sorted sequence; a candidate is
//! one position per row. Popping the best candidate pushes its successors
//! (one row advanced by one rank), and a non-duplicate queue keeps any
//! combination from being queued twice. The `r`-th call yields the `r`-th
//! smallest distance over all `K^M` codes.
//!
//! Priorities are summed in subspace order from the same row entries as
//! [`DistanceMatrix::adc`], so they are bit-identical to it.
//!
//! Lowering any rank lowers the `(priority, identity)` queue order, so every
//! predecessor of a candidate pops before it and no candidate is pushed after
//! it pops. Popped identities therefore leave the duplicate filter, which
//! then only holds what is queued.

mod queue;

pub use queue::{CandidateEntry, Identity, NonDuplicateQueue};

use crate::error::{Error, Result};
use smallvec::SmallVec;

use crate::quantizer::{Codebook, DistanceMatrix, PqCode};

/// Candidates are identified by their per-row rank positions. When all
/// positions fit in 128 bits they are packed into one integer, row 0 in the
/// high bits, which keeps the queue and its duplicate filter compact.
#[derive(Debug)]
enum Frontier {
    Packed {
        queue: NonDuplicateQueue<u128>,
        bits: u32,
    },
    Wide(NonDuplicateQueue<Identity>),
}

/// Lazy best-first enumerator over all codes of a (sub-)codebook.
#[derive(Debug)]
pub struct KeyGenerator {
    dmat: DistanceMatrix,
    /// `sorted[m * K + pos]` is the distance at rank `pos` of row `m`.
    sorted: Vec<f64>,
    frontier: Frontier,
    emitted: u64,
}

impl KeyGenerator {
    /// Builds and sorts the distance matrix for `q` and seeds the queue with
    /// the all-nearest combination.
    pub fn new(cb: &Codebook, q: &[f32]) -> Result<Self> {
        Ok(Self::from_distance_matrix(cb.distance_matrix(q, true)?))
    }

    pub fn from_distance_matrix(dmat: DistanceMatrix) -> Self {
        Self::build(dmat, false)
    }

    fn build(mut dmat: DistanceMatrix, force_wide: bool) -> Self {
        dmat.sort();
        let (m, k) = (dmat.m(), dmat.k());
        let mut sorted = Vec::with_capacity(m * k);
        for r in 0..m {
            sorted.extend((0..k).map(|pos| dmat.tuple(r, pos).dist));
        }
        let bits = (usize::BITS - k.saturating_sub(1).leading_zeros()).max(1);
        let mut frontier = if m as u32 * bits <= 128 && !force_wide {
            Frontier::Packed {
                queue: NonDuplicateQueue::new(),
                bits,
            }
        } else {
            Frontier::Wide(NonDuplicateQueue::new())
        };
        if k > 0 && m > 0 {
            let priority = sorted.chunks_exact(k).fold(0.0, |acc, row| acc + row[0]);
            match &mut frontier {
                Frontier::Packed { queue, .. } => queue.push(CandidateEntry {
                    identity: 0,
                    priority,
                }),
                Frontier::Wide(queue) => queue.push(CandidateEntry {
                    identity: SmallVec::from_elem(0, m),
                    priority,
                }),
            };
        }
        KeyGenerator {
            dmat,
            sorted,
            frontier,
            emitted: 0,
        }
    }

    pub fn subspaces(&self) -> usize {
        self.dmat.m()
    }

    pub fn distance_matrix(&self) -> &DistanceMatrix {
        &self.dmat
    }

    pub fn queue_len(&self) -> usize {
        match &self.frontier {
            Frontier::Packed { queue, .. } => queue.len(),
            Frontier::Wide(queue) => queue.len(),
        }
    }

    /// Number of codes emitted so far.
    pub fn emitted(&self) -> u64 {
        self.emitted
    }

    /// Next code and its distance; [`Error::Exhausted`] once all `K^M` codes
    /// have been emitted.
    pub fn next_key(&mut self) -> Result<(PqCode, f64)> {
        let mut code = vec![0u16; self.dmat.m()];
        let d = self.next_into(&mut code).ok_or(Error::Exhausted)?;
        Ok((PqCode(code), d))
    }

    /// Writes the next code into `out` and returns its distance, or `None`
    /// when exhausted.
    pub fn next_into(&mut self, out: &mut [u16]) -> Option<f64> {
        let (m, k) = (self.dmat.m(), self.dmat.k());
        let sorted = &self.sorted;
        let priority = match &mut self.frontier {
            Frontier::Packed { queue, bits } => {
                let e = queue.pop_retired().ok()?;
                let mask = (1u128 << *bits) - 1;
                let shift = |r: usize| (m - 1 - r) as u32 * *bits;
                let pos = |id: u128, r: usize| ((id >> shift(r)) & mask) as usize;
                for r in 0..m {
                    if pos(e.identity, r) + 1 >= k {
                        continue;
                    }
                    let next = e.identity + (1u128 << shift(r));
                    let mut priority = 0.0f64;
                    for j in 0..m {
                        priority += sorted[j * k + pos(next, j)];
                    }
                    queue.push(CandidateEntry {
                        identity: next,
                        priority,
                    });
                }
                for (r, o) in out.iter_mut().enumerate() {
                    *o = self.dmat.k_at(r, pos(e.identity, r)) as u16;
                }
                e.priority
            }
            Frontier::Wide(queue) => {
                let e = queue.pop_retired().ok()?;
                for r in 0..m {
                    if e.identity[r] as usize + 1 >= k {
                        continue;
                    }
                    let mut next = e.identity.clone();
                    next[r] += 1;
                    let mut priority = 0.0f64;
                    for (j, &p) in next.iter().enumerate() {
                        priority += sorted[j * k + p as usize];
                    }
                    queue.push(CandidateEntry {
                        identity: next,
                        priority,
                    });
                }
                for (r, o) in out.iter_mut().enumerate() {
                    *o = self.dmat.k_at(r, e.identity[r] as usize) as u16;
                }
                e.priority
            }
        };
        self.emitted += 1;
        Some(priority)
    }
}

impl Iterator for KeyGenerator {
    type Item = (PqCode, f64);

    fn next(&mut self) -> Option<Self::Item> {
        self.next_key().ok()
    }
}
