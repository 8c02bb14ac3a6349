use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::codebook::Codebook;
use super::codes::{CodeElement, CodesView, PqCodes};
use super::distance::DistanceMatrix;
use crate::error::{Error, Result};

/// A record identifier paired with its asymmetric squared distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub id: u32,
    pub dist: f64,
}

impl Score {
    pub fn new(id: u32, dist: f64) -> Self {
        Score { id, dist }
    }

    /// Ascending distance, then ascending identifier.
    #[inline]
    pub fn order(&self, other: &Score) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then(self.id.cmp(&other.id))
    }
}

#[derive(Debug, Clone, Copy)]
struct Ranked(Score);

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Ranked {}
impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.order(&other.0)
    }
}

/// Keeps the `L` smallest scores seen so far.
#[derive(Debug)]
pub struct TopL {
    capacity: usize,
    heap: BinaryHeap<Ranked>,
}

impl TopL {
    pub fn new(capacity: usize) -> Self {
        TopL {
            capacity,
            heap: BinaryHeap::with_capacity(capacity + 1),
        }
    }

    #[inline]
    pub fn push(&mut self, s: Score) {
        if self.heap.len() < self.capacity {
            self.heap.push(Ranked(s));
        } else if let Some(mut top) = self.heap.peek_mut() {
            if s.order(&top.0) == Ordering::Less {
                *top = Ranked(s);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn into_sorted(self) -> Vec<Score> {
        self.heap
            .into_sorted_vec()
            .into_iter()
            .map(|r| r.0)
            .collect()
    }
}

fn scan<E: CodeElement>(dm: &DistanceMatrix, codes: &[E], m: usize, groups: usize, top: &mut TopL) {
    for (n, code) in codes.chunks_exact(m).enumerate() {
        top.push(Score::new(n as u32, dm.adc_grouped(code, groups)));
    }
}

/// Exhaustive asymmetric-distance scan returning the `L` nearest codes,
/// ascending by distance then identifier.
pub fn linear_adc_scan(q: &[f32], codes: &PqCodes, cb: &Codebook, l: usize) -> Result<Vec<Score>> {
    linear_adc_scan_grouped(q, codes, cb, l, 1)
}

/// [`linear_adc_scan`] with distances accumulated in `groups` consecutive
/// subspace groups, matching a `groups`-table index bit for bit.
pub fn linear_adc_scan_grouped(
    q: &[f32],
    codes: &PqCodes,
    cb: &Codebook,
    l: usize,
    groups: usize,
) -> Result<Vec<Score>> {
    if l == 0 {
        return Err(Error::InvalidParameter("L must be at least 1".into()));
    }
    if codes.is_empty() {
        return Err(Error::EmptyDatabase);
    }
    if codes.m() != cb.m() {
        return Err(Error::DimensionMismatch {
            expected: cb.m(),
            got: codes.m(),
        });
    }
    if groups == 0 || !cb.m().is_multiple_of(groups) {
        return Err(Error::TablesNotDivisor {
            tables: groups,
            subspaces: cb.m(),
        });
    }
    let dm = cb.distance_matrix(q, false)?;
    let mut top = TopL::new(l.min(codes.len()));
    match codes.view() {
        CodesView::Narrow(c) => scan(&dm, c, cb.m(), groups, &mut top),
        CodesView::Wide(c) => scan(&dm, c, cb.m(), groups, &mut top),
    }
    Ok(top.into_sorted())
}
