use std::ops::Range;

use super::codebook::Codebook;
use super::codes::CodeElement;
use super::squared_distance;
use crate::error::{Error, Result};

/// One `(k, dist, pos)` entry of a sorted distance-matrix row. `pos` is the
/// 0-based rank of `k` within its row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceTuple {
    pub k: usize,
    pub dist: f64,
    pub pos: usize,
}

/// `M x K` squared distances from a query to every sub-codeword.
///
/// Entries are always addressable by the original sub-codeword index `k`.
/// After [`sort`](Self::sort) each row also exposes its ascending order.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    m: usize,
    k: usize,
    dists: Vec<f64>,
    /// `order[m * K + pos]` is the `k` at rank `pos`.
    order: Vec<u16>,
    /// `rank[m * K + k]` is the rank of `k`.
    rank: Vec<u16>,
}

impl DistanceMatrix {
    pub(crate) fn compute(cb: &Codebook, q: &[f32]) -> Self {
        let (m, k, s) = (cb.m(), cb.k(), cb.sub_dim());
        let mut dists = Vec::with_capacity(m * k);
        for mi in 0..m {
            let qm = &q[mi * s..(mi + 1) * s];
            for c in cb.sub_codebook(mi).chunks_exact(s) {
                dists.push(squared_distance(qm, c));
            }
        }
        DistanceMatrix {
            m,
            k,
            dists,
            order: Vec::new(),
            rank: Vec::new(),
        }
    }

    /// Builds a matrix from raw `M x K` distances.
    pub fn from_distances(m: usize, k: usize, dists: Vec<f64>) -> Result<Self> {
        if dists.len() != m * k {
            return Err(Error::LengthMismatch {
                left: dists.len(),
                right: m * k,
            });
        }
        if k > 1 << 16 {
            return Err(Error::InvalidParameter(format!(
                "K must be at most 65536, got {k}"
            )));
        }
        Ok(DistanceMatrix {
            m,
            k,
            dists,
            order: Vec::new(),
            rank: Vec::new(),
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn is_sorted(&self) -> bool {
        !self.order.is_empty() || self.dists.is_empty()
    }

    /// Sorts every row by distance, ties by `k`, and records ranks.
    pub fn sort(&mut self) {
        if self.is_sorted() {
            return;
        }
        let k = self.k;
        self.order = Vec::with_capacity(self.m * k);
        self.rank = vec![0; self.m * k];
        let mut idx: Vec<u16> = Vec::with_capacity(k);
        for m in 0..self.m {
            let row = &self.dists[m * k..(m + 1) * k];
            idx.clear();
            idx.extend((0..k).map(|i| i as u16));
            idx.sort_unstable_by(|&a, &b| {
                row[a as usize].total_cmp(&row[b as usize]).then(a.cmp(&b))
            });
            for (pos, &kk) in idx.iter().enumerate() {
                self.rank[m * k + kk as usize] = pos as u16;
            }
            self.order.extend_from_slice(&idx);
        }
    }

    #[inline]
    pub fn dist(&self, m: usize, k: usize) -> f64 {
        self.dists[m * self.k + k]
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.dists[m * self.k..(m + 1) * self.k]
    }

    /// The sub-codeword at rank `pos` of row `m`. Requires a sorted matrix.
    #[inline]
    pub fn k_at(&self, m: usize, pos: usize) -> usize {
        self.order[m * self.k + pos] as usize
    }

    /// Rank of sub-codeword `k` in row `m`. Requires a sorted matrix.
    #[inline]
    pub fn pos_of(&self, m: usize, k: usize) -> usize {
        self.rank[m * self.k + k] as usize
    }

    /// The tuple at rank `pos` of row `m`. Requires a sorted matrix.
    pub fn tuple(&self, m: usize, pos: usize) -> DistanceTuple {
        let k = self.k_at(m, pos);
        DistanceTuple {
            k,
            dist: self.dist(m, k),
            pos,
        }
    }

    /// A copy of a contiguous range of rows, sorted if `self` is.
    pub fn rows(&self, range: Range<usize>) -> DistanceMatrix {
        let (a, b) = (range.start * self.k, range.end * self.k);
        DistanceMatrix {
            m: range.len(),
            k: self.k,
            dists: self.dists[a..b].to_vec(),
            order: if self.order.is_empty() {
                Vec::new()
            } else {
                self.order[a..b].to_vec()
            },
            rank: if self.rank.is_empty() {
                Vec::new()
            } else {
                self.rank[a..b].to_vec()
            },
        }
    }

    /// Asymmetric distance: the sum over `m` of the `(m, code[m])` entries,
    /// accumulated in subspace order.
    pub fn adc_distance(&self, code: &[u16]) -> Result<f64> {
        if code.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: code.len(),
            });
        }
        if let Some(&bad) = code.iter().find(|&&c| c as usize >= self.k) {
            return Err(Error::IndexOutOfRange {
                index: bad as usize,
                bound: self.k,
            });
        }
        Ok(self.adc(code))
    }

    /// Unchecked asymmetric distance, accumulated in subspace order.
    #[inline]
    pub fn adc<E: CodeElement>(&self, code: &[E]) -> f64 {
        let mut acc = 0.0f64;
        for (m, &c) in code.iter().enumerate() {
            acc += self.dists[m * self.k + c.index()];
        }
        acc
    }

    /// Asymmetric distance accumulated per group of `M / groups` consecutive
    /// subspaces, then across groups. Multi-table queries use this order so
    /// that their stopping bound holds bit-exactly; `groups == 1` equals
    /// [`adc`](Self::adc).
    #[inline]
    pub fn adc_grouped<E: CodeElement>(&self, code: &[E], groups: usize) -> f64 {
        if groups <= 1 {
            return self.adc(code);
        }
        let per = self.m / groups;
        let mut total = 0.0f64;
        for (g, part) in code.chunks_exact(per).enumerate() {
            let mut acc = 0.0f64;
            for (i, &c) in part.iter().enumerate() {
                acc += self.dists[(g * per + i) * self.k + c.index()];
            }
            total += acc;
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_book() -> Codebook {
        Codebook::from_codewords(2, 2, 2, vec![0.0, 10.0, 0.0, 10.0]).unwrap()
    }

    #[test]
    fn unsorted_scalar_rows() {
        let dm = scalar_book().distance_matrix(&[1.0, 9.0], false).unwrap();
        assert!(!dm.is_sorted());
        assert_eq!(dm.row(0), &[1.0, 81.0]);
        assert_eq!(dm.row(1), &[81.0, 1.0]);
        assert_eq!(dm.adc_distance(&[0, 1]).unwrap(), 2.0);
    }

    #[test]
    fn sorted_rows_have_ranks() {
        let dm = scalar_book().distance_matrix(&[1.0, 9.0], true).unwrap();
        assert_eq!(
            dm.tuple(0, 0),
            DistanceTuple {
                k: 0,
                dist: 1.0,
                pos: 0
            }
        );
        assert_eq!(
            dm.tuple(1, 0),
            DistanceTuple {
                k: 1,
                dist: 1.0,
                pos: 0
            }
        );
        assert_eq!(dm.pos_of(1, 0), 1);
        // Lookup by original k is unaffected by sorting.
        assert_eq!(dm.adc_distance(&[0, 1]).unwrap(), 2.0);
    }

    #[test]
    fn zero_distance_on_codeword() {
        let cb =
            Codebook::from_codewords(4, 2, 3, (0..12).map(|i| i as f32 * 0.5).collect()).unwrap();
        let q = [cb.codeword(0, 0), cb.codeword(1, 0)].concat();
        let dm = cb.distance_matrix(&q, true).unwrap();
        assert_eq!(dm.dist(0, 0), 0.0);
        assert_eq!(dm.pos_of(0, 0), 0);
        assert_eq!(dm.adc_distance(&cb.encode(&q).unwrap().0).unwrap(), 0.0);
    }

    #[test]
    fn grouped_single_group_matches_sequential() {
        let dm = DistanceMatrix::from_distances(4, 2, vec![0.1, 0.7, 0.2, 0.3, 1e8, 3.0, 0.3, 0.9])
            .unwrap();
        let code: [u16; 4] = [1, 0, 0, 1];
        assert_eq!(dm.adc_grouped(&code, 1).to_bits(), dm.adc(&code).to_bits());
        let g2 = dm.adc_grouped(&code, 2);
        assert_eq!(g2.to_bits(), ((0.7 + 0.2) + (1e8 + 0.9f64)).to_bits());
    }

    #[test]
    fn adc_errors() {
        let dm = scalar_book().distance_matrix(&[1.0, 9.0], false).unwrap();
        assert!(matches!(
            dm.adc_distance(&[0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            dm.adc_distance(&[0, 5]),
            Err(Error::IndexOutOfRange { .. })
        ));
    }
}
