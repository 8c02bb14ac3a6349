use std::ops::Range;

use rayon::prelude::*;

use super::codes::{PqCode, PqCodes};
use super::distance::DistanceMatrix;
use super::kmeans::{self, nearest};
use crate::error::{Error, Result};

/// Product-quantizer codebook: `M` sub-codebooks of `K` sub-codewords, each of
/// dimension `D / M`.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    dim: usize,
    m: usize,
    k: usize,
    /// `(m, k, d)` row-major.
    codewords: Vec<f32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainParams {
    pub m: usize,
    pub k: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            m: 8,
            k: 256,
            iterations: 20,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainedCodebook {
    pub codebook: Codebook,
    /// Mean squared quantization error per vector, summed over subspaces, at
    /// every k-means assignment step.
    pub objective_history: Vec<f64>,
}

impl TrainedCodebook {
    pub fn final_error(&self) -> f64 {
        *self.objective_history.last().unwrap_or(&f64::NAN)
    }
}

fn subspace_seed(seed: u64, m: usize) -> u64 {
    seed.wrapping_add((m as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn check_shape(data: &[f32], dim: usize, m: usize) -> Result<usize> {
    if dim == 0 || m == 0 {
        return Err(Error::InvalidParameter(
            "dimension and M must be positive".into(),
        ));
    }
    if !dim.is_multiple_of(m) {
        return Err(Error::DimensionNotDivisible { dim, subspaces: m });
    }
    if !data.len().is_multiple_of(dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: data.len() % dim,
        });
    }
    Ok(data.len() / dim)
}

/// Copies the `m`-th sub-vector of every vector into a contiguous array.
fn gather_subvectors(data: &[f32], dim: usize, sub_dim: usize, m: usize) -> Vec<f32> {
    data.chunks_exact(dim)
        .flat_map(|v| v[m * sub_dim..(m + 1) * sub_dim].iter().copied())
        .collect()
}

/// Trains one k-means per subspace.
pub fn train_codebook(data: &[f32], dim: usize, params: &TrainParams) -> Result<TrainedCodebook> {
    let n = check_shape(data, dim, params.m)?;
    if params.k == 0 || params.k > 1 << 16 {
        return Err(Error::InvalidParameter(format!(
            "K must be in 1..=65536, got {}",
            params.k
        )));
    }
    if params.iterations == 0 {
        return Err(Error::InvalidParameter(
            "iterations must be at least 1".into(),
        ));
    }
    if n < params.k {
        return Err(Error::InsufficientTrainingData {
            have: n,
            need: params.k,
        });
    }
    let sub_dim = dim / params.m;
    let mut codewords = Vec::with_capacity(params.m * params.k * sub_dim);
    let mut history = vec![0.0; params.iterations + 1];
    for m in 0..params.m {
        let sub = gather_subvectors(data, dim, sub_dim, m);
        let km = kmeans::kmeans(
            &sub,
            sub_dim,
            params.k,
            params.iterations,
            subspace_seed(params.seed, m),
        )?;
        codewords.extend_from_slice(&km.centroids);
        for (h, o) in history.iter_mut().zip(&km.objective_history) {
            *h += o;
        }
    }
    Ok(TrainedCodebook {
        codebook: Codebook {
            dim,
            m: params.m,
            k: params.k,
            codewords,
        },
        objective_history: history,
    })
}

/// Continues k-means from the codewords of `init`.
pub fn train_codebook_warm(
    data: &[f32],
    init: &Codebook,
    iterations: usize,
) -> Result<TrainedCodebook> {
    let dim = init.dim;
    check_shape(data, dim, init.m)?;
    let sub_dim = init.sub_dim();
    let mut codewords = Vec::with_capacity(init.codewords.len());
    let mut history = vec![0.0; iterations + 1];
    for m in 0..init.m {
        let sub = gather_subvectors(data, dim, sub_dim, m);
        let km = kmeans::lloyd(&sub, sub_dim, init.sub_codebook(m).to_vec(), iterations);
        codewords.extend_from_slice(&km.centroids);
        for (h, o) in history.iter_mut().zip(&km.objective_history) {
            *h += o;
        }
    }
    Ok(TrainedCodebook {
        codebook: Codebook {
            dim,
            m: init.m,
            k: init.k,
            codewords,
        },
        objective_history: history,
    })
}

impl Codebook {
    /// Wraps raw codewords laid out `(m, k, d)` row-major.
    pub fn from_codewords(dim: usize, m: usize, k: usize, codewords: Vec<f32>) -> Result<Self> {
        if dim == 0 || m == 0 || k == 0 {
            return Err(Error::InvalidParameter(
                "D, M and K must be positive".into(),
            ));
        }
        if !dim.is_multiple_of(m) {
            return Err(Error::DimensionNotDivisible { dim, subspaces: m });
        }
        if k > 1 << 16 {
            return Err(Error::InvalidParameter(format!(
                "K must be at most 65536, got {k}"
            )));
        }
        if codewords.len() != k * dim {
            return Err(Error::LengthMismatch {
                left: codewords.len(),
                right: k * dim,
            });
        }
        Ok(Codebook {
            dim,
            m,
            k,
            codewords,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn sub_dim(&self) -> usize {
        self.dim / self.m
    }

    /// Bits per code element, `ceil(log2 K)`.
    pub fn element_bits(&self) -> u32 {
        element_bits(self.k)
    }

    /// Code length `B = M * log2 K`.
    pub fn code_bits(&self) -> u32 {
        self.m as u32 * self.element_bits()
    }

    pub fn codewords(&self) -> &[f32] {
        &self.codewords
    }

    pub fn sub_codebook(&self, m: usize) -> &[f32] {
        let len = self.k * self.sub_dim();
        &self.codewords[m * len..(m + 1) * len]
    }

    pub fn codeword(&self, m: usize, k: usize) -> &[f32] {
        let s = self.sub_dim();
        let base = (m * self.k + k) * s;
        &self.codewords[base..base + s]
    }

    /// A codebook over a contiguous range of subspaces.
    pub fn subspaces(&self, range: Range<usize>) -> Result<Codebook> {
        if range.start >= range.end || range.end > self.m {
            return Err(Error::InvalidParameter(format!(
                "subspace range {range:?} invalid for M={}",
                self.m
            )));
        }
        let len = self.k * self.sub_dim();
        Ok(Codebook {
            dim: range.len() * self.sub_dim(),
            m: range.len(),
            k: self.k,
            codewords: self.codewords[range.start * len..range.end * len].to_vec(),
        })
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: len,
            });
        }
        Ok(())
    }

    fn encode_unchecked(&self, x: &[f32], out: &mut [u16]) {
        let s = self.sub_dim();
        for (m, slot) in out.iter_mut().enumerate() {
            let (k, _) = nearest(&x[m * s..(m + 1) * s], self.sub_codebook(m), s);
            *slot = k as u16;
        }
    }

    /// Nearest sub-codeword per subspace; ties go to the smallest index.
    pub fn encode(&self, x: &[f32]) -> Result<PqCode> {
        self.check_dim(x.len())?;
        let mut code = vec![0u16; self.m];
        self.encode_unchecked(x, &mut code);
        Ok(PqCode(code))
    }

    /// Encodes a flat array of vectors.
    pub fn encode_all(&self, data: &[f32]) -> Result<PqCodes> {
        if !data.len().is_multiple_of(self.dim) {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: data.len() % self.dim,
            });
        }
        let m = self.m;
        let raw: Vec<u16> = data
            .par_chunks_exact(self.dim)
            .flat_map_iter(|x| {
                let mut code = vec![0u16; m];
                self.encode_unchecked(x, &mut code);
                code
            })
            .collect();
        Ok(if self.k <= 256 {
            PqCodes::from_narrow(m, self.k, raw.into_iter().map(|c| c as u8).collect())
        } else {
            PqCodes::from_wide(m, self.k, raw)
        })
    }

    /// Concatenation of the selected sub-codewords.
    pub fn decode(&self, code: &[u16]) -> Result<Vec<f32>> {
        if code.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: code.len(),
            });
        }
        let mut out = Vec::with_capacity(self.dim);
        for (m, &c) in code.iter().enumerate() {
            if c as usize >= self.k {
                return Err(Error::IndexOutOfRange {
                    index: c as usize,
                    bound: self.k,
                });
            }
            out.extend_from_slice(self.codeword(m, c as usize));
        }
        Ok(out)
    }

    /// Per-subspace squared distances from `q` to every sub-codeword.
    pub fn distance_matrix(&self, q: &[f32], sort: bool) -> Result<DistanceMatrix> {
        self.check_dim(q.len())?;
        let mut dm = DistanceMatrix::compute(self, q);
        if sort {
            dm.sort();
        }
        Ok(dm)
    }

    /// Mean squared reconstruction error of `data`.
    pub fn quantization_error(&self, data: &[f32]) -> Result<f64> {
        let codes = self.encode_all(data)?;
        let n = codes.len();
        if n == 0 {
            return Ok(0.0);
        }
        let total: f64 = data
            .par_chunks_exact(self.dim)
            .enumerate()
            .map(|(i, x)| {
                let s = self.sub_dim();
                (0..self.m)
                    .map(|m| {
                        super::squared_distance(
                            &x[m * s..(m + 1) * s],
                            self.codeword(m, codes.element(i, m)),
                        )
                    })
                    .sum::<f64>()
            })
            .sum();
        Ok(total / n as f64)
    }
}

pub(crate) fn element_bits(k: usize) -> u32 {
    if k <= 1 {
        0
    } else {
        usize::BITS - (k - 1).leading_zeros()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_book() -> Codebook {
        // D=2, M=2, K=2, both sub-codebooks {0, 10}.
        Codebook::from_codewords(2, 2, 2, vec![0.0, 10.0, 0.0, 10.0]).unwrap()
    }

    #[test]
    fn element_bits_matches_log2() {
        assert_eq!(element_bits(1), 0);
        assert_eq!(element_bits(2), 1);
        assert_eq!(element_bits(10), 4);
        assert_eq!(element_bits(256), 8);
        assert_eq!(element_bits(257), 9);
    }

    #[test]
    fn code_bits_is_8m_for_k256() {
        let cb = Codebook::from_codewords(8, 4, 256, vec![0.0; 256 * 8]).unwrap();
        assert_eq!(cb.code_bits(), 32);
    }

    #[test]
    fn encode_nearest_scalar() {
        let cb = scalar_book();
        assert_eq!(cb.encode(&[1.0, 9.0]).unwrap().0, vec![0, 1]);
    }

    #[test]
    fn encode_tie_goes_to_smallest_index() {
        let cb = scalar_book();
        assert_eq!(cb.encode(&[5.0, 5.0]).unwrap().0, vec![0, 0]);
    }

    #[test]
    fn encode_exact_codeword_hit() {
        let cb = Codebook::from_codewords(4, 2, 4, (0..16).map(|i| i as f32).collect()).unwrap();
        let x: Vec<f32> = [cb.codeword(0, 2), cb.codeword(1, 2)].concat();
        assert_eq!(cb.encode(&x).unwrap().0, vec![2, 2]);
        assert_eq!(cb.decode(&[2, 2]).unwrap(), x);
    }

    #[test]
    fn decode_first_codewords() {
        let cb = scalar_book();
        assert_eq!(cb.decode(&[0, 0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn errors() {
        let cb = scalar_book();
        assert!(matches!(
            cb.encode(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            cb.decode(&[0, 2]),
            Err(Error::IndexOutOfRange { index: 2, bound: 2 })
        ));
        assert!(matches!(
            train_codebook(
                &[0.0; 9],
                3,
                &TrainParams {
                    m: 2,
                    k: 1,
                    iterations: 1,
                    seed: 0
                }
            ),
            Err(Error::DimensionNotDivisible {
                dim: 3,
                subspaces: 2
            })
        ));
        assert!(matches!(
            train_codebook(
                &[0.0; 8],
                2,
                &TrainParams {
                    m: 1,
                    k: 8,
                    iterations: 1,
                    seed: 0
                }
            ),
            Err(Error::InsufficientTrainingData { have: 4, need: 8 })
        ));
    }

    #[test]
    fn training_is_deterministic() {
        let data: Vec<f32> = (0..400).map(|i| ((i * 37) % 101) as f32).collect();
        let p = TrainParams {
            m: 2,
            k: 8,
            iterations: 5,
            seed: 9,
        };
        let a = train_codebook(&data, 4, &p).unwrap();
        let b = train_codebook(&data, 4, &p).unwrap();
        assert_eq!(a.codebook, b.codebook);
    }

    #[test]
    fn identical_vectors_single_codeword() {
        let data = [1.5f32, -2.0].repeat(20);
        let t = train_codebook(
            &data,
            2,
            &TrainParams {
                m: 1,
                k: 1,
                iterations: 2,
                seed: 0,
            },
        )
        .unwrap();
        assert_eq!(t.codebook.codewords(), &[1.5, -2.0]);
    }
}
