//! Rotation before product quantization.
//!
//! [`train_rotation`] alternates between k-means on rotated data and an
//! orthogonal Procrustes update of the rotation against the current
//! reconstructions; [`OpqTable`] rotates queries and delegates to a
//! [`MultiPqTable`].

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quantizer::{train_codebook, train_codebook_warm, Codebook, Score, TrainParams};
use crate::table::{MultiPqTable, QueryStats};

/// A `D x D` orthogonal matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation {
    dim: usize,
    matrix: Vec<f32>,
}

impl Rotation {
    pub fn identity(dim: usize) -> Self {
        let mut matrix = vec![0.0; dim * dim];
        for i in 0..dim {
            matrix[i * dim + i] = 1.0;
        }
        Rotation { dim, matrix }
    }

    /// Haar-distributed random rotation (QR of a Gaussian matrix with the
    /// sign of `R`'s diagonal folded into `Q`).
    pub fn random(dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = DMatrix::<f64>::from_fn(dim, dim, |_, _| StandardNormal.sample(&mut rng));
        let qr = g.qr();
        let (mut q, r) = (qr.q(), qr.r());
        for j in 0..dim {
            if r[(j, j)] < 0.0 {
                q.column_mut(j).neg_mut();
            }
        }
        Self::from_dmatrix(&q)
    }

    pub fn from_matrix(dim: usize, matrix: Vec<f32>) -> Result<Self> {
        if matrix.len() != dim * dim {
            return Err(Error::LengthMismatch {
                left: matrix.len(),
                right: dim * dim,
            });
        }
        Ok(Rotation { dim, matrix })
    }

    /// The inverse rotation.
    pub fn transpose(&self) -> Rotation {
        let d = self.dim;
        let mut matrix = vec![0f32; d * d];
        for i in 0..d {
            for j in 0..d {
                matrix[j * d + i] = self.matrix[i * d + j];
            }
        }
        Rotation { dim: d, matrix }
    }

    fn from_dmatrix(m: &DMatrix<f64>) -> Self {
        let dim = m.nrows();
        let mut matrix = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                matrix.push(m[(i, j)] as f32);
            }
        }
        Rotation { dim, matrix }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &[f32] {
        &self.matrix
    }

    /// `max |R^T R - I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let mut s = 0.0f64;
                for r in 0..d {
                    s += f64::from(self.matrix[r * d + i]) * f64::from(self.matrix[r * d + j]);
                }
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - want).abs());
            }
        }
        worst
    }

    #[inline]
    fn apply_into(&self, x: &[f32], out: &mut [f32]) {
        for (o, row) in out.iter_mut().zip(self.matrix.chunks_exact(self.dim)) {
            let mut s = 0.0f64;
            for (r, v) in row.iter().zip(x) {
                s += f64::from(*r) * f64::from(*v);
            }
            *o = s as f32;
        }
    }

    /// `R x`.
    pub fn apply(&self, x: &[f32]) -> Result<Vec<f32>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let mut out = vec![0.0; self.dim];
        self.apply_into(x, &mut out);
        Ok(out)
    }

    /// Rotates every vector of a flat array.
    pub fn apply_all(&self, data: &[f32]) -> Result<Vec<f32>> {
        if self.dim == 0 || !data.len().is_multiple_of(self.dim) {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: data.len() % self.dim.max(1),
            });
        }
        let mut out = vec![0.0; data.len()];
        out.par_chunks_exact_mut(self.dim)
            .zip(data.par_chunks_exact(self.dim))
            .for_each(|(o, x)| self.apply_into(x, o));
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationInit {
    Identity,
    /// Random orthogonal matrix drawn from the training seed.
    Random,
}

#[derive(Debug, Clone, Copy)]
pub struct OpqParams {
    pub m: usize,
    pub k: usize,
    /// k-means iterations per alternation.
    pub iterations: usize,
    pub alternations: usize,
    pub seed: u64,
    pub init: RotationInit,
}

impl Default for OpqParams {
    fn default() -> Self {
        OpqParams {
            m: 8,
            k: 256,
            iterations: 20,
            alternations: 10,
            seed: 0,
            init: RotationInit::Identity,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainedOpq {
    pub rotation: Rotation,
    pub codebook: Codebook,
    /// Mean squared reconstruction error after each alternation.
    pub error_history: Vec<f64>,
}

/// Alternating optimization of rotation and codebook.
///
/// The first alternation is plain PQ training on `R0 x`; each later one
/// updates `R` by orthogonal Procrustes against the reconstructions and
/// continues k-means from the previous codewords, so the error never grows.
pub fn train_rotation(data: &[f32], dim: usize, params: &OpqParams) -> Result<TrainedOpq> {
    if params.alternations == 0 {
        return Err(Error::InvalidParameter(
            "alternations must be at least 1".into(),
        ));
    }
    if dim == 0 || !data.len().is_multiple_of(dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: data.len() % dim.max(1),
        });
    }
    let mut rotation = match params.init {
        RotationInit::Identity => Rotation::identity(dim),
        RotationInit::Random => Rotation::random(dim, params.seed),
    };
    let train = TrainParams {
        m: params.m,
        k: params.k,
        iterations: params.iterations,
        seed: params.seed,
    };

    let rotated = rotation.apply_all(data)?;
    let first = train_codebook(&rotated, dim, &train)?;
    let mut history = vec![first.final_error()];
    let mut codebook = first.codebook;

    for _ in 1..params.alternations {
        rotation = procrustes(data, dim, &rotation.apply_all(data)?, &codebook)?;
        let rotated = rotation.apply_all(data)?;
        let step = train_codebook_warm(&rotated, &codebook, params.iterations)?;
        history.push(step.final_error());
        codebook = step.codebook;
    }
    Ok(TrainedOpq {
        rotation,
        codebook,
        error_history: history,
    })
}

/// Rotation minimizing `sum ||R x - y||^2` where `y` is the reconstruction of
/// the currently rotated `x`: `R = U V^T` for `sum y x^T = U S V^T`.
fn procrustes(data: &[f32], dim: usize, rotated: &[f32], cb: &Codebook) -> Result<Rotation> {
    let codes = cb.encode_all(rotated)?;
    let mut cross = DMatrix::<f64>::zeros(dim, dim);
    for (n, x) in data.chunks_exact(dim).enumerate() {
        let y = cb.decode(&codes.get(n).0)?;
        for i in 0..dim {
            let yi = f64::from(y[i]);
            if yi == 0.0 {
                continue;
            }
            for j in 0..dim {
                cross[(i, j)] += yi * f64::from(x[j]);
            }
        }
    }
    let svd = cross.svd(true, true);
    let (u, v_t) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    Ok(Rotation::from_dmatrix(&(u * v_t)))
}

/// A multi-table index over rotated vectors.
#[derive(Debug, Clone)]
pub struct OpqTable {
    rotation: Rotation,
    table: MultiPqTable,
}

impl OpqTable {
    pub fn new(rotation: Rotation, codebook: Codebook, tables: usize) -> Result<Self> {
        if rotation.dim() != codebook.dim() {
            return Err(Error::DimensionMismatch {
                expected: codebook.dim(),
                got: rotation.dim(),
            });
        }
        Ok(OpqTable {
            rotation,
            table: MultiPqTable::new(codebook, tables)?,
        })
    }

    pub fn from_parts(rotation: Rotation, table: MultiPqTable) -> Result<Self> {
        if rotation.dim() != table.codebook().dim() {
            return Err(Error::DimensionMismatch {
                expected: table.codebook().dim(),
                got: rotation.dim(),
            });
        }
        Ok(OpqTable { rotation, table })
    }

    /// Trains rotation and codebook on `train`, then indexes `base`.
    pub fn build(
        train: &[f32],
        base: &[f32],
        dim: usize,
        params: &OpqParams,
        tables: usize,
    ) -> Result<Self> {
        let trained = train_rotation(train, dim, params)?;
        let mut t = OpqTable::new(trained.rotation, trained.codebook, tables)?;
        t.add(base)?;
        Ok(t)
    }

    pub fn rotation(&self) -> &Rotation {
        &self.rotation
    }

    pub fn table(&self) -> &MultiPqTable {
        &self.table
    }

    pub fn into_parts(self) -> (Rotation, MultiPqTable) {
        (self.rotation, self.table)
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Rotates, encodes and inserts raw vectors.
    pub fn add(&mut self, data: &[f32]) -> Result<()> {
        let rotated = self.rotation.apply_all(data)?;
        self.table.add(&rotated)
    }

    pub fn query(&self, q: &[f32], l: usize) -> Result<Vec<Score>> {
        self.table.query(&self.rotation.apply(q)?, l)
    }

    pub fn search(&self, q: &[f32], l: usize) -> Result<Vec<Score>> {
        self.table.search(&self.rotation.apply(q)?, l)
    }

    pub fn search_with_stats(&self, q: &[f32], l: usize) -> Result<(Vec<Score>, QueryStats)> {
        self.table.search_with_stats(&self.rotation.apply(q)?, l)
    }

    pub fn heap_bytes(&self) -> usize {
        self.table.heap_bytes() + self.rotation.matrix.len() * 4
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_leaves_vector() {
        let x = [1.5f32, -2.0, 0.25];
        assert_eq!(Rotation::identity(3).apply(&x).unwrap(), x.to_vec());
    }

    #[test]
    fn quarter_turn() {
        let r = Rotation::from_matrix(2, vec![0.0, -1.0, 1.0, 0.0]).unwrap();
        assert_eq!(r.apply(&[1.0, 0.0]).unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn random_is_orthogonal_and_preserves_norm() {
        let r = Rotation::random(32, 4);
        assert!(r.orthogonality_error() <= 1e-5);
        let x: Vec<f32> = (0..32).map(|i| (i as f32 * 0.37).sin()).collect();
        let y = r.apply(&x).unwrap();
        let n = |v: &[f32]| v.iter().map(|&a| f64::from(a) * f64::from(a)).sum::<f64>();
        assert!((n(&x) - n(&y)).abs() <= 1e-6 * n(&x));
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            Rotation::identity(3).apply(&[1.0]),
            Err(Error::DimensionMismatch {
                expected: 3,
                got: 1
            })
        ));
    }
}
