use nalgebra::{DMatrix, SymmetricEigen};

use super::VectorDataset;
use crate::error::{Error, Result};
use crate::opq::Rotation;

/// Rotation whose rows are the principal axes of `data`, largest variance
/// first.
pub fn pca_rotation(data: &[f32], dim: usize) -> Result<Rotation> {
    if dim == 0 || !data.len().is_multiple_of(dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: data.len() % dim.max(1),
        });
    }
    let n = data.len() / dim;
    if n <= dim {
        return Err(Error::DegenerateCovariance { n, dim });
    }
    let mut mean = vec![0.0f64; dim];
    for x in data.chunks_exact(dim) {
        for (m, v) in mean.iter_mut().zip(x) {
            *m += f64::from(*v);
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let mut cov = DMatrix::<f64>::zeros(dim, dim);
    let mut centered = vec![0.0f64; dim];
    for x in data.chunks_exact(dim) {
        for ((c, v), m) in centered.iter_mut().zip(x).zip(&mean) {
            *c = f64::from(*v) - m;
        }
        for i in 0..dim {
            for j in i..dim {
                cov[(i, j)] += centered[i] * centered[j];
            }
        }
    }
    for i in 0..dim {
        for j in 0..i {
            cov[(i, j)] = cov[(j, i)];
        }
    }
    cov /= (n - 1) as f64;

    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut matrix = Vec::with_capacity(dim * dim);
    for &c in &order {
        matrix.extend(eig.eigenvectors.column(c).iter().map(|&v| v as f32));
    }
    Rotation::from_matrix(dim, matrix)
}

/// Projects every vector onto the principal axes of the dataset. The
/// dimensionality is unchanged and pairwise distances are preserved.
pub fn pca_align(ds: &VectorDataset) -> Result<VectorDataset> {
    let data = ds.to_f32();
    let r = pca_rotation(&data, ds.dim)?;
    Ok(VectorDataset::from_f32(ds.dim, r.apply_all(&data)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{synthesize, Synthetic};
    use crate::opq::Rotation;

    fn covariance(v: &[f32], d: usize) -> Vec<f64> {
        let n = v.len() / d;
        let mut mean = vec![0.0; d];
        for x in v.chunks(d) {
            for j in 0..d {
                mean[j] += f64::from(x[j]) / n as f64;
            }
        }
        let mut c = vec![0.0; d * d];
        for x in v.chunks(d) {
            for i in 0..d {
                for j in 0..d {
                    c[i * d + j] +=
                        (f64::from(x[i]) - mean[i]) * (f64::from(x[j]) - mean[j]) / (n - 1) as f64;
                }
            }
        }
        c
    }

    #[test]
    fn variances_non_increasing_and_decorrelated() {
        let d = 8;
        let raw = synthesize(
            Synthetic::Anisotropic {
                clusters: 5,
                spread: 0.5,
                decay: 0.8,
            },
            3000,
            d,
            1,
        )
        .to_f32();
        let mixed = Rotation::random(d, 2).apply_all(&raw).unwrap();
        let out = pca_align(&VectorDataset::from_f32(d, mixed))
            .unwrap()
            .to_f32();
        let c = covariance(&out, d);
        let trace: f64 = (0..d).map(|i| c[i * d + i]).sum();
        for i in 1..d {
            assert!(c[i * d + i] <= c[(i - 1) * d + i - 1] * (1.0 + 1e-9));
        }
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    assert!(
                        c[i * d + j].abs() <= 1e-6 * trace,
                        "{i},{j}: {}",
                        c[i * d + j]
                    );
                }
            }
        }
    }

    #[test]
    fn dominant_direction_first() {
        // Points spread along (1, 1) / sqrt 2 with small noise.
        let mut v = Vec::new();
        for i in 0..200 {
            let t = i as f32 - 100.0;
            let e = ((i * 7919) % 13) as f32 * 0.01;
            v.extend([t + e, t - e, e]);
        }
        let r = pca_rotation(&v, 3).unwrap();
        let first = &r.matrix()[..3];
        assert!((first[0].abs() - std::f32::consts::FRAC_1_SQRT_2).abs() < 1e-3);
        assert!((first[1].abs() - std::f32::consts::FRAC_1_SQRT_2).abs() < 1e-3);
    }

    #[test]
    fn isotropic_variances_similar() {
        let d = 4;
        let out = pca_align(&synthesize(Synthetic::Gaussian, 20_000, d, 5))
            .unwrap()
            .to_f32();
        let c = covariance(&out, d);
        assert!(c[0] / c[d * d - 1] < 1.2);
    }

    #[test]
    fn preserves_pairwise_distances() {
        let d = 6;
        let ds = synthesize(Synthetic::Gaussian, 100, d, 9);
        let a = ds.to_f32();
        let b = pca_align(&ds).unwrap().to_f32();
        let dist = |v: &[f32], i: usize, j: usize| {
            (0..d)
                .map(|k| (f64::from(v[i * d + k]) - f64::from(v[j * d + k])).powi(2))
                .sum::<f64>()
        };
        for i in 0..20 {
            for j in 0..20 {
                let (x, y) = (dist(&a, i, j), dist(&b, i, j));
                assert!((x - y).abs() <= 1e-5 * x.max(1e-12));
            }
        }
    }

    #[test]
    fn degenerate() {
        assert!(matches!(
            pca_align(&VectorDataset::from_f32(4, vec![0.0; 16])),
            Err(Error::DegenerateCovariance { n: 4, dim: 4 })
        ));
    }
}
