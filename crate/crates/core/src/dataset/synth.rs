use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedIndex;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::VectorDataset;
use crate::opq::Rotation;

/// Synthetic data families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Synthetic {
    /// Standard normal in every dimension.
    Gaussian,
    /// Gaussian mixture: centers drawn from `N(0, 1)`, members at
    /// `center + spread * N(0, 1)`, cluster sizes skewed as `1 / (c + 1)`.
    Clustered { clusters: usize, spread: f32 },
    /// Clustered data whose dimension `d` is scaled by `decay^d`, then
    /// rotated by [`anisotropic_rotation`].
    Anisotropic {
        clusters: usize,
        spread: f32,
        decay: f32,
    },
}

impl Default for Synthetic {
    fn default() -> Self {
        Synthetic::Clustered {
            clusters: 64,
            spread: 0.4,
        }
    }
}

/// The rotation applied to axis-aligned anisotropic data for `seed`.
pub fn anisotropic_rotation(dim: usize, seed: u64) -> Rotation {
    Rotation::random(dim, seed ^ 0x005E_ED0F_A715)
}

fn normal(rng: &mut ChaCha8Rng) -> f32 {
    StandardNormal.sample(rng)
}

/// Deterministic data for a given `seed`.
pub fn synthesize(kind: Synthetic, n: usize, dim: usize, seed: u64) -> VectorDataset {
    synthesize_stream(kind, n, dim, seed, 0)
}

/// Like [`synthesize`], drawing members from an independent `stream`. The
/// cluster layout depends only on `seed`, so e.g. queries drawn from stream 1
/// follow the same distribution as a base set drawn from stream 0.
pub fn synthesize_stream(
    kind: Synthetic,
    n: usize,
    dim: usize,
    seed: u64,
    stream: u64,
) -> VectorDataset {
    let mut layout = ChaCha8Rng::seed_from_u64(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream + 1);
    let mut data = Vec::with_capacity(n * dim);
    match kind {
        Synthetic::Gaussian => {
            data.extend((0..n * dim).map(|_| normal(&mut rng)));
        }
        Synthetic::Clustered { clusters, spread }
        | Synthetic::Anisotropic {
            clusters, spread, ..
        } => {
            let clusters = clusters.max(1);
            let centers: Vec<f32> = (0..clusters * dim).map(|_| normal(&mut layout)).collect();
            let weights = WeightedIndex::new((0..clusters).map(|c| 1.0 / (c as f64 + 1.0)))
                .expect("positive weights");
            let scale: Vec<f32> = match kind {
                Synthetic::Anisotropic { decay, .. } => {
                    (0..dim).map(|d| decay.powi(d as i32)).collect()
                }
                _ => vec![1.0; dim],
            };
            let rotation = matches!(kind, Synthetic::Anisotropic { .. })
                .then(|| anisotropic_rotation(dim, seed));
            let mut x = vec![0f32; dim];
            for _ in 0..n {
                let c = weights.sample(&mut rng);
                for d in 0..dim {
                    x[d] = (centers[c * dim + d] + spread * normal(&mut rng)) * scale[d];
                }
                match &rotation {
                    Some(r) => data.extend(r.apply(&x).expect("dimension matches")),
                    None => data.extend_from_slice(&x),
                }
            }
        }
    }
    VectorDataset::from_f32(dim, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        for kind in [Synthetic::Gaussian, Synthetic::default()] {
            assert_eq!(synthesize(kind, 100, 8, 3), synthesize(kind, 100, 8, 3));
            assert_ne!(synthesize(kind, 100, 8, 3), synthesize(kind, 100, 8, 4));
        }
    }

    #[test]
    fn streams_share_layout_but_differ() {
        let kind = Synthetic::Clustered {
            clusters: 4,
            spread: 0.01,
        };
        let a = synthesize_stream(kind, 50, 4, 1, 0).to_f32();
        let b = synthesize_stream(kind, 50, 4, 1, 7).to_f32();
        assert_ne!(a, b);
        // Every member of b lies near some member of a (shared centers).
        for y in b.chunks(4) {
            let best = a
                .chunks(4)
                .map(|x| x.iter().zip(y).map(|(p, q)| (p - q).powi(2)).sum::<f32>())
                .fold(f32::INFINITY, f32::min);
            assert!(best < 0.1);
        }
    }

    #[test]
    fn gaussian_mean_near_zero() {
        let (n, d) = (1000, 16);
        let v = synthesize(Synthetic::Gaussian, n, d, 8).to_f32();
        for j in 0..d {
            let mean: f64 = v
                .iter()
                .skip(j)
                .step_by(d)
                .map(|&x| f64::from(x))
                .sum::<f64>()
                / n as f64;
            assert!(mean.abs() <= 5.0 / (n as f64).sqrt(), "dim {j}: {mean}");
        }
    }

    #[test]
    fn anisotropic_variance_decays() {
        let kind = Synthetic::Anisotropic {
            clusters: 8,
            spread: 0.3,
            decay: 0.7,
        };
        let (n, d) = (5000, 8);
        let rotated = synthesize(kind, n, d, 2).to_f32();
        let v = anisotropic_rotation(d, 2)
            .transpose()
            .apply_all(&rotated)
            .unwrap();
        let var = |j: usize| {
            let xs: Vec<f64> = v.iter().skip(j).step_by(d).map(|&x| f64::from(x)).collect();
            let m = xs.iter().sum::<f64>() / n as f64;
            xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n as f64
        };
        assert!(var(0) > 4.0 * var(7));
    }
}
