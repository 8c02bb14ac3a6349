//! Lloyd's k-means over flat `f32` point arrays.
//!
//! Distances are accumulated in `f64`; assignment ties go to the smallest
//! centroid index.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustc_hash::FxHashSet;

use super::squared_distance;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct KMeans {
    /// `k x dim`, row-major.
    pub centroids: Vec<f32>,
    /// Mean squared error measured at every assignment step, including one
    /// final assignment against the returned centroids.
    pub objective_history: Vec<f64>,
}

impl KMeans {
    pub fn final_objective(&self) -> f64 {
        *self.objective_history.last().unwrap_or(&f64::NAN)
    }
}

/// Index of the nearest centroid and its squared distance.
#[inline]
pub fn nearest(point: &[f32], centroids: &[f32], dim: usize) -> (usize, f64) {
    let mut best = (0usize, f64::INFINITY);
    for (j, c) in centroids.chunks_exact(dim).enumerate() {
        let d = squared_distance(point, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Nearest centroid for every point.
pub fn assign(points: &[f32], dim: usize, centroids: &[f32]) -> (Vec<u32>, Vec<f64>) {
    points
        .par_chunks_exact(dim)
        .map(|p| {
            let (j, d) = nearest(p, centroids, dim);
            (j as u32, d)
        })
        .unzip()
}

/// Picks `k` distinct points (by value) in seeded random order. When the data
/// holds fewer than `k` distinct points the picks are cycled.
pub fn init_distinct(points: &[f32], dim: usize, k: usize, seed: u64) -> Vec<f32> {
    let n = points.len() / dim;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let mut seen: FxHashSet<Vec<u32>> = FxHashSet::default();
    let mut picked: Vec<usize> = Vec::with_capacity(k);
    for &i in &order {
        let p = &points[i * dim..(i + 1) * dim];
        if seen.insert(p.iter().map(|x| x.to_bits()).collect()) {
            picked.push(i);
            if picked.len() == k {
                break;
            }
        }
    }
    let mut centroids = Vec::with_capacity(k * dim);
    for j in 0..k {
        let i = picked[j % picked.len()];
        centroids.extend_from_slice(&points[i * dim..(i + 1) * dim]);
    }
    centroids
}

/// Runs `iterations` Lloyd steps starting from `centroids`.
pub fn lloyd(points: &[f32], dim: usize, mut centroids: Vec<f32>, iterations: usize) -> KMeans {
    let n = points.len() / dim;
    let k = centroids.len() / dim;
    let mut history = Vec::with_capacity(iterations + 1);

    for _ in 0..iterations {
        let (labels, dists) = assign(points, dim, &centroids);
        history.push(dists.iter().sum::<f64>() / n as f64);

        let mut sums = vec![0.0f64; k * dim];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.chunks_exact(dim).zip(&labels) {
            let l = l as usize;
            counts[l] += 1;
            for (s, x) in sums[l * dim..(l + 1) * dim].iter_mut().zip(p) {
                *s += f64::from(*x);
            }
        }
        for j in 0..k {
            if counts[j] > 0 {
                let inv = 1.0 / counts[j] as f64;
                for d in 0..dim {
                    centroids[j * dim + d] = (sums[j * dim + d] * inv) as f32;
                }
            }
        }

        // Empty clusters move onto the points farthest from their centroid.
        let empty: Vec<usize> = (0..k).filter(|&j| counts[j] == 0).collect();
        if !empty.is_empty() {
            let mut by_cost: Vec<usize> = (0..n).collect();
            by_cost.sort_by(|&a, &b| dists[b].total_cmp(&dists[a]).then(a.cmp(&b)));
            for (j, &i) in empty.iter().zip(&by_cost) {
                centroids[j * dim..(j + 1) * dim].copy_from_slice(&points[i * dim..(i + 1) * dim]);
            }
        }
    }

    let (_, dists) = assign(points, dim, &centroids);
    history.push(dists.iter().sum::<f64>() / n as f64);
    KMeans {
        centroids,
        objective_history: history,
    }
}

/// Seeded k-means: distinct-point initialization followed by Lloyd steps.
pub fn kmeans(
    points: &[f32],
    dim: usize,
    k: usize,
    iterations: usize,
    seed: u64,
) -> Result<KMeans> {
    if dim == 0 || k == 0 {
        return Err(Error::InvalidParameter(
            "k-means needs dim >= 1 and k >= 1".into(),
        ));
    }
    if iterations == 0 {
        return Err(Error::InvalidParameter(
            "iterations must be at least 1".into(),
        ));
    }
    let n = points.len() / dim;
    if n < k {
        return Err(Error::InsufficientTrainingData { have: n, need: k });
    }
    let init = init_distinct(points, dim, k, seed);
    Ok(lloyd(points, dim, init, iterations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn nearest_breaks_ties_by_smallest_index() {
        let centroids = [1.0f32, -1.0, 1.0];
        assert_eq!(nearest(&[0.0], &centroids, 1), (0, 1.0));
    }

    #[test]
    fn k_points_k_clusters_recovers_points() {
        let pts = [0.0f32, 0.0, 5.0, 5.0, -3.0, 2.0];
        let km = kmeans(&pts, 2, 3, 5, 7).unwrap();
        let mut got: Vec<Vec<u32>> = km
            .centroids
            .chunks(2)
            .map(|c| c.iter().map(|x| x.to_bits()).collect())
            .collect();
        let mut want: Vec<Vec<u32>> = pts
            .chunks(2)
            .map(|c| c.iter().map(|x| x.to_bits()).collect())
            .collect();
        got.sort();
        want.sort();
        assert_eq!(got, want);
        assert_eq!(km.final_objective(), 0.0);
    }

    #[test]
    fn identical_points_single_cluster() {
        let pts = vec![2.5f32; 3 * 10];
        let km = kmeans(&pts, 3, 1, 3, 0).unwrap();
        assert_eq!(km.centroids, vec![2.5, 2.5, 2.5]);
    }

    #[test]
    fn fewer_distinct_points_than_k_still_runs() {
        let pts = vec![1.0f32; 8];
        let km = kmeans(&pts, 1, 4, 3, 0).unwrap();
        assert_eq!(km.centroids.len(), 4);
        assert!(km.centroids.iter().all(|&c| c == 1.0));
    }

    #[test]
    fn objective_never_increases() {
        let normal = Normal::new(0.0f32, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<f32> = (0..2000 * 4).map(|_| normal.sample(&mut rng)).collect();
        let km = kmeans(&pts, 4, 16, 12, 11).unwrap();
        assert_eq!(km.objective_history.len(), 13);
        for w in km.objective_history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-9), "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn rejects_too_few_points() {
        let err = kmeans(&[0.0, 1.0], 1, 3, 1, 0).unwrap_err();
        assert!(matches!(
            err,
            Error::InsufficientTrainingData { have: 2, need: 3 }
        ));
    }
}
