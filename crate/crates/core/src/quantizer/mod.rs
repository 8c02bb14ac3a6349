//! Product quantizer: codebooks, encoding, asymmetric distances and the
//! exhaustive linear scan.
//!
//! Code elements and record identifiers are 0-based throughout the crate.

mod codebook;
mod codes;
mod distance;
pub mod kmeans;
mod scan;

pub use codebook::{train_codebook, train_codebook_warm, Codebook, TrainParams, TrainedCodebook};
pub use codes::{CodeElement, CodesView, PqCode, PqCodes};
pub use distance::{DistanceMatrix, DistanceTuple};
pub use scan::{linear_adc_scan, linear_adc_scan_grouped, Score, TopL};

/// Squared Euclidean distance accumulated in double precision.
#[inline]
pub fn squared_distance(a: &[f32], b: &[f32]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        let d = f64::from(*x) - f64::from(*y);
        acc += d * d;
    }
    acc
}
