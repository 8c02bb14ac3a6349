//! Closed-form behavior of a `B`-bit table under uniform hashing, the
//! table-count heuristic, and the memory model.

use serde::Serialize;

use crate::error::{Error, Result};

/// Power-of-two table count `2^round(log2(B / log2 N))`, rounding halves up,
/// clamped to `[1, subspaces]` and reduced until it divides `subspaces`.
pub fn plan_tables(bits: u32, n: u64, subspaces: usize) -> Result<usize> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "table planning needs N >= 2, got {n}"
        )));
    }
    if bits == 0 || subspaces == 0 {
        return Err(Error::InvalidParameter("B and M must be positive".into()));
    }
    let ratio = f64::from(bits) / (n as f64).log2();
    let exponent = (ratio.log2() + 0.5).floor();
    let mut t = if exponent <= 0.0 {
        1usize
    } else {
        1usize << (exponent as u32).min(62)
    };
    t = t.min(1 << subspaces.ilog2());
    while !subspaces.is_multiple_of(t) {
        t /= 2;
    }
    Ok(t.max(1))
}

/// Expected fraction of filled slots after `N` uniform insertions into `2^B`
/// slots: `1 - (1 - 2^-B)^N`.
pub fn fill_rate(bits: u32, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let miss = (-(2f64.powi(-(bits as i32)))).ln_1p();
    -(n as f64 * miss).exp_m1()
}

/// Expected number of hashings until the first non-empty slot, `1 / p`.
pub fn expected_hashings(bits: u32, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::EmptyDatabase);
    }
    Ok(1.0 / fill_rate(bits, n))
}

/// Expected items per filled slot, `N / (2^B p)`.
pub fn slot_occupancy(bits: u32, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::EmptyDatabase);
    }
    Ok(n as f64 / (2f64.powi(bits as i32) * fill_rate(bits, n)))
}

/// Monte-Carlo estimate of fill rate and occupancy: `N` items hashed
/// uniformly into `2^B` slots, repeated until `trials` insertions in total.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Simulated {
    pub fill_rate: f64,
    pub slot_occupancy: f64,
}

pub fn simulate_uniform(bits: u32, n: u64, trials: u64, seed: u64) -> Result<Simulated> {
    use rand::{Rng, SeedableRng};

    if bits > 28 {
        return Err(Error::InvalidParameter(
            "simulation limited to B <= 28".into(),
        ));
    }
    if n == 0 {
        return Ok(Simulated {
            fill_rate: 0.0,
            slot_occupancy: f64::NAN,
        });
    }
    let slots = 1usize << bits;
    let rounds = (trials / n).max(1);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut filled_total = 0u64;
    let mut table = vec![false; slots];
    for _ in 0..rounds {
        table.fill(false);
        let mut filled = 0u64;
        for _ in 0..n {
            let s = rng.random_range(0..slots);
            if !table[s] {
                table[s] = true;
                filled += 1;
            }
        }
        filled_total += filled;
    }
    let mean_filled = filled_total as f64 / rounds as f64;
    Ok(Simulated {
        fill_rate: mean_filled / slots as f64,
        slot_occupancy: n as f64 / mean_filled,
    })
}

/// Theoretical lower-bound memory in bytes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MemoryEstimate {
    /// Identifiers per table, codes when `T > 1`, and codewords.
    pub table_bytes: f64,
    /// Codes stored linearly plus codewords, for the exhaustive scan.
    pub linear_scan_bytes: f64,
}

/// `4N + 4DK` for one table, `(4T + B/8) N + 4DK` otherwise; the linear
/// scan needs `BN/8 + 4DK`.
pub fn estimate_memory(bits: u32, n: u64, dim: usize, k: usize, tables: usize) -> MemoryEstimate {
    let n = n as f64;
    let codewords = 4.0 * dim as f64 * k as f64;
    let code_bytes = f64::from(bits) / 8.0;
    let table_bytes = if tables <= 1 {
        4.0 * n + codewords
    } else {
        (4.0 * tables as f64 + code_bytes) * n + codewords
    };
    MemoryEstimate {
        table_bytes,
        linear_scan_bytes: code_bytes * n + codewords,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_table_iii() {
        let pow10 = |e: u32| 10u64.pow(e);
        let b32 = [4, 4, 2, 2, 2, 1, 1, 1];
        let b64 = [8, 8, 4, 4, 4, 2, 2, 2];
        for (i, e) in (2..=9).enumerate() {
            assert_eq!(
                plan_tables(32, pow10(e), 4).unwrap(),
                b32[i],
                "B=32 N=1e{e}"
            );
            assert_eq!(
                plan_tables(64, pow10(e), 8).unwrap(),
                b64[i],
                "B=64 N=1e{e}"
            );
        }
        assert_eq!(plan_tables(32, 1 << 32, 4).unwrap(), 1);
    }

    #[test]
    fn plan_clamps_and_divides() {
        // 2^round(log2(64 / 1)) = 64, clamped to M.
        assert_eq!(plan_tables(64, 2, 8).unwrap(), 8);
        // M = 6: largest power of two dividing 6 below the plan is 2.
        assert_eq!(plan_tables(48, 100, 6).unwrap(), 2);
        // B much smaller than log2 N.
        assert_eq!(plan_tables(8, 1 << 40, 1).unwrap(), 1);
        assert!(plan_tables(32, 1, 4).is_err());
    }

    #[test]
    fn fill_rate_limits() {
        assert_eq!(fill_rate(8, 0), 0.0);
        let mut prev = 0.0;
        for n in [1u64, 10, 100, 1000, 10_000] {
            let p = fill_rate(8, n);
            assert!(p > prev && p <= 1.0);
            prev = p;
        }
        assert!((fill_rate(8, 100_000) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reciprocal_and_occupancy() {
        // p = 0.5 exactly with B = 1, N = 1.
        assert_eq!(fill_rate(1, 1), 0.5);
        assert_eq!(expected_hashings(1, 1).unwrap(), 2.0);
        assert!((slot_occupancy(16, 1).unwrap() - 1.0).abs() < 1e-9);
        assert!((slot_occupancy(8, 2560).unwrap() - 10.0).abs() < 1e-3);
        assert!((expected_hashings(8, 1 << 20).unwrap() - 1.0).abs() < 1e-12);
        assert!(expected_hashings(8, 0).is_err());
    }

    #[test]
    fn memory_examples() {
        let single = estimate_memory(32, 1_000_000_000, 128, 256, 1);
        assert_eq!(single.table_bytes, 4e9 + 4.0 * 128.0 * 256.0);
        let double = estimate_memory(64, 1_000_000_000, 128, 256, 2);
        assert_eq!(double.table_bytes, 16e9 + 4.0 * 128.0 * 256.0);
        assert_eq!(double.linear_scan_bytes, 8e9 + 4.0 * 128.0 * 256.0);
        assert_eq!(
            estimate_memory(64, 0, 128, 256, 2).table_bytes,
            4.0 * 128.0 * 256.0
        );
    }
}
