//! Drivers for the `pqtable` command-line tool. Each returns serializable
//! records; the binary prints them one JSON object per line.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::dataset::{
    read_ground_truth, read_vecs, recall_at, synthesize, synthesize_stream, ElementKind,
    GroundTruth, Synthetic,
};
use crate::error::{Error, Result};
use crate::format;
use crate::opq::{train_rotation, OpqParams, RotationInit};
use crate::quantizer::{
    linear_adc_scan_grouped, squared_distance, train_codebook, Codebook, Score, TrainParams,
};
use crate::table::{
    estimate_memory, expected_hashings, fill_rate, plan_tables, simulate_uniform, slot_occupancy,
    MultiPqTable, Simulated,
};

/// Prefixes I/O errors with the offending path.
fn at<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(
            io.kind(),
            format!("{}: {io}", path.display()),
        )),
        other => other,
    })
}

fn load_f32(
    path: &Path,
    kind: Option<ElementKind>,
    limit: Option<usize>,
) -> Result<(usize, Vec<f32>)> {
    let kind = kind
        .or_else(|| ElementKind::from_extension(path))
        .ok_or_else(|| {
            Error::InvalidParameter(format!("cannot infer vector kind of {}", path.display()))
        })?;
    let ds = at(path, read_vecs(path, kind, limit))?;
    Ok((ds.dim, ds.to_f32()))
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub data: PathBuf,
    pub kind: Option<ElementKind>,
    pub limit: Option<usize>,
    pub m: usize,
    pub k: usize,
    pub iterations: usize,
    pub seed: u64,
    /// Learn a rotation as well; the value is the number of alternations.
    pub opq: Option<usize>,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainSummary {
    pub command: &'static str,
    pub n: usize,
    pub dim: usize,
    pub m: usize,
    pub k: usize,
    pub bits: u32,
    pub seed: u64,
    pub opq: bool,
    pub quantization_error: f64,
}

pub fn train(cfg: &TrainConfig) -> Result<TrainSummary> {
    let (dim, data) = load_f32(&cfg.data, cfg.kind, cfg.limit)?;
    let n = data.len().checked_div(dim).unwrap_or(0);
    let (codebook, rotation, error) = match cfg.opq {
        Some(alternations) => {
            let params = OpqParams {
                m: cfg.m,
                k: cfg.k,
                iterations: cfg.iterations,
                alternations,
                seed: cfg.seed,
                init: RotationInit::Identity,
            };
            let t = train_rotation(&data, dim, &params)?;
            let err = *t.error_history.last().unwrap_or(&f64::NAN);
            (t.codebook, Some(t.rotation), err)
        }
        None => {
            let params = TrainParams {
                m: cfg.m,
                k: cfg.k,
                iterations: cfg.iterations,
                seed: cfg.seed,
            };
            let t = train_codebook(&data, dim, &params)?;
            let err = t.final_error();
            (t.codebook, None, err)
        }
    };
    at(
        &cfg.out,
        format::save_codebook(&cfg.out, &codebook, rotation.as_ref()),
    )?;
    Ok(TrainSummary {
        command: "train",
        n,
        dim,
        m: codebook.m(),
        k: codebook.k(),
        bits: codebook.code_bits(),
        seed: cfg.seed,
        opq: rotation.is_some(),
        quantization_error: error,
    })
}

#[derive(Debug, Clone)]
pub struct BuildConfig {
    pub data: PathBuf,
    pub kind: Option<ElementKind>,
    pub limit: Option<usize>,
    pub codebook: PathBuf,
    pub tables: Option<usize>,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
pub struct BuildSummary {
    pub command: &'static str,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub bits: u32,
    pub tables: usize,
    pub planned_tables: Option<usize>,
    pub memory_estimate_bytes: f64,
    pub index_heap_bytes: usize,
    pub file_bytes: u64,
}

/// Encodes base vectors (rotated first when the codebook carries a
/// rotation) and writes the index.
pub fn build(cfg: &BuildConfig) -> Result<BuildSummary> {
    let (codebook, rotation) = at(&cfg.codebook, format::load_codebook(&cfg.codebook))?;
    let (dim, mut data) = load_f32(&cfg.data, cfg.kind, cfg.limit)?;
    if dim != codebook.dim() {
        return Err(Error::DimensionMismatch {
            expected: codebook.dim(),
            got: dim,
        });
    }
    if let Some(r) = &rotation {
        data = r.apply_all(&data)?;
    }
    let n = data.len() / dim;
    let bits = codebook.code_bits();
    let planned = plan_tables(bits, n as u64, codebook.m()).ok();
    let tables = cfg.tables.or(planned).unwrap_or(1);
    let (m, k) = (codebook.m(), codebook.k());
    let mut table = MultiPqTable::new(codebook, tables)?;
    table.add(&data)?;
    at(
        &cfg.out,
        format::save_index(&cfg.out, &table, rotation.as_ref()),
    )?;
    let file_bytes = std::fs::metadata(&cfg.out)?.len();
    Ok(BuildSummary {
        command: "build",
        n,
        m,
        k,
        bits,
        tables,
        planned_tables: planned,
        memory_estimate_bytes: estimate_memory(bits, n as u64, dim, k, tables).table_bytes,
        index_heap_bytes: table.heap_bytes(),
        file_bytes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    /// Hash-table search.
    Table,
    /// Exhaustive asymmetric-distance scan.
    Linear,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct LatencyStats {
    pub mean_ms: f64,
    pub p50_ms: f64,
    pub p95_ms: f64,
    pub p99_ms: f64,
}

impl LatencyStats {
    pub fn from_samples(mut ms: Vec<f64>) -> Self {
        if ms.is_empty() {
            return LatencyStats::default();
        }
        ms.sort_by(f64::total_cmp);
        let pick = |p: f64| ms[((p * (ms.len() - 1) as f64).round() as usize).min(ms.len() - 1)];
        LatencyStats {
            mean_ms: ms.iter().sum::<f64>() / ms.len() as f64,
            p50_ms: pick(0.50),
            p95_ms: pick(0.95),
            p99_ms: pick(0.99),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Recall {
    pub at1: Option<f64>,
    pub at10: Option<f64>,
    pub at100: Option<f64>,
}

impl Recall {
    /// Recall at 1, 10 and 100, skipping cut-offs beyond `l`.
    pub fn compute(results: &[Vec<Score>], gt: &GroundTruth, l: usize) -> Result<Self> {
        let at = |r: usize| {
            if r <= l {
                recall_at(results, gt, r).map(Some)
            } else {
                Ok(None)
            }
        };
        Ok(Recall {
            at1: at(1)?,
            at10: at(10)?,
            at100: at(100)?,
        })
    }
}

/// One measured configuration.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: &'static str,
    pub mode: SearchMode,
    pub m: usize,
    pub k: usize,
    pub bits: u32,
    pub tables: usize,
    pub n: usize,
    pub l: usize,
    pub seed: Option<u64>,
    pub queries: usize,
    pub latency: LatencyStats,
    pub recall: Option<Recall>,
    pub mean_hashes: Option<f64>,
    pub memory_estimate_bytes: f64,
    pub index_heap_bytes: usize,
}

/// Results, per-query milliseconds and mean probed keys (table mode only).
type QueryRun = (Vec<Vec<Score>>, Vec<f64>, Option<f64>);

/// Runs every query on the current thread and times each one.
fn run_queries(
    table: &MultiPqTable,
    queries: &[f32],
    l: usize,
    mode: SearchMode,
) -> Result<QueryRun> {
    let dim = table.codebook().dim();
    if dim == 0 || !queries.len().is_multiple_of(dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: queries.len() % dim.max(1),
        });
    }
    let run = |q: &[f32]| -> Result<(Vec<Score>, u64)> {
        match mode {
            SearchMode::Table => table.search_with_stats(q, l).map(|(r, s)| (r, s.hashes)),
            SearchMode::Linear => {
                linear_adc_scan_grouped(q, table.codes(), table.codebook(), l, table.tables())
                    .map(|r| (r, 0))
            }
        }
    };
    if let Some(q) = queries.chunks_exact(dim).next() {
        run(q)?;
    }
    let mut results = Vec::new();
    let mut times = Vec::new();
    let mut hashes = 0u64;
    for q in queries.chunks_exact(dim) {
        let start = Instant::now();
        let (r, h) = run(q)?;
        times.push(start.elapsed().as_secs_f64() * 1e3);
        hashes += h;
        results.push(r);
    }
    let mean_hashes = (mode == SearchMode::Table && !results.is_empty())
        .then(|| hashes as f64 / results.len() as f64);
    Ok((results, times, mean_hashes))
}

fn report(
    table: &MultiPqTable,
    mode: SearchMode,
    l: usize,
    seed: Option<u64>,
    queries: &[f32],
    gt: Option<&GroundTruth>,
) -> Result<RunReport> {
    let (results, times, mean_hashes) = run_queries(table, queries, l, mode)?;
    let cb = table.codebook();
    let recall = gt.map(|g| Recall::compute(&results, g, l)).transpose()?;
    Ok(RunReport {
        command: "query",
        mode,
        m: cb.m(),
        k: cb.k(),
        bits: cb.code_bits(),
        tables: table.tables(),
        n: table.len(),
        l,
        seed,
        queries: results.len(),
        latency: LatencyStats::from_samples(times),
        recall,
        mean_hashes,
        memory_estimate_bytes: estimate_memory(
            cb.code_bits(),
            table.len() as u64,
            cb.dim(),
            cb.k(),
            table.tables(),
        )
        .table_bytes,
        index_heap_bytes: table.heap_bytes(),
    })
}

#[derive(Debug, Clone)]
pub struct QueryConfig {
    pub index: PathBuf,
    pub queries: PathBuf,
    pub kind: Option<ElementKind>,
    pub limit: Option<usize>,
    pub topk: usize,
    pub gt: Option<PathBuf>,
    pub mode: SearchMode,
}

pub fn query(cfg: &QueryConfig) -> Result<RunReport> {
    let (table, rotation) = at(&cfg.index, format::load_index(&cfg.index))?;
    let (dim, mut queries) = load_f32(&cfg.queries, cfg.kind, cfg.limit)?;
    if dim != table.codebook().dim() {
        return Err(Error::DimensionMismatch {
            expected: table.codebook().dim(),
            got: dim,
        });
    }
    if let Some(r) = &rotation {
        queries = r.apply_all(&queries)?;
    }
    let gt = match &cfg.gt {
        Some(p) => {
            let g = at(p, read_ground_truth(p, Some(queries.len() / dim)))?;
            if g.len() != queries.len() / dim {
                return Err(Error::LengthMismatch {
                    left: g.len(),
                    right: queries.len() / dim,
                });
            }
            Some(g)
        }
        None => None,
    };
    report(&table, cfg.mode, cfg.topk, None, &queries, gt.as_ref())
}

/// Data source for the benchmark sweep.
#[derive(Debug, Clone)]
pub enum BenchData {
    Files {
        base: PathBuf,
        queries: PathBuf,
        kind: Option<ElementKind>,
    },
    Synthetic {
        kind: Synthetic,
        n: usize,
        queries: usize,
        dim: usize,
    },
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub data: BenchData,
    pub query_limit: Option<usize>,
    pub sizes: Vec<usize>,
    pub bits: Vec<u32>,
    pub topk: Vec<usize>,
    pub train_size: usize,
    pub iterations: usize,
    pub seed: u64,
    /// Also time the exhaustive scan.
    pub linear: bool,
}

/// Exact Euclidean nearest neighbor of each query within `base`.
pub fn exact_nearest(base: &[f32], queries: &[f32], dim: usize) -> GroundTruth {
    use rayon::prelude::*;
    let lists = queries
        .par_chunks_exact(dim)
        .map(|q| {
            let mut best = (0u32, f64::INFINITY);
            for (i, x) in base.chunks_exact(dim).enumerate() {
                let d = squared_distance(q, x);
                if d < best.1 {
                    best = (i as u32, d);
                }
            }
            vec![best.0]
        })
        .collect();
    GroundTruth::new(lists).expect("uniform single-element lists")
}

/// Sweeps database size, code length and `L`, emitting one report per
/// configuration and search mode. Sizes beyond the base set are skipped.
pub fn bench(cfg: &BenchConfig) -> Result<Vec<RunReport>> {
    if cfg.sizes.is_empty() || cfg.bits.is_empty() || cfg.topk.is_empty() {
        return Ok(Vec::new());
    }
    let (dim, base, queries) = match &cfg.data {
        BenchData::Files {
            base,
            queries,
            kind,
        } => {
            let max = cfg.sizes.iter().copied().max();
            let (d, b) = load_f32(base, *kind, max)?;
            let (dq, q) = load_f32(queries, *kind, cfg.query_limit)?;
            if d != dq {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: dq,
                });
            }
            (d, b, q)
        }
        BenchData::Synthetic {
            kind,
            n,
            queries,
            dim,
        } => {
            let b = synthesize(*kind, *n, *dim, cfg.seed).to_f32();
            let q = synthesize_stream(*kind, *queries, *dim, cfg.seed, 1).to_f32();
            (*dim, b, q)
        }
    };
    let total = base.len() / dim.max(1);
    let mut rows = Vec::new();
    for &bits in &cfg.bits {
        if bits % 8 != 0 || bits == 0 {
            return Err(Error::InvalidParameter(format!(
                "bit width {bits} is not a multiple of 8"
            )));
        }
        let m = (bits / 8) as usize;
        let train_n = cfg.train_size.min(total);
        let params = TrainParams {
            m,
            k: 256,
            iterations: cfg.iterations,
            seed: cfg.seed,
        };
        let cb: Codebook = train_codebook(&base[..train_n * dim], dim, &params)?.codebook;
        let codes = cb.encode_all(&base)?;
        for &n in &cfg.sizes {
            if n > total || n == 0 {
                continue;
            }
            let tables = plan_tables(bits, n.max(2) as u64, m)?;
            let mut table = MultiPqTable::new(cb.clone(), tables)?;
            table.insert(&codes.prefix(n))?;
            let gt = exact_nearest(&base[..n * dim], &queries, dim);
            for &l in &cfg.topk {
                if l > n {
                    continue;
                }
                let mut r = report(
                    &table,
                    SearchMode::Table,
                    l,
                    Some(cfg.seed),
                    &queries,
                    Some(&gt),
                )?;
                r.command = "bench";
                rows.push(r);
                if cfg.linear {
                    let mut r = report(
                        &table,
                        SearchMode::Linear,
                        l,
                        Some(cfg.seed),
                        &queries,
                        Some(&gt),
                    )?;
                    r.command = "bench";
                    rows.push(r);
                }
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct AnalyzeConfig {
    pub bits: Vec<u32>,
    pub sizes: Vec<u64>,
    /// Monte-Carlo insertions per row; `None` skips simulation, as do code
    /// lengths above 28 bits.
    pub simulate: Option<u64>,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisRow {
    pub command: &'static str,
    pub bits: u32,
    pub n: u64,
    pub fill_rate: f64,
    pub expected_hashings: Option<f64>,
    pub slot_occupancy: Option<f64>,
    /// Planned table count assuming one byte per code element.
    pub planned_tables: Option<usize>,
    pub simulated: Option<Simulated>,
}

pub fn analyze(cfg: &AnalyzeConfig) -> Result<Vec<AnalysisRow>> {
    let mut rows = Vec::new();
    for &bits in &cfg.bits {
        for &n in &cfg.sizes {
            let simulated = match cfg.simulate {
                Some(trials) if bits <= 28 => Some(simulate_uniform(bits, n, trials, cfg.seed)?),
                _ => None,
            };
            rows.push(AnalysisRow {
                command: "analyze",
                bits,
                n,
                fill_rate: fill_rate(bits, n),
                expected_hashings: expected_hashings(bits, n).ok(),
                slot_occupancy: slot_occupancy(bits, n).ok(),
                planned_tables: plan_tables(bits, n, ((bits / 8) as usize).max(1)).ok(),
                simulated,
            });
        }
    }
    Ok(rows)
}
