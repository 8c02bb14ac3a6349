//! Full file-based workflow: write fvecs, train, build, save, reload and
//! query with recall against exact ground truth.
//!
//! Pass a directory holding `sift_base.fvecs`, `sift_learn.fvecs`,
//! `sift_query.fvecs` and `sift_groundtruth.ivecs` to run on SIFT1M instead.

use std::path::{Path, PathBuf};

use pqtable::commands::{self, exact_nearest, BuildConfig, QueryConfig, SearchMode, TrainConfig};
use pqtable::dataset::{
    synthesize, synthesize_stream, write_vecs, GroundTruth, Synthetic, VecData, VectorDataset,
};

fn synthetic_files(dir: &Path) -> pqtable::Result<(PathBuf, PathBuf, PathBuf, PathBuf)> {
    let dim = 32;
    let kind = Synthetic::default();
    let base = synthesize(kind, 20_000, dim, 11);
    let queries = synthesize_stream(kind, 50, dim, 11, 1);
    let gt: GroundTruth = exact_nearest(&base.to_f32(), &queries.to_f32(), dim);
    let gt_ids = gt
        .lists()
        .iter()
        .flat_map(|l| l.iter().map(|&i| i as i32))
        .collect();

    let paths = ["base.fvecs", "learn.fvecs", "query.fvecs", "gt.ivecs"].map(|f| dir.join(f));
    write_vecs(&paths[0], &base)?;
    write_vecs(&paths[1], &base.prefix(5_000))?;
    write_vecs(&paths[2], &queries)?;
    write_vecs(
        &paths[3],
        &VectorDataset {
            dim: 1,
            data: VecData::I32(gt_ids),
        },
    )?;
    let [b, l, q, g] = paths;
    Ok((b, l, q, g))
}

pub fn run_example() -> pqtable::Result<()> {
    run(None)
}

fn run(sift: Option<&Path>) -> pqtable::Result<()> {
    let work = tempfile::tempdir()?;
    let (base, learn, queries, gt, limit) = match sift {
        Some(d) => (
            d.join("sift_base.fvecs"),
            d.join("sift_learn.fvecs"),
            d.join("sift_query.fvecs"),
            d.join("sift_groundtruth.ivecs"),
            Some(1_000),
        ),
        None => {
            let (b, l, q, g) = synthetic_files(work.path())?;
            (b, l, q, g, None)
        }
    };

    let codebook = work.path().join("codebook.pqcb");
    let index = work.path().join("index.pqtb");
    let trained = commands::train(&TrainConfig {
        data: learn,
        kind: None,
        limit: Some(20_000),
        m: 4,
        k: 256,
        iterations: 10,
        seed: 0,
        opq: None,
        out: codebook.clone(),
    })?;
    println!("{}", serde_json::to_string(&trained).unwrap());

    let built = commands::build(&BuildConfig {
        data: base,
        kind: None,
        limit: None,
        codebook,
        tables: None,
        out: index.clone(),
    })?;
    println!("{}", serde_json::to_string(&built).unwrap());

    for mode in [SearchMode::Table, SearchMode::Linear] {
        let report = commands::query(&QueryConfig {
            index: index.clone(),
            queries: queries.clone(),
            kind: None,
            limit,
            topk: 100,
            gt: Some(gt.clone()),
            mode,
        })?;
        println!("{}", serde_json::to_string(&report).unwrap());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> pqtable::Result<()> {
    match std::env::args().nth(1) {
        Some(dir) => run(Some(Path::new(&dir))),
        None => run_example(),
    }
}
