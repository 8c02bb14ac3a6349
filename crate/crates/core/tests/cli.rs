use std::path::Path;
use std::process::{Command, Output};

use pqtable::commands::exact_nearest;
use pqtable::dataset::{
    synthesize, synthesize_stream, write_vecs, Synthetic, VecData, VectorDataset,
};
use serde_json::Value;

fn pqtable(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pqtable"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_lines(out: &Output) -> Vec<Value> {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn write_dataset(dir: &Path) {
    let dim = 16;
    let base = synthesize(Synthetic::default(), 4_000, dim, 8);
    let queries = synthesize_stream(Synthetic::default(), 30, dim, 8, 1);
    let gt = exact_nearest(&base.to_f32(), &queries.to_f32(), dim);
    let ids = gt.lists().iter().map(|l| l[0] as i32).collect();
    write_vecs(dir.join("base.fvecs"), &base).unwrap();
    write_vecs(dir.join("query.fvecs"), &queries).unwrap();
    write_vecs(
        dir.join("gt.ivecs"),
        &VectorDataset {
            dim: 1,
            data: VecData::I32(ids),
        },
    )
    .unwrap();
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_reports_billion_scale_hit_rate() {
    let rows = json_lines(&pqtable(&["analyze"]));
    assert_eq!(rows.len(), 16);
    let row = rows
        .iter()
        .find(|r| r["bits"] == 32 && r["n"] == 1_000_000_000u64)
        .unwrap();
    assert!((row["fill_rate"].as_f64().unwrap() - 0.208).abs() < 1e-3);
    assert_eq!(row["planned_tables"], 1);
}

#[test]
fn analyze_simulation_agrees() {
    let rows = json_lines(&pqtable(&[
        "analyze",
        "--bits",
        "12",
        "--sizes",
        "4096",
        "--simulate",
        "1000000",
    ]));
    let p = rows[0]["fill_rate"].as_f64().unwrap();
    let sim = rows[0]["simulated"]["fill_rate"].as_f64().unwrap();
    assert!((p - sim).abs() <= 0.01 * p, "{p} vs {sim}");
}

#[test]
fn train_build_query_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_dataset(d);
    let (base, query, gt) = (
        d.join("base.fvecs"),
        d.join("query.fvecs"),
        d.join("gt.ivecs"),
    );

    let mut books = Vec::new();
    for name in ["a.pqcb", "b.pqcb"] {
        let out = d.join(name);
        let rows = json_lines(&pqtable(&[
            "train",
            "--data",
            s(&base),
            "--m",
            "8",
            "--k",
            "16",
            "--iterations",
            "4",
            "--seed",
            "3",
            "--out",
            s(&out),
        ]));
        assert_eq!(rows[0]["bits"], 32);
        books.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(books[0], books[1]);

    let mut indexes = Vec::new();
    for name in ["a.pqtb", "b.pqtb"] {
        let out = d.join(name);
        let rows = json_lines(&pqtable(&[
            "build",
            "--data",
            s(&base),
            "--codebook",
            s(&d.join("a.pqcb")),
            "--out",
            s(&out),
        ]));
        assert_eq!(rows[0]["n"], 4000);
        assert_eq!(rows[0]["tables"], rows[0]["planned_tables"]);
        indexes.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(indexes[0], indexes[1]);

    let index = d.join("a.pqtb");
    let table = json_lines(&pqtable(&[
        "query",
        "--index",
        s(&index),
        "--queries",
        s(&query),
        "--topk",
        "10",
        "--gt",
        s(&gt),
    ]));
    let linear = json_lines(&pqtable(&[
        "query",
        "--index",
        s(&index),
        "--queries",
        s(&query),
        "--topk",
        "10",
        "--gt",
        s(&gt),
        "--linear",
    ]));
    assert_eq!(table[0]["mode"], "table");
    assert_eq!(linear[0]["mode"], "linear");
    assert_eq!(table[0]["recall"], linear[0]["recall"]);
    assert!(table[0]["recall"]["at100"].is_null());
}

#[test]
fn bench_is_deterministic() {
    let args = [
        "bench",
        "--sizes",
        "2000,5000",
        "--bits",
        "16",
        "--topk",
        "1,10",
        "--query-count",
        "20",
        "--dim",
        "16",
        "--train-size",
        "2000",
        "--iterations",
        "3",
        "--seed",
        "5",
        "--linear",
    ];
    let recall = |rows: Vec<Value>| {
        rows.into_iter()
            .map(|r| (r["mode"].clone(), r["n"].clone(), r["recall"].clone()))
            .collect::<Vec<_>>()
    };
    let a = recall(json_lines(&pqtable(&args)));
    let b = recall(json_lines(&pqtable(&args)));
    assert_eq!(a.len(), 8);
    assert_eq!(a, b);
}

#[test]
fn errors_map_to_exit_codes() {
    let missing = pqtable(&[
        "query",
        "--index",
        "/nonexistent/index.pqtb",
        "--queries",
        "/nonexistent/q.fvecs",
    ]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/nonexistent/index.pqtb"));
    assert_eq!(pqtable(&["train", "--bogus"]).status.code(), Some(2));
    assert_eq!(pqtable(&["analyze", "--bits", "x"]).status.code(), Some(2));
}
