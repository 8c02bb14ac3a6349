//! Split long codes across several tables and watch the merge bound.

use pqtable::dataset::{synthesize, synthesize_stream, Synthetic};
use pqtable::quantizer::{linear_adc_scan_grouped, train_codebook, TrainParams};
use pqtable::table::{plan_tables, MarkBuffer};
use pqtable::MultiPqTable;

pub fn run_example() -> pqtable::Result<()> {
    let dim = 32;
    let n = 20_000;
    let kind = Synthetic::default();
    let base = synthesize(kind, n, dim, 3).to_f32();
    let queries = synthesize_stream(kind, 5, dim, 3, 1).to_f32();

    let params = TrainParams {
        m: 8,
        k: 256,
        iterations: 10,
        seed: 3,
    };
    let cb = train_codebook(&base[..5_000 * dim], dim, &params)?.codebook;
    let tables = plan_tables(cb.code_bits(), n as u64, cb.m())?;
    println!("B={} N={n}: {tables} tables", cb.code_bits());

    let mut index = MultiPqTable::new(cb, tables)?;
    index.add(&base)?;

    for q in queries.chunks_exact(dim) {
        // Every item closer than the bound must already have been seen.
        let all = linear_adc_scan_grouped(q, index.codes(), index.codebook(), n, index.tables())?;
        let mut violations = 0;
        let mut observer = |d_min: f64, marks: &MarkBuffer| {
            violations += all
                .iter()
                .take_while(|s| s.dist < d_min)
                .filter(|s| !marks.is_marked(s.id))
                .count();
        };
        let (hits, stats) = index.query_observed(q, 5, &mut observer)?;
        let scan = linear_adc_scan_grouped(q, index.codes(), index.codebook(), 5, index.tables())?;
        assert_eq!(hits, scan);
        assert_eq!(violations, 0);
        println!(
            "{} keys, {} candidates, nearest {:?}",
            stats.hashes,
            stats.candidates,
            hits.iter()
                .map(|s| (s.id, (s.dist * 1e3).round() / 1e3))
                .collect::<Vec<_>>()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> pqtable::Result<()> {
    run_example()
}
