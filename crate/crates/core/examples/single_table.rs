//! Index codes in one hash table and check the results against a linear scan.

use pqtable::dataset::{synthesize, synthesize_stream, Synthetic};
use pqtable::quantizer::{linear_adc_scan, train_codebook, TrainParams};
use pqtable::SinglePqTable;

pub fn run_example() -> pqtable::Result<()> {
    let dim = 16;
    let kind = Synthetic::default();
    let base = synthesize(kind, 20_000, dim, 1).to_f32();
    let queries = synthesize_stream(kind, 5, dim, 1, 1).to_f32();

    let params = TrainParams {
        m: 2,
        k: 256,
        iterations: 10,
        seed: 1,
    };
    let cb = train_codebook(&base[..5_000 * dim], dim, &params)?.codebook;
    let codes = cb.encode_all(&base)?;
    let mut table = SinglePqTable::new(cb.clone())?;
    table.insert(&codes)?;
    println!(
        "{} items in {} non-empty slots",
        table.len(),
        table.store().slot_count()
    );

    for q in queries.chunks_exact(dim) {
        let (hits, stats) = table.query_with_stats(q, 10)?;
        let scan = linear_adc_scan(q, &codes, &cb, 10)?;
        assert_eq!(hits, scan);
        let ids: Vec<u32> = hits.iter().map(|s| s.id).collect();
        println!("{} keys probed, top-10 {ids:?}", stats.hashes);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> pqtable::Result<()> {
    run_example()
}
