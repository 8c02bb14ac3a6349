//! Train a product quantizer, encode a few vectors and compare asymmetric
//! distances with exact ones.

use pqtable::dataset::{synthesize, Synthetic};
use pqtable::quantizer::{squared_distance, train_codebook, TrainParams};

pub fn run_example() -> pqtable::Result<()> {
    let dim = 32;
    let data = synthesize(Synthetic::default(), 5_000, dim, 7).to_f32();
    let params = TrainParams {
        m: 4,
        k: 256,
        iterations: 10,
        seed: 7,
    };
    let trained = train_codebook(&data, dim, &params)?;
    let cb = &trained.codebook;
    println!(
        "M={} K={} B={} bits, k-means objective {:.4} -> {:.4}",
        cb.m(),
        cb.k(),
        cb.code_bits(),
        trained.objective_history.first().unwrap_or(&f64::NAN),
        trained.final_error()
    );

    let codes = cb.encode_all(&data)?;
    let q = &data[..dim];
    let dmat = cb.distance_matrix(q, false)?;
    for n in 1..4 {
        let code = codes.get(n);
        let adc = dmat.adc_distance(&code.0)?;
        let recon = squared_distance(q, &cb.decode(&code.0)?);
        let exact = squared_distance(q, &data[n * dim..(n + 1) * dim]);
        println!(
            "item {n}: code {:?} adc {adc:.4} reconstruction {recon:.4} exact {exact:.4}",
            code.0
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> pqtable::Result<()> {
    run_example()
}
