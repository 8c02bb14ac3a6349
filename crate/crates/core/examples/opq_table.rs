//! Learn a rotation before quantizing and compare errors with plain PQ.

use pqtable::dataset::{synthesize, synthesize_stream, Synthetic};
use pqtable::opq::{train_rotation, OpqParams, RotationInit};
use pqtable::quantizer::{train_codebook, TrainParams};
use pqtable::OpqTable;

pub fn run_example() -> pqtable::Result<()> {
    let dim = 16;
    let kind = Synthetic::Anisotropic {
        clusters: 16,
        spread: 0.3,
        decay: 0.85,
    };
    let train = synthesize(kind, 4_000, dim, 5).to_f32();
    let queries = synthesize_stream(kind, 3, dim, 5, 1).to_f32();

    let params = OpqParams {
        m: 4,
        k: 64,
        iterations: 8,
        alternations: 5,
        seed: 5,
        init: RotationInit::Identity,
    };
    let pq = train_codebook(
        &train,
        dim,
        &TrainParams {
            m: 4,
            k: 64,
            iterations: 8,
            seed: 5,
        },
    )?;
    let opq = train_rotation(&train, dim, &params)?;
    println!("PQ error {:.4}", pq.final_error());
    println!(
        "OPQ error by alternation {:?}",
        opq.error_history
            .iter()
            .map(|e| (e * 1e4).round() / 1e4)
            .collect::<Vec<_>>()
    );
    println!(
        "rotation orthogonality error {:.2e}",
        opq.rotation.orthogonality_error()
    );

    let mut table = OpqTable::new(opq.rotation, opq.codebook, 2)?;
    table.add(&train)?;
    for q in queries.chunks_exact(dim) {
        let ids: Vec<u32> = table.search(q, 5)?.iter().map(|s| s.id).collect();
        println!("top-5 {ids:?}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> pqtable::Result<()> {
    run_example()
}
