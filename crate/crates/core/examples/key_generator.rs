//! Enumerate codes in ascending asymmetric distance from a query.

use pqtable::{Codebook, KeyGenerator};

pub fn run_example() -> pqtable::Result<()> {
    // Three one-dimensional subspaces with four codewords each.
    let codewords = vec![
        0.0, 1.0, 3.0, 7.0, //
        0.0, 2.0, 4.0, 8.0, //
        -1.0, 0.0, 1.0, 5.0,
    ];
    let cb = Codebook::from_codewords(3, 3, 4, codewords)?;
    let q = [0.8, 3.1, 0.2];

    let mut keys = KeyGenerator::new(&cb, &q)?;
    let mut last = f64::NEG_INFINITY;
    for (i, (code, dist)) in keys.by_ref().take(10).enumerate() {
        assert!(dist >= last);
        last = dist;
        println!("{i:>2}: {:?} {dist:.2}", code.0);
    }
    println!(
        "{} keys emitted, {} waiting in the queue",
        keys.emitted(),
        keys.queue_len()
    );

    let rest = keys.count();
    println!("{rest} more keys until all 64 codes are exhausted");
    Ok(())
}

#[allow(dead_code)]
fn main() -> pqtable::Result<()> {
    run_example()
}
