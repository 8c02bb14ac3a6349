//! Table-count planning, fill-rate analysis and the memory model.

use pqtable::table::{
    estimate_memory, expected_hashings, fill_rate, plan_tables, simulate_uniform, slot_occupancy,
};

pub fn run_example() -> pqtable::Result<()> {
    println!("{:>12} {:>6} {:>6}", "N", "B=32", "B=64");
    for e in 2..=9 {
        let n = 10u64.pow(e);
        println!(
            "{n:>12} {:>6} {:>6}",
            plan_tables(32, n, 4)?,
            plan_tables(64, n, 8)?
        );
    }

    println!(
        "\n{:>8} {:>10} {:>10} {:>10} {:>10}",
        "N", "p", "sim p", "occupancy", "hashings"
    );
    for n in [1u64 << 10, 1 << 12, 1 << 14] {
        let sim = simulate_uniform(12, n, 200_000, 0)?;
        println!(
            "{n:>8} {:>10.4} {:>10.4} {:>10.4} {:>10.2}",
            fill_rate(12, n),
            sim.fill_rate,
            slot_occupancy(12, n)?,
            expected_hashings(12, n)?
        );
    }

    let gb = |b: f64| b / (1u64 << 30) as f64;
    for (bits, tables) in [(32, 1), (64, 2), (128, 4)] {
        let est = estimate_memory(bits, 1_000_000_000, 128, 256, tables);
        println!(
            "B={bits:<3} T={tables}: tables {:.1} GiB, linear scan {:.1} GiB",
            gb(est.table_bytes),
            gb(est.linear_scan_bytes)
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> pqtable::Result<()> {
    run_example()
}
