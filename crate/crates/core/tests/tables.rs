use pqtable::dataset::{synthesize, synthesize_stream, Synthetic};
use pqtable::quantizer::{linear_adc_scan_grouped, train_codebook, Score, TrainParams};
use pqtable::table::{fill_rate, MarkBuffer};
use pqtable::{Codebook, Error, MultiPqTable, PqCodes, SinglePqTable};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dists(s: &[Score]) -> Vec<f64> {
    s.iter().map(|s| s.dist).collect()
}

/// Two scalar subspaces with codewords {0, 0.5, 1, 2}; the query sits at the
/// origin, so element distances are {0, 0.25, 1, 4}.
fn trace_index() -> MultiPqTable {
    let cb =
        Codebook::from_codewords(2, 2, 4, vec![0.0, 0.5, 1.0, 2.0, 0.0, 0.5, 1.0, 2.0]).unwrap();
    let mut codes = PqCodes::new(2, 4);
    for c in [[0, 3], [3, 0], [1, 1], [2, 2]] {
        codes.push(&c).unwrap();
    }
    let mut t = MultiPqTable::new(cb, 2).unwrap();
    t.insert(&codes).unwrap();
    t
}

#[test]
fn merge_trace_by_hand() {
    let t = trace_index();
    // Round robin: table 0 key [0] marks id 0 (d=4), table 1 key [0] marks
    // id 1 (d=4), table 0 key [1] marks id 2 (d=0.5), table 1 key [1] sees
    // id 2 a second time and fixes d_min = 0.5.
    let mut bounds = Vec::new();
    let mut obs = |d: f64, marks: &MarkBuffer| {
        let mut m: Vec<u32> = marks.marked().iter().map(|s| s.id).collect();
        m.sort();
        bounds.push((d, m));
    };
    let (r, _) = t.query_observed(&[0.0, 0.0], 1, &mut obs).unwrap();
    assert_eq!(r, vec![Score::new(2, 0.5)]);
    assert_eq!(bounds, vec![(0.5, vec![0, 1, 2])]);

    let mut bounds = Vec::new();
    let mut obs = |d: f64, _: &MarkBuffer| bounds.push(d);
    let (r, _) = t.query_observed(&[0.0, 0.0], 2, &mut obs).unwrap();
    assert_eq!(r, vec![Score::new(2, 0.5), Score::new(3, 2.0)]);
    assert_eq!(bounds, vec![0.5, 2.0]);
}

#[test]
fn multi_table_matches_linear_scan_m8() {
    let (n, dim) = (10_000, 32);
    let data = synthesize(Synthetic::default(), n, dim, 21).to_f32();
    let queries = synthesize_stream(Synthetic::default(), 20, dim, 21, 1).to_f32();
    let cb = train_codebook(
        &data[..4_000 * dim],
        dim,
        &TrainParams {
            m: 8,
            k: 256,
            iterations: 5,
            seed: 21,
        },
    )
    .unwrap()
    .codebook;
    let codes = cb.encode_all(&data).unwrap();
    for tables in [2, 4] {
        let mut idx = MultiPqTable::new(cb.clone(), tables).unwrap();
        idx.insert(&codes).unwrap();
        // A few queries need far more probes than a unit test can afford.
        let mut verified = 0;
        for q in queries.chunks_exact(dim) {
            for l in [1, 10, 100] {
                match idx.search_budgeted(q, l, 2_000_000) {
                    Ok((got, _)) => {
                        let want = linear_adc_scan_grouped(q, &codes, &cb, l, tables).unwrap();
                        assert_eq!(dists(&got), dists(&want), "T={tables} L={l}");
                        verified += 1;
                    }
                    Err(Error::BudgetExceeded { .. }) => {}
                    Err(e) => panic!("{e}"),
                }
            }
        }
        assert!(
            verified >= 45,
            "T={tables}: only {verified}/60 runs finished"
        );
    }
}

#[test]
fn requesting_more_than_n_errors() {
    let t = trace_index();
    assert!(matches!(
        t.search(&[0.0, 0.0], 5),
        Err(Error::ExhaustedBeforeL { requested: 5, .. })
    ));
    assert_eq!(t.search(&[0.0, 0.0], 4).unwrap().len(), 4);
}

#[test]
fn clustered_hit_rate_beats_uniform_bound() {
    let (n, dim) = (1 << 14, 16);
    let kind = Synthetic::default();
    let data = synthesize(kind, n, dim, 31).to_f32();
    let queries = synthesize_stream(kind, 200, dim, 31, 1).to_f32();
    let cb = train_codebook(
        &data,
        dim,
        &TrainParams {
            m: 2,
            k: 256,
            iterations: 8,
            seed: 31,
        },
    )
    .unwrap()
    .codebook;
    let mut table = SinglePqTable::new(cb).unwrap();
    table.add(&data).unwrap();
    let mut hashes = 0u64;
    for q in queries.chunks_exact(dim) {
        hashes += table.query_with_stats(q, 1).unwrap().1.hashes;
    }
    let hit_rate = 200.0 / hashes as f64;
    let p = fill_rate(16, n as u64);
    assert!(hit_rate > p, "hit rate {hit_rate} vs uniform {p}");
}

fn random_instance(seed: u64, m: usize, k: usize, n: usize) -> (Codebook, PqCodes, Vec<Vec<f32>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Coarse grid values make distance ties common.
    let cw = (0..k * m)
        .map(|_| rng.random_range(0..4) as f32 * 0.5)
        .collect();
    let cb = Codebook::from_codewords(m, m, k, cw).unwrap();
    let mut codes = PqCodes::new(m, k);
    for _ in 0..n {
        let c: Vec<u16> = (0..m).map(|_| rng.random_range(0..k as u16)).collect();
        codes.push(&c).unwrap();
    }
    let qs = (0..4)
        .map(|_| (0..m).map(|_| rng.random_range(-1.0..2.0)).collect())
        .collect();
    (cb, codes, qs)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn all_table_counts_match_linear_scan(
        seed in any::<u64>(),
        m_log in 0u32..3,
        k in 2usize..9,
        n in 1usize..300,
        l_frac in 0.0f64..1.0,
    ) {
        let m = 1 << m_log;
        let (cb, codes, qs) = random_instance(seed, m, k, n);
        let l = 1 + ((n - 1) as f64 * l_frac) as usize;
        let mut tables = 1;
        while tables <= m {
            let mut idx = MultiPqTable::new(cb.clone(), tables).unwrap();
            idx.insert(&codes).unwrap();
            for q in &qs {
                let want = linear_adc_scan_grouped(q, &codes, &cb, l, tables).unwrap();
                prop_assert_eq!(dists(&idx.search(q, l).unwrap()), dists(&want));
                prop_assert_eq!(dists(&idx.query(q, l).unwrap()), dists(&want));
            }
            tables *= 2;
        }
    }
}
