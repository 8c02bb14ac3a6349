use serde::Serialize;

use super::slot_store::{KeyPacker, SlotStore};
use crate::error::{Error, Result};
use crate::keygen::KeyGenerator;
use crate::quantizer::{Codebook, PqCodes, Score};

/// Per-query counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct QueryStats {
    /// Keys drawn from the generator(s).
    pub hashes: u64,
    /// Identifiers read out of slots.
    pub candidates: u64,
}

/// One hash table keyed by the full PQ code.
#[derive(Debug, Clone)]
pub struct SinglePqTable {
    codebook: Codebook,
    packer: KeyPacker,
    store: SlotStore,
}

impl SinglePqTable {
    pub fn new(codebook: Codebook) -> Result<Self> {
        let packer = KeyPacker::new(codebook.element_bits(), codebook.m())?;
        let store = SlotStore::new(packer.key_bits());
        Ok(SinglePqTable {
            codebook,
            packer,
            store,
        })
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn store(&self) -> &SlotStore {
        &self.store
    }

    pub fn len(&self) -> usize {
        self.store.len()
    }

    pub fn is_empty(&self) -> bool {
        self.store.is_empty()
    }

    /// Appends codes; the `n`-th new code gets identifier `len() + n`.
    pub fn insert(&mut self, codes: &PqCodes) -> Result<()> {
        check_codes(&self.codebook, codes)?;
        let start = self.len();
        let packer = self.packer;
        self.store
            .extend((0..codes.len()).map(|n| (packer.pack(&codes.get(n).0), (start + n) as u32)))
    }

    /// Encodes and inserts a flat array of vectors.
    pub fn add(&mut self, data: &[f32]) -> Result<()> {
        let codes = self.codebook.encode_all(data)?;
        self.insert(&codes)
    }

    /// The `L` nearest items by asymmetric distance, ascending by distance
    /// then identifier.
    pub fn query(&self, q: &[f32], l: usize) -> Result<Vec<Score>> {
        self.query_with_stats(q, l).map(|r| r.0)
    }

    pub fn query_with_stats(&self, q: &[f32], l: usize) -> Result<(Vec<Score>, QueryStats)> {
        self.query_budgeted(q, l, u64::MAX)
    }

    /// [`query`](Self::query) giving up with [`Error::BudgetExceeded`] after
    /// probing `max_hashes` keys.
    pub fn query_budgeted(
        &self,
        q: &[f32],
        l: usize,
        max_hashes: u64,
    ) -> Result<(Vec<Score>, QueryStats)> {
        query_store(&self.codebook, &self.packer, &self.store, q, l, max_hashes)
    }

    pub fn heap_bytes(&self) -> usize {
        self.store.heap_bytes() + self.codebook.codewords().len() * 4
    }
}

pub(crate) fn check_codes(cb: &Codebook, codes: &PqCodes) -> Result<()> {
    if codes.m() != cb.m() || codes.k() != cb.k() {
        return Err(Error::InvalidParameter(format!(
            "codes have M={}, K={} but the codebook has M={}, K={}",
            codes.m(),
            codes.k(),
            cb.m(),
            cb.k()
        )));
    }
    Ok(())
}

/// Draws keys in ascending distance until at least `L` identifiers are
/// collected, then returns the `L` smallest.
pub(crate) fn query_store(
    cb: &Codebook,
    packer: &KeyPacker,
    store: &SlotStore,
    q: &[f32],
    l: usize,
    max_hashes: u64,
) -> Result<(Vec<Score>, QueryStats)> {
    if l == 0 {
        return Err(Error::InvalidParameter("L must be at least 1".into()));
    }
    if store.is_empty() {
        return Err(Error::EmptyDatabase);
    }
    if l > store.len() {
        return Err(Error::ExhaustedBeforeL {
            requested: l,
            available: store.len(),
        });
    }
    let mut gen = KeyGenerator::new(cb, q)?;
    let mut stats = QueryStats::default();
    let mut key = vec![0u16; cb.m()];
    let mut found: Vec<Score> = Vec::with_capacity(l);
    while found.len() < l {
        if stats.hashes >= max_hashes {
            return Err(Error::BudgetExceeded { budget: max_hashes });
        }
        let d = gen.next_into(&mut key).ok_or(Error::ExhaustedBeforeL {
            requested: l,
            available: found.len(),
        })?;
        stats.hashes += 1;
        let ids = store.lookup(packer.pack(&key));
        if l == 1 {
            if let Some(&id) = ids.first() {
                stats.candidates += 1;
                return Ok((vec![Score::new(id, d)], stats));
            }
            continue;
        }
        stats.candidates += ids.len() as u64;
        found.extend(ids.iter().map(|&id| Score::new(id, d)));
    }
    found.sort_unstable_by(Score::order);
    found.truncate(l);
    Ok((found, stats))
}
