use rustc_hash::FxHashMap;

use super::single::{check_codes, query_store, QueryStats};
use super::slot_store::{KeyPacker, SlotStore};
use crate::error::{Error, Result};
use crate::keygen::KeyGenerator;
use crate::quantizer::{Codebook, CodesView, DistanceMatrix, PqCodes, Score};

/// Per-query merge state: how many tables have surfaced each identifier, and
/// the full distance of every identifier seen at least once.
#[derive(Debug)]
pub struct MarkBuffer {
    tables: usize,
    /// id -> (count, index into `marked`)
    counter: FxHashMap<u32, (u32, u32)>,
    marked: Vec<Score>,
    best: Option<Score>,
}

impl MarkBuffer {
    pub fn new(tables: usize) -> Self {
        MarkBuffer {
            tables,
            counter: FxHashMap::default(),
            marked: Vec::new(),
            best: None,
        }
    }

    pub fn count(&self, id: u32) -> u32 {
        self.counter.get(&id).map_or(0, |c| c.0)
    }

    pub fn is_marked(&self, id: u32) -> bool {
        self.counter.contains_key(&id)
    }

    pub fn marked(&self) -> &[Score] {
        &self.marked
    }

    /// Increments `id`'s count, computing its distance on first sight.
    /// Returns the new count and the identifier's score.
    #[inline]
    fn hit(&mut self, id: u32, dist: impl FnOnce() -> f64) -> (u32, Score) {
        let marked = &mut self.marked;
        let best = &mut self.best;
        let entry = self.counter.entry(id).or_insert_with(|| {
            let s = Score::new(id, dist());
            if best.is_none_or(|b| s.order(&b).is_lt()) {
                *best = Some(s);
            }
            marked.push(s);
            (0, (marked.len() - 1) as u32)
        });
        entry.0 += 1;
        debug_assert!(entry.0 as usize <= self.tables);
        (entry.0, self.marked[entry.1 as usize])
    }
}

/// Receives the merge state each time an identifier has been seen in every
/// table and the distance bound is fixed.
pub trait QueryObserver {
    fn bound_fixed(&mut self, d_min: f64, marks: &MarkBuffer);
}

/// Observer that does nothing.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoObserver;

impl QueryObserver for NoObserver {
    #[inline]
    fn bound_fixed(&mut self, _: f64, _: &MarkBuffer) {}
}

impl<F: FnMut(f64, &MarkBuffer)> QueryObserver for F {
    fn bound_fixed(&mut self, d_min: f64, marks: &MarkBuffer) {
        self(d_min, marks)
    }
}

/// `T` hash tables, each keyed by `M / T` consecutive code elements, plus the
/// full code array for distance evaluation.
#[derive(Debug, Clone)]
pub struct MultiPqTable {
    codebook: Codebook,
    tables: usize,
    packer: KeyPacker,
    stores: Vec<SlotStore>,
    codes: PqCodes,
}

impl MultiPqTable {
    pub fn new(codebook: Codebook, tables: usize) -> Result<Self> {
        if tables == 0 || !codebook.m().is_multiple_of(tables) {
            return Err(Error::TablesNotDivisor {
                tables,
                subspaces: codebook.m(),
            });
        }
        let per = codebook.m() / tables;
        let packer = KeyPacker::new(codebook.element_bits(), per)?;
        let stores = (0..tables)
            .map(|_| SlotStore::new(packer.key_bits()))
            .collect();
        let codes = PqCodes::new(codebook.m(), codebook.k());
        Ok(MultiPqTable {
            codebook,
            tables,
            packer,
            stores,
            codes,
        })
    }

    /// Reassembles a table from its parts; used by the index reader.
    pub(crate) fn from_parts(
        codebook: Codebook,
        stores: Vec<SlotStore>,
        codes: PqCodes,
    ) -> Result<Self> {
        let mut t = Self::new(codebook, stores.len())?;
        for s in &stores {
            if s.key_bits() != t.packer.key_bits() || s.len() != codes.len() {
                return Err(Error::MalformedHeader(
                    "store does not match the code array".into(),
                ));
            }
        }
        t.stores = stores;
        t.codes = codes;
        Ok(t)
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn tables(&self) -> usize {
        self.tables
    }

    pub fn stores(&self) -> &[SlotStore] {
        &self.stores
    }

    pub fn codes(&self) -> &PqCodes {
        &self.codes
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Elements per sub-code key.
    pub fn key_elements(&self) -> usize {
        self.codebook.m() / self.tables
    }

    /// Appends codes to every table under their sub-code keys and retains
    /// the full codes.
    pub fn insert(&mut self, codes: &PqCodes) -> Result<()> {
        check_codes(&self.codebook, codes)?;
        let start = self.len();
        let per = self.key_elements();
        let packer = self.packer;
        for (t, store) in self.stores.iter_mut().enumerate() {
            let mut part = vec![0u16; per];
            store.extend((0..codes.len()).map(|n| {
                for (i, p) in part.iter_mut().enumerate() {
                    *p = codes.element(n, t * per + i) as u16;
                }
                (packer.pack(&part), (start + n) as u32)
            }))?;
        }
        self.codes.extend_from(codes)
    }

    /// Encodes and inserts a flat array of vectors.
    pub fn add(&mut self, data: &[f32]) -> Result<()> {
        let codes = self.codebook.encode_all(data)?;
        self.insert(&codes)
    }

    /// Dispatches to the single-table walk when `T = 1` and to the merging
    /// query otherwise.
    pub fn search(&self, q: &[f32], l: usize) -> Result<Vec<Score>> {
        self.search_with_stats(q, l).map(|r| r.0)
    }

    pub fn search_with_stats(&self, q: &[f32], l: usize) -> Result<(Vec<Score>, QueryStats)> {
        self.search_budgeted(q, l, u64::MAX)
    }

    /// [`search`](Self::search) giving up with [`Error::BudgetExceeded`]
    /// after probing `max_hashes` keys.
    pub fn search_budgeted(
        &self,
        q: &[f32],
        l: usize,
        max_hashes: u64,
    ) -> Result<(Vec<Score>, QueryStats)> {
        if self.tables == 1 {
            query_store(
                &self.codebook,
                &self.packer,
                &self.stores[0],
                q,
                l,
                max_hashes,
            )
        } else {
            self.query_limited(q, l, max_hashes, &mut NoObserver)
        }
    }

    /// Round-robin merge over all tables, returning the `L` nearest items by
    /// asymmetric distance, ascending by distance then identifier.
    pub fn query(&self, q: &[f32], l: usize) -> Result<Vec<Score>> {
        self.query_observed(q, l, &mut NoObserver).map(|r| r.0)
    }

    /// [`query`](Self::query) reporting the merge state to `observer` every
    /// time the bound is fixed.
    pub fn query_observed<O: QueryObserver>(
        &self,
        q: &[f32],
        l: usize,
        observer: &mut O,
    ) -> Result<(Vec<Score>, QueryStats)> {
        self.query_limited(q, l, u64::MAX, observer)
    }

    /// [`query_observed`](Self::query_observed) giving up with
    /// [`Error::BudgetExceeded`] after probing `max_hashes` keys.
    pub fn query_limited<O: QueryObserver>(
        &self,
        q: &[f32],
        l: usize,
        max_hashes: u64,
        observer: &mut O,
    ) -> Result<(Vec<Score>, QueryStats)> {
        if l == 0 {
            return Err(Error::InvalidParameter("L must be at least 1".into()));
        }
        if self.is_empty() {
            return Err(Error::EmptyDatabase);
        }
        if l > self.len() {
            return Err(Error::ExhaustedBeforeL {
                requested: l,
                available: self.len(),
            });
        }
        let dm = self.codebook.distance_matrix(q, false)?;
        match self.codes.view() {
            CodesView::Narrow(c) => self.merge(&dm, c, l, max_hashes, observer),
            CodesView::Wide(c) => self.merge(&dm, c, l, max_hashes, observer),
        }
    }

    fn merge<E: crate::quantizer::CodeElement, O: QueryObserver>(
        &self,
        dm: &DistanceMatrix,
        codes: &[E],
        l: usize,
        max_hashes: u64,
        observer: &mut O,
    ) -> Result<(Vec<Score>, QueryStats)> {
        let (m, t_count) = (self.codebook.m(), self.tables);
        let per = self.key_elements();
        let mut gens: Vec<KeyGenerator> = (0..t_count)
            .map(|t| KeyGenerator::from_distance_matrix(dm.rows(t * per..(t + 1) * per)))
            .collect();
        let mut live = vec![true; t_count];
        let mut marks = MarkBuffer::new(t_count);
        let mut stats = QueryStats::default();
        let mut key = vec![0u16; per];

        loop {
            let mut progressed = false;
            for t in 0..t_count {
                if !live[t] {
                    continue;
                }
                if stats.hashes >= max_hashes {
                    return Err(Error::BudgetExceeded { budget: max_hashes });
                }
                if gens[t].next_into(&mut key).is_none() {
                    live[t] = false;
                    continue;
                }
                progressed = true;
                stats.hashes += 1;
                for &id in self.stores[t].lookup(self.packer.pack(&key)) {
                    stats.candidates += 1;
                    let row = &codes[id as usize * m..(id as usize + 1) * m];
                    let (count, score) = marks.hit(id, || dm.adc_grouped(row, t_count));
                    if count as usize == t_count {
                        let d_min = score.dist;
                        observer.bound_fixed(d_min, &marks);
                        if l == 1 {
                            return Ok((vec![marks.best.expect("marked")], stats));
                        }
                        let mut within: Vec<Score> = marks
                            .marked
                            .iter()
                            .copied()
                            .filter(|s| s.dist <= d_min)
                            .collect();
                        if within.len() >= l {
                            return Ok((partial_sort(&mut within, l), stats));
                        }
                    }
                }
            }
            if !progressed {
                break;
            }
        }
        // Every generator ran dry, so every identifier is marked.
        let mut all = marks.marked;
        if all.len() < l {
            return Err(Error::ExhaustedBeforeL {
                requested: l,
                available: all.len(),
            });
        }
        Ok((partial_sort(&mut all, l), stats))
    }

    /// Heap bytes of the stores and the retained code array.
    pub fn heap_bytes(&self) -> usize {
        self.stores.iter().map(SlotStore::heap_bytes).sum::<usize>()
            + self.codes.heap_bytes()
            + self.codebook.codewords().len() * 4
    }
}

/// The `l` smallest scores, sorted.
fn partial_sort(v: &mut Vec<Score>, l: usize) -> Vec<Score> {
    if v.len() > l {
        v.select_nth_unstable_by(l - 1, Score::order);
        v.truncate(l);
    }
    v.sort_unstable_by(Score::order);
    std::mem::take(v)
}
