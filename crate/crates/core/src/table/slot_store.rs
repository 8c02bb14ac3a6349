//! Immutable-layout slot storage keyed by packed (sub-)codes.
//!
//! Identifiers live in one packed array indexed through per-slot offsets.
//! Keys of at most [`DIRECT_MAX_BITS`] bits are located with a sparse
//! direct-address scheme: one 64-bit occupancy word per group of 64 slots
//! plus the rank of the group's first occupied slot, so a lookup is a word
//! read and a popcount. Wider keys go through an open-addressing hash map.

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};

/// Packed code key; element `i` occupies bits `[i * b, (i + 1) * b)`.
pub type SlotKey = u128;

/// Widest key handled by the direct-address locator.
pub const DIRECT_MAX_BITS: u32 = 24;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Group {
    occupied: u64,
    rank: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Locator {
    Direct(Vec<Group>),
    Hashed(FxHashMap<SlotKey, u32>),
}

/// Packs code elements into a [`SlotKey`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyPacker {
    element_bits: u32,
    elements: usize,
}

impl KeyPacker {
    pub fn new(element_bits: u32, elements: usize) -> Result<Self> {
        let bits = element_bits as usize * elements;
        if bits > SlotKey::BITS as usize {
            return Err(Error::InvalidParameter(format!(
                "{bits}-bit keys exceed the {}-bit limit; use more tables",
                SlotKey::BITS
            )));
        }
        Ok(KeyPacker {
            element_bits,
            elements,
        })
    }

    pub fn key_bits(&self) -> u32 {
        self.element_bits * self.elements as u32
    }

    #[inline]
    pub fn pack<E: crate::quantizer::CodeElement>(&self, code: &[E]) -> SlotKey {
        let mut key: SlotKey = 0;
        for (i, &c) in code.iter().enumerate() {
            key |= (c.index() as SlotKey) << (i as u32 * self.element_bits);
        }
        key
    }

    pub fn unpack(&self, key: SlotKey) -> Vec<u16> {
        let mask: SlotKey = (1 << self.element_bits) - 1;
        (0..self.elements)
            .map(|i| ((key >> (i as u32 * self.element_bits)) & mask) as u16)
            .collect()
    }
}

/// Maps keys to ordered identifier lists. Absent keys map to an empty list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotStore {
    key_bits: u32,
    /// Occupied keys in ascending order.
    keys: Vec<SlotKey>,
    /// `ids[offsets[s]..offsets[s + 1]]` belong to slot `s`.
    offsets: Vec<u32>,
    ids: Vec<u32>,
    locator: Locator,
}

impl SlotStore {
    pub fn new(key_bits: u32) -> Self {
        let mut s = SlotStore {
            key_bits,
            keys: Vec::new(),
            offsets: vec![0],
            ids: Vec::new(),
            locator: Locator::Hashed(FxHashMap::default()),
        };
        s.rebuild_locator();
        s
    }

    pub fn key_bits(&self) -> u32 {
        self.key_bits
    }

    /// Number of occupied slots.
    pub fn slot_count(&self) -> usize {
        self.keys.len()
    }

    /// Number of stored identifiers.
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn is_direct(&self) -> bool {
        matches!(self.locator, Locator::Direct(_))
    }

    /// Appends every `(key, id)` pair; identifiers already in a slot keep
    /// their place ahead of new ones.
    pub fn extend<I: IntoIterator<Item = (SlotKey, u32)>>(&mut self, entries: I) -> Result<()> {
        let limit = if self.key_bits >= SlotKey::BITS {
            SlotKey::MAX
        } else {
            (1 << self.key_bits) - 1
        };
        let mut pairs: Vec<(SlotKey, u32)> = Vec::with_capacity(self.ids.len());
        for (s, &key) in self.keys.iter().enumerate() {
            let (a, b) = (self.offsets[s] as usize, self.offsets[s + 1] as usize);
            pairs.extend(self.ids[a..b].iter().map(|&id| (key, id)));
        }
        let before = pairs.len();
        for (key, id) in entries {
            if key > limit {
                return Err(Error::InvalidParameter(format!(
                    "key {key:#x} wider than {} bits",
                    self.key_bits
                )));
            }
            pairs.push((key, id));
        }
        if pairs.len() == before {
            return Ok(());
        }
        if pairs.len() > u32::MAX as usize {
            return Err(Error::InvalidParameter(
                "more than 2^32 identifiers in one store".into(),
            ));
        }
        // Stable: equal keys keep insertion order.
        pairs.sort_by_key(|p| p.0);

        self.keys.clear();
        self.offsets.clear();
        self.ids.clear();
        self.ids.reserve_exact(pairs.len());
        for (i, &(key, id)) in pairs.iter().enumerate() {
            if i == 0 || pairs[i - 1].0 != key {
                self.keys.push(key);
                self.offsets.push(i as u32);
            }
            self.ids.push(id);
        }
        self.offsets.push(self.ids.len() as u32);
        self.keys.shrink_to_fit();
        self.offsets.shrink_to_fit();
        self.rebuild_locator();
        Ok(())
    }

    fn rebuild_locator(&mut self) {
        if self.key_bits <= DIRECT_MAX_BITS {
            let groups_len = (1usize << self.key_bits).div_ceil(64);
            let mut groups = vec![Group::default(); groups_len];
            for &key in &self.keys {
                groups[(key >> 6) as usize].occupied |= 1 << (key & 63);
            }
            let mut rank = 0u32;
            for g in &mut groups {
                g.rank = rank;
                rank += g.occupied.count_ones();
            }
            self.locator = Locator::Direct(groups);
        } else {
            let mut map = FxHashMap::default();
            map.reserve(self.keys.len());
            for (s, &key) in self.keys.iter().enumerate() {
                map.insert(key, s as u32);
            }
            self.locator = Locator::Hashed(map);
        }
    }

    #[inline]
    fn slot_of(&self, key: SlotKey) -> Option<usize> {
        match &self.locator {
            Locator::Direct(groups) => {
                let g = groups.get((key >> 6) as usize)?;
                let bit = (key & 63) as u32;
                if g.occupied >> bit & 1 == 0 {
                    return None;
                }
                let below = g.occupied & ((1u64 << bit) - 1);
                Some(g.rank as usize + below.count_ones() as usize)
            }
            Locator::Hashed(map) => map.get(&key).map(|&s| s as usize),
        }
    }

    /// Identifiers stored under `key`, in insertion order.
    #[inline]
    pub fn lookup(&self, key: SlotKey) -> &[u32] {
        match self.slot_of(key) {
            Some(s) => &self.ids[self.offsets[s] as usize..self.offsets[s + 1] as usize],
            None => &[],
        }
    }

    /// Occupied slots in ascending key order.
    pub fn slots(&self) -> impl Iterator<Item = (SlotKey, &[u32])> + '_ {
        self.keys.iter().enumerate().map(move |(s, &k)| {
            (
                k,
                &self.ids[self.offsets[s] as usize..self.offsets[s + 1] as usize],
            )
        })
    }

    /// Heap bytes held by the store.
    pub fn heap_bytes(&self) -> usize {
        let base = self.keys.capacity() * std::mem::size_of::<SlotKey>()
            + self.offsets.capacity() * 4
            + self.ids.capacity() * 4;
        base + match &self.locator {
            Locator::Direct(g) => g.capacity() * std::mem::size_of::<Group>(),
            Locator::Hashed(m) => m.capacity() * (std::mem::size_of::<(SlotKey, u32)>() + 1),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    use proptest::prelude::*;

    #[test]
    fn absent_key_is_empty() {
        let s = SlotStore::new(16);
        assert!(s.lookup(123).is_empty());
        let s = SlotStore::new(40);
        assert!(s.lookup(123).is_empty());
    }

    #[test]
    fn append_preserves_order_across_batches() {
        for bits in [8, 32] {
            let mut s = SlotStore::new(bits);
            s.extend([(1, 413), (7, 5), (1, 352)]).unwrap();
            s.extend([(1, 9), (0, 2)]).unwrap();
            assert_eq!(s.lookup(1), &[413, 352, 9]);
            assert_eq!(s.lookup(0), &[2]);
            assert_eq!(s.lookup(7), &[5]);
            assert_eq!(s.slot_count(), 3);
        }
    }

    #[test]
    fn rejects_wide_key() {
        let mut s = SlotStore::new(4);
        assert!(s.extend([(16, 0)]).is_err());
    }

    #[test]
    fn packer_roundtrip() {
        let p = KeyPacker::new(8, 4).unwrap();
        let key = p.pack(&[13u16, 35, 7, 9]);
        assert_eq!(p.unpack(key), vec![13, 35, 7, 9]);
        assert!(KeyPacker::new(8, 17).is_err());
    }

    proptest! {
        #[test]
        fn matches_reference_multimap(
            entries in prop::collection::vec((0u128..300, 0u32..1000), 0..400),
            split in 0usize..400,
            bits in prop::sample::select(vec![9u32, 30]),
        ) {
            let mut s = SlotStore::new(bits);
            let split = split.min(entries.len());
            s.extend(entries[..split].iter().copied()).unwrap();
            s.extend(entries[split..].iter().copied()).unwrap();
            let mut reference: BTreeMap<u128, Vec<u32>> = BTreeMap::new();
            for &(k, id) in &entries {
                reference.entry(k).or_default().push(id);
            }
            prop_assert_eq!(s.slot_count(), reference.len());
            prop_assert!(s.slot_count() as u128 <= 1u128 << bits);
            for k in 0..300u128 {
                let want = reference.get(&k).map(|v| v.as_slice()).unwrap_or(&[]);
                prop_assert_eq!(s.lookup(k), want);
            }
            let listed: Vec<(u128, Vec<u32>)> = s.slots().map(|(k, v)| (k, v.to_vec())).collect();
            let expected: Vec<(u128, Vec<u32>)> = reference.into_iter().collect();
            prop_assert_eq!(listed, expected);
        }
    }
}
