//! PQ hash tables: the single-table walk, the multi-table merge, and the
//! sizing/analysis helpers.

mod analysis;
mod multi;
mod single;
mod slot_store;

pub use analysis::{
    estimate_memory, expected_hashings, fill_rate, plan_tables, simulate_uniform, slot_occupancy,
    MemoryEstimate, Simulated,
};
pub use multi::{MarkBuffer, MultiPqTable, NoObserver, QueryObserver};
pub use single::{QueryStats, SinglePqTable};
pub use slot_store::{KeyPacker, SlotKey, SlotStore, DIRECT_MAX_BITS};
