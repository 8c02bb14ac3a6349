//! Non-exhaustive nearest-neighbor search over product-quantization codes.
//!
//! A PQ code is used directly as a hash key. Candidate keys are enumerated in
//! ascending asymmetric distance from the query, so probing the table returns
//! exactly what a linear asymmetric-distance scan would, without touching
//! every code. Long codes are split across several smaller tables whose
//! results are merged with a provable stopping bound.
//!
//! The main entry points:
//!
//! * [`quantizer`]: codebook training, encoding, asymmetric distances and
//!   the exhaustive linear scan used as the reference.
//! * [`keygen`]: the lazy enumerator of codes in ascending distance.
//! * [`table`]: single and multi-table indexes, the table-count planner,
//!   closed-form fill-rate analysis and the memory model.
//! * [`opq`]: rotation-before-quantization wrapper.
//! * [`dataset`]: fvecs/bvecs/ivecs I/O, synthetic data, PCA, recall.
//! * [`format`]: binary codebook, index and rotation files.
//! * [`commands`]: the train/build/query/bench/analyze drivers behind the CLI.

pub mod commands;
pub mod dataset;
pub mod error;
pub mod format;
pub mod keygen;
pub mod opq;
pub mod quantizer;
pub mod table;

pub use error::{Error, Result};
pub use keygen::KeyGenerator;
pub use opq::{OpqTable, Rotation};
pub use quantizer::{Codebook, DistanceMatrix, PqCode, PqCodes, Score};
pub use table::{MultiPqTable, SinglePqTable, SlotStore};
