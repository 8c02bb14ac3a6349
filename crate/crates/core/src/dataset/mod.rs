//! Benchmark vector files, synthetic data, PCA alignment and recall.

mod io;
mod pca;
mod recall;
mod synth;

pub use io::{read_ground_truth, read_vecs, read_vecs_from, write_vecs, write_vecs_to};
pub use pca::{pca_align, pca_rotation};
pub use recall::{recall_at, GroundTruth};
pub use synth::{anisotropic_rotation, synthesize, synthesize_stream, Synthetic};

use serde::{Deserialize, Serialize};

/// Element type of a `*vecs` file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    /// `fvecs`: 4-byte little-endian floats.
    F32,
    /// `bvecs`: unsigned bytes.
    U8,
    /// `ivecs`: 4-byte little-endian signed integers.
    I32,
}

impl ElementKind {
    pub fn size(self) -> usize {
        match self {
            ElementKind::U8 => 1,
            ElementKind::F32 | ElementKind::I32 => 4,
        }
    }

    /// Kind implied by a file extension, if any.
    pub fn from_extension(path: &std::path::Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "fvecs" => Some(ElementKind::F32),
            "bvecs" => Some(ElementKind::U8),
            "ivecs" => Some(ElementKind::I32),
            _ => None,
        }
    }
}

impl std::str::FromStr for ElementKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fvecs" | "f32" => Ok(ElementKind::F32),
            "bvecs" | "u8" => Ok(ElementKind::U8),
            "ivecs" | "i32" => Ok(ElementKind::I32),
            other => Err(format!("unknown vector kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum VecData {
    F32(Vec<f32>),
    U8(Vec<u8>),
    I32(Vec<i32>),
}

/// `N` vectors of dimension `D`, stored flat in their on-disk element type.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorDataset {
    pub dim: usize,
    pub data: VecData,
}

impl VectorDataset {
    pub fn from_f32(dim: usize, data: Vec<f32>) -> Self {
        VectorDataset {
            dim,
            data: VecData::F32(data),
        }
    }

    pub fn kind(&self) -> ElementKind {
        match self.data {
            VecData::F32(_) => ElementKind::F32,
            VecData::U8(_) => ElementKind::U8,
            VecData::I32(_) => ElementKind::I32,
        }
    }

    pub fn len(&self) -> usize {
        if self.dim == 0 {
            return 0;
        }
        let elems = match &self.data {
            VecData::F32(v) => v.len(),
            VecData::U8(v) => v.len(),
            VecData::I32(v) => v.len(),
        };
        elems / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All elements converted to `f32`.
    pub fn to_f32(&self) -> Vec<f32> {
        match &self.data {
            VecData::F32(v) => v.clone(),
            VecData::U8(v) => v.iter().map(|&x| f32::from(x)).collect(),
            VecData::I32(v) => v.iter().map(|&x| x as f32).collect(),
        }
    }

    /// First `n` vectors.
    pub fn prefix(&self, n: usize) -> VectorDataset {
        let e = n.min(self.len()) * self.dim;
        let data = match &self.data {
            VecData::F32(v) => VecData::F32(v[..e].to_vec()),
            VecData::U8(v) => VecData::U8(v[..e].to_vec()),
            VecData::I32(v) => VecData::I32(v[..e].to_vec()),
        };
        VectorDataset {
            dim: self.dim,
            data,
        }
    }
}
