use std::fs::File;
use std::io::{BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::Path;

use super::recall::GroundTruth;
use super::{ElementKind, VecData, VectorDataset};
use crate::error::{Error, Result};

/// Reads repeated `[i32 D][D elements]` records, stopping after `limit`
/// records when given.
pub fn read_vecs(
    path: impl AsRef<Path>,
    kind: ElementKind,
    limit: Option<usize>,
) -> Result<VectorDataset> {
    let file = File::open(path)?;
    read_vecs_from(BufReader::with_capacity(1 << 20, file), kind, limit)
}

/// Reads `n` bytes, or nothing at a clean end of stream.
fn read_record_header<R: Read>(r: &mut R) -> Result<Option<[u8; 4]>> {
    let mut buf = [0u8; 4];
    let mut got = 0;
    while got < 4 {
        match r.read(&mut buf[got..]) {
            Ok(0) if got == 0 => return Ok(None),
            Ok(0) => return Err(Error::TruncatedFile),
            Ok(n) => got += n,
            Err(e) if e.kind() == ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Some(buf))
}

pub fn read_vecs_from<R: Read>(
    mut r: R,
    kind: ElementKind,
    limit: Option<usize>,
) -> Result<VectorDataset> {
    let mut dim: Option<usize> = None;
    let mut bytes: Vec<u8> = Vec::new();
    let mut record: Vec<u8> = Vec::new();
    let mut n = 0usize;
    while limit.is_none_or(|l| n < l) {
        let Some(header) = read_record_header(&mut r)? else {
            break;
        };
        let d = i32::from_le_bytes(header);
        if d <= 0 {
            return Err(Error::MalformedHeader(format!(
                "record {n} declares dimension {d}"
            )));
        }
        let d = d as usize;
        match dim {
            None => dim = Some(d),
            Some(expected) if expected != d => {
                return Err(Error::MalformedHeader(format!(
                    "record {n} declares dimension {d}, expected {expected}"
                )))
            }
            _ => {}
        }
        record.resize(d * kind.size(), 0);
        r.read_exact(&mut record).map_err(|e| match e.kind() {
            ErrorKind::UnexpectedEof => Error::TruncatedFile,
            _ => e.into(),
        })?;
        bytes.extend_from_slice(&record);
        n += 1;
    }
    let data = match kind {
        ElementKind::U8 => VecData::U8(bytes),
        ElementKind::F32 => VecData::F32(
            bytes
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                .collect(),
        ),
        ElementKind::I32 => VecData::I32(
            bytes
                .chunks_exact(4)
                .map(|c| i32::from_le_bytes(c.try_into().unwrap()))
                .collect(),
        ),
    };
    Ok(VectorDataset {
        dim: dim.unwrap_or(0),
        data,
    })
}

pub fn write_vecs(path: impl AsRef<Path>, ds: &VectorDataset) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_vecs_to(&mut w, ds)?;
    w.flush()?;
    Ok(())
}

pub fn write_vecs_to<W: Write>(w: &mut W, ds: &VectorDataset) -> Result<()> {
    let d = ds.dim;
    let header = i32::try_from(d)
        .map_err(|_| Error::InvalidParameter(format!("dimension {d} does not fit in i32")))?
        .to_le_bytes();
    for i in 0..ds.len() {
        w.write_all(&header)?;
        match &ds.data {
            VecData::U8(v) => w.write_all(&v[i * d..(i + 1) * d])?,
            VecData::F32(v) => {
                for x in &v[i * d..(i + 1) * d] {
                    w.write_all(&x.to_le_bytes())?;
                }
            }
            VecData::I32(v) => {
                for x in &v[i * d..(i + 1) * d] {
                    w.write_all(&x.to_le_bytes())?;
                }
            }
        }
    }
    Ok(())
}

/// Ground-truth neighbor lists from an `ivecs` file.
pub fn read_ground_truth(path: impl AsRef<Path>, limit: Option<usize>) -> Result<GroundTruth> {
    let ds = read_vecs(path, ElementKind::I32, limit)?;
    let VecData::I32(v) = &ds.data else {
        unreachable!()
    };
    let lists = if ds.dim == 0 {
        Vec::new()
    } else {
        v.chunks_exact(ds.dim)
            .map(|c| c.iter().map(|&x| x as u32).collect())
            .collect()
    };
    GroundTruth::new(lists)
}
