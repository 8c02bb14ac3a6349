//! Versioned little-endian binary files.
//!
//! Codebook (`PQCB`):
//! ```text
//! "PQCB" | u32 version | u32 D | u32 M | u32 K | M*K*(D/M) f32, (m, k, d) order
//! ```
//! Index (`PQTB`):
//! ```text
//! "PQTB" | u32 version | u32 T | u32 N | codebook block
//!   | N*M code elements (u8 when K <= 256, else u16)
//!   | T x { u32 key_bits | u32 slots | slots x { key | u32 count | count x u32 id } }
//! ```
//! Keys take `max(1, ceil(key_bits / 8))` bytes; slots are in ascending key
//! order. Rotation (`OPQR`), optionally appended to either file:
//! ```text
//! "OPQR" | u32 D | D*D f32, row-major
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::opq::Rotation;
use crate::quantizer::{Codebook, PqCodes};
use crate::table::{MultiPqTable, SlotKey, SlotStore};

pub const CODEBOOK_MAGIC: &[u8; 4] = b"PQCB";
pub const INDEX_MAGIC: &[u8; 4] = b"PQTB";
pub const ROTATION_MAGIC: &[u8; 4] = b"OPQR";
pub const VERSION: u32 = 1;

fn put_u32<W: Write>(w: &mut W, v: usize) -> Result<()> {
    let v = u32::try_from(v)
        .map_err(|_| Error::InvalidParameter(format!("{v} does not fit in u32")))?;
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn put_f32s<W: Write>(w: &mut W, v: &[f32]) -> Result<()> {
    let mut buf = Vec::with_capacity(v.len() * 4);
    for x in v {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn fill<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        ErrorKind::UnexpectedEof => Error::TruncatedFile,
        _ => e.into(),
    })
}

fn get_u32<R: Read>(r: &mut R) -> Result<usize> {
    let mut b = [0u8; 4];
    fill(r, &mut b)?;
    Ok(u32::from_le_bytes(b) as usize)
}

fn get_f32s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f32>> {
    let mut buf = vec![0u8; n * 4];
    fill(r, &mut buf)?;
    Ok(buf
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

fn expect_magic<R: Read>(r: &mut R, magic: &[u8; 4]) -> Result<()> {
    let mut b = [0u8; 4];
    fill(r, &mut b)?;
    if &b != magic {
        return Err(Error::MalformedHeader(format!(
            "expected magic {:?}, found {:?}",
            String::from_utf8_lossy(magic),
            String::from_utf8_lossy(&b)
        )));
    }
    Ok(())
}

fn expect_version<R: Read>(r: &mut R) -> Result<()> {
    let v = get_u32(r)?;
    if v != VERSION as usize {
        return Err(Error::MalformedHeader(format!("unsupported version {v}")));
    }
    Ok(())
}

pub fn write_codebook<W: Write>(w: &mut W, cb: &Codebook) -> Result<()> {
    w.write_all(CODEBOOK_MAGIC)?;
    put_u32(w, VERSION as usize)?;
    put_u32(w, cb.dim())?;
    put_u32(w, cb.m())?;
    put_u32(w, cb.k())?;
    put_f32s(w, cb.codewords())
}

pub fn read_codebook<R: Read>(r: &mut R) -> Result<Codebook> {
    expect_magic(r, CODEBOOK_MAGIC)?;
    expect_version(r)?;
    let (dim, m, k) = (get_u32(r)?, get_u32(r)?, get_u32(r)?);
    if dim == 0 || m == 0 || k == 0 || dim % m != 0 || k > 1 << 16 {
        return Err(Error::MalformedHeader(format!(
            "invalid codebook shape D={dim} M={m} K={k}"
        )));
    }
    Codebook::from_codewords(dim, m, k, get_f32s(r, k * dim)?)
}

pub fn write_rotation<W: Write>(w: &mut W, rot: &Rotation) -> Result<()> {
    w.write_all(ROTATION_MAGIC)?;
    put_u32(w, rot.dim())?;
    put_f32s(w, rot.matrix())
}

pub fn read_rotation<R: Read>(r: &mut R) -> Result<Rotation> {
    expect_magic(r, ROTATION_MAGIC)?;
    let dim = get_u32(r)?;
    Rotation::from_matrix(dim, get_f32s(r, dim * dim)?)
}

/// Reads a trailing rotation block if one follows, `None` at end of stream.
fn read_optional_rotation<R: Read>(r: &mut R) -> Result<Option<Rotation>> {
    let mut b = [0u8; 4];
    let mut got = 0;
    while got < 4 {
        match r.read(&mut b[got..]) {
            Ok(0) if got == 0 => return Ok(None),
            Ok(0) => return Err(Error::TruncatedFile),
            Ok(n) => got += n,
            Err(e) if e.kind() == ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    if &b != ROTATION_MAGIC {
        return Err(Error::MalformedHeader("unexpected trailing data".into()));
    }
    let dim = get_u32(r)?;
    Ok(Some(Rotation::from_matrix(dim, get_f32s(r, dim * dim)?)?))
}

fn key_bytes(key_bits: u32) -> usize {
    (key_bits as usize).div_ceil(8).max(1)
}

pub fn write_index<W: Write>(w: &mut W, table: &MultiPqTable) -> Result<()> {
    w.write_all(INDEX_MAGIC)?;
    put_u32(w, VERSION as usize)?;
    put_u32(w, table.tables())?;
    put_u32(w, table.len())?;
    write_codebook(w, table.codebook())?;
    match table.codes().view() {
        crate::quantizer::CodesView::Narrow(c) => w.write_all(c)?,
        crate::quantizer::CodesView::Wide(c) => {
            let mut buf = Vec::with_capacity(c.len() * 2);
            for x in c {
                buf.extend_from_slice(&x.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
    }
    for store in table.stores() {
        put_u32(w, store.key_bits() as usize)?;
        put_u32(w, store.slot_count())?;
        let kb = key_bytes(store.key_bits());
        let mut buf = Vec::new();
        for (key, ids) in store.slots() {
            buf.clear();
            buf.extend_from_slice(&key.to_le_bytes()[..kb]);
            buf.extend_from_slice(&(ids.len() as u32).to_le_bytes());
            for id in ids {
                buf.extend_from_slice(&id.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
    }
    Ok(())
}

pub fn read_index<R: Read>(r: &mut R) -> Result<MultiPqTable> {
    expect_magic(r, INDEX_MAGIC)?;
    expect_version(r)?;
    let (tables, n) = (get_u32(r)?, get_u32(r)?);
    let cb = read_codebook(r)?;
    if tables == 0 || cb.m() % tables != 0 {
        return Err(Error::MalformedHeader(format!(
            "table count {tables} invalid for M={}",
            cb.m()
        )));
    }
    let m = cb.m();
    let codes = if cb.k() <= 256 {
        let mut buf = vec![0u8; n * m];
        fill(r, &mut buf)?;
        PqCodes::from_narrow(m, cb.k(), buf)
    } else {
        let mut buf = vec![0u8; n * m * 2];
        fill(r, &mut buf)?;
        PqCodes::from_wide(
            m,
            cb.k(),
            buf.chunks_exact(2)
                .map(|c| u16::from_le_bytes([c[0], c[1]]))
                .collect(),
        )
    };
    let mut stores = Vec::with_capacity(tables);
    for _ in 0..tables {
        let key_bits = get_u32(r)? as u32;
        let slots = get_u32(r)?;
        let kb = key_bytes(key_bits);
        if kb > 16 {
            return Err(Error::MalformedHeader(format!(
                "{key_bits}-bit keys unsupported"
            )));
        }
        let mut pairs: Vec<(SlotKey, u32)> = Vec::with_capacity(n);
        for _ in 0..slots {
            let mut kbuf = [0u8; 16];
            fill(r, &mut kbuf[..kb])?;
            let key = SlotKey::from_le_bytes(kbuf);
            let count = get_u32(r)?;
            let mut ids = vec![0u8; count * 4];
            fill(r, &mut ids)?;
            for c in ids.chunks_exact(4) {
                let id = u32::from_le_bytes(c.try_into().unwrap());
                if id as usize >= n {
                    return Err(Error::MalformedHeader(format!("identifier {id} >= N={n}")));
                }
                pairs.push((key, id));
            }
        }
        let mut store = SlotStore::new(key_bits);
        store.extend(pairs)?;
        stores.push(store);
    }
    MultiPqTable::from_parts(cb, stores, codes)
}

pub fn save_codebook(
    path: impl AsRef<Path>,
    cb: &Codebook,
    rotation: Option<&Rotation>,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_codebook(&mut w, cb)?;
    if let Some(r) = rotation {
        write_rotation(&mut w, r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_codebook(path: impl AsRef<Path>) -> Result<(Codebook, Option<Rotation>)> {
    let mut r = BufReader::new(File::open(path)?);
    let cb = read_codebook(&mut r)?;
    let rot = read_optional_rotation(&mut r)?;
    Ok((cb, rot))
}

pub fn save_index(
    path: impl AsRef<Path>,
    table: &MultiPqTable,
    rotation: Option<&Rotation>,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_index(&mut w, table)?;
    if let Some(r) = rotation {
        write_rotation(&mut w, r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_index(path: impl AsRef<Path>) -> Result<(MultiPqTable, Option<Rotation>)> {
    let mut r = BufReader::new(File::open(path)?);
    let t = read_index(&mut r)?;
    let rot = read_optional_rotation(&mut r)?;
    Ok((t, rot))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn book(k: usize) -> Codebook {
        let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
        Codebook::from_codewords(4, 2, k, (0..k * 4).map(|_| rng.random()).collect()).unwrap()
    }

    #[test]
    fn codebook_layout() {
        let cb = Codebook::from_codewords(2, 2, 1, vec![1.0, -2.0]).unwrap();
        let mut out = Vec::new();
        write_codebook(&mut out, &cb).unwrap();
        let mut want = b"PQCB".to_vec();
        for v in [1u32, 2, 2, 1] {
            want.extend(v.to_le_bytes());
        }
        want.extend(1.0f32.to_le_bytes());
        want.extend((-2.0f32).to_le_bytes());
        assert_eq!(out, want);
        assert_eq!(read_codebook(&mut &out[..]).unwrap(), cb);
    }

    #[test]
    fn index_roundtrip_narrow_and_wide() {
        for (k, tables) in [(16, 1), (16, 2), (300, 2)] {
            let cb = book(k);
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            let mut codes = PqCodes::new(2, k);
            for _ in 0..500 {
                codes
                    .push(&[rng.random_range(0..k as u16), rng.random_range(0..k as u16)])
                    .unwrap();
            }
            let mut t = MultiPqTable::new(cb, tables).unwrap();
            t.insert(&codes).unwrap();
            let mut out = Vec::new();
            write_index(&mut out, &t).unwrap();
            let back = read_index(&mut &out[..]).unwrap();
            assert_eq!(back.codes(), t.codes());
            assert_eq!(back.stores(), t.stores());
            let mut again = Vec::new();
            write_index(&mut again, &back).unwrap();
            assert_eq!(again, out);
        }
    }

    #[test]
    fn rotation_appended() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cb.bin");
        let rot = Rotation::random(4, 3);
        save_codebook(&p, &book(4), Some(&rot)).unwrap();
        let (cb, r) = load_codebook(&p).unwrap();
        assert_eq!(cb, book(4));
        assert_eq!(r.unwrap(), rot);
        save_codebook(&p, &book(4), None).unwrap();
        assert!(load_codebook(&p).unwrap().1.is_none());
    }

    #[test]
    fn bad_inputs() {
        assert!(matches!(
            read_codebook(&mut &b"PQXX"[..]),
            Err(Error::MalformedHeader(_))
        ));
        let mut out = Vec::new();
        write_codebook(&mut out, &book(4)).unwrap();
        assert!(matches!(
            read_codebook(&mut &out[..out.len() - 1]),
            Err(Error::TruncatedFile)
        ));
    }
}
