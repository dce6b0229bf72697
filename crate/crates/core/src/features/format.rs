//! OODF feature-store files.
//!
//! Little-endian layout:
//!
//! | bytes | field |
//! |---|---|
//! | 4 | magic `OODF` |
//! | 4 | u32 version (1) |
//! | 4 | u32 dim |
//! | 8 | u64 rows |
//! | 1 | u8 adapted flag (0 or 1) |
//! | 7 | reserved, zero |
//! | rows * dim * 4 | f32 matrix, row-major |
//! | 8 | u64 id count (= rows) |
//! | per id | u16 byte length, then UTF-8 bytes |

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use thiserror::Error;

use super::{FeatureError, FeatureStore};

pub const MAGIC: &[u8; 4] = b"OODF";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 28;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("bad feature store at byte {offset}: {message}")]
pub struct FormatError {
    pub offset: u64,
    pub message: String,
}

fn format_err(offset: usize, message: impl Into<String>) -> FormatError {
    FormatError {
        offset: offset as u64,
        message: message.into(),
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], FormatError> {
        match self.pos.checked_add(n) {
            Some(end) if end <= self.buf.len() => {
                let s = &self.buf[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            _ => Err(format_err(self.buf.len(), format!("truncated {what}"))),
        }
    }

    fn array<const N: usize>(&mut self, what: &str) -> Result<[u8; N], FormatError> {
        Ok(self.take(N, what)?.try_into().expect("length checked"))
    }

    fn u16(&mut self, what: &str) -> Result<u16, FormatError> {
        self.array(what).map(u16::from_le_bytes)
    }

    fn u32(&mut self, what: &str) -> Result<u32, FormatError> {
        self.array(what).map(u32::from_le_bytes)
    }

    fn u64(&mut self, what: &str) -> Result<u64, FormatError> {
        self.array(what).map(u64::from_le_bytes)
    }
}

/// Parses a complete OODF file image.
pub fn decode(buf: &[u8]) -> Result<FeatureStore, FeatureError> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(4, "magic")? != MAGIC {
        return Err(format_err(0, "wrong magic, expected `OODF`").into());
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(format_err(4, format!("unsupported version {version}")).into());
    }
    let dim = r.u32("dim")? as usize;
    if dim == 0 {
        return Err(format_err(8, "dim must be positive").into());
    }
    let rows = r.u64("row count")?;
    let adapted = match r.array::<1>("adapted flag")?[0] {
        0 => false,
        1 => true,
        v => return Err(format_err(20, format!("adapted flag {v} is not 0 or 1")).into()),
    };
    r.take(7, "reserved bytes")?;
    let n_values = usize::try_from(rows)
        .ok()
        .and_then(|rows| rows.checked_mul(dim))
        .filter(|n| n.checked_mul(4).is_some_and(|b| b <= buf.len()))
        .ok_or_else(|| format_err(buf.len(), "truncated matrix"))?;
    let matrix: Vec<f32> = r
        .take(n_values * 4, "matrix")?
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes")))
        .collect();
    let count_at = r.pos;
    let count = r.u64("id count")?;
    if count != rows {
        return Err(format_err(count_at, format!("{count} ids for {rows} rows")).into());
    }
    let mut ids = Vec::with_capacity(rows as usize);
    for _ in 0..rows {
        let len = r.u16("id length")? as usize;
        let at = r.pos;
        let bytes = r.take(len, "id")?;
        match std::str::from_utf8(bytes) {
            Ok(s) => ids.push(s.to_string()),
            Err(_) => return Err(format_err(at, "id is not UTF-8").into()),
        }
    }
    if r.pos != buf.len() {
        return Err(format_err(r.pos, "trailing bytes after id block").into());
    }
    FeatureStore::new(dim, matrix, ids, adapted)
}

/// Serializes a store. Fails only if an id exceeds 65535 bytes.
pub fn encode(store: &FeatureStore) -> Result<Vec<u8>, FeatureError> {
    let mut out = Vec::with_capacity(HEADER_LEN + store.matrix().len() * 4 + 16 * store.rows());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(store.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(store.rows() as u64).to_le_bytes());
    out.push(store.adapted() as u8);
    out.extend_from_slice(&[0u8; 7]);
    for v in store.matrix() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&(store.rows() as u64).to_le_bytes());
    for id in store.ids() {
        let len = u16::try_from(id.len()).map_err(|_| {
            FeatureError::InvalidStore(format!(
                "id of {} bytes exceeds the 65535-byte limit",
                id.len()
            ))
        })?;
        out.extend_from_slice(&len.to_le_bytes());
        out.extend_from_slice(id.as_bytes());
    }
    Ok(out)
}

pub fn read_store(path: impl AsRef<Path>) -> Result<FeatureStore, FeatureError> {
    let path = path.as_ref();
    let buf = fs::read(path).map_err(|e| FeatureError::io(path, e))?;
    decode(&buf)
}

pub fn write_store(store: &FeatureStore, path: impl AsRef<Path>) -> Result<(), FeatureError> {
    let path = path.as_ref();
    let bytes = encode(store)?;
    let write = || -> io::Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(&bytes)?;
        f.sync_all()
    };
    write().map_err(|e| FeatureError::io(path, e))
}
