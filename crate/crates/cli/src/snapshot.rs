//! VSSF binary snapshots.
//!
//! Layout, all little-endian:
//!
//! | bytes      | content                                   |
//! |------------|-------------------------------------------|
//! | 4          | magic `VSSF`                              |
//! | 4          | version (`u32`)                           |
//! | 4 + 4      | `d`, `m` (`u32`)                          |
//! | 8 d        | point counts per axis (`u64`)             |
//! | 8 d        | half-extents per axis (`f64`)             |
//! | 1          | boundary tag (`u8`)                       |
//! | 16 N m     | `(re, im)` per component per point        |
//!
//! Points are row-major, components interleaved per point.

use std::fs;
use std::path::Path;

use num_complex::Complex;
use thiserror::Error;
use vsg_core::field::{Boundary, Grid, VectorField};

pub const MAGIC: [u8; 4] = *b"VSSF";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("snapshot i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic {found:?}, expected \"VSSF\"")]
    BadMagic { found: [u8; 4] },
    #[error("unsupported snapshot version {found}, expected {expected}")]
    BadVersion { found: u32, expected: u32 },
    #[error("snapshot truncated: expected {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },
    #[error("snapshot has {actual} bytes, expected {expected}")]
    TrailingBytes { expected: usize, actual: usize },
    #[error("invalid snapshot header: {0}")]
    Header(String),
}

fn header_len(d: usize) -> usize {
    4 + 4 + 4 + 4 + 16 * d + 1
}

pub fn encode(u: &VectorField<f64>) -> Vec<u8> {
    let g = u.grid();
    let d = g.dim();
    let mut out = Vec::with_capacity(header_len(d) + 16 * u.as_slice().len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(d as u32).to_le_bytes());
    out.extend_from_slice(&(u.components() as u32).to_le_bytes());
    for &n in g.counts() {
        out.extend_from_slice(&(n as u64).to_le_bytes());
    }
    for &l in g.half_extents() {
        out.extend_from_slice(&l.to_le_bytes());
    }
    out.push(g.boundary().tag());
    for z in u.as_slice() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    expected: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N], SnapshotError> {
        if self.pos + N > self.buf.len() {
            return Err(SnapshotError::Truncated {
                expected: self.expected.max(self.pos + N),
                actual: self.buf.len(),
            });
        }
        let mut a = [0u8; N];
        a.copy_from_slice(&self.buf[self.pos..self.pos + N]);
        self.pos += N;
        Ok(a)
    }

    fn u32(&mut self) -> Result<u32, SnapshotError> {
        Ok(u32::from_le_bytes(self.take()?))
    }

    fn u64(&mut self) -> Result<u64, SnapshotError> {
        Ok(u64::from_le_bytes(self.take()?))
    }

    fn f64(&mut self) -> Result<f64, SnapshotError> {
        Ok(f64::from_le_bytes(self.take()?))
    }
}

pub fn decode(buf: &[u8]) -> Result<VectorField<f64>, SnapshotError> {
    let mut r = Reader { buf, pos: 0, expected: 16 };
    let magic: [u8; 4] = r.take()?;
    if magic != MAGIC {
        return Err(SnapshotError::BadMagic { found: magic });
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(SnapshotError::BadVersion { found: version, expected: VERSION });
    }
    let d = r.u32()? as usize;
    let m = r.u32()? as usize;
    if !(1..=2).contains(&d) {
        return Err(SnapshotError::Header(format!("dimension {d}")));
    }
    r.expected = header_len(d);
    let mut counts = Vec::with_capacity(d);
    for _ in 0..d {
        counts.push(usize::try_from(r.u64()?).map_err(|e| SnapshotError::Header(e.to_string()))?);
    }
    let mut half = Vec::with_capacity(d);
    for _ in 0..d {
        half.push(r.f64()?);
    }
    let tag = r.take::<1>()?[0];
    let boundary = Boundary::from_tag(tag).ok_or_else(|| SnapshotError::Header(format!("boundary tag {tag}")))?;
    let grid = Grid::new(&counts, &half, boundary).map_err(|e| SnapshotError::Header(e.to_string()))?;
    let values = grid
        .len()
        .checked_mul(m)
        .ok_or_else(|| SnapshotError::Header("payload size overflows".into()))?;
    let expected = header_len(d) + 16 * values;
    if buf.len() < expected {
        return Err(SnapshotError::Truncated { expected, actual: buf.len() });
    }
    if buf.len() > expected {
        return Err(SnapshotError::TrailingBytes { expected, actual: buf.len() });
    }
    r.expected = expected;
    let mut data = Vec::with_capacity(values);
    for _ in 0..values {
        let re = r.f64()?;
        let im = r.f64()?;
        data.push(Complex::new(re, im));
    }
    VectorField::new(grid, m, data).map_err(|e| SnapshotError::Header(e.to_string()))
}

pub fn write_snapshot(u: &VectorField<f64>, path: &Path) -> Result<(), SnapshotError> {
    fs::write(path, encode(u))?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<VectorField<f64>, SnapshotError> {
    decode(&fs::read(path)?)
}
