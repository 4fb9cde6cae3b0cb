//! Binary file formats for fields and masks.
//!
//! Both formats share a 16-byte header: 4 magic bytes, `n` as little-endian
//! `u32`, `L` as little-endian `f64`. The payload follows row-major.
//!
//! * `CF1` (magic `CF1\0`): `n^2` samples, each an `(re, im)` pair of
//!   little-endian `f64`.
//! * `RM1` (magic `RM1\0`): `n^2` bytes, one `0`/`1` per sample.
//!
//! Writers stage into a sibling `<name>.tmp` file and rename on success, so
//! a failed run never leaves a truncated file at the target path.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ComplexField, Grid, RegionMask};

const CF1_MAGIC: &[u8; 4] = b"CF1\0";
const RM1_MAGIC: &[u8; 4] = b"RM1\0";

fn header(magic: &[u8; 4], grid: Grid) -> Vec<u8> {
    let mut buf = Vec::with_capacity(16);
    buf.extend_from_slice(magic);
    buf.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    buf.extend_from_slice(&grid.half_width().to_le_bytes());
    buf
}

fn parse_header(magic: &[u8; 4], bytes: &[u8]) -> Result<Grid> {
    if bytes.len() < 16 {
        return Err(Error::Format("file shorter than 16-byte header".into()));
    }
    if &bytes[0..4] != magic {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {:?}",
            &bytes[0..4],
            magic
        )));
    }
    let n = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let l = f64::from_le_bytes(bytes[8..16].try_into().unwrap());
    Grid::new(n, l)
}

/// Write `bytes` to `path` atomically (temp file + rename).
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(match path.extension() {
        Some(ext) => format!("{}.tmp", ext.to_string_lossy()),
        None => "tmp".to_string(),
    });
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_field(path: &Path, field: &ComplexField) -> Result<()> {
    let mut buf = header(CF1_MAGIC, field.grid());
    buf.reserve(field.samples().len() * 16);
    for s in field.samples() {
        buf.extend_from_slice(&s.re.to_le_bytes());
        buf.extend_from_slice(&s.im.to_le_bytes());
    }
    write_atomic(path, &buf)
}

pub fn read_field(path: &Path) -> Result<ComplexField> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    let grid = parse_header(CF1_MAGIC, &bytes)?;
    let want = 16 + grid.len() * 16;
    if bytes.len() != want {
        return Err(Error::Format(format!(
            "payload is {} bytes, expected {} for n = {}",
            bytes.len(),
            want,
            grid.n()
        )));
    }
    let samples: Vec<Complex64> = bytes[16..]
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[0..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..16].try_into().unwrap()),
            )
        })
        .collect();
    ComplexField::from_samples(grid, samples)
}

pub fn write_mask(path: &Path, mask: &RegionMask) -> Result<()> {
    let mut buf = header(RM1_MAGIC, mask.grid());
    buf.reserve(mask.bits().len());
    buf.extend(mask.bits().iter().map(|&b| b as u8));
    write_atomic(path, &buf)
}

pub fn read_mask(path: &Path) -> Result<RegionMask> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    let grid = parse_header(RM1_MAGIC, &bytes)?;
    let want = 16 + grid.len();
    if bytes.len() != want {
        return Err(Error::Format(format!(
            "payload is {} bytes, expected {} for n = {}",
            bytes.len(),
            want,
            grid.n()
        )));
    }
    for (i, &b) in bytes[16..].iter().enumerate() {
        if b > 1 {
            return Err(Error::Format(format!("mask byte {i} is {b}, not 0/1")));
        }
    }
    RegionMask::from_bits(grid, bytes[16..].iter().map(|&b| b == 1).collect())
}
