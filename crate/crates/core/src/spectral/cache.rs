//! Little-endian binary formats for cached eigendecompositions and for
//! field snapshots.
//!
//! Operator cache: `b"NLS4EIG\0"`, u32 version, u32 kind, u64 n, f64 r_max,
//! u64 N, 32-byte SHA-256 of the potential, then the N×N eigenvector block
//! row-major and the N eigenvalues, all as f64.
//!
//! Field: `b"NLS4FLD\0"`, u32 version, u32 reserved, u64 n, f64 r_max,
//! u64 N, f64 time, then N interleaved (re, im) f64 pairs.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use sha2::{Digest, Sha256};

use super::operator::{OperatorKind, SpectralOperator};
use crate::error::{Error, Result};
use crate::potentials::PotentialSpec;
use crate::radial::{GridOptions, RadialField, RadialGrid};

const OPERATOR_MAGIC: &[u8; 8] = b"NLS4EIG\0";
const FIELD_MAGIC: &[u8; 8] = b"NLS4FLD\0";
const VERSION: u32 = 1;

pub fn potential_hash(spec: Option<&PotentialSpec>) -> [u8; 32] {
    let key = spec.map_or_else(|| "free".to_string(), |s| s.canonical());
    Sha256::digest(key.as_bytes()).into()
}

fn kind_code(kind: OperatorKind) -> u32 {
    match kind {
        OperatorKind::Free => 0,
        OperatorKind::Full => 1,
    }
}

/// Cache file for a given key; the name is the hex digest of every key field.
pub fn cache_path(dir: &Path, kind: OperatorKind, grid: &RadialGrid, spec: Option<&PotentialSpec>) -> PathBuf {
    let header = operator_header(kind, grid, spec);
    let digest = Sha256::digest(&header);
    let name: String = digest.iter().take(12).map(|b| format!("{b:02x}")).collect();
    dir.join(format!("eig-{name}.bin"))
}

fn operator_header(kind: OperatorKind, grid: &RadialGrid, spec: Option<&PotentialSpec>) -> Vec<u8> {
    let mut out = Vec::with_capacity(72);
    out.extend_from_slice(OPERATOR_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&kind_code(kind).to_le_bytes());
    out.extend_from_slice(&(grid.dimension() as u64).to_le_bytes());
    out.extend_from_slice(&grid.r_max().to_le_bytes());
    out.extend_from_slice(&(grid.len() as u64).to_le_bytes());
    out.extend_from_slice(&potential_hash(spec));
    out
}

/// Writes via a temporary sibling and a rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let file_name = path.file_name().and_then(|s| s.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{file_name}.{}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn save_operator(op: &SpectralOperator, path: &Path) -> Result<()> {
    let n = op.len();
    let mut out = operator_header(op.kind(), op.grid(), op.potential());
    out.reserve(8 * (n * n + n));
    let modes = op.modes();
    for i in 0..n {
        for k in 0..n {
            out.extend_from_slice(&modes[(i, k)].to_le_bytes());
        }
    }
    for m in op.eigenvalues() {
        out.extend_from_slice(&m.to_le_bytes());
    }
    write_atomic(path, &out)
}

/// Loads a cached decomposition, rejecting files whose header disagrees with the key.
pub fn load_operator(
    path: &Path,
    kind: OperatorKind,
    grid: &Arc<RadialGrid>,
    spec: Option<&PotentialSpec>,
) -> Result<SpectralOperator> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    let header = operator_header(kind, grid, spec);
    if bytes.len() < header.len() || bytes[..8] != OPERATOR_MAGIC[..] {
        return Err(Error::Format("not an eigendecomposition cache file".into()));
    }
    if bytes[..header.len()] != header[..] {
        return Err(Error::Format("cache key does not match the requested operator".into()));
    }
    let n = grid.len();
    let body = &bytes[header.len()..];
    if body.len() != 8 * (n * n + n) {
        return Err(Error::Format(format!("cache body has {} bytes, expected {}", body.len(), 8 * (n * n + n))));
    }
    let mut floats = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")));
    let row_major: Vec<f64> = floats.by_ref().take(n * n).collect();
    let eigenvalues: Vec<f64> = floats.collect();
    if row_major.iter().chain(&eigenvalues).any(|x| !x.is_finite()) {
        return Err(Error::Format("non-finite entry in cache".into()));
    }
    let modes = DMatrix::from_row_slice(n, n, &row_major);
    Ok(SpectralOperator::from_cached(kind, grid, spec, eigenvalues, modes))
}

pub fn encode_field(u: &RadialField, time: f64) -> Vec<u8> {
    let grid = u.grid();
    let mut out = Vec::with_capacity(48 + 16 * u.len());
    out.extend_from_slice(FIELD_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    out.extend_from_slice(&(grid.dimension() as u64).to_le_bytes());
    out.extend_from_slice(&grid.r_max().to_le_bytes());
    out.extend_from_slice(&(grid.len() as u64).to_le_bytes());
    out.extend_from_slice(&time.to_le_bytes());
    for z in u.values() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn write_field(path: &Path, u: &RadialField, time: f64) -> Result<()> {
    write_atomic(path, &encode_field(u, time))
}

/// Returns the field (on a freshly built grid) and its time stamp.
pub fn decode_field(bytes: &[u8]) -> Result<(RadialField, f64)> {
    const HEADER: usize = 48;
    if bytes.len() < HEADER || bytes[..8] != FIELD_MAGIC[..] {
        return Err(Error::Format("not a field file".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
    let version = u32_at(8);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported field version {version}")));
    }
    let n = u64_at(16) as usize;
    let r_max = f64_at(24);
    let points = u64_at(32) as usize;
    let time = f64_at(40);
    if bytes.len() != HEADER + 16 * points {
        return Err(Error::Format(format!("field body length {} does not match N = {points}", bytes.len() - HEADER)));
    }
    let grid = Arc::new(RadialGrid::new(n, r_max, points, GridOptions { allow_low_dimension: true })?);
    let values = bytes[HEADER..]
        .chunks_exact(16)
        .map(|c| Complex64::new(f64_at_slice(&c[..8]), f64_at_slice(&c[8..])))
        .collect();
    Ok((RadialField::new(grid, values)?, time))
}

fn f64_at_slice(b: &[u8]) -> f64 {
    f64::from_le_bytes(b.try_into().expect("8 bytes"))
}

pub fn read_field(path: &Path) -> Result<(RadialField, f64)> {
    decode_field(&fs::read(path)?)
}
