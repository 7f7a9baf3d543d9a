//! Tiny binary matrix container used for every on-disk matrix artifact
//! (features, cached topology edges, checkpoints, exported embeddings).
//!
//! Layout: 4-byte magic `TGM1`, row count as little-endian u64, column count
//! as little-endian u64, one dtype byte (0 = f32, 1 = f64), then the
//! row-major payload in little-endian order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

const MAGIC: &[u8; 4] = b"TGM1";

/// On-disk element type. In memory everything is `f64`; `F32` halves file
/// size for exported embeddings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DType {
    F32,
    F64,
}

/// Writes `m` to `path`, converting to the requested dtype.
pub fn write_matrix(path: &Path, m: &DenseMatrix, dtype: DType) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    w.write_all(MAGIC)?;
    w.write_all(&(m.rows() as u64).to_le_bytes())?;
    w.write_all(&(m.cols() as u64).to_le_bytes())?;
    match dtype {
        DType::F32 => {
            w.write_all(&[0u8])?;
            for &x in m.data() {
                w.write_all(&(x as f32).to_le_bytes())?;
            }
        }
        DType::F64 => {
            w.write_all(&[1u8])?;
            for &x in m.data() {
                w.write_all(&x.to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a matrix, widening f32 payloads to f64.
pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    let file = File::open(path)?;
    let mut r = BufReader::new(file);
    let mut magic = [0u8; 4];
    read_fully(&mut r, &mut magic, path)?;
    if &magic != MAGIC {
        return Err(Error::malformed(format!(
            "{}: bad magic, not a TGM1 matrix",
            path.display()
        )));
    }
    let mut u64buf = [0u8; 8];
    read_fully(&mut r, &mut u64buf, path)?;
    let rows = u64::from_le_bytes(u64buf);
    read_fully(&mut r, &mut u64buf, path)?;
    let cols = u64::from_le_bytes(u64buf);
    let mut dtype = [0u8; 1];
    read_fully(&mut r, &mut dtype, path)?;

    let count = rows
        .checked_mul(cols)
        .and_then(|c| usize::try_from(c).ok())
        .ok_or_else(|| Error::malformed(format!("{}: matrix dimensions overflow", path.display())))?;

    let mut data = Vec::with_capacity(count);
    match dtype[0] {
        0 => {
            let mut buf = [0u8; 4];
            for _ in 0..count {
                read_fully(&mut r, &mut buf, path)?;
                data.push(f32::from_le_bytes(buf) as f64);
            }
        }
        1 => {
            let mut buf = [0u8; 8];
            for _ in 0..count {
                read_fully(&mut r, &mut buf, path)?;
                data.push(f64::from_le_bytes(buf));
            }
        }
        d => {
            return Err(Error::malformed(format!(
                "{}: unknown dtype byte {d}",
                path.display()
            )))
        }
    }
    DenseMatrix::from_vec(rows as usize, cols as usize, data)
}

fn read_fully(r: &mut impl Read, buf: &mut [u8], path: &Path) -> Result<()> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::malformed(format!("{}: truncated TGM1 file", path.display()))
        } else {
            Error::Io(e)
        }
    })
}
