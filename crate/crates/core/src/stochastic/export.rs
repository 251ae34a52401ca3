//! Ensemble files.
//!
//! CSV: header `t,path,x1,...,xm`, then one row per path and grid index, path-major.
//!
//! Binary, all little-endian:
//!
//! | bytes          | content                          |
//! |----------------|----------------------------------|
//! | 8              | magic `DIFFENS1`                 |
//! | 8 × 4          | `u64`: N, K + 1, m, seed         |
//! | 8 × (K + 1)    | `f64` times                      |
//! | 8 × N(K + 1)m  | `f64` states, path-major, then time, then coordinate |

use std::io::{self, Read, Write};
use std::sync::Arc;

use super::paths::{PathEnsemble, SamplePath, TimeGrid, EULER_MARUYAMA};
use crate::error::Error;

pub const MAGIC: &[u8; 8] = b"DIFFENS1";

pub fn write_csv<W: Write>(e: &PathEnsemble, mut w: W) -> io::Result<()> {
    write!(w, "t,path")?;
    for i in 1..=e.dim() {
        write!(w, ",x{i}")?;
    }
    writeln!(w)?;
    let times = e.grid().times();
    for (id, p) in e.paths().iter().enumerate() {
        for (k, t) in times.iter().enumerate() {
            write!(w, "{t:?},{id}")?;
            for v in p.state(k) {
                write!(w, ",{v:?}")?;
            }
            writeln!(w)?;
        }
    }
    Ok(())
}

pub fn write_binary<W: Write>(e: &PathEnsemble, mut w: W) -> io::Result<()> {
    w.write_all(MAGIC)?;
    for v in [e.len() as u64, e.grid().len() as u64, e.dim() as u64, e.seed()] {
        w.write_all(&v.to_le_bytes())?;
    }
    for t in e.grid().times() {
        w.write_all(&t.to_le_bytes())?;
    }
    for p in e.paths() {
        for v in p.states() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn invalid(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

fn read_u64<R: Read>(r: &mut R) -> io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> io::Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

/// Reads the binary layout back; the scheme tag is not stored and reads as Euler–Maruyama.
pub fn read_binary<R: Read>(mut r: R) -> io::Result<PathEnsemble> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(invalid("not an ensemble file"));
    }
    let n = read_u64(&mut r)? as usize;
    let len = read_u64(&mut r)? as usize;
    let dim = read_u64(&mut r)? as usize;
    let seed = read_u64(&mut r)?;
    let times = (0..len).map(|_| read_f64(&mut r)).collect::<io::Result<Vec<_>>>()?;
    let to_io = |e: Error| invalid(e.to_string());
    let grid = Arc::new(TimeGrid::new(times).map_err(to_io)?);
    let mut paths = Vec::with_capacity(n);
    for _ in 0..n {
        let states = (0..len * dim)
            .map(|_| read_f64(&mut r))
            .collect::<io::Result<Vec<_>>>()?;
        paths.push(SamplePath::new(grid.clone(), dim, states).map_err(to_io)?);
    }
    PathEnsemble::new(grid, dim, paths, seed, EULER_MARUYAMA).map_err(to_io)
}
