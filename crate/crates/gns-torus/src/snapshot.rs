//! Binary field snapshots.
//!
//! Layout, little-endian: `rank: u32` (0 scalar, 1 vector, 2 symmetric
//! traceless), `n: u32`, `time: f64`, then each stored component as `n²`
//! row-major `f64` values.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::{Field, Grid, Rank, TorusError};

pub fn write<W: Write>(mut w: W, field: &Field, time: f64) -> Result<(), TorusError> {
    w.write_all(&field.rank().code().to_le_bytes())?;
    w.write_all(&(field.grid().n() as u32).to_le_bytes())?;
    w.write_all(&time.to_le_bytes())?;
    for c in field.components() {
        for v in c {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read<R: Read>(mut r: R) -> Result<(Field, f64), TorusError> {
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    let code = u32::from_le_bytes(b4);
    let rank = Rank::from_code(code).ok_or_else(|| TorusError::Snapshot(format!("unknown rank code {code}")))?;
    r.read_exact(&mut b4)?;
    let grid = Grid::new(u32::from_le_bytes(b4) as usize)?;
    r.read_exact(&mut b8)?;
    let time = f64::from_le_bytes(b8);
    let mut comps = Vec::with_capacity(rank.components());
    for _ in 0..rank.components() {
        let mut c = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            r.read_exact(&mut b8)?;
            c.push(f64::from_le_bytes(b8));
        }
        comps.push(c);
    }
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(TorusError::Snapshot(format!("{} trailing bytes", rest.len())));
    }
    Ok((Field::from_components(&grid, rank, comps)?, time))
}

pub fn save(path: impl AsRef<Path>, field: &Field, time: f64) -> Result<(), TorusError> {
    write(BufWriter::new(File::create(path)?), field, time)
}

pub fn load(path: impl AsRef<Path>) -> Result<(Field, f64), TorusError> {
    read(BufReader::new(File::open(path)?))
}
