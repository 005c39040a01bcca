//! Field snapshots: one JSON header line terminated by `\n`, followed by
//! the raw values as little-endian IEEE-754 f64, row-major over the grid
//! axes (last axis fastest) with the component index innermost.

use super::{Field, GridSpec};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

pub const FORMAT: &str = "hsflow-snapshot";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotHeader {
    pub format: String,
    pub version: u32,
    pub byte_order: String,
    pub kind: String,
    pub t: f64,
    pub sizes: Vec<usize>,
    pub lengths: Vec<f64>,
    pub ncomp: usize,
}

pub fn write_snapshot<W: Write>(mut w: W, field: &Field, kind: &str, t: f64) -> Result<()> {
    let header = SnapshotHeader {
        format: FORMAT.into(),
        version: 1,
        byte_order: "little".into(),
        kind: kind.into(),
        t,
        sizes: field.grid().sizes().to_vec(),
        lengths: field.grid().lengths().to_vec(),
        ncomp: field.ncomp(),
    };
    let line = serde_json::to_string(&header).map_err(|e| Error::Io(e.to_string()))?;
    w.write_all(line.as_bytes())?;
    w.write_all(b"\n")?;
    let mut buf = Vec::with_capacity(field.data().len() * 8);
    for v in field.data() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_snapshot<R: BufRead>(mut r: R) -> Result<(SnapshotHeader, Field)> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: SnapshotHeader = serde_json::from_str(line.trim_end()).map_err(|e| Error::Io(e.to_string()))?;
    if header.format != FORMAT || header.byte_order != "little" {
        return Err(Error::Io(format!("unsupported snapshot {} / {}", header.format, header.byte_order)));
    }
    let grid = GridSpec::new(header.sizes.clone(), header.lengths.clone())?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != grid.npoints() * header.ncomp * 8 {
        return Err(Error::Io(format!("snapshot payload has {} bytes", bytes.len())));
    }
    let data = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let field = Field::from_data(&grid, header.ncomp, data)?;
    Ok((header, field))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let g = GridSpec::new(vec![3, 1, 4], vec![1.0, 2.0, 0.5]).unwrap();
        let f = Field::from_fn(&g, 2, |x, o| {
            o[0] = x[0] + 10.0 * x[2];
            o[1] = -x[0];
        });
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &f, "acs", 0.25).unwrap();
        let (h, back) = read_snapshot(&buf[..]).unwrap();
        assert_eq!(h.kind, "acs");
        assert_eq!(h.t, 0.25);
        assert_eq!(back, f);
    }
}
