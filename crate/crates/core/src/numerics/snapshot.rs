//! Binary snapshot files: a single field plus its march-time stamp.
//!
//! Layout (little endian): `b"NLAC"`, `u32` version, `u8` axis count, per axis
//! `{u8 kind, u64 points, f64 extent}`, `f64` stamp, then the samples row-major.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::field::Field;
use crate::numerics::grid::{AxisKind, AxisRole, AxisSpec, GridSpec};

pub const MAGIC: &[u8; 4] = b"NLAC";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub field: Field,
    pub stamp: f64,
}

pub fn encode(field: &Field, stamp: f64) -> Vec<u8> {
    let grid = field.grid();
    let mut out = Vec::with_capacity(9 + 17 * grid.ndim() + 8 * (grid.len() + 1));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(grid.ndim() as u8);
    for a in grid.axes() {
        out.push(a.kind.code());
        out.extend_from_slice(&(a.points as u64).to_le_bytes());
        out.extend_from_slice(&a.extent.to_le_bytes());
    }
    out.extend_from_slice(&stamp.to_le_bytes());
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| format!("truncated at byte {}", self.pos))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> std::result::Result<u8, String> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> std::result::Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> std::result::Result<u64, String> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> std::result::Result<f64, String> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

fn decode_inner(bytes: &[u8]) -> std::result::Result<Snapshot, String> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err("bad magic".into());
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(format!("unsupported version {version}"));
    }
    let naxes = r.u8()? as usize;
    let mut axes = Vec::with_capacity(naxes);
    for i in 0..naxes {
        let kind = AxisKind::from_code(r.u8()?).ok_or_else(|| format!("axis {i}: bad kind"))?;
        let points = usize::try_from(r.u64()?).map_err(|_| format!("axis {i}: too many points"))?;
        let extent = r.f64()?;
        // Roles are not persisted; the file only records geometry.
        axes.push(AxisSpec {
            kind,
            extent,
            points,
            role: AxisRole::Transverse,
        });
    }
    let grid = GridSpec::new(axes).map_err(|e| e.to_string())?;
    let stamp = r.f64()?;
    let payload = grid
        .len()
        .checked_mul(8)
        .ok_or_else(|| "payload size overflows".to_string())?;
    let data = r.take(payload)?;
    if r.pos != bytes.len() {
        return Err(format!("{} trailing bytes", bytes.len() - r.pos));
    }
    let values = data
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let field = Field::new(grid, values).map_err(|e| e.to_string())?;
    Ok(Snapshot { field, stamp })
}

pub fn decode(bytes: &[u8]) -> Result<Snapshot> {
    decode_inner(bytes).map_err(|reason| Error::Format {
        path: "<memory>".into(),
        reason,
    })
}

pub fn write_snapshot(path: &Path, field: &Field, stamp: f64) -> Result<()> {
    fs::write(path, encode(field, stamp))?;
    Ok(())
}

/// Reads a snapshot. Axis roles are not stored, so they come back as `Transverse`.
pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let bytes = fs::read(path)?;
    decode_inner(&bytes).map_err(|reason| Error::Format {
        path: path.to_path_buf(),
        reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Field {
        let g = GridSpec::new(vec![
            AxisSpec::bounded(1.5, 9, AxisRole::Transverse),
            AxisSpec::periodic(6.0, 8, AxisRole::Transverse),
        ])
        .unwrap();
        Field::from_fn(&g, |x| (x[0] * 7.1).sin() / (1.0 + x[1]) + 1e-300)
    }

    #[test]
    fn round_trip_is_bitwise() {
        let f = sample();
        let s = decode(&encode(&f, 0.1 + 0.2)).unwrap();
        assert_eq!(s.stamp.to_bits(), (0.1f64 + 0.2).to_bits());
        assert_eq!(s.field.grid().shape(), f.grid().shape());
        for (a, b) in s.field.values().iter().zip(f.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn header_layout() {
        let bytes = encode(&sample(), 2.0);
        assert_eq!(&bytes[..4], b"NLAC");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(bytes[8], 2);
        assert_eq!(bytes[9], 1);
        assert_eq!(u64::from_le_bytes(bytes[10..18].try_into().unwrap()), 9);
        assert_eq!(bytes.len(), 9 + 2 * 17 + 8 + 8 * 72);
    }

    #[test]
    fn rejects_corruption() {
        let bytes = encode(&sample(), 0.0);
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode(&bad).is_err());
        let mut bad = bytes.clone();
        bad[4] = 2;
        assert!(decode(&bad).is_err());
        let mut long = bytes;
        long.push(0);
        assert!(decode(&long).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.nlac");
        write_snapshot(&p, &sample(), 3.0).unwrap();
        let s = read_snapshot(&p).unwrap();
        assert_eq!(s.field.values(), sample().values());
        assert!(read_snapshot(&dir.path().join("missing")).is_err());
    }
}
