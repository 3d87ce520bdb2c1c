//! Field serialization: CSV and the `MPFIO1` binary raster.
//!
//! Raster layout, all little-endian:
//!
//! | bytes | content |
//! |---|---|
//! | 6 | magic `MPFIO1` |
//! | 4 | `u32` number of subspaces `d` |
//! | 4·d | `u32` subspace dimensions `n_i` |
//! | 24 per axis | `u64` node count, `f64` first node, `f64` spacing |
//! | 16 per node | `f64` real part, `f64` imaginary part, row-major |

use super::field::FunctionField;
use super::grid::{Axis, Lattice, SpaceGrid};
use crate::error::{Error, Result};
use crate::partition::SubspaceLayout;
use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64;
use std::io::{Read, Write};

pub const MAGIC: &[u8; 6] = b"MPFIO1";

pub fn write_raster<W: Write>(field: &FunctionField, mut w: W) -> Result<()> {
    let layout = field.grid.layout();
    w.write_all(MAGIC)?;
    w.write_all(&(layout.d() as u32).to_le_bytes())?;
    for &n in layout.dims() {
        w.write_all(&(n as u32).to_le_bytes())?;
    }
    for a in field.grid.axes() {
        w.write_all(&(a.len as u64).to_le_bytes())?;
        w.write_all(&a.origin.to_le_bytes())?;
        w.write_all(&a.step.to_le_bytes())?;
    }
    let mut buf = Vec::with_capacity(16 * field.values.len());
    for v in field.values.iter() {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn take<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b).map_err(|e| Error::Format(format!("truncated raster: {e}")))?;
    Ok(b)
}

pub fn read_raster<R: Read>(mut r: R) -> Result<FunctionField> {
    if &take::<6>(&mut r)? != MAGIC {
        return Err(Error::Format("missing MPFIO1 magic".into()));
    }
    let d = u32::from_le_bytes(take(&mut r)?) as usize;
    if d == 0 || d > 64 {
        return Err(Error::Format(format!("implausible subspace count {d}")));
    }
    let dims = (0..d)
        .map(|_| Ok(u32::from_le_bytes(take(&mut r)?) as usize))
        .collect::<Result<Vec<_>>>()?;
    let layout = SubspaceLayout::new(dims)?;
    let axes = (0..layout.n())
        .map(|_| {
            let len = u64::from_le_bytes(take(&mut r)?) as usize;
            let origin = f64::from_le_bytes(take(&mut r)?);
            let step = f64::from_le_bytes(take(&mut r)?);
            Axis::new(origin, step, len)
        })
        .collect::<Result<Vec<_>>>()?;
    let grid = SpaceGrid(Lattice::new(layout, axes)?);
    let mut vals = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        let re = f64::from_le_bytes(take(&mut r)?);
        let im = f64::from_le_bytes(take(&mut r)?);
        vals.push(Complex64::new(re, im));
    }
    let values = ArrayD::from_shape_vec(IxDyn(&grid.shape()), vals).expect("node count");
    FunctionField::new(grid, values)
}

/// CSV with columns `x1..xn, re, im`, one row per node.
pub fn write_csv<W: Write>(field: &FunctionField, w: W) -> Result<()> {
    let n = field.grid.layout().n();
    let mut wr = csv::Writer::from_writer(w);
    let mut header: Vec<String> = (1..=n).map(|k| format!("x{k}")).collect();
    header.push("re".into());
    header.push("im".into());
    wr.write_record(&header)?;
    for (k, v) in field.values.iter().enumerate() {
        let mut row: Vec<String> = field.grid.node(k).iter().map(|c| format!("{c:e}")).collect();
        row.push(format!("{:e}", v.re));
        row.push(format!("{:e}", v.im));
        wr.write_record(&row)?;
    }
    wr.flush()?;
    Ok(())
}

/// Reads a CSV written by [`write_csv`]; the grid is rebuilt from the
/// coordinate columns.
pub fn read_csv<R: Read>(layout: SubspaceLayout, r: R) -> Result<FunctionField> {
    let n = layout.n();
    let mut rd = csv::Reader::from_reader(r);
    let mut coords: Vec<Vec<f64>> = vec![Vec::new(); n];
    let mut vals = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec?;
        if rec.len() != n + 2 {
            return Err(Error::Format(format!("row {}: expected {} columns", line + 2, n + 2)));
        }
        let parsed: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Format(format!("row {}: {e}", line + 2)))?;
        for c in 0..n {
            coords[c].push(parsed[c]);
        }
        vals.push(Complex64::new(parsed[n], parsed[n + 1]));
    }
    let axes = coords
        .into_iter()
        .map(|mut c| {
            c.sort_by(f64::total_cmp);
            c.dedup();
            let step = if c.len() > 1 { (c[c.len() - 1] - c[0]) / (c.len() - 1) as f64 } else { 1.0 };
            Axis::new(c[0], step, c.len())
        })
        .collect::<Result<Vec<_>>>()?;
    let grid = SpaceGrid(Lattice::new(layout, axes)?);
    if grid.len() != vals.len() {
        return Err(Error::Format(format!("{} rows do not fill a {:?} grid", vals.len(), grid.shape())));
    }
    let values = ArrayD::from_shape_vec(IxDyn(&grid.shape()), vals).expect("node count");
    FunctionField::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FunctionField {
        let layout = SubspaceLayout::new(vec![2, 2]).unwrap();
        let grid = SpaceGrid(
            Lattice::new(
                layout,
                vec![
                    Axis::new(-0.5, 0.25, 4).unwrap(),
                    Axis::new(0.1, 0.3, 3).unwrap(),
                    Axis::new(0.0, 1.0 / 3.0, 2).unwrap(),
                    Axis::new(-2.0, 0.7, 5).unwrap(),
                ],
            )
            .unwrap(),
        );
        FunctionField::from_fn(grid, |x| Complex64::new(x[0].sin() / 3.0, x[1] * x[3] + 1e-17))
    }

    #[test]
    fn raster_round_trip_is_exact() {
        let f = sample();
        let mut buf = Vec::new();
        write_raster(&f, &mut buf).unwrap();
        assert_eq!(&buf[..6], MAGIC);
        let g = read_raster(buf.as_slice()).unwrap();
        assert_eq!(f, g);
        assert!(read_raster(&buf[..buf.len() - 1]).is_err());
    }

    #[test]
    fn csv_round_trip_values() {
        let f = sample();
        let mut buf = Vec::new();
        write_csv(&f, &mut buf).unwrap();
        let g = read_csv(f.grid.layout().clone(), buf.as_slice()).unwrap();
        assert_eq!(f.values, g.values);
        for (a, b) in f.grid.axes().iter().zip(g.grid.axes()) {
            assert!((a.step - b.step).abs() < 1e-12 && a.origin == b.origin);
        }
    }
}
