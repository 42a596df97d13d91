//! Plain-file formats for sampled fields.
//!
//! Binary layout (little-endian): three `u64` node counts, three `f64`
//! minima, three `f64` spacings, then `Re ψ, Im ψ` pairs in row-major
//! (x, y, z) order.

use std::io::{BufRead, Read, Write};

use num_complex::Complex64;

use super::field::{ComplexField, PlaneField};
use super::grid::{Axis, Grid3};
use crate::error::{Error, Result};

pub fn write_field_binary<W: Write>(field: &ComplexField, mut w: W) -> Result<()> {
    let g = field.grid();
    for a in [g.x, g.y, g.z] {
        w.write_all(&(a.count() as u64).to_le_bytes())?;
    }
    for a in [g.x, g.y, g.z] {
        w.write_all(&a.min().to_le_bytes())?;
    }
    for a in [g.x, g.y, g.z] {
        w.write_all(&a.spacing().to_le_bytes())?;
    }
    let mut buf = Vec::with_capacity(16 * field.values().len());
    for v in field.values() {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

pub fn read_field_binary<R: Read>(mut r: R) -> Result<ComplexField> {
    let mut word = [0u8; 8];
    let mut next = |r: &mut R| -> Result<[u8; 8]> {
        r.read_exact(&mut word)
            .map_err(|e| Error::Format(format!("truncated field header: {e}")))?;
        Ok(word)
    };
    let mut counts = [0usize; 3];
    for c in &mut counts {
        *c = usize::try_from(u64::from_le_bytes(next(&mut r)?))
            .map_err(|_| Error::Format("node count does not fit in memory".into()))?;
    }
    let mut mins = [0.0; 3];
    for m in &mut mins {
        *m = f64::from_le_bytes(next(&mut r)?);
    }
    let mut steps = [0.0; 3];
    for s in &mut steps {
        *s = f64::from_le_bytes(next(&mut r)?);
    }
    let mut axes = Vec::with_capacity(3);
    for i in 0..3 {
        if counts[i] < 2 {
            return Err(Error::Format(format!("axis {i} has fewer than two nodes")));
        }
        let max = mins[i] + steps[i] * (counts[i] - 1) as f64;
        axes.push(Axis::new(mins[i], max, counts[i]).map_err(|e| Error::Format(e.to_string()))?);
    }
    let grid = Grid3::new(axes[0], axes[1], axes[2]);
    let total = counts
        .iter()
        .try_fold(1usize, |acc, &c| acc.checked_mul(c))
        .and_then(|n| n.checked_mul(16))
        .ok_or_else(|| Error::Format("field size overflows".into()))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != total {
        return Err(Error::Format(format!("expected {total} payload bytes, found {}", bytes.len())));
    }
    let values = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    ComplexField::new(grid, values)
}

/// Write `x,y,density` rows with 17 significant digits.
pub fn write_density_csv<W: Write>(plane: &PlaneField, mut w: W) -> Result<()> {
    writeln!(w, "x,y,density")?;
    let ys = plane.grid.y.nodes();
    for (ix, x) in plane.grid.x.nodes().into_iter().enumerate() {
        for (iy, y) in ys.iter().enumerate() {
            writeln!(w, "{:.16e},{:.16e},{:.16e}", x, y, plane.get(ix, iy).norm_sqr())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Write `x,y,density,re,im` rows for a transverse slice.
pub fn write_plane_csv<W: Write>(plane: &PlaneField, mut w: W) -> Result<()> {
    writeln!(w, "x,y,density,re,im")?;
    let ys = plane.grid.y.nodes();
    for (ix, x) in plane.grid.x.nodes().into_iter().enumerate() {
        for (iy, y) in ys.iter().enumerate() {
            let v = plane.get(ix, iy);
            writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", x, y, v.norm_sqr(), v.re, v.im)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Read back `(x, y, density)` triples written by [`write_density_csv`].
pub fn read_density_csv<R: BufRead>(r: R) -> Result<Vec<[f64; 3]>> {
    let mut rows = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line = line?;
        if n == 0 || line.trim().is_empty() {
            continue;
        }
        let mut row = [0.0; 3];
        let mut cols = line.split(',');
        for v in &mut row {
            *v = cols
                .next()
                .and_then(|c| c.trim().parse().ok())
                .ok_or_else(|| Error::Format(format!("line {}: expected three numbers", n + 1)))?;
        }
        rows.push(row);
    }
    Ok(rows)
}
