use num_complex::Complex64;
use rayon::prelude::*;

use super::grid::{Axis, Grid2, Grid3};
use crate::error::{Error, Result};

/// Complex wavefunction sampled on a [`Grid3`].
///
/// `norm_hint` holds the trapezoid L2 norm computed when the field was
/// built or last normalised.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: Grid3,
    values: Vec<Complex64>,
    norm_hint: f64,
}

impl ComplexField {
    pub fn new(grid: Grid3, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Format(format!(
                "field has {} values but grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        let norm_hint = l2_norm(&grid, &values);
        Ok(Self { grid, values, norm_hint })
    }

    pub fn zeros(grid: Grid3) -> Self {
        Self {
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            grid,
            norm_hint: 0.0,
        }
    }

    /// Outer product `plane(x, y) · line(z)`.
    pub fn from_factors(plane: &PlaneField, line: &LineField) -> Self {
        let grid = Grid3::new(plane.grid.x, plane.grid.y, line.axis);
        let nz = line.values.len();
        let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
        values
            .par_chunks_mut(nz)
            .zip(plane.values.par_iter())
            .for_each(|(chunk, p)| {
                chunk.iter_mut().zip(&line.values).for_each(|(v, l)| *v = p * l);
            });
        let norm_hint = plane.norm() * line.norm();
        Self { grid, values, norm_hint }
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn norm_hint(&self) -> f64 {
        self.norm_hint
    }

    pub fn get(&self, ix: usize, iy: usize, iz: usize) -> Complex64 {
        self.values[self.grid.index(ix, iy, iz)]
    }

    /// Trapezoid-rule L2 norm `sqrt(∫|ψ|²)`.
    pub fn norm(&self) -> f64 {
        l2_norm(&self.grid, &self.values)
    }

    /// Rescale to unit norm. Fails on an all-zero field.
    pub fn normalize(mut self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::DegenerateInput(format!("cannot normalise a field of norm {n}")));
        }
        let s = 1.0 / n;
        self.values.par_iter_mut().for_each(|v| *v *= s);
        self.norm_hint = self.norm();
        Ok(self)
    }

    /// `⟨self|other⟩` by trapezoid quadrature.
    pub fn inner(&self, other: &ComplexField) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::Domain("inner product of fields on different grids".into()));
        }
        let wz = self.grid.z.weights();
        let nz = wz.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for (row, (a, b)) in self.values.chunks(nz).zip(other.values.chunks(nz)).enumerate() {
            let (ix, iy) = (row / self.grid.y.count(), row % self.grid.y.count());
            let wxy = self.grid.x.weight(ix) * self.grid.y.weight(iy);
            let line: Complex64 = a.iter().zip(b).zip(&wz).map(|((p, q), w)| p.conj() * q * w).sum();
            acc += line * wxy;
        }
        Ok(acc)
    }

    /// Transverse plane at node `iz`.
    pub fn z_plane(&self, iz: usize) -> PlaneField {
        let nz = self.grid.z.count();
        let values = self.values.iter().skip(iz).step_by(nz).copied().collect();
        PlaneField {
            grid: self.grid.transverse(),
            values,
        }
    }

    pub(crate) fn from_parts(grid: Grid3, values: Vec<Complex64>) -> Self {
        let norm_hint = l2_norm(&grid, &values);
        Self { grid, values, norm_hint }
    }
}

fn l2_norm(grid: &Grid3, values: &[Complex64]) -> f64 {
    let wz = grid.z.weights();
    let nz = wz.len();
    let ny = grid.y.count();
    let s: f64 = values
        .chunks(nz)
        .enumerate()
        .map(|(row, line)| {
            let w = grid.x.weight(row / ny) * grid.y.weight(row % ny);
            w * line.iter().zip(&wz).map(|(v, wz)| v.norm_sqr() * wz).sum::<f64>()
        })
        .sum();
    s.sqrt()
}

/// Complex field on a transverse (x, y) plane.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneField {
    pub grid: Grid2,
    pub values: Vec<Complex64>,
}

impl PlaneField {
    pub fn new(grid: Grid2, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Format("plane field length does not match grid".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid2, f: impl Fn(f64, f64) -> Complex64 + Sync) -> Self {
        let xs = grid.x.nodes();
        let ys = grid.y.nodes();
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| f(xs[i / ys.len()], ys[i % ys.len()]))
            .collect();
        Self { grid, values }
    }

    pub fn get(&self, ix: usize, iy: usize) -> Complex64 {
        self.values[ix * self.grid.y.count() + iy]
    }

    pub fn norm(&self) -> f64 {
        let ny = self.grid.y.count();
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| v.norm_sqr() * self.grid.x.weight(i / ny) * self.grid.y.weight(i % ny))
            .sum::<f64>()
            .sqrt()
    }

    pub fn normalize(mut self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::DegenerateInput(format!("cannot normalise a plane of norm {n}")));
        }
        self.values.iter_mut().for_each(|v| *v /= n);
        Ok(self)
    }

    pub fn inner(&self, other: &PlaneField) -> Complex64 {
        let ny = self.grid.y.count();
        self.values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(i, (a, b))| a.conj() * b * self.grid.x.weight(i / ny) * self.grid.y.weight(i % ny))
            .sum()
    }
}

/// Complex field along a single axis.
#[derive(Debug, Clone, PartialEq)]
pub struct LineField {
    pub axis: Axis,
    pub values: Vec<Complex64>,
}

impl LineField {
    pub fn from_fn(axis: Axis, f: impl Fn(f64) -> Complex64) -> Self {
        let values = axis.nodes().into_iter().map(f).collect();
        Self { axis, values }
    }

    pub fn norm(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| v.norm_sqr() * self.axis.weight(i))
            .sum::<f64>()
            .sqrt()
    }
}
