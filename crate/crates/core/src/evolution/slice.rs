use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::states::{ComplexField, Grid2, PlaneField};

/// Axis normal to a slice plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceAxis {
    X,
    Y,
    Z,
}

/// `|ψ|²` on an axis-normal plane through the nearest grid node.
///
/// `grid` spans the two remaining axes in (x, y, z) order, so a z-normal
/// slice is indexed `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySlice {
    pub normal: SliceAxis,
    /// Coordinate of the grid plane actually used.
    pub offset: f64,
    pub grid: Grid2,
    pub values: Vec<f64>,
}

pub fn density_slice(field: &ComplexField, normal: SliceAxis, offset: f64) -> Result<DensitySlice> {
    let g = field.grid();
    let (axis, a, b) = match normal {
        SliceAxis::X => (g.x, g.y, g.z),
        SliceAxis::Y => (g.y, g.x, g.z),
        SliceAxis::Z => (g.z, g.x, g.y),
    };
    if !axis.contains(offset) {
        return Err(Error::Domain(format!(
            "slice offset {offset} outside [{}, {}]",
            axis.min(),
            axis.max()
        )));
    }
    let k = axis.nearest_index(offset)?;
    let (na, nb) = (a.count(), b.count());
    let values = (0..na * nb)
        .map(|i| {
            let (ia, ib) = (i / nb, i % nb);
            let v = match normal {
                SliceAxis::X => field.get(k, ia, ib),
                SliceAxis::Y => field.get(ia, k, ib),
                SliceAxis::Z => field.get(ia, ib, k),
            };
            v.norm_sqr()
        })
        .collect();
    Ok(DensitySlice {
        normal,
        offset: axis.node(k),
        grid: Grid2::new(a, b),
        values,
    })
}

impl DensitySlice {
    pub fn from_plane(plane: &PlaneField, offset: f64) -> Self {
        Self {
            normal: SliceAxis::Z,
            offset,
            grid: plane.grid,
            values: plane.values.iter().map(|v| v.norm_sqr()).collect(),
        }
    }

    pub fn get(&self, ia: usize, ib: usize) -> f64 {
        self.values[ia * self.grid.y.count() + ib]
    }

    /// Trapezoid integral over the plane.
    pub fn integral(&self) -> f64 {
        self.weighted_sum(|_, _| 1.0)
    }

    fn weighted_sum(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        let (xs, ys) = (self.grid.x.nodes(), self.grid.y.nodes());
        let (wx, wy) = (self.grid.x.weights(), self.grid.y.weights());
        let ny = ys.len();
        self.values
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let (ia, ib) = (i / ny, i % ny);
                d * wx[ia] * wy[ib] * f(xs[ia], ys[ib])
            })
            .sum()
    }

    /// Density-weighted mean of the two in-plane coordinates.
    pub fn centroid(&self) -> Result<[f64; 2]> {
        let n = self.integral();
        if !(n > 0.0) {
            return Err(Error::DegenerateInput("slice has zero density".into()));
        }
        Ok([self.weighted_sum(|a, _| a) / n, self.weighted_sum(|_, b| b) / n])
    }

    /// Centred second moments `[⟨aa⟩, ⟨ab⟩, ⟨bb⟩]`.
    pub fn second_moments(&self) -> Result<[f64; 3]> {
        let n = self.integral();
        let [ca, cb] = self.centroid()?;
        Ok([
            self.weighted_sum(|a, _| (a - ca).powi(2)) / n,
            self.weighted_sum(|a, b| (a - ca) * (b - cb)) / n,
            self.weighted_sum(|_, b| (b - cb).powi(2)) / n,
        ])
    }

    /// Orientation of a pattern with `order`-fold symmetry,
    /// `arg⟨(a + i b)^order⟩ / order` about the centroid, in `(−π/order, π/order]`.
    ///
    /// Order 2 gives the principal axis of the second moments. For patterns
    /// whose second moments are isotropic (such as the four-lobe mode) use
    /// order 4.
    pub fn orientation_angle(&self, order: u32) -> Result<f64> {
        if order == 0 {
            return Err(Error::Domain("orientation order must be positive".into()));
        }
        let [ca, cb] = self.centroid()?;
        let (xs, ys) = (self.grid.x.nodes(), self.grid.y.nodes());
        let (wx, wy) = (self.grid.x.weights(), self.grid.y.weights());
        let ny = ys.len();
        let s: Complex64 = self
            .values
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let (ia, ib) = (i / ny, i % ny);
                Complex64::new(xs[ia] - ca, ys[ib] - cb).powu(order) * (d * wx[ia] * wy[ib])
            })
            .sum();
        if s.norm() == 0.0 {
            return Err(Error::DegenerateInput(format!("order-{order} moment vanishes")));
        }
        Ok(s.arg() / order as f64)
    }

    /// Write `x,y,density` rows (in-plane coordinates) with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,y,density")?;
        let ys = self.grid.y.nodes();
        for (ia, a) in self.grid.x.nodes().into_iter().enumerate() {
            for (ib, b) in ys.iter().enumerate() {
                writeln!(w, "{:.16e},{:.16e},{:.16e}", a, b, self.get(ia, ib))?;
            }
        }
        w.flush()?;
        Ok(())
    }
}
