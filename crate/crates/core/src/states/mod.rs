//! Physical parameters, grids, sampled fields and the two families of
//! initial states (Hermite-Gauss and Laguerre-Gauss).

mod field;
mod grid;
pub mod io;
mod params;
mod special;

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rayon::prelude::*;

pub use field::{ComplexField, LineField, PlaneField};
pub use grid::{Axis, Grid2, Grid3};
pub use params::PhysicalParams;
pub use special::{hermite_poly, hermite_poly_complex, laguerre_poly, MAX_ORDER};

use crate::error::{invalid, Result};
use special::{factorial, hermite_norm};

/// Mode indices of the separable Hermite-Gauss packet. `m_index` is the
/// y-mode order (kept distinct from the particle mass).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HermiteGaussSpec {
    pub n: u32,
    pub m_index: u32,
}

impl HermiteGaussSpec {
    pub fn new(n: u32, m_index: u32) -> Result<Self> {
        if n > MAX_ORDER || m_index > MAX_ORDER {
            return Err(invalid("hermite order", format!("orders above {MAX_ORDER} are not supported")));
        }
        Ok(Self { n, m_index })
    }
}

/// Laguerre-Gauss beam with azimuthal index `l` and `p` radial nodes.
///
/// The amplitude keeps its z-dependent waist, curvature and Gouy phase and
/// has no longitudinal envelope. `longitudinal_phase` multiplies in the
/// plane wave `exp(i k₀ z)`; it is off by default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaguerreGaussSpec {
    pub l: i32,
    pub p: u32,
    pub w0: f64,
    pub z_r: f64,
    pub longitudinal_phase: bool,
}

impl LaguerreGaussSpec {
    pub fn new(l: i32, p: u32, w0: f64, z_r: f64) -> Result<Self> {
        if l.unsigned_abs() > MAX_ORDER || p > MAX_ORDER {
            return Err(invalid("laguerre order", format!("orders above {MAX_ORDER} are not supported")));
        }
        if !(w0 > 0.0) || !w0.is_finite() {
            return Err(invalid("w0", "must be positive"));
        }
        if !(z_r > 0.0) || !z_r.is_finite() {
            return Err(invalid("z_r", "must be positive"));
        }
        Ok(Self {
            l,
            p,
            w0,
            z_r,
            longitudinal_phase: false,
        })
    }

    pub fn with_longitudinal_phase(mut self, on: bool) -> Self {
        self.longitudinal_phase = on;
        self
    }

    pub fn waist_at(&self, z: f64) -> f64 {
        self.w0 * (1.0 + (z / self.z_r).powi(2)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    HermiteGauss(HermiteGaussSpec),
    LaguerreGauss(LaguerreGaussSpec),
}

impl InitialState {
    pub fn amplitude(&self, params: &PhysicalParams, point: [f64; 3]) -> Complex64 {
        match self {
            InitialState::HermiteGauss(s) => hermite_gauss_initial(params, s, point),
            InitialState::LaguerreGauss(s) => laguerre_gauss_initial(params, s, point),
        }
    }

    /// Separate `(x, y)` and `z` factors when the state is a product.
    pub fn factorized(&self, params: &PhysicalParams, grid: &Grid3) -> Option<(PlaneField, LineField)> {
        match self {
            InitialState::HermiteGauss(s) => {
                let xs: Vec<f64> = grid.x.nodes().iter().map(|&x| hg_axis_factor(params, s.n, x)).collect();
                let ys: Vec<f64> = grid.y.nodes().iter().map(|&y| hg_axis_factor(params, s.m_index, y)).collect();
                let ny = ys.len();
                let plane = PlaneField {
                    grid: grid.transverse(),
                    values: (0..xs.len() * ny).map(|i| Complex64::new(xs[i / ny] * ys[i % ny], 0.0)).collect(),
                };
                let line = LineField::from_fn(grid.z, |z| hg_longitudinal_factor(params, z));
                Some((plane, line))
            }
            InitialState::LaguerreGauss(_) => None,
        }
    }

    /// Per-axis transverse position and momentum variances at t = 0.
    pub fn transverse_variances(&self, params: &PhysicalParams) -> ([f64; 2], [f64; 2]) {
        let h2 = params.hbar * params.hbar;
        match self {
            InitialState::HermiteGauss(s) => {
                let w2 = params.beam_waist.powi(2);
                let qx = (2 * s.n + 1) as f64;
                let qy = (2 * s.m_index + 1) as f64;
                ([qx * w2 / 4.0, qy * w2 / 4.0], [qx * h2 / w2, qy * h2 / w2])
            }
            InitialState::LaguerreGauss(s) => {
                let q = (2 * s.p + s.l.unsigned_abs() + 1) as f64;
                let w2 = s.w0 * s.w0;
                ([q * w2 / 4.0; 2], [q * h2 / w2; 2])
            }
        }
    }
}

fn hg_axis_factor(params: &PhysicalParams, n: u32, x: f64) -> f64 {
    let w = params.beam_waist;
    (2.0 / (PI * w * w)).powf(0.25) * hermite_norm(n) * (-(x * x) / (w * w)).exp() * hermite_poly(n, SQRT_2 * x / w)
}

fn hg_longitudinal_factor(params: &PhysicalParams, z: f64) -> Complex64 {
    let a = params.alpha;
    let amp = (a / PI).powf(0.25) * (-0.5 * a * z * z).exp();
    Complex64::from_polar(amp, params.k0 * z)
}

/// Hermite-Gauss packet at `point`, launched from the origin with mean
/// momentum ħk₀ along z. Normalised to one over all space.
pub fn hermite_gauss_initial(params: &PhysicalParams, spec: &HermiteGaussSpec, point: [f64; 3]) -> Complex64 {
    let [x, y, z] = point;
    hg_longitudinal_factor(params, z) * (hg_axis_factor(params, spec.n, x) * hg_axis_factor(params, spec.m_index, y))
}

/// Laguerre-Gauss amplitude with waist `w(z) = w0 sqrt(1 + (z/z_r)²)`.
pub fn laguerre_gauss_initial(params: &PhysicalParams, spec: &LaguerreGaussSpec, point: [f64; 3]) -> Complex64 {
    let [x, y, z] = point;
    let la = spec.l.unsigned_abs();
    let rho2 = x * x + y * y;
    let w = spec.waist_at(z);
    let w2 = w * w;
    let norm = (2.0 * factorial(spec.p) / (PI * w2 * factorial(spec.p + la))).sqrt();
    let radial = (2.0 * rho2 / w2).sqrt().powi(la as i32) * (-rho2 / w2).exp() * laguerre_poly(spec.p, la as f64, 2.0 * rho2 / w2);
    let phi = y.atan2(x);
    let mut phase = spec.l as f64 * phi + params.k0 * rho2 * z / (2.0 * (z * z + spec.z_r * spec.z_r))
        - (2 * spec.p + la + 1) as f64 * (z / spec.z_r).atan();
    if spec.longitudinal_phase {
        phase += params.k0 * z;
    }
    Complex64::from_polar(norm * radial, phase)
}

/// Evaluate the initial state at every node of `grid`.
pub fn sample_field(params: &PhysicalParams, state: &InitialState, grid: &Grid3) -> ComplexField {
    if let Some((plane, line)) = state.factorized(params, grid) {
        return ComplexField::from_factors(&plane, &line);
    }
    let xs = grid.x.nodes();
    let ys = grid.y.nodes();
    let zs = grid.z.nodes();
    let (ny, nz) = (ys.len(), zs.len());
    let values: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let (ix, iy, iz) = (i / (ny * nz), (i / nz) % ny, i % nz);
            state.amplitude(params, [xs[ix], ys[iy], zs[iz]])
        })
        .collect();
    ComplexField::from_parts(*grid, values)
}

/// Transverse plane of the initial state at fixed `z`.
pub fn sample_plane(params: &PhysicalParams, state: &InitialState, grid: &Grid2, z: f64) -> PlaneField {
    PlaneField::from_fn(*grid, |x, y| state.amplitude(params, [x, y, z]))
}

/// Rescale a field to unit trapezoid norm.
pub fn normalize(field: ComplexField) -> Result<ComplexField> {
    field.normalize()
}
