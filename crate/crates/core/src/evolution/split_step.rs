//! Strang split-step Fourier integrator.
//!
//! One step is `V(dt/2) · T(dt) · R(dt) · V(dt/2)` with the potential taken
//! at the step midpoint. `R` is the magnetic rotation term
//! `ω(y p_x − x p_y)`, applied exactly as `ψ(r) → ψ(Rot(ω dt) r)` through
//! three Fourier shears. The free z motion commutes with everything and is
//! applied in one exact step.

use num_complex::Complex64;
use rayon::prelude::*;

use super::plane_ops::{for_each_x_line, for_each_y_line};
use crate::error::Result;
use crate::forces::ForceProfile;
use crate::kernels::{KernelKind, KernelSpec};
use crate::numerics::{fft_wavenumbers, fft_wavenumbers_full, LineFft};
use crate::states::{ComplexField, Grid3, LineField, PhysicalParams, PlaneField};

fn kinetic_multiplier(params: &PhysicalParams, n: usize, h: f64, dt: f64) -> Vec<Complex64> {
    let c = params.hbar * dt / (2.0 * params.mass);
    fft_wavenumbers_full(n, h).into_iter().map(|k| Complex64::cis(-c * k * k)).collect()
}

pub(super) fn free_line_exact(params: &PhysicalParams, t: f64, src: &LineField) -> LineField {
    let n = src.values.len();
    let fft = LineFft::new(n);
    let mult = kinetic_multiplier(params, n, src.axis.spacing(), t);
    let mut values = src.values.clone();
    fft.filter(&mut values, &mult);
    LineField { axis: src.axis, values }
}

pub(super) fn free_z_exact(params: &PhysicalParams, t: f64, planes: Vec<PlaneField>, grid: Grid3) -> ComplexField {
    let nz = grid.z.count();
    let nxy = grid.x.count() * grid.y.count();
    let fft = LineFft::new(nz);
    let mult = kinetic_multiplier(params, nz, grid.z.spacing(), t);
    let mut values = vec![Complex64::new(0.0, 0.0); nxy * nz];
    values.par_chunks_mut(nz).enumerate().for_each(|(ixy, line)| {
        for (iz, v) in line.iter_mut().enumerate() {
            *v = planes[iz].values[ixy];
        }
        fft.filter(line, &mult);
    });
    ComplexField::new(grid, values).expect("sizes agree by construction")
}

struct Stepper {
    nx: usize,
    ny: usize,
    xs: Vec<f64>,
    ys: Vec<f64>,
    fft_x: LineFft,
    fft_y: LineFft,
    kin_x: Vec<Complex64>,
    kin_y: Vec<Complex64>,
    kx: Vec<f64>,
    ky: Vec<f64>,
    /// `(tan-shear, sin-shear)` for the per-step rotation, if any
    shear: Option<(f64, f64)>,
}

impl Stepper {
    fn kinetic(&self, v: &mut [Complex64]) {
        for_each_y_line(v, self.ny, |_, line| self.fft_y.filter(line, &self.kin_y));
        for_each_x_line(v, self.nx, self.ny, |_, line| self.fft_x.filter(line, &self.kin_x));
    }

    /// `ψ(x, y) → ψ(x + a y, y)`
    fn shear_x(&self, v: &mut [Complex64], a: f64) {
        for_each_x_line(v, self.nx, self.ny, |iy, line| {
            let s = a * self.ys[iy];
            let mult: Vec<Complex64> = self.kx.iter().map(|k| Complex64::cis(k * s)).collect();
            self.fft_x.filter(line, &mult);
        });
    }

    /// `ψ(x, y) → ψ(x, y + b x)`
    fn shear_y(&self, v: &mut [Complex64], b: f64) {
        for_each_y_line(v, self.ny, |ix, line| {
            let s = b * self.xs[ix];
            let mult: Vec<Complex64> = self.ky.iter().map(|k| Complex64::cis(k * s)).collect();
            self.fft_y.filter(line, &mult);
        });
    }

    fn rotate(&self, v: &mut [Complex64]) {
        if let Some((a, b)) = self.shear {
            self.shear_x(v, a);
            self.shear_y(v, b);
            self.shear_x(v, a);
        }
    }
}

pub(super) fn transverse(spec: &KernelSpec, t: f64, steps: usize, src: &PlaneField) -> Result<PlaneField> {
    let p = spec.params;
    let dt = t / steps as f64;
    let g = src.grid;
    let (nx, ny) = (g.x.count(), g.y.count());
    let (hx, hy) = (g.x.spacing(), g.y.spacing());

    let omega = if spec.is_magnetic() { p.larmor() } else { 0.0 };
    let (profile, harmonic) = match &spec.kind {
        KernelKind::FreeTransverse2D => (ForceProfile::Zero, 0.0),
        KernelKind::LinearLongitudinal1D(prof) => (prof.clone(), 0.0),
        KernelKind::Magnetic3D => (ForceProfile::Zero, 0.5 * p.mass * omega * omega),
        KernelKind::MagneticWithForce3D { mu0 } => (ForceProfile::Constant { mu0: *mu0 }, 0.5 * p.mass * omega * omega),
    };
    profile.validate()?;
    let theta = omega * dt;
    let stepper = Stepper {
        nx,
        ny,
        xs: g.x.nodes(),
        ys: g.y.nodes(),
        fft_x: LineFft::new(nx),
        fft_y: LineFft::new(ny),
        kin_x: kinetic_multiplier(&p, nx, hx, dt),
        kin_y: kinetic_multiplier(&p, ny, hy, dt),
        kx: fft_wavenumbers(nx, hx),
        ky: fft_wavenumbers(ny, hy),
        shear: (theta != 0.0).then(|| (-(0.5 * theta).tan(), theta.sin())),
    };
    let radial: Vec<f64> = (0..nx * ny)
        .map(|i| {
            let (x, y) = (stepper.xs[i / ny], stepper.ys[i % ny]);
            harmonic * (x * x + y * y)
        })
        .collect();

    let mut v = src.values.clone();
    let half = 0.5 * dt / p.hbar;
    for n in 0..steps {
        let mu = profile.mu((n as f64 + 0.5) * dt)?;
        let phases: Vec<Complex64> = (0..nx * ny)
            .into_par_iter()
            .map(|i| Complex64::cis(-half * (radial[i] + mu * stepper.xs[i / ny])))
            .collect();
        v.par_iter_mut().zip(&phases).for_each(|(a, b)| *a *= b);
        stepper.kinetic(&mut v);
        stepper.rotate(&mut v);
        v.par_iter_mut().zip(&phases).for_each(|(a, b)| *a *= b);
    }
    Ok(PlaneField { grid: g, values: v })
}
