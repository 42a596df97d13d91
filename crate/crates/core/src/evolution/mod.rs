//! Time evolution of initial states.
//!
//! Two independent routes: trapezoid-rule convolution with the closed-form
//! kernels, and a Strang split-step Fourier integrator used as an oracle.
//! Both exploit the fact that every Hamiltonian here splits into a
//! transverse (x, y) part and a free longitudinal z part.

pub mod closed_form;
mod convolution;
mod plane_ops;
mod slice;
mod split_step;

use crate::error::{invalid, Error, Result};
use crate::kernels::{KernelKind, KernelSpec};
use crate::states::{sample_field, Axis, ComplexField, Grid2, Grid3, InitialState, LineField, PlaneField};

pub use closed_form::{closed_form_linear_state, compare_closed_form, ClosedFormComparison, ClosedFormVariant};
pub use slice::{density_slice, DensitySlice, SliceAxis};

/// Fewest split-step steps accepted.
pub const MIN_SPLIT_STEPS: usize = 16;
/// Split-step results drifting further than this in norm are rejected.
pub const SPLIT_STEP_DRIFT_LIMIT: f64 = 1e-3;
/// Norm fraction allowed to leave the destination grid before warning.
pub const ESCAPE_WARNING: f64 = 1e-3;
/// Analytic widths added around the centroid by the default destination.
pub const DESTINATION_WIDTHS: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    KernelConvolution,
    SplitStepOracle { steps: usize },
}

/// One propagation job.
///
/// `grid` is the source grid of the convolution. `destination` is where the
/// result lives for both methods, and the split-step integrator works on it
/// from the start; when absent it is `grid` enlarged to cover the drifted
/// packet.
#[derive(Debug, Clone)]
pub struct EvolutionRequest {
    pub initial: InitialState,
    pub kernel: KernelSpec,
    pub time: f64,
    pub grid: Grid3,
    pub destination: Option<Grid3>,
    pub method: Method,
}

impl EvolutionRequest {
    pub fn new(initial: InitialState, kernel: KernelSpec, time: f64, grid: Grid3, method: Method) -> Self {
        Self {
            initial,
            kernel,
            time,
            grid,
            destination: None,
            method,
        }
    }

    pub fn with_destination(mut self, destination: Grid3) -> Self {
        self.destination = Some(destination);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.time > 0.0) || !self.time.is_finite() {
            return Err(invalid("time", format!("must be positive, got {}", self.time)));
        }
        if let Method::SplitStepOracle { steps } = self.method {
            if steps < MIN_SPLIT_STEPS {
                return Err(invalid("steps", format!("split-step needs at least {MIN_SPLIT_STEPS} steps, got {steps}")));
            }
        }
        if let KernelKind::LinearLongitudinal1D(p) = &self.kernel.kind {
            p.validate()?;
        }
        self.kernel.params.validate()
    }
}

#[derive(Debug, Clone)]
pub struct Evolved {
    pub field: ComplexField,
    pub initial_norm: f64,
    pub final_norm: f64,
}

impl Evolved {
    /// Relative change of the L2 norm.
    pub fn norm_drift(&self) -> f64 {
        (self.final_norm - self.initial_norm).abs() / self.initial_norm
    }
}

/// Run `request` with its chosen method.
pub fn evolve(request: &EvolutionRequest) -> Result<Evolved> {
    request.validate()?;
    let initial_norm = sample_norm(request);
    let field = match request.method {
        Method::KernelConvolution => evolve_convolution(request)?,
        Method::SplitStepOracle { .. } => evolve_split_step(request)?,
    };
    let final_norm = field.norm();
    Ok(Evolved {
        field,
        initial_norm,
        final_norm,
    })
}

fn sample_norm(request: &EvolutionRequest) -> f64 {
    let p = &request.kernel.params;
    match request.initial.factorized(p, &request.grid) {
        Some((plane, line)) => plane.norm() * line.norm(),
        None => sample_field(p, &request.initial, &request.grid).norm(),
    }
}

/// Convolve the initial state with the request's kernel.
pub fn evolve_convolution(request: &EvolutionRequest) -> Result<ComplexField> {
    request.validate()?;
    let spec = &request.kernel;
    let t = request.time;
    let dst = request.destination.unwrap_or_else(|| default_destination(request));
    let params = &spec.params;

    let src_norm = sample_norm(request);
    let field = match request.initial.factorized(params, &request.grid) {
        Some((plane, line)) => {
            let plane_t = evolve_plane_convolution(spec, t, &plane, &dst.transverse())?;
            let line_t = convolution::free_line(params, t, &line, dst.z)?;
            ComplexField::from_factors(&plane_t, &line_t)
        }
        None => {
            let src = sample_field(params, &request.initial, &request.grid);
            let planes = per_plane(&src, |p| evolve_plane_convolution(spec, t, p, &dst.transverse()))?;
            let zm = convolution::free_matrix(params, t, &request.grid.z, &dst.z)?;
            convolution::apply_z(&planes, dst, &request.grid.z, &zm)
        }
    };
    let escaped = 1.0 - (field.norm() / src_norm).powi(2);
    if escaped > ESCAPE_WARNING {
        log::warn!("destination grid too small: {:.3e} of the norm left the grid", escaped);
    }
    Ok(field)
}

/// Integrate the Schrödinger equation with `steps` Strang steps on the
/// destination grid.
pub fn evolve_split_step(request: &EvolutionRequest) -> Result<ComplexField> {
    request.validate()?;
    let steps = match request.method {
        Method::SplitStepOracle { steps } => steps,
        Method::KernelConvolution => {
            return Err(Error::Unsupported("evolve_split_step called with the convolution method".into()))
        }
    };
    let spec = &request.kernel;
    let t = request.time;
    let params = &spec.params;

    // the FFT grid is periodic, so start on the enlarged grid the packet
    // stays inside
    let grid = request.destination.unwrap_or_else(|| default_destination(request));
    let (field, before) = match request.initial.factorized(params, &grid) {
        Some((plane, line)) => {
            let before = plane.norm() * line.norm();
            let plane_t = evolve_plane_split_step(spec, t, steps, &plane)?;
            let line_t = split_step::free_line_exact(params, t, &line);
            (ComplexField::from_factors(&plane_t, &line_t), before)
        }
        None => {
            let src = sample_field(params, &request.initial, &grid);
            let before = src.norm();
            let planes = per_plane(&src, |p| evolve_plane_split_step(spec, t, steps, p))?;
            let field = split_step::free_z_exact(params, t, planes, grid);
            (field, before)
        }
    };
    let drift = (field.norm() - before).abs() / before;
    if drift > SPLIT_STEP_DRIFT_LIMIT {
        return Err(Error::StepCountTooSmall {
            drift,
            limit: SPLIT_STEP_DRIFT_LIMIT,
            suggested_steps: 2 * steps,
        });
    }
    Ok(field)
}

/// Propagate one transverse plane by kernel convolution.
pub fn evolve_plane_convolution(spec: &KernelSpec, t: f64, src: &PlaneField, dst: &Grid2) -> Result<PlaneField> {
    convolution::transverse(spec, t, src, dst)
}

/// Propagate one transverse plane with the split-step integrator.
pub fn evolve_plane_split_step(spec: &KernelSpec, t: f64, steps: usize, src: &PlaneField) -> Result<PlaneField> {
    if steps < MIN_SPLIT_STEPS {
        return Err(invalid("steps", format!("split-step needs at least {MIN_SPLIT_STEPS} steps, got {steps}")));
    }
    split_step::transverse(spec, t, steps, src)
}

/// Propagate a line along x with the kernel's one-dimensional factor: free
/// motion, or the force for the linear kind. Magnetic kinds are
/// unsupported since they couple x and y.
pub fn evolve_line_convolution(spec: &KernelSpec, t: f64, src: &LineField, dst: Axis) -> Result<LineField> {
    convolution::x_line(spec, t, src, dst)
}

fn per_plane<F>(field: &ComplexField, op: F) -> Result<Vec<PlaneField>>
where
    F: Fn(&PlaneField) -> Result<PlaneField>,
{
    (0..field.grid().z.count()).map(|iz| op(&field.z_plane(iz))).collect()
}

/// Analytic packet centroid at time `t` for a state starting at rest in
/// the transverse plane at the origin.
pub fn analytic_centroid(spec: &KernelSpec, t: f64) -> Result<[f64; 3]> {
    let p = &spec.params;
    let z = p.hbar * p.k0 * t / p.mass;
    Ok(match &spec.kind {
        KernelKind::FreeTransverse2D | KernelKind::Magnetic3D => [0.0, 0.0, z],
        KernelKind::LinearLongitudinal1D(profile) => [-profile.xi(t)? / p.mass, 0.0, z],
        KernelKind::MagneticWithForce3D { mu0 } => {
            let w = p.larmor();
            let d = 4.0 * p.mass * w * w;
            [-2.0 * mu0 * (w * t).sin().powi(2) / d, mu0 * (2.0 * w * t - (2.0 * w * t).sin()) / d, z]
        }
    })
}

/// Upper bound on the per-axis standard deviation at time `t`.
fn analytic_width_bound(request: &EvolutionRequest) -> [f64; 3] {
    let p = &request.kernel.params;
    let t = request.time;
    let (vx, vp) = request.initial.transverse_variances(p);
    let m2 = p.mass * p.mass;
    let transverse = if request.kernel.is_magnetic() {
        let w2 = p.larmor().powi(2);
        let bound = (0..2).map(|i| vx[i].max(vp[i] / (m2 * w2))).fold(0.0, f64::max);
        [bound.sqrt(); 2]
    } else {
        [(vx[0] + vp[0] * t * t / m2).sqrt(), (vx[1] + vp[1] * t * t / m2).sqrt()]
    };
    let a = p.alpha;
    let z = (1.0 / (2.0 * a) + p.hbar * p.hbar * a * t * t / (2.0 * m2)).sqrt();
    [transverse[0], transverse[1], z]
}

/// `request.grid` enlarged (same spacing) to hold the analytic centroid
/// plus [`DESTINATION_WIDTHS`] widths on every axis.
pub fn default_destination(request: &EvolutionRequest) -> Grid3 {
    let g = &request.grid;
    let c = analytic_centroid(&request.kernel, request.time).unwrap_or([0.0; 3]);
    let w = analytic_width_bound(request);
    let grow = |a: &Axis, i: usize| a.enclose(c[i] - DESTINATION_WIDTHS * w[i], c[i] + DESTINATION_WIDTHS * w[i]);
    let z = match request.initial {
        InitialState::HermiteGauss(_) => grow(&g.z, 2),
        InitialState::LaguerreGauss(_) => g.z,
    };
    Grid3::new(grow(&g.x, 0), grow(&g.y, 1), z)
}
