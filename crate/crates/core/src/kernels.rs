//! Closed-form propagators.
//!
//! * free motion in two dimensions (and its 1D factor),
//! * motion along x under a time-dependent force `μ(t) x`,
//! * a uniform magnetic field along z in the symmetric gauge,
//! * the magnetic field plus a constant force `μ x`.
//!
//! All kernels are evaluated in their principal-branch form, i.e.
//! `1/sqrt(i) = exp(-iπ/4)`. For the magnetic kernels the transverse
//! prefactor `mω / (2πħ sin ωt)` keeps its sign, so crossing a focal time
//! flips it (the Maslov phase).

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::forces::ForceProfile;
use crate::states::PhysicalParams;

/// Kernels refuse times at or below `T_MIN_FACTOR · τ`.
pub const T_MIN_FACTOR: f64 = 1e-6;
/// Magnetic kernels refuse `|sin ωt| ≤ FOCAL_EPS` away from `t = 0`.
pub const FOCAL_EPS: f64 = 1e-6;

const SMALL_ANGLE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub enum KernelKind {
    FreeTransverse2D,
    LinearLongitudinal1D(ForceProfile),
    Magnetic3D,
    /// Constant force only.
    MagneticWithForce3D { mu0: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub params: PhysicalParams,
}

impl KernelSpec {
    pub fn new(kind: KernelKind, params: PhysicalParams) -> Result<Self> {
        params.validate()?;
        match &kind {
            KernelKind::Magnetic3D | KernelKind::MagneticWithForce3D { .. } => {
                if params.larmor() == 0.0 {
                    return Err(invalid("b_field", "magnetic kernels need nonzero charge and field"));
                }
            }
            KernelKind::LinearLongitudinal1D(p) => p.validate()?,
            KernelKind::FreeTransverse2D => {}
        }
        if let KernelKind::MagneticWithForce3D { mu0 } = kind {
            if !mu0.is_finite() {
                return Err(invalid("mu0", "must be finite"));
            }
        }
        Ok(Self { kind, params })
    }

    pub fn is_magnetic(&self) -> bool {
        matches!(self.kind, KernelKind::Magnetic3D | KernelKind::MagneticWithForce3D { .. })
    }

    /// Force profile acting along x (a constant for the magnetic-plus-force kind).
    pub fn force(&self) -> ForceProfile {
        match &self.kind {
            KernelKind::LinearLongitudinal1D(p) => p.clone(),
            KernelKind::MagneticWithForce3D { mu0 } => ForceProfile::Constant { mu0: *mu0 },
            _ => ForceProfile::Zero,
        }
    }

    pub fn t_min(&self) -> f64 {
        t_min(&self.params)
    }

    /// Full three-dimensional propagator. The free and linear kinds are
    /// completed with free motion along the remaining axes.
    pub fn eval_3d(&self, r: [f64; 3], t: f64, rp: [f64; 3]) -> Result<Complex64> {
        let p = &self.params;
        match &self.kind {
            KernelKind::FreeTransverse2D => {
                Ok(free_kernel_1d(p, r[0], t, rp[0])? * free_transverse_kernel(p, (r[1], r[2]), t, (rp[1], rp[2]))?)
            }
            KernelKind::LinearLongitudinal1D(f) => Ok(linear_longitudinal_kernel(p, f, r[0], t, rp[0])?
                * free_transverse_kernel(p, (r[1], r[2]), t, (rp[1], rp[2]))?),
            KernelKind::Magnetic3D => magnetic_kernel(p, r, t, rp),
            KernelKind::MagneticWithForce3D { mu0 } => magnetic_force_kernel(p, *mu0, r, t, rp),
        }
    }
}

/// Finite-difference check of `iħ ∂ₜK = H K` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdeResidual {
    /// `|iħ ∂ₜK − H K|`.
    pub residual: f64,
    /// Sum of the magnitudes of the individual terms.
    pub scale: f64,
}

impl PdeResidual {
    pub fn relative(&self) -> f64 {
        self.residual / self.scale
    }
}

/// Residual of the Schrödinger equation satisfied by `spec`'s 3D kernel in
/// `r` at time `t`, by second-order central differences.
///
/// `h` is relative to the kernel's own scales: the steps are `δt = h·t`
/// and `δx = h·√(ħt/m)`.
///
/// `H = −ħ²∇²/2m + iħω(x∂_y − y∂_x) + mω²(x²+y²)/2 + μ(t)x`.
pub fn pde_residual(spec: &KernelSpec, r: [f64; 3], t: f64, rp: [f64; 3], h: f64) -> Result<PdeResidual> {
    let p = &spec.params;
    let (m, hb) = (p.mass, p.hbar);
    if !(h > 0.0 && h < 0.5) || !(t > spec.t_min()) {
        return Err(invalid("h", format!("relative step {h} must lie in (0, 0.5) and t above t_min")));
    }
    let (ht, hx) = (h * t, h * (hb * t / m).sqrt());
    let w = if spec.is_magnetic() { p.larmor() } else { 0.0 };
    let k = |r: [f64; 3], t: f64| spec.eval_3d(r, t, rp);
    let shift = |a: usize, d: f64| {
        let mut s = r;
        s[a] += d;
        s
    };
    let k0 = k(r, t)?;
    let i = Complex64::i();
    let dt = i * hb * (k(r, t + ht)? - k(r, t - ht)?) / (2.0 * ht);
    let mut lap = Complex64::new(0.0, 0.0);
    let mut grad = [Complex64::new(0.0, 0.0); 3];
    for a in 0..3 {
        let (kp, km) = (k(shift(a, hx), t)?, k(shift(a, -hx), t)?);
        lap += (kp - 2.0 * k0 + km) / (hx * hx);
        grad[a] = (kp - km) / (2.0 * hx);
    }
    let kinetic = -hb * hb / (2.0 * m) * lap;
    let rotation = i * hb * w * (r[0] * grad[1] - r[1] * grad[0]);
    let potential = (0.5 * m * w * w * (r[0] * r[0] + r[1] * r[1]) + spec.force().mu(t)? * r[0]) * k0;
    let residual = (dt - kinetic - rotation - potential).norm();
    Ok(PdeResidual {
        residual,
        scale: dt.norm() + kinetic.norm() + rotation.norm() + potential.norm(),
    })
}

pub fn t_min(params: &PhysicalParams) -> f64 {
    T_MIN_FACTOR * params.tau()
}

fn check_time(params: &PhysicalParams, t: f64) -> Result<()> {
    let t_min = t_min(params);
    if !t.is_finite() || t <= t_min {
        return Err(Error::NearSingularTime { t, t_min });
    }
    Ok(())
}

/// `1 - u cot u`, accurate near `u = 0`.
fn one_minus_u_cot_u(u: f64) -> f64 {
    if u.abs() < SMALL_ANGLE {
        let u2 = u * u;
        u2 / 3.0 + u2 * u2 / 45.0 + 2.0 * u2 * u2 * u2 / 945.0
    } else {
        1.0 - u / u.tan()
    }
}

/// One-dimensional free propagator `sqrt(m/2πiħt) exp(im(x−x′)²/2ħt)`.
pub fn free_kernel_1d(params: &PhysicalParams, x: f64, t: f64, xp: f64) -> Result<Complex64> {
    check_time(params, t)?;
    Ok(free_1d_unchecked(params, x - xp, t))
}

fn free_1d_unchecked(params: &PhysicalParams, d: f64, t: f64) -> Complex64 {
    let (m, h) = (params.mass, params.hbar);
    let amp = (m / (2.0 * PI * h * t)).sqrt();
    Complex64::from_polar(amp, m * d * d / (2.0 * h * t) - FRAC_PI_4)
}

/// Free propagator in the (y, z) plane.
pub fn free_transverse_kernel(params: &PhysicalParams, yz: (f64, f64), t: f64, yz_p: (f64, f64)) -> Result<Complex64> {
    check_time(params, t)?;
    let (m, h) = (params.mass, params.hbar);
    let (dy, dz) = (yz.0 - yz_p.0, yz.1 - yz_p.1);
    let amp = m / (2.0 * PI * h * t);
    Ok(Complex64::from_polar(amp, m * (dy * dy + dz * dz) / (2.0 * h * t) - FRAC_PI_2))
}

/// Propagator for `H = p²/2m + μ(t) x` at a fixed time, with the force
/// functionals evaluated once.
#[derive(Debug, Clone)]
pub struct LinearKernel {
    params: PhysicalParams,
    t: f64,
    nu: f64,
    v: f64,
    chi: f64,
}

impl LinearKernel {
    pub fn new(params: &PhysicalParams, profile: &ForceProfile, t: f64) -> Result<Self> {
        check_time(params, t)?;
        profile.validate()?;
        Ok(Self {
            params: *params,
            t,
            nu: profile.nu(t)?,
            v: profile.v_moment(t)?,
            chi: profile.chi_phase(t, params)?,
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn eval(&self, x: f64, xp: f64) -> Complex64 {
        let d = x - xp;
        let extra = (-(self.v / self.t) * d - self.nu * xp) / self.params.hbar - self.chi;
        free_1d_unchecked(&self.params, d, self.t) * Complex64::cis(extra)
    }
}

pub fn linear_longitudinal_kernel(
    params: &PhysicalParams,
    profile: &ForceProfile,
    x: f64,
    t: f64,
    xp: f64,
) -> Result<Complex64> {
    Ok(LinearKernel::new(params, profile, t)?.eval(x, xp))
}

/// Magnetic propagator (optionally with a constant force along x) at a
/// fixed time.
///
/// The kernel factorises as
/// `P · T(x, y | x′, y′) · Z(z | z′)` with `Z` the 1D free kernel; the
/// transverse pieces are exposed separately for grid convolution.
#[derive(Debug, Clone)]
pub struct MagneticKernel {
    params: PhysicalParams,
    t: f64,
    omega: f64,
    /// `mω cot(ωt) / 2ħ`
    c_a: f64,
    /// `mω / ħ`
    c_b: f64,
    /// `mω / (2πħ sin ωt)`
    transverse_amp: f64,
    mu0: f64,
    /// `(1/ω − t cot ωt) / 2ħ`
    y_coeff: f64,
    /// time-only phase from the force
    force_phase: f64,
}

impl MagneticKernel {
    pub fn new(params: &PhysicalParams, t: f64, mu0: f64) -> Result<Self> {
        check_time(params, t)?;
        let omega = params.larmor();
        if omega == 0.0 || !omega.is_finite() {
            return Err(invalid("b_field", "magnetic kernels need nonzero charge and field"));
        }
        if !mu0.is_finite() {
            return Err(invalid("mu0", "must be finite"));
        }
        let (m, h) = (params.mass, params.hbar);
        let u = omega * t;
        let s = u.sin();
        if s.abs() <= FOCAL_EPS && u.abs() > FRAC_PI_2 {
            return Err(Error::FocalSingularity { t, sin_wt: s });
        }
        let g = one_minus_u_cot_u(u);
        // g/u → u/3, so (1/ω − t cot ωt) = t g/u stays finite as ω → 0
        let y_span = if u.abs() < SMALL_ANGLE { t * g / u } else { 1.0 / omega - t * u.cos() / s };
        Ok(Self {
            params: *params,
            t,
            omega,
            c_a: m * omega * u.cos() / (2.0 * h * s),
            c_b: m * omega / h,
            transverse_amp: m * omega / (2.0 * PI * h * s),
            mu0,
            y_coeff: y_span / (2.0 * h),
            force_phase: -mu0 * mu0 * t * t * t * g / (8.0 * m * h * u * u),
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn mu0(&self) -> f64 {
        self.mu0
    }

    /// Transverse factor including its prefactor `mω/(2πiħ sin ωt)` and
    /// the time-only force phase.
    pub fn transverse(&self, x: f64, y: f64, xp: f64, yp: f64) -> Complex64 {
        let (dx, dy) = (x - xp, y - yp);
        let mut phase = self.c_a * (dx * dx + dy * dy) - self.c_b * (x * yp - xp * y) - FRAC_PI_2;
        if self.mu0 != 0.0 {
            phase += -self.mu0 * self.t * (x + xp) / (2.0 * self.params.hbar) + self.mu0 * self.y_coeff * dy + self.force_phase;
        }
        Complex64::from_polar(self.transverse_amp, phase)
    }

    pub fn longitudinal(&self, z: f64, zp: f64) -> Complex64 {
        free_1d_unchecked(&self.params, z - zp, self.t)
    }

    pub fn eval(&self, r: [f64; 3], rp: [f64; 3]) -> Complex64 {
        self.transverse(r[0], r[1], rp[0], rp[1]) * self.longitudinal(r[2], rp[2])
    }

    /// Coefficients of the factorised transverse kernel
    /// `amp · exp(i[c_a(x−x′)² + c_a(y−y′)² − c_b(x y′ − x′ y)] + i·linear(x, y, x′, y′) + i·const)`.
    pub(crate) fn coefficients(&self) -> TransverseCoefficients {
        let h = self.params.hbar;
        TransverseCoefficients {
            amp: self.transverse_amp,
            c_a: self.c_a,
            c_b: self.c_b,
            lin_x: -self.mu0 * self.t / (2.0 * h),
            lin_y: self.mu0 * self.y_coeff,
            constant: self.force_phase - FRAC_PI_2,
        }
    }
}

/// Phase coefficients of the transverse magnetic kernel; see
/// [`MagneticKernel::coefficients`]. `lin_x` multiplies `x + x′`, `lin_y`
/// multiplies `y − y′`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TransverseCoefficients {
    pub amp: f64,
    pub c_a: f64,
    pub c_b: f64,
    pub lin_x: f64,
    pub lin_y: f64,
    pub constant: f64,
}

pub fn magnetic_kernel(params: &PhysicalParams, r: [f64; 3], t: f64, rp: [f64; 3]) -> Result<Complex64> {
    Ok(MagneticKernel::new(params, t, 0.0)?.eval(r, rp))
}

/// Magnetic kernel with the extra potential `μ0 x`.
///
/// Relative to the field-only kernel it carries
/// `exp(i/ħ [−μ0 t (x+x′)/2 + (μ0/2)(1/ω − t cot ωt)(y−y′) − μ0² t (1 − ωt cot ωt)/(8mω²)])`.
pub fn magnetic_force_kernel(params: &PhysicalParams, mu0: f64, r: [f64; 3], t: f64, rp: [f64; 3]) -> Result<Complex64> {
    Ok(MagneticKernel::new(params, t, mu0)?.eval(r, rp))
}

/// `α(t) = cos(ωt) e^{−iωt}`, `β(t) = sin(ωt) e^{−iωt} / ω` and their time
/// integrals `η = ∫α`, `ξ_mag = ∫β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigFunctionals {
    pub alpha_r: f64,
    pub alpha_i: f64,
    pub beta_r: f64,
    pub beta_i: f64,
    pub eta: Complex64,
    pub xi_mag: Complex64,
}

impl TrigFunctionals {
    pub fn alpha(&self) -> Complex64 {
        Complex64::new(self.alpha_r, self.alpha_i)
    }

    pub fn beta(&self) -> Complex64 {
        Complex64::new(self.beta_r, self.beta_i)
    }
}

pub fn trig_functionals(params: &PhysicalParams, t: f64) -> Result<TrigFunctionals> {
    let w = params.larmor();
    if w == 0.0 || !w.is_finite() {
        return Err(invalid("b_field", "trigonometric functionals need a nonzero field"));
    }
    if !t.is_finite() {
        return Err(Error::Domain(format!("time must be finite, got {t}")));
    }
    let (s, c) = (w * t).sin_cos();
    let (s2, c2) = (2.0 * w * t).sin_cos();
    Ok(TrigFunctionals {
        alpha_r: c * c,
        alpha_i: -s * c,
        beta_r: c * s / w,
        beta_i: -s * s / w,
        eta: Complex64::new(t / 2.0 + s2 / (4.0 * w), (c2 - 1.0) / (4.0 * w)),
        xi_mag: Complex64::new((1.0 - c2) / (4.0 * w * w), (s2 / (2.0 * w) - t) / (2.0 * w)),
    })
}
