//! Invariant suite behind `matterwave validate` and `matterwave kernels probe`.

use anyhow::Result;
use matterwave_core::evolution::{evolve, evolve_plane_convolution, evolve_plane_split_step, EvolutionRequest, Method};
use matterwave_core::forces::ForceProfile;
use matterwave_core::kernels::{
    free_kernel_1d, free_transverse_kernel, linear_longitudinal_kernel, magnetic_force_kernel, magnetic_kernel,
    pde_residual, KernelKind, KernelSpec,
};
use matterwave_core::observables::grid_observables;
use matterwave_core::states::{
    normalize, ComplexField, LineField, sample_plane, Axis, Grid2, Grid3, HermiteGaussSpec, InitialState, LaguerreGaussSpec, PhysicalParams, PlaneField,
};

use num_complex::Complex64;

use crate::config::{OutputSpec, ScenarioConfig};
use crate::scenario::{closed_form_checks, Check};

pub const PDE_TOLERANCE: f64 = 1e-4;
/// Relative finite-difference step; see `pde_residual`.
pub const PDE_STEP: f64 = 1e-4;
pub const ORACLE_TOLERANCE: f64 = 1e-3;
pub const ORACLE_STEPS: usize = 256;

#[derive(Debug, Clone, Copy)]
pub struct SuiteOptions {
    /// Coarse grids (64² transverse) and fewer sample points.
    pub quick: bool,
}

/// Kernel kinds exercised by the probe, with the parameters they need.
pub fn probe_specs() -> Vec<(&'static str, KernelSpec)> {
    let p = PhysicalParams::natural().with_larmor(1.3);
    let kinds = [
        ("free", KernelKind::FreeTransverse2D),
        (
            "linear",
            KernelKind::LinearLongitudinal1D(ForceProfile::Sinusoidal { mu0: 2.0, period_scale: 0.5 }),
        ),
        ("magnetic", KernelKind::Magnetic3D),
        ("magnetic+force", KernelKind::MagneticWithForce3D { mu0: 1.5 }),
    ];
    kinds
        .into_iter()
        .map(|(n, k)| (n, KernelSpec::new(k, p).expect("valid probe parameters")))
        .collect()
}

/// Low-discrepancy points in `[lo, hi)`, one coordinate per golden-ratio
/// multiple.
fn sequence(i: usize, dim: usize, lo: f64, hi: f64) -> f64 {
    const G: [f64; 7] = [0.618_033_988_7, 0.414_213_562_4, 0.732_050_807_6, 0.236_067_977_5, 0.645_751_311_1, 0.316_624_790_4, 0.123_105_625_6];
    lo + (hi - lo) * ((i + 1) as f64 * G[dim % G.len()]).fract()
}

#[derive(Debug, Clone)]
pub struct ProbeRow {
    pub kind: &'static str,
    pub points: usize,
    /// Largest relative residual at step `PDE_STEP`.
    pub max_relative: f64,
    /// Same at twice the step.
    pub max_relative_coarse: f64,
    /// Median of coarse/fine residual ratios (4 for second-order differences).
    pub median_ratio: f64,
}

/// FD residuals of each kernel's Schrödinger equation at `points` samples
/// with `r, r′ ∈ [−1.5, 1.5]³` and `t ∈ [0.1, 0.45]`.
pub fn probe_kernels(points: usize) -> Result<Vec<ProbeRow>> {
    let mut rows = Vec::new();
    for (name, spec) in probe_specs() {
        let (mut fine, mut coarse, mut ratios) = (0f64, 0f64, Vec::with_capacity(points));
        for i in 0..points {
            let r = [0, 1, 2].map(|d| sequence(i, d, -1.5, 1.5));
            let rp = [3, 4, 5].map(|d| sequence(i, d, -1.5, 1.5));
            let t = sequence(i, 6, 0.1, 0.45);
            let f = pde_residual(&spec, r, t, rp, PDE_STEP)?.relative();
            let c = pde_residual(&spec, r, t, rp, 2.0 * PDE_STEP)?.relative();
            fine = fine.max(f);
            coarse = coarse.max(c);
            ratios.push(c / f);
        }
        ratios.sort_by(f64::total_cmp);
        rows.push(ProbeRow {
            kind: name,
            points,
            max_relative: fine,
            max_relative_coarse: coarse,
            median_ratio: ratios[ratios.len() / 2],
        });
    }
    Ok(rows)
}

fn pde_checks(points: usize) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for row in probe_kernels(points)? {
        out.push(Check::at_most(format!("pde_residual/{}", row.kind), None, row.max_relative, PDE_TOLERANCE));
        out.push(Check::absolute(format!("pde_refinement_ratio/{}", row.kind), None, row.median_ratio, 4.0, 1.0));
    }
    Ok(out)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

fn reduction_checks() -> Result<Vec<Check>> {
    let p = PhysicalParams::natural();
    let mut lin = 0f64;
    let mut weak = 0f64;
    let mut mu_zero = 0f64;
    let weak_p = p.with_larmor(1e-6);
    let strong_p = p.with_larmor(1.3);
    for i in 0..50 {
        let r = [0, 1, 2].map(|d| sequence(i, d, -2.0, 2.0));
        let rp = [3, 4, 5].map(|d| sequence(i, d, -2.0, 2.0));
        let t = sequence(i, 6, 0.1, 1.0);
        lin = lin.max(rel(
            linear_longitudinal_kernel(&p, &ForceProfile::Zero, r[0], t, rp[0])?,
            free_kernel_1d(&p, r[0], t, rp[0])?,
        ));
        let free3 = free_kernel_1d(&p, r[0], t, rp[0])? * free_transverse_kernel(&p, (r[1], r[2]), t, (rp[1], rp[2]))?;
        weak = weak.max(rel(magnetic_kernel(&weak_p, r, t, rp)?, free3));
        mu_zero = mu_zero.max(rel(magnetic_force_kernel(&strong_p, 0.0, r, t, rp)?, magnetic_kernel(&strong_p, r, t, rp)?));
    }
    Ok(vec![
        Check::at_most("reduction/linear_zero_force", None, lin, 1e-14),
        Check::at_most("reduction/weak_field", None, weak, 1e-4),
        Check::at_most("reduction/magnetic_zero_force", None, mu_zero, 0.0),
    ])
}

fn hg11() -> InitialState {
    InitialState::HermiteGauss(HermiteGaussSpec::new(1, 1).expect("order within range"))
}

/// Relative L2 distance between two densities on the same plane grid.
pub fn density_distance(a: &PlaneField, b: &PlaneField) -> f64 {
    let (num, den) = a
        .values
        .iter()
        .zip(&b.values)
        .fold((0.0, 0.0), |(n, d), (x, y)| (n + (x.norm_sqr() - y.norm_sqr()).powi(2), d + y.norm_sqr().powi(2)));
    (num / den).sqrt()
}

/// The five oracle cases: free, constant, sinusoidal, magnetic, magnetic plus constant force.
pub fn oracle_cases() -> Vec<(&'static str, KernelSpec)> {
    let p = PhysicalParams::natural();
    let b = p.with_larmor(2.0);
    let tau = p.tau();
    [
        ("free", KernelKind::FreeTransverse2D, p),
        ("constant", KernelKind::LinearLongitudinal1D(ForceProfile::Constant { mu0: 2.0 }), p),
        (
            "sinusoidal",
            KernelKind::LinearLongitudinal1D(ForceProfile::Sinusoidal { mu0: 2.0, period_scale: tau }),
            p,
        ),
        ("magnetic", KernelKind::Magnetic3D, b),
        ("magnetic+force", KernelKind::MagneticWithForce3D { mu0: 2.0 }, b),
    ]
    .into_iter()
    .map(|(n, k, p)| (n, KernelSpec::new(k, p).expect("valid oracle parameters")))
    .collect()
}

fn oracle_checks(n: usize) -> Result<Vec<Check>> {
    let p = PhysicalParams::natural();
    let a = Axis::symmetric(6.0, n)?;
    let g = Grid2::new(a, a);
    let src = sample_plane(&p, &hg11(), &g, 0.0).normalize()?;
    let mut out = Vec::new();
    for (name, spec) in oracle_cases() {
        for frac in [0.25, 0.5] {
            let t = frac * p.tau();
            let conv = evolve_plane_convolution(&spec, t, &src, &g)?;
            let split = evolve_plane_split_step(&spec, t, ORACLE_STEPS, &src)?;
            out.push(Check::at_most(format!("oracle/{name}"), Some(t), density_distance(&conv, &split), ORACLE_TOLERANCE));
        }
    }
    Ok(out)
}

fn scenario(name: &str, state: InitialState, force: ForceProfile, larmor: Option<f64>, n: usize) -> Result<ScenarioConfig> {
    let mut params = PhysicalParams::natural();
    if let Some(w) = larmor {
        params = params.with_larmor(w);
    }
    let t = Axis::symmetric(6.0, n)?;
    Ok(ScenarioConfig {
        name: name.into(),
        params,
        state,
        force,
        magnetic: larmor.is_some(),
        times: [0.25, 0.5, 1.0].map(|f| f * params.tau()).to_vec(),
        grid: Grid3::new(t, t, Axis::symmetric(4.0, 64)?),
        method: Method::KernelConvolution,
        outputs: vec![OutputSpec::ValidationReport],
    })
}

fn observable_checks(n: usize) -> Result<Vec<Check>> {
    let cases = [
        scenario("constant", hg11(), ForceProfile::Constant { mu0: 2.0 }, None, n)?,
        scenario("sinusoidal", hg11(), ForceProfile::Sinusoidal { mu0: 2.0, period_scale: 0.5 }, None, n)?,
        scenario("magnetic+force", hg11(), ForceProfile::Constant { mu0: 2.0 }, Some(2.0), n)?,
    ];
    let mut out = lg_oam_checks(n)?;
    for cfg in cases {
        let spec = cfg.kernel()?;
        for &t in &cfg.times {
            let req = EvolutionRequest::new(cfg.state, spec.clone(), t, cfg.grid, cfg.method);
            let field = normalize(evolve(&req)?.field)?;
            let report = grid_observables(&field, &cfg.params, t)?;
            for mut c in closed_form_checks(&cfg, &spec, &report)? {
                c.check = format!("observables/{}/{}", cfg.name, c.check);
                out.push(c);
            }
        }
    }
    Ok(out)
}

/// `⟨l_z⟩` of a freely evolved LG(2, 0) beam. The mode has no z envelope,
/// so only the transverse plane is evolved and then extended uniformly
/// over two z nodes.
fn lg_oam_checks(n: usize) -> Result<Vec<Check>> {
    let p = PhysicalParams::natural();
    let state = InitialState::LaguerreGauss(LaguerreGaussSpec::new(2, 0, p.beam_waist, 1e6)?);
    let spec = KernelSpec::new(KernelKind::FreeTransverse2D, p)?;
    let a = Axis::symmetric(6.0, n)?;
    let g = Grid2::new(a, a);
    let src = sample_plane(&p, &state, &g, 0.0).normalize()?;
    let z = Axis::new(0.0, 1.0, 2)?;
    let line = LineField::from_fn(z, |_| Complex64::new(1.0, 0.0));
    let mut out = Vec::new();
    for t in [0.25, 0.5, 1.0].map(|f| f * p.tau()) {
        let plane = evolve_plane_convolution(&spec, t, &src, &g)?;
        let field = normalize(ComplexField::from_factors(&plane, &line))?;
        let r = grid_observables(&field, &p, t)?;
        out.push(Check::absolute("observables/laguerre/oam_z", Some(t), r.oam[2], 2.0 * p.hbar, 1e-3 * p.hbar));
    }
    Ok(out)
}

/// Run every check, handing each group to `emit` as soon as it finishes.
pub fn run_suite(opts: SuiteOptions, mut emit: impl FnMut(&Check)) -> Result<Vec<Check>> {
    let (points, oracle_n, obs_n) = if opts.quick { (12, 64, 48) } else { (50, 128, 64) };
    let groups: [&dyn Fn() -> Result<Vec<Check>>; 4] = [
        &|| pde_checks(points),
        &reduction_checks,
        &|| oracle_checks(oracle_n),
        &|| observable_checks(obs_n),
    ];
    let mut all = Vec::new();
    for g in groups {
        for c in g()? {
            emit(&c);
            all.push(c);
        }
    }
    Ok(all)
}
