//! Acceptance checks. One line per criterion; details follow indented.
//!
//! Moments, finite differences and distances are computed here from raw
//! fields rather than through the library's observable code.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use matterwave_core::evolution::{
    compare_closed_form, density_slice, evolve, evolve_line_convolution, evolve_plane_convolution, evolve_plane_split_step,
    ClosedFormVariant, EvolutionRequest, Method, SliceAxis,
};
use matterwave_core::forces::{ForceProfile, ForceTable};
use matterwave_core::kernels::{KernelKind, KernelSpec};
use matterwave_core::observables::{
    inertia_com, inertia_lab, magnetic_trajectory, oam_expectation, oam_y_plus_convention, parallel_axis, trajectory,
    uncertainties_hg11,
};
use matterwave_core::states::{
    sample_field, sample_plane, Axis, ComplexField, Grid2, Grid3, HermiteGaussSpec, InitialState, LaguerreGaussSpec,
    LineField, PhysicalParams, PlaneField,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;

const SEED: u64 = 20_240_611;
/// Criteria that fail by construction; see the project notes.
const KNOWN_RED: [u32; 2] = [6, 11];

type Tensor = [[f64; 3]; 3];

struct Outcome {
    id: u32,
    pass: bool,
    summary: String,
    details: Vec<String>,
}

impl Outcome {
    fn print(&self) {
        let flag = if self.pass { "PASS" } else { "FAIL" };
        let note = if !self.pass && KNOWN_RED.contains(&self.id) { " (known)" } else { "" };
        println!("criterion {:>2} {flag}{note}  {}", self.id, self.summary);
        for d in &self.details {
            println!("      {d}");
        }
    }
}

fn hg11() -> InitialState {
    InitialState::HermiteGauss(HermiteGaussSpec::new(1, 1).unwrap())
}

fn spec(kind: KernelKind, params: PhysicalParams) -> KernelSpec {
    KernelSpec::new(kind, params).unwrap()
}

fn max_rel(tensor: &Tensor, reference: &Tensor) -> f64 {
    let scale = reference.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut worst = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            let floor = reference[i][j].abs().max(1e-3 * scale);
            worst = worst.max((tensor[i][j] - reference[i][j]).abs() / floor);
        }
    }
    worst
}

// ---------------------------------------------------------------- moments

struct Moments {
    mean: [f64; 3],
    /// `⟨x_i x_j⟩`
    second: Tensor,
    p_mean: [f64; 3],
    p2: [f64; 3],
    /// `Re ⟨x_i p_j⟩`
    xp: Tensor,
}

impl Moments {
    fn delta_x(&self, i: usize) -> f64 {
        (self.second[i][i] - self.mean[i].powi(2)).sqrt()
    }

    fn delta_p(&self, i: usize) -> f64 {
        (self.p2[i] - self.p_mean[i].powi(2)).sqrt()
    }

    fn oam(&self) -> [f64; 3] {
        let c = &self.xp;
        [c[1][2] - c[2][1], c[2][0] - c[0][2], c[0][1] - c[1][0]]
    }

    fn inertia(&self, mass: f64, central: bool) -> Tensor {
        let mut s = self.second;
        if central {
            for (i, row) in s.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v -= self.mean[i] * self.mean[j];
                }
            }
        }
        let tr = s[0][0] + s[1][1] + s[2][2];
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = mass * (if i == j { tr } else { 0.0 } - s[i][j]);
            }
        }
        out
    }
}

fn derivative(field: &ComplexField, axis: usize) -> Vec<Complex64> {
    let g = field.grid();
    let dims = g.dims();
    let n = dims[axis];
    let h = g.axis(axis).spacing();
    let mut out = vec![Complex64::new(0.0, 0.0); field.values().len()];
    if n < 3 {
        return out;
    }
    let fft = FftPlanner::new().plan_fft_forward(n);
    let ifft = FftPlanner::new().plan_fft_inverse(n);
    let k: Vec<f64> = (0..n)
        .map(|j| {
            if 2 * j == n {
                0.0
            } else {
                let s = if 2 * j < n { j as f64 } else { j as f64 - n as f64 };
                2.0 * PI * s / (n as f64 * h)
            }
        })
        .collect();
    let others: Vec<usize> = (0..3).filter(|&a| a != axis).collect();
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for a in 0..dims[others[0]] {
        for b in 0..dims[others[1]] {
            let at = |s: usize| {
                let mut idx = [0; 3];
                idx[axis] = s;
                idx[others[0]] = a;
                idx[others[1]] = b;
                g.index(idx[0], idx[1], idx[2])
            };
            for (s, v) in line.iter_mut().enumerate() {
                *v = field.values()[at(s)];
            }
            fft.process(&mut line);
            for (v, kj) in line.iter_mut().zip(&k) {
                *v *= Complex64::new(0.0, *kj / n as f64);
            }
            ifft.process(&mut line);
            for (s, v) in line.iter().enumerate() {
                out[at(s)] = *v;
            }
        }
    }
    out
}

fn moments(field: &ComplexField, hbar: f64) -> Moments {
    let g = field.grid();
    let [nx, ny, nz] = g.dims();
    let nodes = [g.x.nodes(), g.y.nodes(), g.z.nodes()];
    let d: Vec<Vec<Complex64>> = (0..3).map(|a| derivative(field, a)).collect();
    let mut total = 0.0;
    let mut m = Moments {
        mean: [0.0; 3],
        second: [[0.0; 3]; 3],
        p_mean: [0.0; 3],
        p2: [0.0; 3],
        xp: [[0.0; 3]; 3],
    };
    for ix in 0..nx {
        for iy in 0..ny {
            for iz in 0..nz {
                let idx = g.index(ix, iy, iz);
                let psi = field.values()[idx];
                let rho = psi.norm_sqr();
                let r = [nodes[0][ix], nodes[1][iy], nodes[2][iz]];
                total += rho;
                for i in 0..3 {
                    m.mean[i] += rho * r[i];
                    let p = psi.conj() * Complex64::new(0.0, -hbar) * d[i][idx];
                    m.p_mean[i] += p.re;
                    m.p2[i] += hbar * hbar * d[i][idx].norm_sqr();
                    for j in 0..3 {
                        m.second[i][j] += rho * r[i] * r[j];
                        let pj = psi.conj() * Complex64::new(0.0, -hbar) * d[j][idx];
                        m.xp[i][j] += r[i] * pj.re;
                    }
                }
            }
        }
    }
    for i in 0..3 {
        m.mean[i] /= total;
        m.p_mean[i] /= total;
        m.p2[i] /= total;
        for j in 0..3 {
            m.second[i][j] /= total;
            m.xp[i][j] /= total;
        }
    }
    m
}

fn density_distance(a: &PlaneField, b: &PlaneField) -> f64 {
    let (num, den) = a
        .values
        .iter()
        .zip(&b.values)
        .fold((0.0, 0.0), |(n, d), (x, y)| (n + (x.norm_sqr() - y.norm_sqr()).powi(2), d + y.norm_sqr().powi(2)));
    (num / den).sqrt()
}

// ------------------------------------------------------- shared 3D runs

struct Case {
    name: &'static str,
    profile: ForceProfile,
    spec: KernelSpec,
}

struct Run {
    case: usize,
    t: f64,
    field: ComplexField,
    m: Moments,
}

fn cases() -> Vec<Case> {
    let p = PhysicalParams::natural();
    let tau = p.tau();
    let lin = |profile: ForceProfile| spec(KernelKind::LinearLongitudinal1D(profile), p);
    vec![
        Case { name: "zero", profile: ForceProfile::Zero, spec: spec(KernelKind::FreeTransverse2D, p) },
        Case {
            name: "constant",
            profile: ForceProfile::Constant { mu0: 2.0 },
            spec: lin(ForceProfile::Constant { mu0: 2.0 }),
        },
        Case {
            name: "sinusoidal",
            profile: ForceProfile::Sinusoidal { mu0: 2.0, period_scale: tau },
            spec: lin(ForceProfile::Sinusoidal { mu0: 2.0, period_scale: tau }),
        },
        Case {
            name: "magnetic+force",
            profile: ForceProfile::Constant { mu0: 2.0 },
            spec: spec(KernelKind::MagneticWithForce3D { mu0: 2.0 }, p.with_larmor(2.0)),
        },
    ]
}

fn times() -> [f64; 3] {
    [0.25, 0.5, 1.0].map(|f| f * PhysicalParams::natural().tau())
}

fn source_grid() -> Grid3 {
    let t = Axis::symmetric(6.0, 64).unwrap();
    Grid3::new(t, t, Axis::symmetric(4.0, 64).unwrap())
}

fn runs(cases: &[Case]) -> Vec<Run> {
    let mut out = Vec::new();
    for (ci, c) in cases.iter().enumerate() {
        for t in times() {
            let req = EvolutionRequest::new(hg11(), c.spec.clone(), t, source_grid(), Method::KernelConvolution);
            let field = evolve(&req).unwrap().field;
            let m = moments(&field, c.spec.params.hbar);
            out.push(Run { case: ci, t, field, m });
        }
    }
    out
}

// ------------------------------------------------------------- criteria

struct Residual {
    relative: f64,
}

fn fd_residual(spec: &KernelSpec, r: [f64; 3], t: f64, rp: [f64; 3], h: f64) -> Residual {
    let p = &spec.params;
    let dt = h * t;
    let dx = h * (p.hbar * t / p.mass).sqrt();
    let k = |r: [f64; 3], t: f64| spec.eval_3d(r, t, rp).unwrap();
    let k0 = k(r, t);
    let dkdt = (k(r, t + dt) - k(r, t - dt)) / (2.0 * dt);
    let mut lap = Complex64::new(0.0, 0.0);
    let mut grad = [Complex64::new(0.0, 0.0); 3];
    for a in 0..3 {
        let (mut up, mut dn) = (r, r);
        up[a] += dx;
        dn[a] -= dx;
        let (ku, kd) = (k(up, t), k(dn, t));
        lap += (ku - 2.0 * k0 + kd) / (dx * dx);
        grad[a] = (ku - kd) / (2.0 * dx);
    }
    let w = p.larmor();
    let mu = match &spec.kind {
        KernelKind::LinearLongitudinal1D(f) => f.mu(t).unwrap(),
        KernelKind::MagneticWithForce3D { mu0 } => *mu0,
        _ => 0.0,
    };
    let i = Complex64::i();
    let lhs = i * p.hbar * dkdt;
    let kinetic = -p.hbar * p.hbar / (2.0 * p.mass) * lap;
    let rotation = i * p.hbar * w * (r[0] * grad[1] - r[1] * grad[0]);
    let potential = (0.5 * p.mass * w * w * (r[0] * r[0] + r[1] * r[1]) + mu * r[0]) * k0;
    let res = lhs - kinetic - rotation - potential;
    let scale = lhs.norm() + kinetic.norm() + rotation.norm() + potential.norm();
    Residual { relative: res.norm() / scale }
}

fn probe_specs() -> Vec<(&'static str, KernelSpec)> {
    let p = PhysicalParams::natural();
    vec![
        ("free", spec(KernelKind::FreeTransverse2D, p)),
        (
            "linear",
            spec(KernelKind::LinearLongitudinal1D(ForceProfile::Sinusoidal { mu0: 2.0, period_scale: 0.5 }), p),
        ),
        ("magnetic", spec(KernelKind::Magnetic3D, p.with_larmor(1.3))),
        ("magnetic+force", spec(KernelKind::MagneticWithForce3D { mu0: 1.5 }, p.with_larmor(1.3))),
    ]
}

fn random_point(rng: &mut ChaCha8Rng) -> ([f64; 3], f64, [f64; 3]) {
    let mut v = || [0; 3].map(|_| rng.gen_range(-1.5..1.5));
    let (r, rp) = (v(), v());
    (r, rng.gen_range(0.1..0.45), rp)
}

fn criterion_1() -> Outcome {
    const POINTS: usize = 50;
    const H: f64 = 1e-4;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut pass = true;
    let mut details = Vec::new();
    let mut worst = 0.0f64;
    for (name, s) in probe_specs() {
        let mut fine_max = 0.0f64;
        let mut ratios = Vec::new();
        for _ in 0..POINTS {
            let (r, t, rp) = random_point(&mut rng);
            let fine = fd_residual(&s, r, t, rp, H).relative;
            let coarse = fd_residual(&s, r, t, rp, 2.0 * H).relative;
            fine_max = fine_max.max(fine);
            ratios.push(coarse / fine);
        }
        ratios.sort_by(f64::total_cmp);
        let median = ratios[POINTS / 2];
        let ok = fine_max < 1e-4 && (3.0..5.0).contains(&median);
        pass &= ok;
        worst = worst.max(fine_max);
        details.push(format!("{name:<15} max rel {fine_max:.2e}  median ratio(2h/h) {median:.2}"));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 10.0;
    Outcome {
        id: 1,
        pass,
        summary: format!("kernel PDE residual max {worst:.2e} < 1e-4 at {POINTS} points/kernel, {secs:.2} s"),
        details,
    }
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let p = PhysicalParams::natural();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let free = spec(KernelKind::FreeTransverse2D, p);
    let lin0 = spec(KernelKind::LinearLongitudinal1D(ForceProfile::Zero), p);
    let weak = spec(KernelKind::Magnetic3D, p.with_larmor(1e-6));
    let mag = spec(KernelKind::Magnetic3D, p.with_larmor(1.3));
    let mag0 = spec(KernelKind::MagneticWithForce3D { mu0: 0.0 }, p.with_larmor(1.3));
    let (mut a, mut b, mut c) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..50 {
        let (r, t, rp) = random_point(&mut rng);
        let kf = free.eval_3d(r, t, rp).unwrap();
        a = a.max((lin0.eval_3d(r, t, rp).unwrap() - kf).norm() / kf.norm());
        b = b.max((weak.eval_3d(r, t, rp).unwrap() - kf).norm() / kf.norm());
        let km = mag.eval_3d(r, t, rp).unwrap();
        c = c.max((mag0.eval_3d(r, t, rp).unwrap() - km).norm() / km.norm());
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        id: 2,
        pass: a <= 1e-14 && b <= 1e-4 && c == 0.0 && secs < 1.0,
        summary: format!("reductions {secs:.3} s"),
        details: vec![
            format!("linear(zero) vs free   max rel {a:.1e} (<= 1e-14)"),
            format!("magnetic(1e-6) vs free max rel {b:.1e} (<= 1e-4)"),
            format!("magnetic+force(0) vs magnetic max rel {c:.1e} (exact)"),
        ],
    }
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let p = PhysicalParams::natural();
    let tau = p.tau();
    let a = Axis::symmetric(6.0, 128).unwrap();
    let g = Grid2::new(a, a);
    let src = sample_plane(&p, &hg11(), &g, 0.0).normalize().unwrap();
    let lin = |f: ForceProfile| spec(KernelKind::LinearLongitudinal1D(f), p);
    let cases = [
        ("zero", spec(KernelKind::FreeTransverse2D, p)),
        ("constant", lin(ForceProfile::Constant { mu0: 2.0 })),
        ("sinusoidal", lin(ForceProfile::Sinusoidal { mu0: 2.0, period_scale: tau })),
        ("magnetic", spec(KernelKind::Magnetic3D, p.with_larmor(2.0))),
        ("magnetic+force", spec(KernelKind::MagneticWithForce3D { mu0: 2.0 }, p.with_larmor(2.0))),
    ];
    let mut pass = true;
    let mut worst = 0.0f64;
    let mut details = Vec::new();
    for (name, s) in cases {
        let mut line = format!("{name:<15}");
        for frac in [0.25, 0.5] {
            let t = frac * tau;
            let conv = evolve_plane_convolution(&s, t, &src, &g).unwrap();
            let split = evolve_plane_split_step(&s, t, 256, &src).unwrap();
            let d = density_distance(&conv, &split);
            pass &= d < 1e-3;
            worst = worst.max(d);
            line += &format!("  t={frac}τ {d:.2e}");
        }
        details.push(line);
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 120.0;
    Outcome {
        id: 3,
        pass,
        summary: format!("convolution vs split-step density L2 max {worst:.2e} < 1e-3, {secs:.1} s"),
        details,
    }
}

fn expected_centroid(c: &Case, t: f64) -> [f64; 3] {
    match c.spec.kind {
        KernelKind::MagneticWithForce3D { mu0 } => magnetic_trajectory(&c.spec.params, mu0, t).unwrap(),
        _ => trajectory(&c.spec.params, &c.profile, t).unwrap(),
    }
}

fn criterion_4(cases: &[Case], runs: &[Run]) -> Outcome {
    let tol = 1e-3 * PhysicalParams::natural().beam_waist;
    let mut worst = 0.0f64;
    let mut details = Vec::new();
    for r in runs {
        let c = &cases[r.case];
        let e = expected_centroid(c, r.t);
        let err = (0..3).map(|i| (r.m.mean[i] - e[i]).abs()).fold(0.0, f64::max);
        worst = worst.max(err);
        details.push(format!(
            "{:<15} t={:.3}  grid ({:+.5}, {:+.5}, {:+.5})  closed ({:+.5}, {:+.5}, {:+.5})  err {err:.1e}",
            c.name, r.t, r.m.mean[0], r.m.mean[1], r.m.mean[2], e[0], e[1], e[2]
        ));
    }
    Outcome {
        id: 4,
        pass: worst <= tol,
        summary: format!("centroid error max {worst:.2e} <= {tol:.0e}"),
        details,
    }
}

fn non_magnetic<'a>(cases: &'a [Case], runs: &'a [Run]) -> impl Iterator<Item = (&'a Case, &'a Run)> {
    runs.iter().map(|r| (&cases[r.case], r)).filter(|(c, _)| !c.spec.is_magnetic())
}

fn criterion_5(cases: &[Case], runs: &[Run]) -> Outcome {
    let mut worst = 0.0f64;
    let mut details = Vec::new();
    for (c, r) in non_magnetic(cases, runs) {
        let (dx, dp) = uncertainties_hg11(&c.spec.params, &c.profile, r.t).unwrap();
        let ex = (r.m.delta_x(0) - dx).abs() / dx;
        let ep = (r.m.delta_p(0) - dp).abs() / dp;
        worst = worst.max(ex).max(ep);
        details.push(format!(
            "{:<15} t={:.3}  dx {:.6} vs {:.6}  dp {:.6} vs {:.6}",
            c.name,
            r.t,
            r.m.delta_x(0),
            dx,
            r.m.delta_p(0),
            dp
        ));
    }
    Outcome {
        id: 5,
        pass: worst <= 1e-3,
        summary: format!("uncertainty relative error max {worst:.2e} <= 1e-3"),
        details,
    }
}

fn criterion_6(cases: &[Case], runs: &[Run]) -> Outcome {
    let p = PhysicalParams::natural();
    let mut details = Vec::new();
    let (mut printed, mut corrected) = (0.0f64, 0.0f64);
    let mut lx = 0.0f64;
    let initial = moments(&sample_field(&p, &hg11(), &source_grid()), p.hbar).oam()[0];
    for (c, r) in non_magnetic(cases, runs) {
        let l = r.m.oam();
        lx = lx.max((l[0] - initial).abs());
        if matches!(c.profile, ForceProfile::Zero) {
            continue;
        }
        let plus = oam_y_plus_convention(&c.spec.params, &c.profile, r.t).unwrap();
        let minus = oam_expectation(&c.spec.params, &c.profile, r.t).unwrap()[1];
        printed = printed.max((l[1] - plus).abs() / plus.abs());
        corrected = corrected.max((l[1] - minus).abs() / minus.abs());
        details.push(format!(
            "{:<15} t={:.3}  grid l_y {:+.6}  (xi+t nu) {:+.6}  (xi-t nu) {:+.6}",
            c.name, r.t, l[1], plus, minus
        ));
    }

    let w0 = p.beam_waist;
    let lg = InitialState::LaguerreGauss(LaguerreGaussSpec::new(2, 0, w0, 1e6).unwrap());
    let free = spec(KernelKind::FreeTransverse2D, p);
    let a = Axis::symmetric(6.0, 64).unwrap();
    let g = Grid2::new(a, a);
    let src = sample_plane(&p, &lg, &g, 0.0).normalize().unwrap();
    let z = LineField::from_fn(Axis::new(0.0, 1.0, 2).unwrap(), |_| Complex64::new(1.0, 0.0));
    let mut lz = (moments(&ComplexField::from_factors(&src, &z), p.hbar).oam()[2] - 2.0 * p.hbar).abs();
    for t in times() {
        let plane = evolve_plane_convolution(&free, t, &src, &g).unwrap();
        let l = moments(&ComplexField::from_factors(&plane, &z), p.hbar).oam()[2];
        lz = lz.max((l - 2.0 * p.hbar).abs());
    }
    details.push(format!("l_y vs (xi + t nu): max rel {printed:.2e} (<= 1e-3)"));
    details.push(format!("l_y vs (xi - t nu): max rel {corrected:.2e} (<= 1e-3), reported only"));
    details.push(format!("l_x drift {lx:.1e} (<= 1e-6), LG(2,0) l_z error {lz:.1e} (<= 1e-3)"));
    let pass = printed <= 1e-3 && lx <= 1e-6 * p.hbar && lz <= 1e-3 * p.hbar;
    Outcome {
        id: 6,
        pass,
        summary: format!("orbital angular momentum: l_y rel {printed:.2e}, l_x drift {lx:.1e}, l_z err {lz:.1e}"),
        details,
    }
}

fn criterion_7(cases: &[Case], runs: &[Run]) -> Outcome {
    let mut details = Vec::new();
    let (mut lab, mut com, mut sym, mut indep, mut axis) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (c, r) in non_magnetic(cases, runs) {
        let p = &c.spec.params;
        let lab_closed = inertia_lab(p, &c.profile, r.t).unwrap();
        let com_closed = inertia_com(p, r.t);
        let lab_grid = r.m.inertia(p.mass, false);
        let com_grid = r.m.inertia(p.mass, true);
        let (el, ec) = (max_rel(&lab_grid, &lab_closed), max_rel(&com_grid, &com_closed));
        lab = lab.max(el);
        com = com.max(ec);
        sym = sym.max((com_grid[0][0] - com_grid[1][1]).abs() / com_grid[0][0]);
        if com_closed[0][0] != com_closed[1][1] {
            sym = f64::INFINITY;
        }
        let shift = parallel_axis(p.mass, trajectory(p, &c.profile, r.t).unwrap());
        let mut sum = com_closed;
        for i in 0..3 {
            for j in 0..3 {
                sum[i][j] += shift[i][j];
            }
        }
        axis = axis.max(max_rel(&sum, &lab_closed));
        details.push(format!("{:<15} t={:.3}  lab rel {el:.2e}  com rel {ec:.2e}", c.name, r.t));
    }
    for t in times() {
        let at_t: Vec<Tensor> = non_magnetic(cases, runs)
            .filter(|(_, r)| r.t == t)
            .map(|(c, r)| r.m.inertia(c.spec.params.mass, true))
            .collect();
        for tensor in &at_t[1..] {
            indep = indep.max(max_rel(tensor, &at_t[0]));
        }
    }
    details.push(format!("I_xx^c = I_yy^c rel {sym:.1e}; force independence rel {indep:.1e}; parallel axis {axis:.1e}"));
    Outcome {
        id: 7,
        pass: lab <= 1e-3 && com <= 1e-3 && sym <= 1e-3 && indep <= 1e-3 && axis <= 1e-10,
        summary: format!("inertia tensors lab rel {lab:.2e}, com rel {com:.2e}"),
        details,
    }
}

fn lobe_angle(plane: &PlaneField) -> f64 {
    let (xs, ys) = (plane.grid.x.nodes(), plane.grid.y.nodes());
    let ny = ys.len();
    let rho: Vec<f64> = plane.values.iter().map(|v| v.norm_sqr()).collect();
    let total: f64 = rho.iter().sum();
    let cx = rho.iter().enumerate().map(|(i, d)| d * xs[i / ny]).sum::<f64>() / total;
    let cy = rho.iter().enumerate().map(|(i, d)| d * ys[i % ny]).sum::<f64>() / total;
    let s: Complex64 = rho.iter().enumerate().map(|(i, d)| Complex64::new(xs[i / ny] - cx, ys[i % ny] - cy).powu(4) * d).sum();
    s.arg() / 4.0
}

fn criterion_8() -> Outcome {
    let base = PhysicalParams::natural();
    let p = base.with_larmor(2.0);
    let w = p.larmor();
    let s = spec(KernelKind::Magnetic3D, p);
    let a = Axis::symmetric(6.0, 64).unwrap();
    let g = Grid2::new(a, a);
    let src = sample_plane(&p, &hg11(), &g, 0.0).normalize().unwrap();
    let theta0 = lobe_angle(&src);
    let mut worst = 0.0f64;
    let mut details = Vec::new();
    for k in 1..=8 {
        let t = 0.05 * k as f64 * p.tau();
        let plane = evolve_plane_convolution(&s, t, &src, &g).unwrap();
        let turned = lobe_angle(&plane) - theta0;
        let err = (turned + w * t + FRAC_PI_2 / 2.0).rem_euclid(FRAC_PI_2) - FRAC_PI_2 / 2.0;
        worst = worst.max(err.abs());
        details.push(format!("t={t:.3}  turned {turned:+.5} rad  expected {:+.5}", -w * t));
    }
    Outcome {
        id: 8,
        pass: worst <= 1e-2,
        summary: format!("four-lobe pattern rotates at rate omega, max angle error {worst:.1e} rad <= 1e-2"),
        details,
    }
}

fn criterion_9() -> Outcome {
    let p = PhysicalParams::natural();
    let axis = Axis::symmetric(12.0, 512).unwrap();
    let w0 = p.beam_waist;
    let psi0 = LineField::from_fn(axis, |x| Complex64::new(x * (-x * x / (w0 * w0)).exp(), 0.0));
    let kernels = [
        ("free", spec(KernelKind::FreeTransverse2D, p)),
        ("linear", spec(KernelKind::LinearLongitudinal1D(ForceProfile::Constant { mu0: 2.0 }), p)),
    ];
    let mut worst = 0.0f64;
    let mut details = Vec::new();
    for (name, s) in &kernels {
        for (t1, t2) in [(0.2, 0.3), (0.1, 0.4)] {
            let direct = evolve_line_convolution(s, t1 + t2, &psi0, axis).unwrap();
            let half = evolve_line_convolution(s, t1, &psi0, axis).unwrap();
            let composed = evolve_line_convolution(s, t2, &half, axis).unwrap();
            let (num, den) = direct
                .values
                .iter()
                .zip(&composed.values)
                .fold((0.0, 0.0), |(n, d), (a, b)| (n + (a - b).norm_sqr(), d + a.norm_sqr()));
            let e = (num / den).sqrt();
            worst = worst.max(e);
            details.push(format!("{name:<7} t1={t1} t2={t2}  relative L2 {e:.2e}"));
        }
    }
    Outcome {
        id: 9,
        pass: worst <= 1e-6,
        summary: format!("semigroup composition max relative L2 {worst:.2e} <= 1e-6"),
        details,
    }
}

fn criterion_10() -> Outcome {
    let table = ForceTable::new((0..=12).map(|i| (0.25 * i as f64, (1.3 * i as f64).sin() + 0.4)).collect()).unwrap();
    let profiles = [
        ("zero", ForceProfile::Zero),
        ("constant", ForceProfile::Constant { mu0: 2.0 }),
        ("sinusoidal", ForceProfile::Sinusoidal { mu0: 2.0, period_scale: 0.5 }),
        ("tabulated", ForceProfile::Tabulated(table)),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 10);
    let mut worst = 0.0f64;
    let mut details = Vec::new();
    for (name, f) in &profiles {
        let mut local = 0.0f64;
        for _ in 0..100 {
            let t = rng.gen_range(0.0..3.0);
            let (nu, xi, v) = (f.nu(t).unwrap(), f.xi(t).unwrap(), f.v_moment(t).unwrap());
            let scale = v.abs().max((t * nu).abs()).max(xi.abs());
            let diff = (v - (t * nu - xi)).abs();
            local = local.max(if scale == 0.0 { diff } else { diff / scale });
        }
        worst = worst.max(local);
        details.push(format!("{name:<10} max rel {local:.1e}"));
    }
    Outcome {
        id: 10,
        pass: worst <= 1e-8,
        summary: format!("v = t nu - xi at 100 random times, max rel {worst:.1e} <= 1e-8"),
        details,
    }
}

fn criterion_11(cases: &[Case], runs: &[Run]) -> Outcome {
    let hg = HermiteGaussSpec::new(1, 1).unwrap();
    let w0 = PhysicalParams::natural().beam_waist;
    let mut details = Vec::new();
    let mut verdict = |variant: ClosedFormVariant| {
        let mut ok = true;
        let (mut ce, mut we) = (0.0f64, 0.0f64);
        for (c, r) in non_magnetic(cases, runs) {
            let p = &c.spec.params;
            let slice = density_slice(&r.field, SliceAxis::Z, r.m.mean[2]).unwrap();
            let cmp = compare_closed_form(p, &c.profile, &hg, r.t, variant, &slice).unwrap();
            let width = (cmp.widths[0] - cmp.reference_widths[0]).abs() / cmp.reference_widths[0];
            ok &= cmp.centroid_error() <= 1e-3 * w0 && width <= 1e-2;
            ce = ce.max(cmp.centroid_error());
            we = we.max(width);
            details.push(format!(
                "{variant:?} {:<11} t={:.3}  x {:+.5} vs {:+.5}  dx {:.5} vs {:.5}  pointwise L2 {:.2e}",
                c.name, r.t, cmp.centroid[0], cmp.reference_centroid[0], cmp.widths[0], cmp.reference_widths[0], cmp.relative_l2
            ));
        }
        (ok, ce, we)
    };
    let (printed, pc, pw) = verdict(ClosedFormVariant::AsPrinted);
    let (corrected, cc, cw) = verdict(ClosedFormVariant::ForceSignCorrected);
    details.push(format!("as printed:   centroid err {pc:.2e}, width rel {pw:.2e}"));
    details.push(format!(
        "sign-corrected: centroid err {cc:.2e}, width rel {cw:.2e} ({}), reported only",
        if corrected { "agrees" } else { "disagrees" }
    ));
    Outcome {
        id: 11,
        pass: printed,
        summary: format!("closed-form state vs convolution: centroid err {pc:.2e} <= 1e-3, dx rel {pw:.2e} <= 1e-2"),
        details,
    }
}

fn main() {
    let start = Instant::now();
    let mut outcomes = vec![criterion_1(), criterion_2(), criterion_3()];
    let cases = cases();
    let runs = runs(&cases);
    outcomes.push(criterion_4(&cases, &runs));
    outcomes.push(criterion_5(&cases, &runs));
    outcomes.push(criterion_6(&cases, &runs));
    outcomes.push(criterion_7(&cases, &runs));
    outcomes.push(criterion_8());
    outcomes.push(criterion_9());
    outcomes.push(criterion_10());
    outcomes.push(criterion_11(&cases, &runs));
    outcomes.sort_by_key(|o| o.id);
    for o in &outcomes {
        o.print();
    }
    let unexpected: Vec<u32> = outcomes.iter().filter(|o| !o.pass && !KNOWN_RED.contains(&o.id)).map(|o| o.id).collect();
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!(
        "acceptance: {passed}/{} passed, {:.1} s; unexpected failures: {unexpected:?}",
        outcomes.len(),
        start.elapsed().as_secs_f64()
    );
    if !unexpected.is_empty() {
        std::process::exit(1);
    }
}
