//! Expectation values: closed forms for the HG(1,1) packet and grid
//! quadrature for any sampled field.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::forces::ForceProfile;
use crate::numerics::spectral_derivative;
use crate::states::{ComplexField, PhysicalParams};

/// Largest `|‖ψ‖ − 1|` accepted by [`grid_observables`].
pub const NORM_TOLERANCE: f64 = 1e-6;

pub type Tensor3 = [[f64; 3]; 3];

/// Packet centroid under the force `μ(t) x`: `(−ξ/m, 0, ħk₀t/m)`.
pub fn trajectory(params: &PhysicalParams, profile: &ForceProfile, t: f64) -> Result<[f64; 3]> {
    Ok([-profile.xi(t)? / params.mass, 0.0, drift_z(params, t)])
}

fn drift_z(params: &PhysicalParams, t: f64) -> f64 {
    params.hbar * params.k0 * t / params.mass
}

/// `(Δx, Δp_x)` of the HG(1,1) packet. Neither depends on the force.
pub fn uncertainties_hg11(params: &PhysicalParams, profile: &ForceProfile, t: f64) -> Result<(f64, f64)> {
    profile.nu(t)?;
    let (m, h, w) = (params.mass, params.hbar, params.beam_waist);
    let dx = (0.75 * w * w + 3.0 * h * h * t * t / (m * m * w * w)).sqrt();
    Ok((dx, 3f64.sqrt() * h / w))
}

/// `⟨l⟩` of a Hermite-Gauss packet launched along z.
///
/// `⟨l_y⟩ = ⟨z p_x − x p_z⟩ = (ħk₀/m)(ξ − tν)`; the other components vanish.
pub fn oam_expectation(params: &PhysicalParams, profile: &ForceProfile, t: f64) -> Result<[f64; 3]> {
    let c = params.hbar * params.k0 / params.mass;
    Ok([0.0, c * (profile.xi(t)? - t * profile.nu(t)?), 0.0])
}

/// `(ħk₀/m)(ξ + tν)`, the alternative sign of the `ν` term. Kept for
/// comparison only; it does not match the evolved packet when `ν ≠ 0`.
pub fn oam_y_plus_convention(params: &PhysicalParams, profile: &ForceProfile, t: f64) -> Result<f64> {
    let c = params.hbar * params.k0 / params.mass;
    Ok(c * (profile.xi(t)? + t * profile.nu(t)?))
}

/// `I_ij = m(⟨r²⟩δ_ij − ⟨x_i x_j⟩)` of the HG(1,1) packet about the origin.
pub fn inertia_lab(params: &PhysicalParams, profile: &ForceProfile, t: f64) -> Result<Tensor3> {
    let (m, h, w, a, k) = (params.mass, params.hbar, params.beam_waist, params.alpha, params.k0);
    let xi = profile.xi(t)?;
    let rho = (3.0 * m * m * w.powi(4) + 12.0 * h * h * t * t) / (4.0 * m * w * w)
        + (m * m + 2.0 * a * h * h * t * t * (k * k + a / 2.0)) / (2.0 * m * a);
    let xz = h * k * t * xi / m;
    Ok([
        [rho, 0.0, xz],
        [0.0, rho + xi * xi / m, 0.0],
        [xz, 0.0, (3.0 * m * m * w.powi(4) + 12.0 * h * h * t * t) / (2.0 * m * w * w) + xi * xi / m],
    ])
}

/// Inertia tensor about the centroid. Diagonal and force independent.
pub fn inertia_com(params: &PhysicalParams, t: f64) -> Tensor3 {
    let (m, h, w, a) = (params.mass, params.hbar, params.beam_waist, params.alpha);
    let side = 0.75 * m * w * w + 3.0 * h * h * t * t / (m * w * w) + m / (2.0 * a) + h * h * t * t * a / (2.0 * m);
    let axial = 1.5 * m * w * w + 6.0 * h * h * t * t / (m * w * w);
    [[side, 0.0, 0.0], [0.0, side, 0.0], [0.0, 0.0, axial]]
}

/// `m(R²δ_ij − R_i R_j)` for a point mass at `r`.
pub fn parallel_axis(mass: f64, r: [f64; 3]) -> Tensor3 {
    let r2 = r.iter().map(|v| v * v).sum::<f64>();
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = mass * (if i == j { r2 } else { 0.0 } - r[i] * r[j]);
        }
    }
    out
}

/// Centroid under a uniform field along z plus the constant force `μ0 x`:
/// `x = −μ0 sin²(ωt)/(2mω²)`, `y = μ0 (2ωt − sin 2ωt)/(4mω²)`, `z = ħk₀t/m`.
pub fn magnetic_trajectory(params: &PhysicalParams, mu0: f64, t: f64) -> Result<[f64; 3]> {
    let w = params.larmor();
    if w == 0.0 {
        return Err(invalid("b_field", "no magnetic field; use `trajectory` instead"));
    }
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Domain(format!("time must be finite and non-negative, got {t}")));
    }
    let d = params.mass * w * w;
    Ok([
        -mu0 * (w * t).sin().powi(2) / (2.0 * d),
        mu0 * (2.0 * w * t - (2.0 * w * t).sin()) / (4.0 * d),
        drift_z(params, t),
    ])
}

/// Quadrature estimates of the observables of one sampled field.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableReport {
    pub t: f64,
    pub centroid: [f64; 3],
    /// Position spread along x.
    pub delta_x: f64,
    /// Momentum spread along x.
    pub delta_p: f64,
    /// Per-axis position spreads.
    pub delta_r: [f64; 3],
    /// Per-axis momentum spreads.
    pub delta_k: [f64; 3],
    pub momentum: [f64; 3],
    pub oam: [f64; 3],
    pub inertia_lab: Tensor3,
    pub inertia_com: Tensor3,
}

/// Quadrature observables of a normalised field; momenta come from
/// spectral derivatives.
pub fn grid_observables(field: &ComplexField, params: &PhysicalParams, t: f64) -> Result<ObservableReport> {
    let norm = field.norm();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::Domain(format!("field norm {norm} is not 1 within {NORM_TOLERANCE:e}")));
    }
    let g = field.grid();
    let dims = g.dims();
    let psi = field.values();
    let grads: Vec<Vec<Complex64>> = (0..3).map(|a| spectral_derivative(psi, dims, a, g.axis(a).spacing())).collect();
    let nodes = [g.x.nodes(), g.y.nodes(), g.z.nodes()];
    let weights = [g.x.weights(), g.y.weights(), g.z.weights()];
    let h = params.hbar;

    // Raw sums, sequential for determinism.
    let mut r1 = [0.0; 3];
    let mut r2 = [[0.0; 3]; 3];
    let mut p1 = [0.0; 3];
    let mut p2 = [0.0; 3];
    // ⟨x_i p_j⟩ (real part), for angular momentum
    let mut rp = [[0.0; 3]; 3];
    let (ny, nz) = (dims[1], dims[2]);
    for (idx, v) in psi.iter().enumerate() {
        let (ix, iy, iz) = (idx / (ny * nz), (idx / nz) % ny, idx % nz);
        let w = weights[0][ix] * weights[1][iy] * weights[2][iz];
        let r = [nodes[0][ix], nodes[1][iy], nodes[2][iz]];
        let d = v.norm_sqr() * w;
        let mut p = [0.0; 3];
        for a in 0..3 {
            // Re(ψ* (−iħ ∂ψ))
            p[a] = h * (v.conj() * grads[a][idx]).im * w;
            p2[a] += h * h * grads[a][idx].norm_sqr() * w;
        }
        for i in 0..3 {
            r1[i] += d * r[i];
            p1[i] += p[i];
            for j in 0..3 {
                r2[i][j] += d * r[i] * r[j];
                rp[i][j] += r[i] * p[j];
            }
        }
    }
    let n2 = norm * norm;
    let c = r1.map(|v| v / n2);
    let mom = p1.map(|v| v / n2);
    let mut cov = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            cov[i][j] = r2[i][j] / n2 - c[i] * c[j];
        }
    }
    let delta_r = [0, 1, 2].map(|i| cov[i][i].max(0.0).sqrt());
    let delta_k = [0, 1, 2].map(|i| (p2[i] / n2 - mom[i] * mom[i]).max(0.0).sqrt());
    let l = |i: usize, j: usize| (rp[i][j] - rp[j][i]) / n2;
    let oam = [l(1, 2), l(2, 0), l(0, 1)];

    let m = params.mass;
    let tensor = |s: &dyn Fn(usize, usize) -> f64| -> Tensor3 {
        let trace = s(0, 0) + s(1, 1) + s(2, 2);
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = m * (if i == j { trace } else { 0.0 } - s(i, j));
            }
        }
        out
    };
    Ok(ObservableReport {
        t,
        centroid: c,
        delta_x: delta_r[0],
        delta_p: delta_k[0],
        delta_r,
        delta_k,
        momentum: mom,
        oam,
        inertia_lab: tensor(&|i, j| r2[i][j] / n2),
        inertia_com: tensor(&|i, j| cov[i][j]),
    })
}

const AXES: [&str; 3] = ["x", "y", "z"];

/// CSV header of [`write_report_csv`].
pub fn report_csv_header() -> String {
    let mut cols: Vec<String> = vec!["t".into()];
    cols.extend(AXES.iter().map(|a| format!("mean_{a}")));
    cols.extend(AXES.iter().map(|a| format!("delta_{a}")));
    cols.extend(AXES.iter().map(|a| format!("delta_p{a}")));
    cols.extend(AXES.iter().map(|a| format!("mean_p{a}")));
    cols.extend(AXES.iter().map(|a| format!("l_{a}")));
    for name in ["lab", "com"] {
        for a in AXES {
            for b in AXES {
                cols.push(format!("i_{name}_{a}{b}"));
            }
        }
    }
    cols.join(",")
}

/// One row per report, all values with 17 significant digits.
pub fn write_report_csv<W: Write>(reports: &[ObservableReport], mut w: W) -> Result<()> {
    writeln!(w, "{}", report_csv_header())?;
    for r in reports {
        let mut vals = vec![r.t];
        vals.extend(r.centroid);
        vals.extend(r.delta_r);
        vals.extend(r.delta_k);
        vals.extend(r.momentum);
        vals.extend(r.oam);
        vals.extend(r.inertia_lab.iter().flatten());
        vals.extend(r.inertia_com.iter().flatten());
        let line: Vec<String> = vals.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}
