//! Trapezoid-rule convolution with the closed-form kernels.

use num_complex::Complex64;
use rayon::prelude::*;

use super::plane_ops::{dot, separable_apply, Matrix};
use crate::error::{Error, Result};
use crate::forces::ForceProfile;
use crate::kernels::{free_kernel_1d, KernelKind, KernelSpec, LinearKernel, MagneticKernel};
use crate::numerics::{map_lines, upsample_line};
use crate::states::{Axis, ComplexField, Grid2, Grid3, LineField, PhysicalParams, PlaneField};

/// Largest source-grid refinement applied before a convolution.
pub const MAX_REFINEMENT: usize = 16;

/// Refinement of `src` needed so the trapezoid rule stays alias-free.
///
/// The rule's first alias is the packet boosted by `2πħ/h`, which lands
/// `2πħ t_eff / (m h)` away; it must clear every source/destination pair.
fn refinement(params: &PhysicalParams, t_eff: f64, src: &Axis, dst: &Axis) -> usize {
    let span = (dst.max() - src.min()).max(src.max() - dst.min());
    let h_max = 2.0 * std::f64::consts::PI * params.hbar * t_eff.abs() / (params.mass * span);
    let r = (src.spacing() / h_max).ceil().max(1.0);
    if r > MAX_REFINEMENT as f64 {
        log::warn!("convolution source grid needs {r}x refinement, capped at {MAX_REFINEMENT}x");
        return MAX_REFINEMENT;
    }
    r as usize
}

fn refined_axis(a: &Axis, r: usize) -> Axis {
    if r == 1 {
        return *a;
    }
    Axis::new(a.min(), a.max(), (a.count() - 1) * r + 1).expect("refining a valid axis")
}

fn refine_line(params: &PhysicalParams, t: f64, src: &LineField, dst: &Axis) -> LineField {
    let r = refinement(params, t, &src.axis, dst);
    if r == 1 {
        return src.clone();
    }
    LineField {
        axis: refined_axis(&src.axis, r),
        values: upsample_line(&src.values, r),
    }
}

fn refine_plane(params: &PhysicalParams, t_eff: f64, src: &PlaneField, dst: &Grid2) -> PlaneField {
    let rx = refinement(params, t_eff, &src.grid.x, &dst.x);
    let ry = refinement(params, t_eff, &src.grid.y, &dst.y);
    if rx == 1 && ry == 1 {
        return src.clone();
    }
    log::debug!("refining convolution source grid by {rx}x{ry}");
    let (nx, ny) = (src.grid.x.count(), src.grid.y.count());
    let (mx, my) = ((nx - 1) * rx + 1, (ny - 1) * ry + 1);
    let along_y = map_lines(&src.values, [nx, ny, 1], 1, my, |i, o| {
        o.copy_from_slice(&upsample_line(i, ry))
    });
    let values = map_lines(&along_y, [nx, my, 1], 0, mx, |i, o| o.copy_from_slice(&upsample_line(i, rx)));
    PlaneField {
        grid: Grid2::new(refined_axis(&src.grid.x, rx), refined_axis(&src.grid.y, ry)),
        values,
    }
}

/// `M[i][k] = K(dst_i, src_k) · w_k` for the free 1D kernel.
pub(super) fn free_matrix(params: &PhysicalParams, t: f64, src: &Axis, dst: &Axis) -> Result<Matrix> {
    free_kernel_1d(params, 0.0, t, 0.0)?;
    let (xs, ws, ys) = (src.nodes(), src.weights(), dst.nodes());
    Ok(Matrix::from_fn(ys.len(), xs.len(), |i, k| {
        free_kernel_1d(params, ys[i], t, xs[k]).expect("time checked above") * ws[k]
    }))
}

fn linear_matrix(params: &PhysicalParams, profile: &ForceProfile, t: f64, src: &Axis, dst: &Axis) -> Result<Matrix> {
    let k = LinearKernel::new(params, profile, t)?;
    let (xs, ws, ys) = (src.nodes(), src.weights(), dst.nodes());
    Ok(Matrix::from_fn(ys.len(), xs.len(), |i, j| k.eval(ys[i], xs[j]) * ws[j]))
}

pub(super) fn free_line(params: &PhysicalParams, t: f64, src: &LineField, dst: Axis) -> Result<LineField> {
    let src = &refine_line(params, t, src, &dst);
    let m = free_matrix(params, t, &src.axis, &dst)?;
    Ok(apply_line(&m, src, dst))
}

/// Line along x under the kernel's x factor.
pub(super) fn x_line(spec: &KernelSpec, t: f64, src: &LineField, dst: Axis) -> Result<LineField> {
    let p = &spec.params;
    match &spec.kind {
        KernelKind::FreeTransverse2D => free_line(p, t, src, dst),
        KernelKind::LinearLongitudinal1D(profile) => {
            let src = &refine_line(p, t, src, &dst);
            let m = linear_matrix(p, profile, t, &src.axis, &dst)?;
            Ok(apply_line(&m, src, dst))
        }
        _ => Err(Error::Unsupported("magnetic kernels do not factorise along x".into())),
    }
}

fn apply_line(m: &Matrix, src: &LineField, dst: Axis) -> LineField {
    let values = (0..m.rows).into_par_iter().map(|i| dot(m.row(i), &src.values)).collect();
    LineField { axis: dst, values }
}

pub(super) fn transverse(spec: &KernelSpec, t: f64, src: &PlaneField, dst: &Grid2) -> Result<PlaneField> {
    let p = &spec.params;
    let t_eff = if spec.is_magnetic() {
        let w = p.larmor();
        (w * t).sin() / w
    } else {
        t
    };
    let src = &refine_plane(p, t_eff, src, dst);
    let values = match &spec.kind {
        KernelKind::FreeTransverse2D => {
            let mx = free_matrix(p, t, &src.grid.x, &dst.x)?;
            let my = free_matrix(p, t, &src.grid.y, &dst.y)?;
            separable_apply(&mx, &my, &src.values)
        }
        KernelKind::LinearLongitudinal1D(profile) => {
            let mx = linear_matrix(p, profile, t, &src.grid.x, &dst.x)?;
            let my = free_matrix(p, t, &src.grid.y, &dst.y)?;
            separable_apply(&mx, &my, &src.values)
        }
        KernelKind::Magnetic3D => magnetic(&MagneticKernel::new(p, t, 0.0)?, src, dst),
        KernelKind::MagneticWithForce3D { mu0 } => magnetic(&MagneticKernel::new(p, t, *mu0)?, src, dst),
    };
    Ok(PlaneField { grid: *dst, values })
}

/// Coupled 2D convolution in `O(N⁴)` through the factorisation
/// `T = P·D_x(x)D_y(y)·S_x(x′)S_y(y′)·E(x,x′)E(y,y′)·F(x,y′)·G(y,x′)`.
fn magnetic(kernel: &MagneticKernel, src: &PlaneField, dst: &Grid2) -> Vec<Complex64> {
    let c = kernel.coefficients();
    let (sx, sy) = (src.grid.x.nodes(), src.grid.y.nodes());
    let (wx, wy) = (src.grid.x.weights(), src.grid.y.weights());
    let (dx, dy) = (dst.x.nodes(), dst.y.nodes());
    let (nsx, nsy, ndx, ndy) = (sx.len(), sy.len(), dx.len(), dy.len());

    let weighted: Vec<Complex64> = (0..nsx * nsy)
        .map(|kl| {
            let (k, l) = (kl / nsy, kl % nsy);
            let (x, y) = (sx[k], sy[l]);
            let ph = c.c_a * (x * x + y * y) + c.lin_x * x - c.lin_y * y;
            src.values[kl] * Complex64::from_polar(wx[k] * wy[l], ph)
        })
        .collect();
    let exx = Matrix::from_fn(ndx, nsx, |i, k| Complex64::cis(-2.0 * c.c_a * dx[i] * sx[k]));
    let fxy = Matrix::from_fn(ndx, nsy, |i, l| Complex64::cis(-c.c_b * dx[i] * sy[l]));
    let eyy = Matrix::from_fn(ndy, nsy, |j, l| Complex64::cis(-2.0 * c.c_a * dy[j] * sy[l]));
    let gyx = Matrix::from_fn(ndy, nsx, |j, k| Complex64::cis(c.c_b * dy[j] * sx[k]));
    let outer = |x: f64, y: f64| Complex64::from_polar(c.amp, c.c_a * (x * x + y * y) + c.lin_x * x + c.lin_y * y + c.constant);

    let mut out = vec![Complex64::new(0.0, 0.0); ndx * ndy];
    out.par_chunks_mut(ndy).enumerate().for_each(|(i, row)| {
        let mut b = vec![Complex64::new(0.0, 0.0); nsy];
        // cc[k][j]
        let mut cc = vec![Complex64::new(0.0, 0.0); nsx * ndy];
        for k in 0..nsx {
            let e = exx.row(i)[k];
            let a = &weighted[k * nsy..(k + 1) * nsy];
            b.iter_mut().zip(a).zip(fxy.row(i)).for_each(|((bv, av), f)| *bv = e * f * av);
            for j in 0..ndy {
                cc[k * ndy + j] = dot(eyy.row(j), &b);
            }
        }
        for (j, o) in row.iter_mut().enumerate() {
            let g = gyx.row(j);
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..nsx {
                s += g[k] * cc[k * ndy + j];
            }
            *o = s * outer(dx[i], dy[j]);
        }
    });
    out
}

/// Apply the z matrix along every (x, y) line of a stack of planes.
pub(super) fn apply_z(planes: &[PlaneField], dst: Grid3, src_z: &Axis, zm: &Matrix) -> ComplexField {
    debug_assert_eq!(planes.len(), src_z.count());
    let nxy = dst.x.count() * dst.y.count();
    let nz = dst.z.count();
    let values: Vec<Complex64> = (0..nxy * nz)
        .into_par_iter()
        .map(|idx| {
            let (ixy, iz) = (idx / nz, idx % nz);
            zm.row(iz).iter().zip(planes).map(|(m, p)| m * p.values[ixy]).sum()
        })
        .collect();
    ComplexField::new(dst, values).expect("sizes agree by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::magnetic_force_kernel;

    #[test]
    fn factorised_magnetic_matches_direct_sum() {
        let p = PhysicalParams::natural().with_larmor(1.7);
        let t = 0.3;
        let src = Grid2::new(Axis::new(-2.0, 2.5, 7).unwrap(), Axis::new(-1.5, 2.0, 6).unwrap());
        let dst = Grid2::new(Axis::new(-1.0, 1.0, 4).unwrap(), Axis::new(0.0, 3.0, 5).unwrap());
        let plane = PlaneField::from_fn(src, |x, y| Complex64::new((-x * x).exp(), x * y));
        for mu0 in [0.0, 2.5] {
            let k = MagneticKernel::new(&p, t, mu0).unwrap();
            let fast = magnetic(&k, &plane, &dst);
            let (sx, sy, wx, wy) = (src.x.nodes(), src.y.nodes(), src.x.weights(), src.y.weights());
            for (i, x) in dst.x.nodes().into_iter().enumerate() {
                for (j, y) in dst.y.nodes().into_iter().enumerate() {
                    let mut s = Complex64::new(0.0, 0.0);
                    for k in 0..sx.len() {
                        for l in 0..sy.len() {
                            // unit z factor: divide out the free longitudinal kernel
                            let full = magnetic_force_kernel(&p, mu0, [x, y, 0.0], t, [sx[k], sy[l], 0.0]).unwrap();
                            let z = free_kernel_1d(&p, 0.0, t, 0.0).unwrap();
                            s += full / z * plane.values[k * sy.len() + l] * wx[k] * wy[l];
                        }
                    }
                    let f = fast[i * dst.y.count() + j];
                    assert!((f - s).norm() < 1e-10 * s.norm().max(1.0), "{f} vs {s}");
                }
            }
        }
    }
}
