//! Quadrature, FFT plumbing and axis-wise array mapping shared by the
//! evolution and observable code.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

const MAX_SIMPSON_DEPTH: u32 = 48;

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
///
/// The tolerance is relative to the magnitude scale of the integrand
/// (estimated from a coarse pass over `|f|`), so integrals that cancel to
/// near zero still terminate.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, rel_tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return 0.0;
    }
    let coarse = 64;
    let h = (b - a) / coarse as f64;
    let mut scale = 0.0;
    for i in 0..coarse {
        let x0 = a + i as f64 * h;
        scale += h / 6.0 * (f(x0).abs() + 4.0 * f(x0 + 0.5 * h).abs() + f(x0 + h).abs());
    }
    let tol = (rel_tol * scale.abs()).max(f64::MIN_POSITIVE);

    let fa = f(a);
    let fm = f(0.5 * (a + b));
    let fb = f(b);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, MAX_SIMPSON_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Angular wavenumbers of an `n`-point DFT on nodes spaced by `spacing`,
/// in FFT order. The Nyquist entry of an even-length transform is zero so
/// that odd-order spectral derivatives of real data stay real.
pub fn fft_wavenumbers(n: usize, spacing: f64) -> Vec<f64> {
    let dk = 2.0 * PI / (n as f64 * spacing);
    (0..n)
        .map(|j| {
            if n % 2 == 0 && j == n / 2 {
                0.0
            } else if j <= n / 2 {
                j as f64 * dk
            } else {
                (j as f64 - n as f64) * dk
            }
        })
        .collect()
}

/// Same as [`fft_wavenumbers`] but keeps the Nyquist mode at `-π/h`; used for
/// even-order multipliers (kinetic phases) where the sign does not matter.
pub fn fft_wavenumbers_full(n: usize, spacing: f64) -> Vec<f64> {
    let dk = 2.0 * PI / (n as f64 * spacing);
    (0..n)
        .map(|j| if j < n.div_ceil(2) { j as f64 * dk } else { (j as f64 - n as f64) * dk })
        .collect()
}

/// Forward/inverse FFT pair for one line length. The inverse is normalised.
#[derive(Clone)]
pub struct LineFft {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl LineFft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
        let s = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|v| *v *= s);
    }

    /// Multiply the spectrum of `buf` by `multiplier[k]` in place.
    pub fn filter(&self, buf: &mut [Complex64], multiplier: &[Complex64]) {
        self.forward(buf);
        buf.iter_mut().zip(multiplier).for_each(|(v, m)| *v *= m);
        self.inverse(buf);
    }
}

#[inline]
pub fn flat_index(dims: [usize; 3], i: usize, j: usize, k: usize) -> usize {
    (i * dims[1] + j) * dims[2] + k
}

/// Apply `op` to every line of a row-major `dims` array along `axis`.
///
/// `op` receives the input line and writes an output line of length
/// `out_len`; the result has `dims[axis]` replaced by `out_len`. Lines are
/// processed in parallel, the scatter is sequential so the output does not
/// depend on scheduling.
pub fn map_lines<F>(values: &[Complex64], dims: [usize; 3], axis: usize, out_len: usize, op: F) -> Vec<Complex64>
where
    F: Fn(&[Complex64], &mut [Complex64]) + Sync,
{
    assert_eq!(values.len(), dims.iter().product::<usize>());
    let (a_axis, b_axis) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        2 => (0, 1),
        _ => panic!("axis out of range"),
    };
    let na = dims[a_axis];
    let nb = dims[b_axis];
    let n_in = dims[axis];
    let mut out_dims = dims;
    out_dims[axis] = out_len;

    let index = |d: [usize; 3], a: usize, b: usize, s: usize| {
        let mut idx = [0usize; 3];
        idx[a_axis] = a;
        idx[b_axis] = b;
        idx[axis] = s;
        flat_index(d, idx[0], idx[1], idx[2])
    };

    let lines: Vec<Vec<Complex64>> = (0..na * nb)
        .into_par_iter()
        .map(|ab| {
            let (a, b) = (ab / nb, ab % nb);
            let input: Vec<Complex64> = (0..n_in).map(|s| values[index(dims, a, b, s)]).collect();
            let mut output = vec![Complex64::new(0.0, 0.0); out_len];
            op(&input, &mut output);
            output
        })
        .collect();

    let mut out = vec![Complex64::new(0.0, 0.0); out_dims.iter().product()];
    for (ab, line) in lines.into_iter().enumerate() {
        let (a, b) = (ab / nb, ab % nb);
        for (s, v) in line.into_iter().enumerate() {
            out[index(out_dims, a, b, s)] = v;
        }
    }
    out
}

/// Dense matrix-vector product `out = m · input`, `m` stored row-major with
/// `input.len()` columns.
pub fn dense_apply(m: &[Complex64], input: &[Complex64], out: &mut [Complex64]) {
    let cols = input.len();
    for (row, o) in m.chunks_exact(cols).zip(out.iter_mut()) {
        *o = row.iter().zip(input).map(|(a, b)| a * b).sum();
    }
}

/// Band-limited interpolation of equally spaced samples onto a grid
/// `factor` times finer, keeping both end nodes: returns
/// `(n − 1)·factor + 1` values. The samples are treated as one period.
pub fn upsample_line(values: &[Complex64], factor: usize) -> Vec<Complex64> {
    let n = values.len();
    if factor <= 1 || n < 2 {
        return values.to_vec();
    }
    let big = n * factor;
    let mut spec = values.to_vec();
    LineFft::new(n).forward(&mut spec);
    let mut padded = vec![Complex64::new(0.0, 0.0); big];
    let half = n / 2;
    for j in 0..n {
        if n % 2 == 0 && j == half {
            padded[half] += 0.5 * spec[j];
            padded[big - half] += 0.5 * spec[j];
        } else if j < half || (n % 2 == 1 && j == half) {
            padded[j] = spec[j];
        } else {
            padded[big - (n - j)] = spec[j];
        }
    }
    let fft = LineFft::new(big);
    fft.inverse(&mut padded);
    let scale = factor as f64;
    padded.truncate((n - 1) * factor + 1);
    padded.iter_mut().for_each(|v| *v *= scale);
    padded
}

/// Spectral first derivative along `axis` of a row-major array.
pub fn spectral_derivative(values: &[Complex64], dims: [usize; 3], axis: usize, spacing: f64) -> Vec<Complex64> {
    let n = dims[axis];
    let fft = LineFft::new(n);
    let mult: Vec<Complex64> = fft_wavenumbers(n, spacing)
        .into_iter()
        .map(|k| Complex64::new(0.0, k))
        .collect();
    map_lines(values, dims, axis, n, |input, out| {
        out.copy_from_slice(input);
        fft.filter(out, &mult);
    })
}
