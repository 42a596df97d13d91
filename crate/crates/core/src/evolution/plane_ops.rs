//! Line-wise operations on row-major `(x, y)` planes.

use num_complex::Complex64;
use rayon::prelude::*;

/// Call `op(iy, line)` on every x-line (fixed y) of an `nx × ny` plane.
pub(super) fn for_each_x_line<F>(values: &mut [Complex64], nx: usize, ny: usize, op: F)
where
    F: Fn(usize, &mut [Complex64]) + Sync,
{
    let mut cols: Vec<Vec<Complex64>> = (0..ny)
        .into_par_iter()
        .map(|iy| (0..nx).map(|ix| values[ix * ny + iy]).collect())
        .collect();
    cols.par_iter_mut().enumerate().for_each(|(iy, c)| op(iy, c));
    for (iy, c) in cols.iter().enumerate() {
        for (ix, v) in c.iter().enumerate() {
            values[ix * ny + iy] = *v;
        }
    }
}

/// Call `op(ix, line)` on every y-line (fixed x).
pub(super) fn for_each_y_line<F>(values: &mut [Complex64], ny: usize, op: F)
where
    F: Fn(usize, &mut [Complex64]) + Sync,
{
    values.par_chunks_mut(ny).enumerate().for_each(|(ix, row)| op(ix, row));
}

/// Row-major dense matrix.
#[derive(Debug, Clone)]
pub(super) struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl Matrix {
    pub fn from_fn<F>(rows: usize, cols: usize, f: F) -> Self
    where
        F: Fn(usize, usize) -> Complex64 + Sync,
    {
        let data = (0..rows * cols).into_par_iter().map(|i| f(i / cols, i % cols)).collect();
        Self { rows, cols, data }
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

/// `out = mx · a · myᵀ` for an `a` of shape `mx.cols × my.cols`.
pub(super) fn separable_apply(mx: &Matrix, my: &Matrix, a: &[Complex64]) -> Vec<Complex64> {
    let (sx, sy) = (mx.cols, my.cols);
    assert_eq!(a.len(), sx * sy);
    let dy = my.rows;
    // tmp[k][j] = Σ_l my[j][l] a[k][l]
    let tmp: Vec<Complex64> = (0..sx * dy)
        .into_par_iter()
        .map(|kj| {
            let (k, j) = (kj / dy, kj % dy);
            dot(my.row(j), &a[k * sy..(k + 1) * sy])
        })
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); mx.rows * dy];
    out.par_chunks_mut(dy).enumerate().for_each(|(i, row)| {
        for (k, m) in mx.row(i).iter().enumerate() {
            let t = &tmp[k * dy..(k + 1) * dy];
            row.iter_mut().zip(t).for_each(|(o, v)| *o += m * v);
        }
    });
    out
}

#[inline]
pub(super) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        re += x.re * y.re - x.im * y.im;
        im += x.re * y.im + x.im * y.re;
    }
    Complex64::new(re, im)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_apply_matches_naive() {
        let mx = Matrix::from_fn(3, 2, |i, k| Complex64::new(i as f64 + 1.0, k as f64));
        let my = Matrix::from_fn(4, 5, |j, l| Complex64::new((j * l) as f64 * 0.1, 1.0));
        let a: Vec<Complex64> = (0..10).map(|i| Complex64::new(i as f64, -(i as f64) * 0.5)).collect();
        let out = separable_apply(&mx, &my, &a);
        for i in 0..3 {
            for j in 0..4 {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..2 {
                    for l in 0..5 {
                        s += mx.row(i)[k] * my.row(j)[l] * a[k * 5 + l];
                    }
                }
                assert!((out[i * 4 + j] - s).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn x_lines_see_fixed_y() {
        let (nx, ny) = (3, 2);
        let mut v: Vec<Complex64> = (0..6).map(|i| Complex64::new(i as f64, 0.0)).collect();
        for_each_x_line(&mut v, nx, ny, |iy, line| {
            assert_eq!(line.len(), 3);
            assert_eq!(line[1].re, (ny + iy) as f64);
            line.iter_mut().for_each(|c| *c *= 2.0);
        });
        assert_eq!(v[5].re, 10.0);
    }
}
