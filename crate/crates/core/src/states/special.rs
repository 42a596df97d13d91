//! Orthogonal polynomials by upward three-term recurrence.

use num_complex::Complex64;

/// Largest polynomial order accepted by the mode specs.
pub const MAX_ORDER: u32 = 64;

/// Physicists' Hermite polynomial `H_n(x)`.
pub fn hermite_poly(n: u32, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 2.0 * x;
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

pub fn hermite_poly_complex(n: u32, z: Complex64) -> Complex64 {
    let mut prev = Complex64::new(1.0, 0.0);
    if n == 0 {
        return prev;
    }
    let mut cur = 2.0 * z;
    for k in 1..n {
        let next = 2.0 * z * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Generalized Laguerre polynomial `L_p^{(a)}(x)`.
pub fn laguerre_poly(p: u32, a: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if p == 0 {
        return prev;
    }
    let mut cur = 1.0 + a - x;
    for k in 1..p {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + a - x) * cur - (k + a) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `1 / sqrt(2^n n!)`, accumulated as a product to stay finite for large n.
pub(crate) fn hermite_norm(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc / (2.0 * k as f64).sqrt())
}

/// `n!` as f64.
pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}
