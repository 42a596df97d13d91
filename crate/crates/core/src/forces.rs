//! The external force μ(t) acting along x and its integral functionals
//!
//! * `ν(t) = ∫₀ᵗ μ`         (momentum kick, `p̂_x(t) = p̂_x(0) − ν(t)`)
//! * `ξ(t) = ∫₀ᵗ ν`         (`⟨x̂(t)⟩ = −ξ(t)/m`)
//! * `v(t) = ∫₀ᵗ t′ μ(t′)`  (first moment, `v = tν − ξ`)
//! * `χ(t) = (1/2mħ) ∫₀ᵗ (v(t′)/t′)² dt′` (pure-time kernel phase)
//!
//! The potential is `μ(t) x̂`, so a positive μ pushes the packet toward
//! negative x.

use crate::error::{invalid, Error, Result};
use crate::numerics::adaptive_simpson;
use crate::states::PhysicalParams;

/// Relative tolerance used for quadrature-backed ν, ξ, v.
pub const FUNCTIONAL_TOLERANCE: f64 = 1e-10;
/// Default relative tolerance of the χ quadrature.
pub const CHI_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum ForceProfile {
    Zero,
    Constant { mu0: f64 },
    /// `μ(t) = μ0 sin(2t / period_scale)`.
    Sinusoidal { mu0: f64, period_scale: f64 },
    Tabulated(ForceTable),
}

/// Piecewise-linear force samples with cached node values of ν, ξ and v.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceTable {
    times: Vec<f64>,
    forces: Vec<f64>,
    nu: Vec<f64>,
    xi: Vec<f64>,
    v: Vec<f64>,
}

impl ForceTable {
    /// Samples must be finite with strictly increasing times. Samples before
    /// `t = 0` are clipped (the functionals integrate from 0).
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(invalid("tabulated force", "needs at least two samples"));
        }
        if samples.iter().any(|(t, f)| !t.is_finite() || !f.is_finite()) {
            return Err(invalid("tabulated force", "samples must be finite"));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(invalid("tabulated force", "times must be strictly increasing"));
        }
        let mut samples = samples;
        if samples[0].0 < 0.0 {
            let last = samples.last().unwrap().0;
            if last <= 0.0 {
                return Err(invalid("tabulated force", "table has no samples at t > 0"));
            }
            let k = samples.iter().position(|s| s.0 > 0.0).unwrap();
            let (t0, f0) = samples[k - 1];
            let (t1, f1) = samples[k];
            let at_zero = f0 + (f1 - f0) * (0.0 - t0) / (t1 - t0);
            let mut clipped = vec![(0.0, at_zero)];
            clipped.extend(samples[k..].iter().copied().filter(|s| s.0 > 0.0));
            samples = clipped;
        }
        let (times, forces): (Vec<f64>, Vec<f64>) = samples.into_iter().unzip();
        let mut table = Self {
            nu: vec![0.0; times.len()],
            xi: vec![0.0; times.len()],
            v: vec![0.0; times.len()],
            times,
            forces,
        };
        if table.times[0] == 0.0 {
            for i in 1..table.times.len() {
                let (a, b) = (table.times[i - 1], table.times[i]);
                table.nu[i] = table.nu[i - 1] + table.segment_nu(i - 1, b);
                table.xi[i] = table.xi[i - 1] + adaptive_simpson(|s| table.nu_in(i - 1, s), a, b, FUNCTIONAL_TOLERANCE);
                table.v[i] = table.v[i - 1] + adaptive_simpson(|s| s * table.mu_in(i - 1, s), a, b, FUNCTIONAL_TOLERANCE);
            }
        }
        Ok(table)
    }

    /// Parse a two-column `time,force` CSV. A non-numeric first line is
    /// treated as a header; blank lines are skipped.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut samples = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 2 {
                return Err(Error::Format(format!(
                    "force table line {}: expected 2 columns, found {}",
                    lineno + 1,
                    cols.len()
                )));
            }
            match (cols[0].parse::<f64>(), cols[1].parse::<f64>()) {
                (Ok(t), Ok(f)) => samples.push((t, f)),
                _ if samples.is_empty() && lineno == 0 => continue,
                _ => {
                    return Err(Error::Format(format!(
                        "force table line {}: cannot parse `{line}`",
                        lineno + 1
                    )))
                }
            }
        }
        Self::new(samples)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().unwrap())
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.forces.iter().copied())
    }

    fn segment(&self, t: f64) -> Result<usize> {
        let (lo, hi) = self.range();
        if !(lo..=hi).contains(&t) {
            return Err(Error::Domain(format!("t = {t} outside tabulated range [{lo}, {hi}]")));
        }
        let k = self.times.partition_point(|&s| s <= t);
        Ok(k.saturating_sub(1).min(self.times.len() - 2))
    }

    fn mu_in(&self, seg: usize, t: f64) -> f64 {
        let (t0, t1) = (self.times[seg], self.times[seg + 1]);
        let (f0, f1) = (self.forces[seg], self.forces[seg + 1]);
        f0 + (f1 - f0) * (t - t0) / (t1 - t0)
    }

    fn segment_nu(&self, seg: usize, t: f64) -> f64 {
        adaptive_simpson(|s| self.mu_in(seg, s), self.times[seg], t, FUNCTIONAL_TOLERANCE)
    }

    fn nu_in(&self, seg: usize, t: f64) -> f64 {
        self.nu[seg] + self.segment_nu(seg, t)
    }

    fn integral_segment(&self, t: f64) -> Result<usize> {
        if self.times[0] > 0.0 {
            return Err(Error::Domain(format!(
                "tabulated force starts at t = {} and cannot be integrated from 0",
                self.times[0]
            )));
        }
        self.segment(t)
    }

    fn mu(&self, t: f64) -> Result<f64> {
        let seg = self.segment(t)?;
        Ok(self.mu_in(seg, t))
    }

    fn nu(&self, t: f64) -> Result<f64> {
        let seg = self.integral_segment(t)?;
        Ok(self.nu_in(seg, t))
    }

    fn xi(&self, t: f64) -> Result<f64> {
        let seg = self.integral_segment(t)?;
        Ok(self.xi[seg] + adaptive_simpson(|s| self.nu_in(seg, s), self.times[seg], t, FUNCTIONAL_TOLERANCE))
    }

    fn v(&self, t: f64) -> Result<f64> {
        let seg = self.integral_segment(t)?;
        Ok(self.v[seg] + adaptive_simpson(|s| s * self.mu_in(seg, s), self.times[seg], t, FUNCTIONAL_TOLERANCE))
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("force functionals need finite t >= 0, got {t}")));
    }
    Ok(())
}

impl ForceProfile {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ForceProfile::Constant { mu0 } if !mu0.is_finite() => Err(invalid("mu0", "must be finite")),
            ForceProfile::Sinusoidal { mu0, period_scale } => {
                if !mu0.is_finite() {
                    Err(invalid("mu0", "must be finite"))
                } else if !(period_scale > 0.0) || !period_scale.is_finite() {
                    Err(invalid("period_scale", "must be positive"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ForceProfile::Zero)
    }

    pub fn mu(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(match self {
            ForceProfile::Zero => 0.0,
            ForceProfile::Constant { mu0 } => *mu0,
            ForceProfile::Sinusoidal { mu0, period_scale } => mu0 * (2.0 * t / period_scale).sin(),
            ForceProfile::Tabulated(table) => table.mu(t)?,
        })
    }

    pub fn nu(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(match self {
            ForceProfile::Zero => 0.0,
            ForceProfile::Constant { mu0 } => mu0 * t,
            ForceProfile::Sinusoidal { mu0, period_scale } => {
                let s = *period_scale;
                mu0 * 0.5 * s * (1.0 - (2.0 * t / s).cos())
            }
            ForceProfile::Tabulated(table) => table.nu(t)?,
        })
    }

    pub fn xi(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(match self {
            ForceProfile::Zero => 0.0,
            ForceProfile::Constant { mu0 } => 0.5 * mu0 * t * t,
            ForceProfile::Sinusoidal { mu0, period_scale } => {
                let s = *period_scale;
                mu0 * (0.5 * s * t - 0.25 * s * s * (2.0 * t / s).sin())
            }
            ForceProfile::Tabulated(table) => table.xi(t)?,
        })
    }

    pub fn v_moment(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(match self {
            ForceProfile::Zero => 0.0,
            ForceProfile::Constant { mu0 } => 0.5 * mu0 * t * t,
            ForceProfile::Sinusoidal { mu0, period_scale } => {
                let s = *period_scale;
                let x = 2.0 * t / s;
                mu0 * (-0.5 * s * t * x.cos() + 0.25 * s * s * x.sin())
            }
            ForceProfile::Tabulated(table) => table.v(t)?,
        })
    }

    /// χ(t) at the default tolerance.
    pub fn chi_phase(&self, t: f64, params: &PhysicalParams) -> Result<f64> {
        self.chi_phase_with_tolerance(t, params, CHI_TOLERANCE)
    }

    pub fn chi_phase_with_tolerance(&self, t: f64, params: &PhysicalParams, rel_tol: f64) -> Result<f64> {
        check_time(t)?;
        let scale = 1.0 / (2.0 * params.mass * params.hbar);
        match self {
            ForceProfile::Zero => Ok(0.0),
            ForceProfile::Constant { mu0 } => Ok(mu0 * mu0 * t.powi(3) / (24.0 * params.mass * params.hbar)),
            _ => {
                if t == 0.0 {
                    return Ok(0.0);
                }
                // bounded μ ⇒ v(t′)/t′ → 0 at the lower endpoint
                let integrand = |s: f64| {
                    if s <= 0.0 {
                        return 0.0;
                    }
                    let v = self.v_moment(s).unwrap_or(f64::NAN) / s;
                    v * v
                };
                if let ForceProfile::Tabulated(table) = self {
                    table.integral_segment(t)?;
                    // split at nodes so each piece is smooth
                    let mut total = 0.0;
                    let mut a = 0.0;
                    for &node in table.times.iter().filter(|&&s| s > 0.0 && s < t) {
                        total += adaptive_simpson(integrand, a, node, rel_tol);
                        a = node;
                    }
                    total += adaptive_simpson(integrand, a, t, rel_tol);
                    return Ok(scale * total);
                }
                Ok(scale * adaptive_simpson(integrand, 0.0, t, rel_tol))
            }
        }
    }
}
