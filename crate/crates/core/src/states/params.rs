use crate::error::{invalid, Result};

/// Physical constants of one scenario.
///
/// Every formula in the crate carries `mass` and `hbar` explicitly, so any
/// consistent unit system works. [`PhysicalParams::natural`] gives the
/// scaled units used by the CLI defaults (ħ = m = ω₀ = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub mass: f64,
    pub hbar: f64,
    pub charge: f64,
    pub b_field: f64,
    /// Transverse beam waist ω₀.
    pub beam_waist: f64,
    /// Longitudinal Gaussian parameter α (inverse length squared).
    pub alpha: f64,
    /// Launch wavenumber along z.
    pub k0: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self::natural()
    }
}

impl PhysicalParams {
    /// ħ = m = ω₀ = α = 1, k₀ = 10, unit charge, no field.
    pub fn natural() -> Self {
        Self {
            mass: 1.0,
            hbar: 1.0,
            charge: 1.0,
            b_field: 0.0,
            beam_waist: 1.0,
            alpha: 1.0,
            k0: 10.0,
        }
    }

    pub fn with_field(mut self, charge: f64, b_field: f64) -> Self {
        self.charge = charge;
        self.b_field = b_field;
        self
    }

    /// Field strength giving the requested Larmor frequency for the current
    /// charge and mass.
    pub fn with_larmor(self, omega: f64) -> Self {
        let b = 2.0 * self.mass * omega / self.charge;
        self.with_field(self.charge, b)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mass", self.mass),
            ("hbar", self.hbar),
            ("beam_waist", self.beam_waist),
            ("alpha", self.alpha),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        for (name, v) in [("charge", self.charge), ("b_field", self.b_field), ("k0", self.k0)] {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        Ok(())
    }

    /// ω = qB / 2m, recomputed on every call.
    pub fn larmor(&self) -> f64 {
        self.charge * self.b_field / (2.0 * self.mass)
    }

    /// τ = m ω₀² / 2ħ.
    pub fn tau(&self) -> f64 {
        self.mass * self.beam_waist * self.beam_waist / (2.0 * self.hbar)
    }

    pub fn has_field(&self) -> bool {
        self.larmor() != 0.0
    }
}
