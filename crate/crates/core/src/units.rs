use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical constants used throughout the library.
///
/// Internal computations default to `hbar = m = omega = e = c = 1`. `omega` is the
/// free frequency scale of the optical and probability quantizers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitsContext {
    pub hbar: f64,
    pub m: f64,
    pub omega: f64,
    pub e: f64,
    pub c: f64,
}

impl Default for UnitsContext {
    fn default() -> Self {
        Self { hbar: 1.0, m: 1.0, omega: 1.0, e: 1.0, c: 1.0 }
    }
}

impl UnitsContext {
    pub fn new(hbar: f64, m: f64, omega: f64, e: f64, c: f64) -> Result<Self> {
        let u = Self { hbar, m, omega, e, c };
        u.validate()?;
        Ok(u)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("hbar", self.hbar),
            ("m", self.m),
            ("omega", self.omega),
            ("e", self.e),
            ("c", self.c),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn with_hbar(mut self, hbar: f64) -> Self {
        self.hbar = hbar;
        self
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    /// Phase factor `e / (c hbar)` multiplying gauge functions in state phases.
    pub fn gauge_phase(&self) -> f64 {
        self.e / (self.c * self.hbar)
    }

    /// `sqrt(m omega / hbar)`, the frequency of the quantizer exponent.
    pub fn quantizer_frequency(&self) -> f64 {
        (self.m * self.omega / self.hbar).sqrt()
    }

    /// `sqrt(m omega hbar)`, the position shift carried by the quantizer.
    pub fn quantizer_shift(&self) -> f64 {
        (self.m * self.omega * self.hbar).sqrt()
    }
}
