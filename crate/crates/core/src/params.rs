use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimension, coupling and shrinker constant of the soliton equation
/// `Ric + Hess f = rho R g + lambda g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonParams {
    pub n: usize,
    pub rho: f64,
    pub lambda: f64,
}

impl SolitonParams {
    pub fn new(n: usize, rho: f64, lambda: f64) -> Result<Self> {
        let p = Self { n, rho, lambda };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidParams(format!("dimension n = {} (need n >= 3)", self.n)));
        }
        if !self.rho.is_finite() || !self.lambda.is_finite() {
            return Err(Error::InvalidParams("rho and lambda must be finite".into()));
        }
        Ok(())
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    /// `1 - 2(n-1) rho`; vanishes at the Schouten value.
    pub fn schouten_factor(&self) -> f64 {
        1.0 - 2.0 * (self.nf() - 1.0) * self.rho
    }

    /// Upper end of the shrinking window `0 < rho < 1/(2(n-1))`.
    pub fn schouten_rho(&self) -> f64 {
        1.0 / (2.0 * (self.nf() - 1.0))
    }
}
