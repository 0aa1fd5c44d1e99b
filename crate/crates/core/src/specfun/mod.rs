//! Special-function kernel.
//!
//! Everything here is pure and works in `f64`. Functions that can lose
//! accuracy return an [`Evaluated`] carrying a best-effort absolute error
//! next to the value; callers decide whether that is good enough.

mod bessel;
mod gamma;
mod incgamma;
mod meijer;

pub use bessel::{bessel_k, bessel_k_scaled, ln_bessel_k};
pub use gamma::{gamma, ln_gamma, ln_gamma_real};
pub use incgamma::{
    lower_incomplete_gamma, regularized_gamma_p, regularized_gamma_q, upper_incomplete_gamma,
};
pub use meijer::{meijer_g, meijer_g_scaled, MeijerGSpec};

use crate::error::{Error, Result};

/// A value together with a best-effort absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluated {
    pub value: f64,
    pub abs_err: f64,
    /// Set when the true value is below the smallest positive `f64` and
    /// `value` was flushed to zero.
    pub underflow: bool,
}

impl Evaluated {
    pub fn new(value: f64, abs_err: f64) -> Self {
        Self {
            value,
            abs_err,
            underflow: false,
        }
    }

    pub fn rel_err(&self) -> f64 {
        if self.value == 0.0 {
            if self.abs_err == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.abs_err / self.value.abs()
        }
    }
}

/// Accuracy targets and work caps for the iterative evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionPolicy {
    pub rel_tol: f64,
    pub max_nodes: usize,
    pub max_terms: usize,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_nodes: 400_000,
            max_terms: 1_000,
        }
    }
}

impl PrecisionPolicy {
    pub fn new(rel_tol: f64, max_nodes: usize, max_terms: usize) -> Result<Self> {
        let p = Self {
            rel_tol,
            max_nodes,
            max_terms,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !self.rel_tol.is_finite() {
            return Err(Error::InvalidParams(format!(
                "precision tolerance must be positive, got {}",
                self.rel_tol
            )));
        }
        if self.max_nodes == 0 || self.max_terms == 0 {
            return Err(Error::InvalidParams(
                "precision node and term caps must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
