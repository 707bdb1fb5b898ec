//! Special-function kernels used by the closed-form rate expressions.
//!
//! Everything here is a pure function of its arguments. Infinite series share
//! one truncation policy, [`SeriesControl`], and report which bound ended the
//! summation through [`SeriesValue`].

mod bessel;
mod gamma;
mod hypergeom;
mod marcum;

pub use bessel::{bessel_i0, bessel_i0_scaled};
pub use gamma::{
    exp_integral_e1, gamma_p, gamma_q, ln_gamma, scaled_exp_integrals, upper_incomplete_gamma,
};
pub use hypergeom::{confluent_1f1, pochhammer};
pub(crate) use marcum::ie_arguments;
pub use marcum::{marcum_q1, marcum_q1_pair, rice_ie, MarcumPair};

use crate::error::{Error, Result};

/// Error function, backed by `statrs`.
pub fn erf(x: f64) -> f64 {
    statrs::function::erf::erf(x)
}

/// Truncation policy for infinite series.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SeriesControl {
    /// Stop once a term falls below `rel_tol * |partial sum|`.
    pub rel_tol: f64,
    /// Hard cap on the number of terms.
    pub max_terms: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl {
            rel_tol: 1e-12,
            max_terms: 500,
        }
    }
}

impl SeriesControl {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self> {
        let ctl = SeriesControl { rel_tol, max_terms };
        ctl.validate()?;
        Ok(ctl)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::invalid("rel_tol", "must lie in (0, 1)"));
        }
        if self.max_terms == 0 {
            return Err(Error::invalid("max_terms", "must be at least 1"));
        }
        Ok(())
    }
}

/// Which bound terminated a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stop {
    RelTol,
    MaxTerms,
    /// The series is a finite sum and was evaluated exactly.
    Exhausted,
}

/// A series value together with its truncation report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub terms: usize,
    pub stop: Stop,
}
