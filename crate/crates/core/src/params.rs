use serde::{Deserialize, Serialize};

use crate::error::{param_err, Result};

/// Exponent bundle shared by the criterion, chain and oracle routines.
///
/// `alpha` is the power exponent of the generalized families; `alpha_opt` is
/// the tuning exponent of the main weight chain. The two never appear in the
/// same construction and [`Params::check_exclusive_alphas`] rejects bundles
/// that set both.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub p: f64,
    pub r: f64,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub a: f64,
    pub alpha_opt: Option<f64>,
}

impl Default for Params {
    fn default() -> Self {
        Params { p: 0.34, r: 0.34, alpha: None, beta: None, a: 0.0, alpha_opt: None }
    }
}

impl Params {
    pub fn new(p: f64, r: f64) -> Self {
        Params { p, r, ..Default::default() }
    }

    /// `r = p`, the setting of the unweighted reverse inequality.
    pub fn diagonal(p: f64) -> Self {
        Self::new(p, p)
    }

    pub fn with_shift(mut self, a: f64) -> Self {
        self.a = a;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = Some(beta);
        self
    }

    pub fn with_alpha_opt(mut self, alpha_opt: f64) -> Self {
        self.alpha_opt = Some(alpha_opt);
        self
    }

    /// Conjugate exponent, `1/p + 1/q = 1`.
    pub fn q(&self) -> f64 {
        conjugate(self.p)
    }

    /// `t = p / (1 - p)`.
    pub fn t(&self) -> f64 {
        self.p / (1.0 - self.p)
    }

    /// Tuning exponent, defaulting to the maximizing choice `1/p - 1`.
    pub fn alpha_opt(&self) -> f64 {
        self.alpha_opt.unwrap_or(1.0 / self.p - 1.0)
    }

    pub fn alpha_or(&self, default: f64) -> f64 {
        self.alpha.unwrap_or(default)
    }

    pub fn check_reverse(&self) -> Result<()> {
        check_open_unit("p", self.p)?;
        check_open_unit("r", self.r)
    }

    pub fn check_forward(&self) -> Result<()> {
        if !(self.p > 1.0) {
            return param_err(format!("forward families need p > 1, got {}", self.p));
        }
        let alpha = self.alpha_or(1.0);
        if !(alpha * self.p > 1.0) {
            return param_err(format!("forward families need alpha*p > 1, got {}", alpha * self.p));
        }
        Ok(())
    }

    pub fn check_exclusive_alphas(&self) -> Result<()> {
        if self.alpha.is_some() && self.alpha_opt.is_some() {
            return param_err("power exponent alpha and tuning exponent alpha_opt are mutually exclusive");
        }
        Ok(())
    }
}

/// `q = p / (p - 1)`.
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

/// The shift `(3 - 1/p) / 2` that makes the induction criterion reduce to the lemma.
pub fn critical_shift(p: f64) -> f64 {
    (3.0 - 1.0 / p) / 2.0
}

pub(crate) fn check_open_unit(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        param_err(format!("{name} must lie in (0, 1), got {x}"))
    }
}
