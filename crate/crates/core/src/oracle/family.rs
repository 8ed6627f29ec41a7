//! Truncated inequality families and their ratio evaluation.
//!
//! Every family has the shape
//! `sum_n c_n (S_n)^e  vs  K * sum_n d_n a_n^e`,
//! where `S_n` is either a tail sum `sum_{k=n}^N v_k a_k` or a head sum
//! `sum_{k=1}^n v_k a_k`. [`PowerSumForm`] holds the weights `c`, `v`, `d`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::means::{check_mean_domain, partial_weights, tail_weights, MeanSign};
use crate::error::{param_err, Error, Result};
use crate::params::{check_open_unit, Params};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    /// `sum (1/n sum_{k>=n} a_k)^p >= K sum a_n^p`.
    ReverseHardy,
    /// `sum n^-r (sum_{k>=n} a_k)^p >= K sum a_n^p n^(p-r)`.
    WeightedReverse,
    /// `sum (n^((r-p)/p) sum_{k<=n} a_k k^(-r/p))^q <= K sum a_n^q`, `q < 0`.
    Dual,
    /// `sum (sum_{k>=n} alpha k^(alpha-1) a_k / n^alpha)^p >= K sum a_n^p`.
    AlphaReverse,
    /// Stolarsky-mean weighted version of `AlphaReverse`.
    MeanReverse(MeanSign),
    /// `sum (sum_{k<=n} alpha k^(alpha-1) a_k / n^alpha)^p <= K sum a_n^p`, `p > 1`.
    AlphaForward,
    /// Stolarsky-mean weighted averages, `p > 1`; `beta = inf` gives power weights.
    MeanForward,
    /// `sum ((sum_{i<=n} i^(alpha-1))^-1 sum_{k>=n} k^(alpha-1) a_k)^p >= K sum a_n^p`.
    BetaLimit,
}

/// Which side of the constant a valid ratio lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Valid means `ratio >= K`.
    Lower,
    /// Valid means `ratio <= K`.
    Upper,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 9] = [
        FamilyKind::ReverseHardy,
        FamilyKind::WeightedReverse,
        FamilyKind::Dual,
        FamilyKind::AlphaReverse,
        FamilyKind::MeanReverse(MeanSign::Plus),
        FamilyKind::MeanReverse(MeanSign::Minus),
        FamilyKind::AlphaForward,
        FamilyKind::MeanForward,
        FamilyKind::BetaLimit,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::ReverseHardy => "reverse-hardy",
            FamilyKind::WeightedReverse => "weighted-reverse",
            FamilyKind::Dual => "dual",
            FamilyKind::AlphaReverse => "alpha-reverse",
            FamilyKind::MeanReverse(MeanSign::Plus) => "mean-reverse-plus",
            FamilyKind::MeanReverse(MeanSign::Minus) => "mean-reverse-minus",
            FamilyKind::AlphaForward => "alpha-forward",
            FamilyKind::MeanForward => "mean-forward",
            FamilyKind::BetaLimit => "beta-limit",
        }
    }

    pub fn direction(&self) -> Direction {
        match self {
            FamilyKind::Dual | FamilyKind::AlphaForward | FamilyKind::MeanForward => Direction::Upper,
            _ => Direction::Lower,
        }
    }

    pub fn is_reverse(&self) -> bool {
        self.direction() == Direction::Lower
    }

    /// Whether inputs must be strictly positive (negative exponent).
    pub fn needs_positive(&self) -> bool {
        matches!(self, FamilyKind::Dual)
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FamilyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = FamilyKind::ALL.iter().map(|k| k.name()).collect();
                Error::Parameter(format!("unknown family '{s}', expected one of {}", names.join(", ")))
            })
    }
}

/// Weights of one truncated family; all vectors have length `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSumForm {
    pub exponent: f64,
    pub tail: bool,
    /// Outer weights `c_n`.
    pub outer: Vec<f64>,
    /// Inner weights `v_k`.
    pub inner: Vec<f64>,
    /// Right-side weights `d_n`.
    pub rhs: Vec<f64>,
}

impl PowerSumForm {
    pub fn len(&self) -> usize {
        self.outer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outer.is_empty()
    }

    /// Cumulative sums `S_n` of `v_k a_k`, tail or head.
    pub fn sums(&self, a: &[f64]) -> Vec<f64> {
        let n = a.len();
        let mut s = vec![0.0; n];
        let mut acc = 0.0;
        if self.tail {
            for k in (0..n).rev() {
                acc += self.inner[k] * a[k];
                s[k] = acc;
            }
        } else {
            for k in 0..n {
                acc += self.inner[k] * a[k];
                s[k] = acc;
            }
        }
        s
    }

    /// Left and right sums (without the constant).
    pub fn sides(&self, a: &[f64]) -> (f64, f64) {
        let e = self.exponent;
        let lhs = self.sums(a).iter().zip(&self.outer).map(|(s, c)| c * s.powf(e)).sum();
        let rhs = a.iter().zip(&self.rhs).map(|(x, d)| d * x.powf(e)).sum();
        (lhs, rhs)
    }
}

/// A family together with its parameters and truncation length.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityFamily {
    pub kind: FamilyKind,
    pub params: Params,
    pub n: usize,
    form: PowerSumForm,
    constant: f64,
}

fn powers(n: usize, e: f64) -> Vec<f64> {
    (1..=n).map(|k| (k as f64).powf(e)).collect()
}

fn require_alpha(params: &Params) -> Result<f64> {
    match params.alpha {
        Some(a) if a > 0.0 && a.is_finite() => Ok(a),
        Some(a) => param_err(format!("alpha must be positive and finite, got {a}")),
        None => param_err("this family needs alpha"),
    }
}

fn prefix_power_inverse(partial: &[f64], p: f64) -> Vec<f64> {
    let mut acc = 0.0;
    partial
        .iter()
        .map(|w| {
            acc += w;
            acc.powf(-p)
        })
        .collect()
}

impl InequalityFamily {
    pub fn new(kind: FamilyKind, params: Params, n: usize) -> Result<Self> {
        if n == 0 {
            return param_err("truncation length N must be positive");
        }
        let p = params.p;
        let ones = vec![1.0; n];
        let (form, constant) = match kind {
            FamilyKind::ReverseHardy => {
                check_open_unit("p", p)?;
                let form = PowerSumForm { exponent: p, tail: true, outer: powers(n, -p), inner: ones.clone(), rhs: ones };
                (form, (p / (1.0 - p)).powf(p))
            }
            FamilyKind::WeightedReverse => {
                params.check_reverse()?;
                let r = params.r;
                let form = PowerSumForm { exponent: p, tail: true, outer: powers(n, -r), inner: ones, rhs: powers(n, p - r) };
                (form, (p / (1.0 - r)).powf(p))
            }
            FamilyKind::Dual => {
                params.check_reverse()?;
                let (r, q) = (params.r, params.q());
                let form = PowerSumForm {
                    exponent: q,
                    tail: false,
                    outer: powers(n, (r - p) * q / p),
                    inner: powers(n, -r / p),
                    rhs: ones,
                };
                (form, (p / (1.0 - r)).powf(q))
            }
            FamilyKind::AlphaReverse => {
                check_open_unit("p", p)?;
                let alpha = require_alpha(&params)?;
                check_alpha_p_below_one(alpha, p)?;
                let inner = powers(n, alpha - 1.0).into_iter().map(|x| alpha * x).collect();
                let form = PowerSumForm { exponent: p, tail: true, outer: powers(n, -alpha * p), inner, rhs: ones };
                (form, reverse_alpha_constant(alpha, p))
            }
            FamilyKind::MeanReverse(sign) => {
                check_open_unit("p", p)?;
                let alpha = require_alpha(&params)?;
                let beta = params.beta.ok_or_else(|| Error::Parameter("mean families need beta".into()))?;
                check_mean_domain(alpha, beta, sign)?;
                check_alpha_p_below_one(alpha, p)?;
                let outer = prefix_power_inverse(&partial_weights(alpha, beta, n)?, p);
                let inner = tail_weights(alpha, beta, sign, n)?;
                (PowerSumForm { exponent: p, tail: true, outer, inner, rhs: ones }, reverse_alpha_constant(alpha, p))
            }
            FamilyKind::BetaLimit => {
                check_open_unit("p", p)?;
                let alpha = require_alpha(&params)?;
                if !(alpha < 1.0) {
                    return param_err(format!("beta-limit family needs 0 < alpha < 1, got {alpha}"));
                }
                let w = powers(n, alpha - 1.0);
                let outer = prefix_power_inverse(&w, p);
                (PowerSumForm { exponent: p, tail: true, outer, inner: w, rhs: ones }, reverse_alpha_constant(alpha, p))
            }
            FamilyKind::AlphaForward => {
                let alpha = require_alpha(&params)?;
                params.check_forward()?;
                let inner = powers(n, alpha - 1.0).into_iter().map(|x| alpha * x).collect();
                let form = PowerSumForm { exponent: p, tail: false, outer: powers(n, -alpha * p), inner, rhs: ones };
                (form, forward_alpha_constant(alpha, p))
            }
            FamilyKind::MeanForward => {
                let alpha = require_alpha(&params)?;
                params.check_forward()?;
                let beta = params.beta.unwrap_or(f64::INFINITY);
                if !(beta >= alpha && beta > 0.0) {
                    return param_err(format!("mean-forward family needs beta >= alpha, got beta = {beta}"));
                }
                let w = partial_weights(alpha, beta, n)?;
                let outer = prefix_power_inverse(&w, p);
                (PowerSumForm { exponent: p, tail: false, outer, inner: w, rhs: ones }, forward_alpha_constant(alpha, p))
            }
        };
        Ok(InequalityFamily { kind, params, n, form, constant })
    }

    pub fn form(&self) -> &PowerSumForm {
        &self.form
    }

    /// Sharp constant of the family.
    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn direction(&self) -> Direction {
        self.kind.direction()
    }

    /// Absolute tolerance used for pass/fail decisions.
    pub fn tolerance(&self) -> f64 {
        1e-9 * self.constant.max(1.0)
    }

    /// Whether `ratio` is on the valid side of the constant.
    pub fn passes(&self, ratio: f64) -> bool {
        match self.direction() {
            Direction::Lower => ratio >= self.constant - self.tolerance(),
            Direction::Upper => ratio <= self.constant + self.tolerance(),
        }
    }

    pub(crate) fn check_input(&self, a: &[f64]) -> Result<()> {
        if a.len() != self.n {
            return Err(Error::Length(format!("sequence has length {}, family has N = {}", a.len(), self.n)));
        }
        if a.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return param_err("sequence entries must be finite and nonnegative");
        }
        if a.iter().all(|&x| x == 0.0) {
            return Err(Error::UndefinedRatio);
        }
        if self.kind.needs_positive() && a.iter().any(|&x| x == 0.0) {
            return param_err("the dual family has a negative exponent and needs strictly positive entries");
        }
        Ok(())
    }

    /// `LHS / RHS` with the constant factored out.
    pub fn ratio(&self, a: &[f64]) -> Result<f64> {
        self.check_input(a)?;
        let (lhs, rhs) = self.form.sides(a);
        Ok(lhs / rhs)
    }

    /// Ratios of all unit vectors `e_1 ..= e_N` in `O(N)`; `None` for the dual family.
    pub fn unit_vector_ratios(&self) -> Option<Vec<f64>> {
        if self.kind.needs_positive() {
            return None;
        }
        let f = &self.form;
        let n = self.n;
        // e_j gives S_n = v_j on the support of the cumulative sum.
        let mut covered = vec![0.0; n];
        let mut acc = 0.0;
        if f.tail {
            for j in 0..n {
                acc += f.outer[j];
                covered[j] = acc;
            }
        } else {
            for j in (0..n).rev() {
                acc += f.outer[j];
                covered[j] = acc;
            }
        }
        Some((0..n).map(|j| f.inner[j].powf(f.exponent) * covered[j] / f.rhs[j]).collect())
    }

    /// `a_n = n^(-x)` with `x` from [`extremal_exponent`](Self::extremal_exponent).
    pub fn extremal_sequence(&self, eps: f64) -> Vec<f64> {
        let x = self.extremal_exponent(eps);
        (1..=self.n).map(|k| (k as f64).powf(-x)).collect()
    }

    /// Decay exponent of the extremal sequence: `1 + (1-r)/p + eps` for the
    /// weighted family, `1/e + eps` for other positive exponents `e`, and
    /// `1/e - eps` for the dual family (`e = q < 0`, so `a_n` grows).
    pub fn extremal_exponent(&self, eps: f64) -> f64 {
        let p = self.params.p;
        match self.kind {
            FamilyKind::WeightedReverse => 1.0 + (1.0 - self.params.r) / p + eps,
            FamilyKind::Dual => 1.0 / self.form.exponent - eps,
            _ => 1.0 / self.form.exponent + eps,
        }
    }
}

fn check_alpha_p_below_one(alpha: f64, p: f64) -> Result<()> {
    if !(alpha * p < 1.0) {
        return param_err(format!("need alpha < 1/p, got alpha*p = {}", alpha * p));
    }
    Ok(())
}

fn reverse_alpha_constant(alpha: f64, p: f64) -> f64 {
    (alpha * p / (1.0 - alpha * p)).powf(p)
}

fn forward_alpha_constant(alpha: f64, p: f64) -> f64 {
    (alpha * p / (alpha * p - 1.0)).powf(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit(n: usize, j: usize) -> Vec<f64> {
        let mut a = vec![0.0; n];
        a[j] = 1.0;
        a
    }

    #[test]
    fn unit_vector_examples() {
        let fam = InequalityFamily::new(FamilyKind::ReverseHardy, Params::diagonal(0.6), 10).unwrap();
        assert_relative_eq!(fam.ratio(&unit(10, 0)).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(fam.constant(), 1.5f64.powf(0.6), max_relative = 1e-15);
        assert!(!fam.passes(1.0));

        let fwd = InequalityFamily::new(FamilyKind::AlphaForward, Params::new(2.0, 2.0).with_alpha(4.0), 10).unwrap();
        let ratio = fwd.ratio(&unit(10, 0)).unwrap();
        assert!(ratio >= 16.0);
        assert_relative_eq!(fwd.constant(), (8.0f64 / 7.0).powi(2), max_relative = 1e-15);
        assert!(!fwd.passes(ratio));
    }

    #[test]
    fn unit_vector_fast_path() {
        let params = Params::new(0.3, 0.2).with_alpha(0.5).with_beta(2.0);
        for kind in [FamilyKind::WeightedReverse, FamilyKind::MeanReverse(MeanSign::Minus), FamilyKind::BetaLimit] {
            let fam = InequalityFamily::new(kind, params, 12).unwrap();
            let fast = fam.unit_vector_ratios().unwrap();
            for j in 0..12 {
                assert_relative_eq!(fast[j], fam.ratio(&unit(12, j)).unwrap(), max_relative = 1e-13);
            }
        }
        let fwd = InequalityFamily::new(FamilyKind::MeanForward, Params::new(2.0, 2.0).with_alpha(1.5), 12).unwrap();
        let fast = fwd.unit_vector_ratios().unwrap();
        for j in 0..12 {
            assert_relative_eq!(fast[j], fwd.ratio(&unit(12, j)).unwrap(), max_relative = 1e-13);
        }
    }

    #[test]
    fn input_errors() {
        let fam = InequalityFamily::new(FamilyKind::ReverseHardy, Params::diagonal(0.3), 3).unwrap();
        assert_eq!(fam.ratio(&[0.0; 3]), Err(Error::UndefinedRatio));
        assert!(matches!(fam.ratio(&[1.0; 2]), Err(Error::Length(_))));
        assert!(fam.ratio(&[1.0, -1.0, 0.0]).is_err());
        let dual = InequalityFamily::new(FamilyKind::Dual, Params::diagonal(0.3), 3).unwrap();
        assert!(dual.ratio(&[1.0, 0.0, 1.0]).is_err());
        assert!(InequalityFamily::new(FamilyKind::AlphaReverse, Params::diagonal(0.3), 3).is_err());
        assert!(InequalityFamily::new(FamilyKind::AlphaForward, Params::diagonal(0.3).with_alpha(2.0), 3).is_err());
        let bad_sign = Params::diagonal(0.2).with_alpha(0.5).with_beta(2.0);
        assert!(InequalityFamily::new(FamilyKind::MeanReverse(MeanSign::Plus), bad_sign, 3).is_err());
    }

    #[test]
    fn names_round_trip() {
        for kind in FamilyKind::ALL {
            assert_eq!(kind.name().parse::<FamilyKind>().unwrap(), kind);
        }
        assert!("hardy".parse::<FamilyKind>().is_err());
    }

    #[test]
    fn infinite_beta_matches_power_weights() {
        let a: Vec<f64> = (1..=40).map(|k| 1.0 / (k as f64 + 0.5)).collect();
        let params = Params::diagonal(0.3).with_alpha(0.6).with_beta(f64::INFINITY);
        let mean = InequalityFamily::new(FamilyKind::MeanReverse(MeanSign::Minus), params, 40).unwrap();
        let limit = InequalityFamily::new(FamilyKind::BetaLimit, params, 40).unwrap();
        assert_relative_eq!(mean.ratio(&a).unwrap(), limit.ratio(&a).unwrap(), max_relative = 1e-13);
    }

    #[test]
    fn equal_alpha_beta_matches_alpha_family_denominator() {
        // beta = alpha telescopes the denominator to n^alpha / alpha.
        let params = Params::diagonal(0.2).with_alpha(2.0).with_beta(2.0);
        let mean = InequalityFamily::new(FamilyKind::MeanReverse(MeanSign::Plus), params, 30).unwrap();
        for (i, c) in mean.form().outer.iter().enumerate() {
            let n = (i + 1) as f64;
            assert_relative_eq!(*c, (n * n / 2.0).powf(-0.2), max_relative = 1e-12);
        }
    }
}
