//! Stolarsky means and the mean-weighted families built from them.

use serde::{Deserialize, Serialize};

use crate::error::{param_err, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeanSign {
    Plus,
    Minus,
}

/// `L_r(x, y) = ((x^r - y^r) / (r (x - y)))^(1/(r-1))`.
///
/// `r = +inf` gives the limit `max(x, y)`. One argument may be zero when `r > 0`.
pub fn stolarsky_mean(r: f64, x: f64, y: f64) -> Result<f64> {
    if r == 0.0 || r == 1.0 || r.is_nan() {
        return Err(Error::UnsupportedIndex(r));
    }
    mean_unchecked(r, x, y)
}

/// Same as [`stolarsky_mean`] but also accepts the limiting index `r = 1`
/// (the identric mean), which the mean families need for `beta = 1`.
pub fn stolarsky_or_identric(r: f64, x: f64, y: f64) -> Result<f64> {
    if r == 0.0 || r.is_nan() {
        return Err(Error::UnsupportedIndex(r));
    }
    mean_unchecked(r, x, y)
}

fn mean_unchecked(r: f64, x: f64, y: f64) -> Result<f64> {
    if !(x >= 0.0 && y >= 0.0) || !x.is_finite() || !y.is_finite() {
        return param_err(format!("mean arguments must be finite and nonnegative, got ({x}, {y})"));
    }
    if x == y {
        return Err(Error::DegenerateArguments(x));
    }
    let (hi, lo) = if x > y { (x, y) } else { (y, x) };
    if r == f64::INFINITY {
        return Ok(hi);
    }
    if lo == 0.0 && r < 0.0 {
        return param_err(format!("a zero argument needs a positive index, got {r}"));
    }
    // u = lo/hi in [0, 1); work relative to hi for accuracy near u = 1.
    let one_minus_u = (hi - lo) / hi;
    let ln_u = (-one_minus_u).ln_1p();
    if r == 1.0 {
        // Identric mean: hi * exp(-u ln u / (1 - u) - 1).
        let u = lo / hi;
        let t = if lo == 0.0 { 0.0 } else { -u * ln_u / one_minus_u };
        return Ok(hi * (t - 1.0).exp());
    }
    let num = -(r * ln_u).exp_m1();
    Ok(hi * (num / (r * one_minus_u)).powf(1.0 / (r - 1.0)))
}

/// `L_beta(x, y)^(alpha - 1)` with `beta = 1` read as the identric mean.
pub fn mean_weight(alpha: f64, beta: f64, x: f64, y: f64) -> Result<f64> {
    Ok(stolarsky_or_identric(beta, x, y)?.powf(alpha - 1.0))
}

pub(crate) fn check_mean_domain(alpha: f64, beta: f64, sign: MeanSign) -> Result<()> {
    let ok = match sign {
        MeanSign::Plus => beta > 0.0 && 1f64.max(beta) <= alpha,
        MeanSign::Minus => alpha > 0.0 && alpha < 1.0 && beta >= alpha,
    };
    if !ok {
        return param_err(format!(
            "sign {sign:?} is not defined for alpha = {alpha}, beta = {beta} \
             (plus: beta > 0 and max(1, beta) <= alpha; minus: 0 < alpha < 1 and beta >= alpha)"
        ));
    }
    Ok(())
}

/// Denominator weights `L^(alpha-1)(i, i-1)` for `i = 1 ..= n`.
pub(crate) fn partial_weights(alpha: f64, beta: f64, n: usize) -> Result<Vec<f64>> {
    (1..=n).map(|i| mean_weight(alpha, beta, i as f64, i as f64 - 1.0)).collect()
}

/// Tail weights `L^(alpha-1)(k +- 1, k)` for `k = 1 ..= n`; the minus case at
/// `k = 1` uses `L(0, 1)`.
pub(crate) fn tail_weights(alpha: f64, beta: f64, sign: MeanSign, n: usize) -> Result<Vec<f64>> {
    (1..=n)
        .map(|k| {
            let k = k as f64;
            let other = match sign {
                MeanSign::Plus => k + 1.0,
                MeanSign::Minus => k - 1.0,
            };
            mean_weight(alpha, beta, other, k)
        })
        .collect()
}

/// Worst relative slack of the two comparison bounds that reduce the mean
/// family to the power-weight family:
/// `sum_{i<=n} L^(alpha-1)(i, i-1) <= n^alpha / alpha` and `L^(alpha-1)(k +- 1, k) >= k^(alpha-1)`.
pub fn comparison_bound_slack(alpha: f64, beta: f64, sign: MeanSign, n: usize) -> Result<f64> {
    check_mean_domain(alpha, beta, sign)?;
    let mut worst = f64::INFINITY;
    let mut sum = 0.0;
    for (i, w) in partial_weights(alpha, beta, n)?.into_iter().enumerate() {
        sum += w;
        let bound = ((i + 1) as f64).powf(alpha) / alpha;
        worst = worst.min(bound / sum - 1.0);
    }
    for (k, w) in tail_weights(alpha, beta, sign, n)?.into_iter().enumerate() {
        worst = worst.min(w / ((k + 1) as f64).powf(alpha - 1.0) - 1.0);
    }
    Ok(worst)
}
