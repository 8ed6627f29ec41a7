//! Factorable lower-triangular matrices `A[n][k] = lambda_k / Lambda_n` (`k <= n`):
//! application, lp-norm lower bounds and the sufficient conditions for upper bounds.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chains::ChainCheck;
use crate::error::{param_err, Error, Result};
use crate::oracle::{mean_weight, FamilyKind, InequalityFamily};
use crate::params::Params;
use crate::sampling::{log_uniform_vec, rng_for};

/// Closed-form sequence pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    /// `lambda_k = alpha k^(alpha-1)`, `Lambda_n = n^alpha`.
    PowerWeights(f64),
    /// `lambda_k = 1`, `Lambda_n = n`.
    Cesaro,
    /// `lambda_k = L_beta(k, k-1)^(alpha-1)`, `Lambda_n = sum_{k<=n} lambda_k`.
    Stolarsky(f64, f64),
}

impl Generator {
    fn lambda(&self, k: usize) -> Result<f64> {
        let k = k as f64;
        match *self {
            Generator::PowerWeights(alpha) => Ok(alpha * k.powf(alpha - 1.0)),
            Generator::Cesaro => Ok(1.0),
            Generator::Stolarsky(alpha, beta) => mean_weight(alpha, beta, k, k - 1.0),
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::PowerWeights(a) => write!(f, "power-weights({a})"),
            Generator::Cesaro => f.write_str("cesaro"),
            Generator::Stolarsky(a, b) => write!(f, "stolarsky({a},{b})"),
        }
    }
}

impl FromStr for Generator {
    type Err = Error;

    /// Parses `cesaro`, `power-weights(alpha)` or `stolarsky(alpha,beta)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "cesaro" {
            return Ok(Generator::Cesaro);
        }
        let bad = || Error::Parameter(format!("cannot parse generator '{s}'"));
        let (name, rest) = s.split_once('(').ok_or_else(bad)?;
        let args: Vec<f64> = rest
            .strip_suffix(')')
            .ok_or_else(bad)?
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        match (name.trim(), args.as_slice()) {
            ("power-weights", [a]) => Ok(Generator::PowerWeights(*a)),
            ("stolarsky", [a, b]) => Ok(Generator::Stolarsky(*a, *b)),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorableMatrix {
    /// `lambda_1 ..= lambda_N`, plus `lambda_{N+1}` when a generator supplies it.
    lambda: Vec<f64>,
    /// `Lambda_1 ..= Lambda_N`.
    big_lambda: Vec<f64>,
    pub generator: Option<Generator>,
    /// `Lambda_n = sum_{k<=n} lambda_k`.
    pub weighted_mean: bool,
}

fn check_positive(name: &str, xs: &[f64]) -> Result<()> {
    match xs.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
        Some(i) => param_err(format!("{name}_{} = {} is not positive", i + 1, xs[i])),
        None => Ok(()),
    }
}

impl FactorableMatrix {
    pub fn from_generator(generator: Generator, n: usize) -> Result<Self> {
        if n == 0 {
            return param_err("dimension N must be positive");
        }
        match generator {
            Generator::PowerWeights(alpha) if !(alpha > 0.0) => {
                return param_err(format!("power weights need alpha > 0, got {alpha}"))
            }
            Generator::Stolarsky(alpha, beta) if !(alpha > 0.0 && beta > 0.0) => {
                return param_err(format!("stolarsky weights need alpha, beta > 0, got ({alpha}, {beta})"))
            }
            _ => {}
        }
        let lambda: Vec<f64> = (1..=n + 1).map(|k| generator.lambda(k)).collect::<Result<_>>()?;
        let big_lambda: Vec<f64> = match generator {
            Generator::PowerWeights(alpha) => (1..=n).map(|k| (k as f64).powf(alpha)).collect(),
            Generator::Cesaro => (1..=n).map(|k| k as f64).collect(),
            Generator::Stolarsky(..) => {
                let mut acc = 0.0;
                lambda[..n].iter().map(|l| {
                    acc += l;
                    acc
                }).collect()
            }
        };
        check_positive("lambda", &lambda)?;
        let weighted_mean = !matches!(generator, Generator::PowerWeights(a) if a != 1.0);
        Ok(FactorableMatrix { lambda, big_lambda, generator: Some(generator), weighted_mean })
    }

    /// Raw sequences of equal length `N`. Without `lambda_{N+1}` the `n = N`
    /// sufficient conditions cannot be formed and are skipped.
    pub fn from_raw(lambda: Vec<f64>, big_lambda: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() || lambda.len() != big_lambda.len() {
            return Err(Error::Length(format!(
                "lambda has length {}, Lambda has length {}",
                lambda.len(),
                big_lambda.len()
            )));
        }
        check_positive("lambda", &lambda)?;
        check_positive("Lambda", &big_lambda)?;
        let mut acc = 0.0;
        let weighted_mean = lambda.iter().zip(&big_lambda).all(|(l, b)| {
            acc += l;
            ((acc - b) / b).abs() < 1e-12
        });
        Ok(FactorableMatrix { lambda, big_lambda, generator: None, weighted_mean })
    }

    pub fn n(&self) -> usize {
        self.big_lambda.len()
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda[..self.n()]
    }

    pub fn big_lambda(&self) -> &[f64] {
        &self.big_lambda
    }

    /// `lambda_{N+1}`, when known.
    pub fn lambda_next(&self) -> Option<f64> {
        self.lambda.get(self.n()).copied()
    }

    /// Whether the `n = N` condition of the sufficient checks is unavailable.
    pub fn drops_last_condition(&self) -> bool {
        self.lambda_next().is_none()
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::Length(format!("vector has length {}, matrix has N = {}", x.len(), self.n())));
        }
        Ok(())
    }

    /// `y_n = (sum_{k<=n} lambda_k x_k) / Lambda_n`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        let mut acc = 0.0;
        Ok(x.iter()
            .zip(&self.lambda)
            .zip(&self.big_lambda)
            .map(|((x, l), b)| {
                acc += l * x;
                acc / b
            })
            .collect())
    }

    /// `z_k = lambda_k sum_{n>=k} y_n / Lambda_n`.
    pub fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_len(y)?;
        let n = self.n();
        let mut z = vec![0.0; n];
        let mut acc = 0.0;
        for k in (0..n).rev() {
            acc += y[k] / self.big_lambda[k];
            z[k] = self.lambda[k] * acc;
        }
        Ok(z)
    }
}

fn lp_norm(x: &[f64], p: f64) -> f64 {
    let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if m == 0.0 {
        return 0.0;
    }
    m * x.iter().map(|v| (v.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
}

/// `||A x||_p / ||x||_p`.
pub fn lp_ratio(matrix: &FactorableMatrix, x: &[f64], p: f64) -> Result<f64> {
    let d = lp_norm(x, p);
    if d == 0.0 {
        return Err(Error::UndefinedRatio);
    }
    Ok(lp_norm(&matrix.apply(x)?, p) / d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormEstimate {
    pub lower_bound: f64,
    /// Unit-norm vector attaining `lower_bound`.
    pub witness: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Ratio of each iterate.
    pub history: Vec<f64>,
    /// Largest relative gap between an iterate's ratio and its direct recomputation.
    pub max_recompute_error: f64,
}

/// Lower bound for `||A||_p` by the nonlinear power iteration
/// `x <- (A^T (A x)^(p-1))^(q-1)`, started at `x_n = n^(-(1/p + 1/(2p)))`.
///
/// Every iterate is a feasible vector, so each ratio is a certified lower bound;
/// the best is kept.
pub fn lp_norm_lower(matrix: &FactorableMatrix, p: f64, iters: usize) -> Result<NormEstimate> {
    if !(p > 1.0) {
        return param_err(format!("lp norm needs p > 1, got {p}"));
    }
    let q = p / (p - 1.0);
    let decay = 1.0 / p + 1.0 / (2.0 * p);
    let mut x: Vec<f64> = (1..=matrix.n()).map(|k| (k as f64).powf(-decay)).collect();
    let mut est = NormEstimate {
        lower_bound: 0.0,
        witness: Vec::new(),
        iterations: 0,
        converged: false,
        history: Vec::new(),
        max_recompute_error: 0.0,
    };
    let mut prev = 0.0;
    for _ in 0..iters.max(1) {
        let nx = lp_norm(&x, p);
        x.iter_mut().for_each(|v| *v /= nx);
        let y = matrix.apply(&x)?;
        let ratio = lp_norm(&y, p);
        let direct = lp_ratio(matrix, &x, p)?;
        est.max_recompute_error = est.max_recompute_error.max(((direct - ratio) / ratio).abs());
        est.history.push(ratio);
        est.iterations += 1;
        if ratio > est.lower_bound {
            est.lower_bound = ratio;
            est.witness = x.clone();
        }
        if (ratio - prev).abs() <= 1e-14 * ratio {
            est.converged = true;
            break;
        }
        prev = ratio;
        let yp: Vec<f64> = y.iter().map(|v| v.powf(p - 1.0)).collect();
        x = matrix.apply_transpose(&yp)?.into_iter().map(|v| v.powf(q - 1.0)).collect();
    }
    Ok(est)
}

fn check_shift(matrix: &FactorableMatrix, p: f64, l: f64, a: f64) -> Result<()> {
    if !(p > 1.0) {
        return param_err(format!("need p > 1, got {p}"));
    }
    if !(l > 0.0 && l < p) {
        return param_err(format!("need 0 < L < p, got L = {l}"));
    }
    for (n, (lam, big)) in matrix.lambda().iter().zip(matrix.big_lambda()).enumerate() {
        if !(big + a * lam > 0.0) {
            return param_err(format!("Lambda_n + a lambda_n <= 0 at n = {}", n + 1));
        }
    }
    Ok(())
}

/// Number of indices that can be checked (`N`, or `N - 1` without `lambda_{N+1}`).
fn checked_len(matrix: &FactorableMatrix) -> usize {
    if matrix.drops_last_condition() {
        matrix.n() - 1
    } else {
        matrix.n()
    }
}

/// Checks `sum_{k<=n} lambda_k prod_{i=k}^n b_i^(1/(p-1)) <= p/(p-L) (Lambda_n + a lambda_n)`
/// with `b_n = ((p-L)/p)(1 + a lambda_n/Lambda_n)^(p-1) lambda_n/Lambda_n + lambda_n/lambda_{n+1}`.
///
/// Slack is `rhs / lhs - 1`. A pass certifies `U_p <= (p/(p-L))^p` for the truncation.
pub fn check_thm31(matrix: &FactorableMatrix, p: f64, l: f64, a: f64) -> Result<ChainCheck> {
    check_shift(matrix, p, l, a)?;
    let (lam, big) = (&matrix.lambda, &matrix.big_lambda);
    let e = 1.0 / (p - 1.0);
    let k = p / (p - l);
    let mut t = 0.0;
    let slacks = (0..checked_len(matrix))
        .map(|n| {
            let ratio = lam[n] / big[n];
            let b = ((p - l) / p) * (1.0 + a * ratio).powf(p - 1.0) * ratio + lam[n] / lam[n + 1];
            t = (t + lam[n]) * b.powf(e);
            k * (big[n] + a * lam[n]) / t - 1.0
        })
        .collect();
    Ok(ChainCheck::new(slacks, 1))
}

/// Checks the per-n condition of the corollary (with `Lambda_0 = lambda_0 = 0`); slack `rhs / lhs - 1`.
pub fn check_cor1(matrix: &FactorableMatrix, p: f64, l: f64, a: f64) -> Result<ChainCheck> {
    check_shift(matrix, p, l, a)?;
    let (lam, big) = (&matrix.lambda, &matrix.big_lambda);
    let slacks = (0..checked_len(matrix))
        .map(|n| {
            let (lam_prev, big_prev) = if n == 0 { (0.0, 0.0) } else { (lam[n - 1], big[n - 1]) };
            let ratio = lam[n] / big[n];
            let shift = (1.0 + a * ratio).powf(p - 1.0);
            let lhs = ((p - l) / p) * shift + big[n] / lam[n + 1];
            let inner = (1.0 - l / p) * ratio + big_prev / big[n] + a * lam_prev / big[n];
            let rhs = (big[n] / lam[n]) * shift * inner.powf(1.0 - p);
            rhs / lhs - 1.0
        })
        .collect();
    Ok(ChainCheck::new(slacks, 1))
}

/// Indices `n` where the corollary condition holds for every `m <= n` but the
/// theorem condition fails at `n`. The corollary is a sufficient condition
/// for the theorem's, so this must be empty.
pub fn implication_violations(matrix: &FactorableMatrix, p: f64, l: f64, a: f64) -> Result<Vec<usize>> {
    let cor = check_cor1(matrix, p, l, a)?;
    let thm = check_thm31(matrix, p, l, a)?;
    let mut out = Vec::new();
    for (i, (c, t)) in cor.slacks.iter().zip(&thm.slacks).enumerate() {
        if *c < -crate::scan::TOL_SCAN {
            break;
        }
        if *t < -crate::scan::TOL_SCAN {
            out.push(i + 1);
        }
    }
    Ok(out)
}

/// Largest `||A x||_p / ||x||_p` over seeded log-uniform vectors.
pub fn random_ratio_max(matrix: &FactorableMatrix, p: f64, samples: usize, seed: u64) -> Result<f64> {
    let ratios: Vec<Result<f64>> = (0..samples)
        .into_par_iter()
        .map(|i| lp_ratio(matrix, &log_uniform_vec(&mut rng_for(seed, i as u64), matrix.n()), p))
        .collect();
    ratios.into_iter().try_fold(f64::NEG_INFINITY, |m, r| Ok(m.max(r?)))
}

/// Random-sample check of the three forward averaging families against `(alpha p/(alpha p - 1))^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ForwardFamilyReport {
    pub constant: f64,
    /// Largest ratio seen for the power-weight family.
    pub worst_power: f64,
    /// Largest ratio seen for the normalized power-weight family (`beta = inf`).
    pub worst_normalized: f64,
    /// Largest ratio seen for the Stolarsky-weight family, when `beta >= alpha >= 1`.
    pub worst_mean: Option<f64>,
    /// Whether each row of the normalized weights is dominated by the power weights.
    pub domination_ok: bool,
    pub pass: bool,
}

pub fn verify_forward_family(alpha: f64, beta: f64, p: f64, n: usize, samples: usize, seed: u64) -> Result<ForwardFamilyReport> {
    let params = Params::new(p, p).with_alpha(alpha);
    let power = InequalityFamily::new(FamilyKind::AlphaForward, params, n)?;
    let normalized = InequalityFamily::new(FamilyKind::MeanForward, params.with_beta(f64::INFINITY), n)?;
    let mean = if beta >= alpha && alpha >= 1.0 {
        Some(InequalityFamily::new(FamilyKind::MeanForward, params.with_beta(beta), n)?)
    } else {
        None
    };
    let worst = |fam: &InequalityFamily| -> Result<f64> {
        let ratios: Vec<Result<f64>> = (0..samples)
            .into_par_iter()
            .map(|i| fam.ratio(&log_uniform_vec(&mut rng_for(seed, i as u64), n)))
            .collect();
        ratios.into_iter().try_fold(f64::NEG_INFINITY, |m, r| Ok(m.max(r?)))
    };
    let worst_power = worst(&power)?;
    let worst_normalized = worst(&normalized)?;
    let worst_mean = mean.as_ref().map(&worst).transpose()?;
    // k^(alpha-1) / sum_{i<=n} i^(alpha-1) <= alpha k^(alpha-1) / n^alpha, i.e. n^alpha/alpha <= sum_{i<=n} i^(alpha-1).
    let domination_ok = if alpha >= 1.0 {
        let mut acc = 0.0;
        (1..=n).all(|m| {
            acc += (m as f64).powf(alpha - 1.0);
            (m as f64).powf(alpha) / alpha <= acc * (1.0 + 1e-12)
        })
    } else {
        true
    };
    let constant = power.constant();
    let ok = |r: f64| power.passes(r);
    let pass = ok(worst_power) && ok(worst_normalized) && worst_mean.map_or(true, ok) && domination_ok;
    Ok(ForwardFamilyReport { constant, worst_power, worst_normalized, worst_mean, domination_ok, pass })
}
