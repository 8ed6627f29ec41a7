//! Weight-sequence constructions and the finite induction conditions they must satisfy.
//!
//! Sequences are stored zero-based: `b[i]` is `b_{i+1}`. Every verifier
//! returns per-index relative slacks (nonnegative means the condition holds)
//! together with a [`ScanResult`] whose `argmin` is the one-based index.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::criteria::best_constant;
use crate::error::{param_err, Error, Result};
use crate::params::{check_open_unit, Params};
use crate::scan::{ScanResult, TOL_SCAN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstructionTag {
    Main,
    Alternative,
    Section4,
    Nu,
}

/// A constructed weight sequence. Arrays that a construction does not
/// define are left empty (`b` and `w` for the `nu` chain, `nu` otherwise).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightChain {
    pub params: Params,
    pub n: usize,
    /// `b_1 ..= b_N`.
    pub b: Vec<f64>,
    /// `w_1 ..= w_{N+1}`.
    pub w: Vec<f64>,
    /// `nu_1 ..= nu_{N+1}`.
    pub nu: Vec<f64>,
    pub tag: ConstructionTag,
}

/// Verifier output: the summary plus the slack of every checked index.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainCheck {
    pub scan: ScanResult,
    pub slacks: Vec<f64>,
    /// One-based index of `slacks[0]`.
    pub first_index: usize,
}

impl ChainCheck {
    pub(crate) fn new(slacks: Vec<f64>, first_index: usize) -> Self {
        ChainCheck { scan: ScanResult::from_slacks(&slacks, first_index), slacks, first_index }
    }

    pub fn pass(&self) -> bool {
        self.scan.pass
    }

    pub fn first_failure(&self) -> Option<usize> {
        ScanResult::first_failure(&self.slacks, self.first_index)
    }

    /// Slack at one-based index `n`.
    pub fn slack_at(&self, n: usize) -> Option<f64> {
        n.checked_sub(self.first_index).and_then(|i| self.slacks.get(i).copied())
    }
}

fn check_len(n: usize) -> Result<()> {
    if n == 0 {
        return param_err("chain length N must be positive");
    }
    Ok(())
}

/// `w_1 = 1`, `w_{n+1} = w_n b_n^(1-p)`, i.e. `b_n^(p-1) = w_n / w_{n+1}`.
fn weights_from_b(b: &[f64], p: f64) -> Vec<f64> {
    let mut w = Vec::with_capacity(b.len() + 1);
    w.push(1.0);
    for &bn in b {
        let last = *w.last().unwrap();
        w.push(last * bn.powf(1.0 - p));
    }
    w
}

/// Main construction: `b_n` chosen so the tuned induction identity holds with equality.
pub fn build_b_chain(p: f64, r: f64, a: f64, alpha_opt: Option<f64>, n: usize) -> Result<WeightChain> {
    check_open_unit("p", p)?;
    check_open_unit("r", r)?;
    check_len(n)?;
    if !(1.0 + a > 0.0) {
        return param_err(format!("need n + a > 0 for all n >= 1, got a = {a}"));
    }
    let mut params = Params::new(p, r).with_shift(a);
    params.alpha_opt = alpha_opt;
    let c = best_constant(p, r)?;
    let s = 1.0 / (1.0 - p);
    let lead = c.powf(-params.alpha_opt() * s);
    let b: Vec<f64> = (1..=n)
        .map(|k| {
            let k = k as f64;
            lead * k.powf(p * s) / (k + a).powf(s) + (k / (k + 1.0)).powf(r * s)
        })
        .collect();
    let w = weights_from_b(&b, p);
    Ok(WeightChain { params, n, b, w, nu: Vec::new(), tag: ConstructionTag::Main })
}

/// Partial-product sums `T_n = sum_{k<=n} prod_{i=k}^n f_i` via `T_n = (T_{n-1} + 1) f_n`.
pub fn partial_product_sums(factors: &[f64]) -> Vec<f64> {
    let mut t = 0.0;
    factors
        .iter()
        .map(|&f| {
            t = (t + 1.0) * f;
            t
        })
        .collect()
}

fn expect_tag(chain: &WeightChain, tag: ConstructionTag) -> Result<()> {
    if chain.tag != tag {
        return param_err(format!("verifier expects a {:?} chain, got {:?}", tag, chain.tag));
    }
    Ok(())
}

/// Checks `sum_{k<=n} prod_{i=k}^n b_i^(p-1) >= (n + a) c^(1 + alpha_opt)` for every `n <= N`.
///
/// Slack is `lhs / rhs - 1`.
pub fn verify_induction_43(chain: &WeightChain) -> Result<ChainCheck> {
    expect_tag(chain, ConstructionTag::Main)?;
    let Params { p, r, a, .. } = chain.params;
    let target = best_constant(p, r)?.powf(1.0 + chain.params.alpha_opt());
    let factors: Vec<f64> = chain.b.iter().map(|&b| b.powf(p - 1.0)).collect();
    let slacks = partial_product_sums(&factors)
        .into_iter()
        .enumerate()
        .map(|(i, t)| t / ((i as f64 + 1.0 + a) * target) - 1.0)
        .collect();
    Ok(ChainCheck::new(slacks, 1))
}

/// `nu_1 = 0`, `nu_n = (n + a - 1) p / (1 - r)` for `2 <= n <= N + 1`.
pub fn build_nu_chain(p: f64, r: f64, a: f64, n: usize) -> Result<WeightChain> {
    check_open_unit("p", p)?;
    check_open_unit("r", r)?;
    check_len(n)?;
    if !(1.0 + a > 0.0) {
        return param_err(format!("need n + a > 0 for all n >= 1, got a = {a}"));
    }
    let k = (1.0 - r) / p;
    let nu = (1..=n + 1)
        .map(|m| if m == 1 { 0.0 } else { (m as f64 + a - 1.0) / k })
        .collect();
    Ok(WeightChain {
        params: Params::new(p, r).with_shift(a),
        n,
        b: Vec::new(),
        w: Vec::new(),
        nu,
        tag: ConstructionTag::Nu,
    })
}

/// Checks the dual induction condition
/// `(1+nu_n)^s / n^(rs) - nu_{n+1}^s / (n+1)^(rs) >= n^((p-r)s) (p/(1-r))^(ps)`, `s = 1/(1-p)`.
pub fn verify_303(chain: &WeightChain) -> Result<ChainCheck> {
    expect_tag(chain, ConstructionTag::Nu)?;
    let Params { p, r, .. } = chain.params;
    let s = 1.0 / (1.0 - p);
    let k = (p / (1.0 - r)).powf(p * s);
    let slacks = (1..=chain.n)
        .map(|m| {
            let n = m as f64;
            let lhs = (1.0 + chain.nu[m - 1]).powf(s) / n.powf(r * s)
                - chain.nu[m].powf(s) / (n + 1.0).powf(r * s);
            let rhs = n.powf((p - r) * s) * k;
            lhs / rhs - 1.0
        })
        .collect();
    Ok(ChainCheck::new(slacks, 1))
}

/// `w_1 = 1`, `w_{n+1} = (n + 1/p - alpha - 1) / n * w_n`.
pub fn build_w_chain_sec4(p: f64, alpha: f64, n: usize) -> Result<WeightChain> {
    if !(p > 0.0 && p < 0.5) {
        return param_err(format!("section-4 chain needs 0 < p < 1/2, got {p}"));
    }
    if !(alpha > 0.0 && alpha < 1.0 / p) {
        return param_err(format!("section-4 chain needs 0 < alpha < 1/p, got alpha = {alpha}"));
    }
    check_len(n)?;
    let d = 1.0 / p - alpha - 1.0;
    let mut w = Vec::with_capacity(n + 1);
    w.push(1.0);
    for k in 1..=n {
        let k = k as f64;
        let last = *w.last().unwrap();
        w.push((k + d) / k * last);
    }
    let b = (1..=n).map(|k| (w[k - 1] / w[k]).powf(1.0 / (p - 1.0))).collect();
    Ok(WeightChain {
        params: Params::diagonal(p).with_alpha(alpha),
        n,
        b,
        w,
        nu: Vec::new(),
        tag: ConstructionTag::Section4,
    })
}

/// Largest relative residual of `sum_{k<=n} w_k = (n + 1/p - alpha - 1) / (1/p - alpha) * w_n`.
pub fn section4_identity_residual(chain: &WeightChain) -> Result<f64> {
    expect_tag(chain, ConstructionTag::Section4)?;
    let p = chain.params.p;
    let alpha = chain.params.alpha_or(1.0);
    let d = 1.0 / p - alpha - 1.0;
    let mut sum = 0.0;
    let mut worst = 0.0f64;
    for n in 1..=chain.n {
        sum += chain.w[n - 1];
        let closed = (n as f64 + d) / (d + 1.0) * chain.w[n - 1];
        worst = worst.max(((sum - closed) / closed).abs());
    }
    Ok(worst)
}

/// Checks the section-4 induction condition at every `n <= N` (slack `rhs / lhs - 1`).
///
/// A nonpositive right-side difference yields a slack `<= -1`, i.e. a failure at that `n`.
pub fn verify_35(chain: &WeightChain) -> Result<ChainCheck> {
    expect_tag(chain, ConstructionTag::Section4)?;
    let p = chain.params.p;
    let alpha = chain.params.alpha_or(1.0);
    let e = 1.0 / (p - 1.0);
    let ap = alpha * p;
    let k = (ap / (1.0 - ap)).powf(p / (p - 1.0));
    let mut sum = 0.0;
    let slacks = (1..=chain.n)
        .map(|m| {
            let n = m as f64;
            sum += chain.w[m - 1];
            let lhs = sum.powf(e);
            let diff = chain.w[m - 1].powf(e) / n.powf(ap / (1.0 - p))
                - chain.w[m].powf(e) / (n + 1.0).powf(ap / (1.0 - p));
            let rhs = k * (alpha * n.powf(alpha - 1.0)).powf(p / (1.0 - p)) * diff;
            rhs / lhs - 1.0
        })
        .collect();
    Ok(ChainCheck::new(slacks, 1))
}

/// Variant construction with shift `c = (1/p - 1)/2`, solved in closed form for each `b_n`.
pub fn alternative_b_chain(p: f64, n: usize) -> Result<WeightChain> {
    if !(p > 1.0 / 3.0 && p < 0.5) {
        return param_err(format!("alternative chain needs 1/3 < p < 1/2, got {p}"));
    }
    check_len(n)?;
    let t = p / (1.0 - p);
    let s = 1.0 / (1.0 - p);
    let c = (1.0 / p - 1.0) / 2.0;
    let mut b = Vec::with_capacity(n);
    b.push(1.0 / (2f64.powf(t) * (1.0 - t.powf(t))));
    for k in 2..=n {
        let k = k as f64;
        let inner = k.powf(-t) - (k + c).powf(-s) / t;
        b.push(1.0 / ((k + 1.0).powf(t) * inner));
    }
    if let Some(i) = b.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Parameter(format!("b_{} = {} is not positive", i + 1, b[i])));
    }
    let w = weights_from_b(&b, p);
    Ok(WeightChain {
        params: Params::diagonal(p).with_shift(c),
        n,
        b,
        w,
        nu: Vec::new(),
        tag: ConstructionTag::Alternative,
    })
}

/// Checks `sum_{k<n} prod_{i=k}^{n-1} b_i^(p-1) + 1 >= (n + c) t` for `2 <= n <= N + 1`.
///
/// Index 2 is the base case, which is equivalent to the rewritten `crit27`.
pub fn verify_alternative(chain: &WeightChain) -> Result<ChainCheck> {
    expect_tag(chain, ConstructionTag::Alternative)?;
    let p = chain.params.p;
    let c = chain.params.a;
    let t = p / (1.0 - p);
    let factors: Vec<f64> = chain.b.iter().map(|&b| b.powf(p - 1.0)).collect();
    let slacks = partial_product_sums(&factors)
        .into_iter()
        .enumerate()
        .map(|(i, tn)| (tn + 1.0) / ((i as f64 + 2.0 + c) * t) - 1.0)
        .collect();
    Ok(ChainCheck::new(slacks, 2))
}

fn check_same_len(name: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::Length(format!("{name} has length {got}, expected {want}")));
    }
    Ok(())
}

/// Both sides of the weighted tail-sum bound
/// `sum a_n^p <= sum_n w_n (sum_{k>=n} W_k^(-1/(1-p)))^(1-p) (sum_{k>=n} a_k)^p`.
pub fn ineq51_sides(w: &[f64], a: &[f64], p: f64) -> Result<(f64, f64)> {
    check_open_unit("p", p)?;
    check_same_len("a", a.len(), w.len())?;
    if w.is_empty() {
        return param_err("need N >= 1");
    }
    if w.iter().any(|&x| !(x > 0.0)) || a.iter().any(|&x| !(x >= 0.0)) {
        return param_err("w must be positive and a nonnegative");
    }
    let n = w.len();
    let mut cumulative = 0.0;
    let inv: Vec<f64> = w
        .iter()
        .map(|&x| {
            cumulative += x;
            cumulative.powf(-1.0 / (1.0 - p))
        })
        .collect();
    let (mut tail_inv, mut tail_a) = (0.0, 0.0);
    let mut rhs = 0.0;
    for i in (0..n).rev() {
        tail_inv += inv[i];
        tail_a += a[i];
        rhs += w[i] * tail_inv.powf(1.0 - p) * tail_a.powf(p);
    }
    let lhs = a.iter().map(|x| x.powf(p)).sum();
    Ok((lhs, rhs))
}

pub fn verify_51(w: &[f64], a: &[f64], p: f64) -> Result<bool> {
    let (lhs, rhs) = ineq51_sides(w, a, p)?;
    Ok(lhs <= rhs * (1.0 + TOL_SCAN))
}

fn all_positive(name: &str, xs: &[f64]) -> Result<()> {
    if xs.iter().all(|&x| x > 0.0 && x.is_finite()) {
        Ok(())
    } else {
        param_err(format!("{name} must be positive"))
    }
}

/// Both sides of the two-sequence lemma at exponent `p` (`p != 0`, `p < 1`), `n = len >= 2`.
pub fn lemma61_sides(lambda: &[f64], a: &[f64], mu: &[f64], eta: &[f64], p: f64) -> Result<(f64, f64)> {
    let n = lambda.len();
    if n < 2 {
        return param_err("lemma needs n >= 2");
    }
    check_same_len("a", a.len(), n)?;
    check_same_len("mu", mu.len(), n)?;
    check_same_len("eta", eta.len(), n)?;
    if p == 0.0 || !(p < 1.0) {
        return param_err(format!("lemma needs p != 0 and p < 1, got {p}"));
    }
    for (name, xs) in [("lambda", lambda), ("a", a), ("mu", mu), ("eta", eta)] {
        all_positive(name, xs)?;
    }
    let ordered = if p > 0.0 {
        mu.iter().zip(eta).all(|(m, e)| m <= e)
    } else {
        mu.iter().zip(eta).all(|(m, e)| m >= e)
    };
    if !ordered {
        return param_err("need mu <= eta for 0 < p < 1 and mu >= eta for p < 0");
    }
    let q = p / (p - 1.0);
    let inv_p = 1.0 / p;
    let gap = |i: usize| (mu[i].powf(q) - eta[i].powf(q)).powf(1.0 / q);
    let mut partial = Vec::with_capacity(n);
    let mut s = 0.0;
    for i in 0..n {
        s += lambda[i] * a[i];
        partial.push(s);
    }
    // One-based i = 2..=n-1 maps to zero-based 1..n-1.
    let mut lhs: f64 = (1..n - 1).map(|i| (mu[i] - gap(i + 1)) * partial[i].powf(inv_p)).sum();
    lhs += mu[n - 1] * partial[n - 1].powf(inv_p);
    let mut rhs = gap(1) * (lambda[0] * a[0]).powf(inv_p);
    rhs += (1..n).map(|i| eta[i] * (lambda[i] * a[i]).powf(inv_p)).sum::<f64>();
    Ok((lhs, rhs))
}

pub fn verify_lemma61(lambda: &[f64], a: &[f64], mu: &[f64], eta: &[f64], p: f64) -> Result<bool> {
    let (lhs, rhs) = lemma61_sides(lambda, a, mu, eta, p)?;
    Ok(lhs <= rhs + TOL_SCAN * rhs.abs().max(lhs.abs()))
}

/// Both sides of
/// `sum_{i<=n} ((1+nu_i)^(1-e) / lambda_i^e - nu_{i+1}^(1-e) / lambda_{i+1}^e) S_i^e <= sum a_i^e`.
///
/// `a` has length `n`; `lambda` and `nu` have length `n + 1`, with `nu_1 = 0`.
/// The bound holds for exponents `e < 0` (and `e > 1`); for `0 < e < 1` it
/// fails already at `n = 2`, so that range is rejected. The dual induction
/// uses it at the conjugate exponent `e = p/(p-1)` of a primal `0 < p < 1`.
pub fn ineq302_sides(lambda: &[f64], a: &[f64], nu: &[f64], exponent: f64) -> Result<(f64, f64)> {
    let e = exponent;
    if !(e < 0.0 || e > 1.0) {
        return param_err(format!("exponent must be negative (or > 1), got {e}"));
    }
    let n = a.len();
    if n == 0 {
        return param_err("need n >= 1");
    }
    check_same_len("lambda", lambda.len(), n + 1)?;
    check_same_len("nu", nu.len(), n + 1)?;
    all_positive("lambda", lambda)?;
    all_positive("a", a)?;
    if nu[0] != 0.0 || nu.iter().any(|&x| !(x >= 0.0)) {
        return param_err("need nu_1 = 0 and nu nonnegative");
    }
    let mut s = 0.0;
    let mut lhs = 0.0;
    for i in 0..n {
        s += lambda[i] * a[i];
        let coef = (1.0 + nu[i]).powf(1.0 - e) / lambda[i].powf(e) - nu[i + 1].powf(1.0 - e) / lambda[i + 1].powf(e);
        lhs += coef * s.powf(e);
    }
    let rhs = a.iter().map(|x| x.powf(e)).sum();
    Ok((lhs, rhs))
}

pub fn verify_302(lambda: &[f64], a: &[f64], nu: &[f64], exponent: f64) -> Result<bool> {
    let (lhs, rhs) = ineq302_sides(lambda, a, nu, exponent)?;
    Ok(lhs <= rhs + TOL_SCAN * rhs.abs().max(lhs.abs()))
}

fn fmt_opt(v: Option<&f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

impl WeightChain {
    /// Writes `n,b,w,nu,slack` rows for `n = 1 ..= N + 1`; missing entries are blank.
    pub fn write_csv<W: Write>(&self, check: Option<&ChainCheck>, out: &mut W) -> io::Result<()> {
        writeln!(out, "n,b,w,nu,slack")?;
        for n in 1..=self.n + 1 {
            let slack = check.and_then(|c| c.slack_at(n));
            writeln!(
                out,
                "{},{},{},{},{}",
                n,
                fmt_opt(self.b.get(n - 1)),
                fmt_opt(self.w.get(n - 1)),
                fmt_opt(self.nu.get(n - 1)),
                fmt_opt(slack.as_ref()),
            )?;
        }
        Ok(())
    }
}
