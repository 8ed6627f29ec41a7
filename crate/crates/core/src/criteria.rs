//! Closed-form criterion functions, their grid scans and the threshold root-finders.
//!
//! Margin conventions: the reverse-family criteria (`phi45`, `lemma1_f`, `f35`,
//! `crit14`, `crit27`, `h36`) certify validity when nonnegative; `h1` and `h2`
//! certify validity when nonpositive; `ineq32_margin` is written so that a
//! nonnegative value certifies the forward inequality at that point.

use rayon::prelude::*;

use crate::error::{param_err, Error, Result};
use crate::params::{check_open_unit, critical_shift};
use crate::scan::{bisect, scan_margin, sign_changes, GridSpec, Margin, Root, ScanResult, BRACKET_POINTS};

/// `h36` is rejected within this distance of the singular point `p = 1/2`.
pub const H36_SINGULAR_BAND: f64 = 1e-6;
/// Tolerance of the `alpha0` root-finders.
pub const ALPHA0_TOL: f64 = 1e-10;
const MAX_BISECTIONS: usize = 200;

/// `(p / (1 - r))^p`, the sharp constant of the weighted reverse inequality.
pub fn best_constant(p: f64, r: f64) -> Result<f64> {
    check_open_unit("p", p)?;
    check_open_unit("r", r)?;
    Ok((p / (1.0 - r)).powf(p))
}

fn check_crit_domain(p: f64) -> Result<()> {
    if p >= 1.0 / 3.0 && p < 0.5 {
        Ok(())
    } else {
        param_err(format!("criterion defined for 1/3 < p < 1/2, got {p}"))
    }
}

/// Limit of `crit14` and `crit27` as `p -> 1/3`.
pub fn crit_limit_at_third() -> f64 {
    3.0 - 2.0 * 2f64.sqrt()
}

fn at_third(p: f64) -> bool {
    (p - 1.0 / 3.0).abs() <= f64::EPSILON
}

/// Base-case criterion of the main induction; nonnegative values certify
/// the sharp reverse Hardy inequality at this `p`.
///
/// Extended by continuity to `p = 1/3`.
pub fn crit14(p: f64) -> Result<f64> {
    check_crit_domain(p)?;
    if at_third(p) {
        return Ok(crit_limit_at_third());
    }
    let s = 1.0 / (1.0 - p);
    let k = (1.0 - p) / p;
    let first = 2f64.powf(p * s) * (k.powf(s) - k);
    let second = (1.0 + critical_shift(p)).powf(s);
    Ok(first - second)
}

/// Left side of the rewritten criterion, `(2^t / t)(t^-t - 1)`; decreasing in `p`.
pub fn crit27_lhs(p: f64) -> f64 {
    let t = p / (1.0 - p);
    2f64.powf(t) / t * (t.powf(-t) - 1.0)
}

/// Right side of the rewritten criterion, `(1 + a)^(1/(1-p))` with the critical shift; increasing in `p`.
pub fn crit27_rhs(p: f64) -> f64 {
    (1.0 + critical_shift(p)).powf(1.0 / (1.0 - p))
}

/// `crit14` rewritten in terms of `t = p/(1-p)`. Same sign as `crit14`.
pub fn crit27(p: f64) -> Result<f64> {
    check_crit_domain(p)?;
    if at_third(p) {
        return Ok(crit_limit_at_third());
    }
    Ok(crit27_lhs(p) - crit27_rhs(p))
}

fn phi45_terms(y: f64, p: f64, r: f64, a: f64) -> [f64; 3] {
    let s = 1.0 / (1.0 - p);
    let k = (1.0 - r) / p;
    [
        (1.0 + (a + k - 1.0) * y).powf(s),
        (1.0 + y).powf(-r * s) * (1.0 + a * y).powf(s),
        k * y,
    ]
}

fn margin_of(terms: [f64; 3]) -> Margin {
    let scale = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    Margin::new(terms[0] - terms[1] - terms[2], scale)
}

/// Induction criterion of the main weight chain at `y = 1/n`.
pub fn phi45(y: f64, p: f64, r: f64, a: f64) -> f64 {
    phi45_margin(y, p, r, a).value
}

pub fn phi45_margin(y: f64, p: f64, r: f64, a: f64) -> Margin {
    margin_of(phi45_terms(y, p, r, a))
}

fn lemma1_terms(x: f64, t: f64) -> [f64; 3] {
    [
        (1.0 + x).powf(1.0 + t),
        (1.0 + 2.0 * t * x).powf(-t) * (1.0 + (2.0 * t - 1.0) * x).powf(1.0 + t),
        2.0 * x,
    ]
}

/// `(1+x)^(1+t) - (1+2tx)^(-t) (1+(2t-1)x)^(1+t) - 2x`, nonnegative on `[0,1] x (1/2,1)`.
pub fn lemma1_f(x: f64, t: f64) -> f64 {
    lemma1_f_margin(x, t).value
}

pub fn lemma1_f_margin(x: f64, t: f64) -> Margin {
    margin_of(lemma1_terms(x, t))
}

/// Normalized second derivative of `lemma1_f`; vanishes at `x = 0` and is nondecreasing in `x`.
pub fn lemma1_g(x: f64, t: f64) -> f64 {
    lemma1_g_margin(x, t).value
}

pub fn lemma1_g_margin(x: f64, t: f64) -> Margin {
    let product = (1.0 + 2.0 * t * x).powf(-t - 2.0)
        * (1.0 + (2.0 * t - 1.0) * x).powf(t - 1.0)
        * (1.0 + x).powf(1.0 - t);
    Margin::new(1.0 - product, product.abs().max(1.0))
}

fn f35_terms(x: f64, p: f64, alpha: f64) -> [f64; 3] {
    let s = 1.0 / (1.0 - p);
    [
        (1.0 + (1.0 / p - alpha - 1.0) * x).powf(s),
        (1.0 + x).powf(-alpha * p * s),
        (1.0 - alpha * p) / p * x,
    ]
}

/// Induction criterion of the power-weighted reverse family at `x = 1/n`.
///
/// With `alpha = 1` this coincides with `phi45(x, p, p, 0)`.
pub fn f35(x: f64, p: f64, alpha: f64) -> f64 {
    f35_margin(x, p, alpha).value
}

pub fn f35_margin(x: f64, p: f64, alpha: f64) -> Margin {
    margin_of(f35_terms(x, p, alpha))
}

/// Lower bound for the derivative of the convexity certificate of `f35`;
/// `h36(alpha, p) >= 0` certifies the power-weighted reverse family.
pub fn h36(alpha: f64, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return param_err(format!("h36 needs p > 0, got {p}"));
    }
    if p >= 0.5 - H36_SINGULAR_BAND {
        return Err(Error::Singular(format!(
            "h36 exponent (1-p)/(1-2p) is singular at p = 1/2, got p = {p}"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0 / p) {
        return param_err(format!("h36 needs 0 < alpha < 1/p, got alpha = {alpha}"));
    }
    let d = 1.0 / p - alpha - 1.0;
    if !(d > 0.0) {
        return param_err(format!("h36 needs 1/p - alpha - 1 > 0, got {d}"));
    }
    Ok(h36_unchecked(alpha, p))
}

fn h36_unchecked(alpha: f64, p: f64) -> f64 {
    let d = 1.0 / p - alpha - 1.0;
    let base = d * d / (alpha * ((alpha - 1.0) * p + 1.0));
    base.powf((1.0 - p) / (1.0 - 2.0 * p)) * ((2.0 + (alpha - 2.0) * p) / (1.0 - 2.0 * p)) - d
}

fn ineq32_parts(y: f64, alpha: f64, p: f64) -> (f64, f64) {
    let lead = (1.0 - 1.0 / (p * alpha)) * alpha * y;
    (lead + (1.0 - y).powf(alpha), lead + (1.0 + y).powf(1.0 - alpha))
}

/// `1 - X^(p-1) Y` for the power-weighted forward family at `y = 1/n`.
pub fn ineq32_margin(y: f64, alpha: f64, p: f64) -> f64 {
    ineq32_margin_scaled(y, alpha, p).value
}

pub fn ineq32_margin_scaled(y: f64, alpha: f64, p: f64) -> Margin {
    let (x, yy) = ineq32_parts(y, alpha, p);
    let prod = x.powf(p - 1.0) * yy;
    Margin::new(1.0 - prod, prod.abs().max(1.0))
}

fn h1_unchecked(y: f64, alpha: f64, p: f64) -> f64 {
    let u = alpha * (alpha - 1.0);
    let lead = 1.0 - 1.0 / p;
    u * p / 2.0 - lead * lead + u * (p - 1.0) * (p - 2.0) / (2.0 * p) * y + u * u * (p - 1.0) / 4.0 * y * y
}

fn h2_unchecked(y: f64, alpha: f64, p: f64) -> f64 {
    let u = alpha * (alpha - 1.0);
    u * p / 2.0 - (1.0 - 1.0 / p) / 2.0 + (p - 1.0) * u * y / 2.0 - p * (p - 1.0) * u * u * y * y / 8.0
}

/// Quadratic majorant used for `1 < p <= 2`; nonpositive on `[0,1]` certifies the forward family.
pub fn h1(y: f64, alpha: f64, p: f64) -> Result<f64> {
    if !(p > 1.0 && p <= 2.0) {
        return param_err(format!("h1 needs 1 < p <= 2, got {p}"));
    }
    Ok(h1_unchecked(y, alpha, p))
}

/// Quadratic majorant used for `p > 2`, valid while `alpha(alpha-1) <= 2/p`.
pub fn h2(y: f64, alpha: f64, p: f64) -> Result<f64> {
    if !(p > 2.0) {
        return param_err(format!("h2 needs p > 2, got {p}"));
    }
    if alpha * (alpha - 1.0) > 2.0 / p {
        return param_err(format!("h2 needs alpha(alpha-1) <= 2/p, got alpha = {alpha}"));
    }
    Ok(h2_unchecked(y, alpha, p))
}

/// Root of `crit14` in `(1/3, 1/2)` with its bracketing evidence.
///
/// The bracket is located by a coarse sign scan of `bracket_points` points and
/// refined by bisection to `tol`. The sign pattern on either side of the root
/// is confirmed by sampling.
pub fn p_star_root(tol: f64, bracket_points: usize) -> Result<Root> {
    let crit = |p: f64| crit14(p).unwrap_or(f64::NAN);
    let lo = 1.0 / 3.0;
    let hi = 0.5 - 1e-9;
    let changes = sign_changes(crit, lo, hi, bracket_points)?;
    let &(a, b) = changes
        .first()
        .ok_or_else(|| Error::Bracket("crit14 keeps one sign on (1/3, 1/2)".into()))?;
    let root = bisect(crit, a, b, tol, MAX_BISECTIONS)?;

    let samples = 200;
    let below_ok = (1..samples).all(|i| crit(lo + (root.lo - lo) * i as f64 / samples as f64) > 0.0);
    let above_ok = (1..samples).all(|i| crit(root.hi + (0.5 - root.hi) * i as f64 / samples as f64) < 0.0);
    if !(below_ok && above_ok) {
        return Err(Error::Bracket("crit14 sign pattern around the root is not (+, -)".into()));
    }
    Ok(root)
}

/// Largest `p` with `crit14(p) >= 0` (the conservative end of the final bracket).
pub fn threshold_p_star(tol: f64) -> Result<f64> {
    Ok(p_star_root(tol, BRACKET_POINTS)?.nonneg_end())
}

fn check_sub_half(p: f64) -> Result<()> {
    if !(p > 0.0) {
        return param_err(format!("need 0 < p < 1/2, got {p}"));
    }
    if p >= 0.5 - H36_SINGULAR_BAND {
        return Err(Error::Singular(format!("need p < 1/2, got {p}")));
    }
    Ok(())
}

/// Largest `alpha` with `h36(alpha, p) >= 0`, with bracketing evidence.
pub fn alpha0_sub_half_root(p: f64) -> Result<Root> {
    check_sub_half(p)?;
    let end = 1.0 / p - 1.0;
    let h = |alpha: f64| h36_unchecked(alpha, p);
    let changes = sign_changes(h, end * 1e-6, end * (1.0 - 1e-9), BRACKET_POINTS)?;
    let &(a, b) = changes
        .last()
        .ok_or_else(|| Error::Bracket(format!("h36(., {p}) has no sign change")))?;
    bisect(h, a, b, ALPHA0_TOL, MAX_BISECTIONS)
}

pub fn alpha0_sub_half(p: f64) -> Result<f64> {
    Ok(alpha0_sub_half_root(p)?.nonneg_end())
}

/// Largest `alpha` covered by the closed-form sufficient conditions:
/// `p <= 2/((alpha+2)(alpha+1))` when `alpha >= 1`, `p <= 1/(alpha+2)` when `alpha <= 1`.
pub fn alpha_sufficient_sub_half(p: f64) -> f64 {
    let upper_branch = (-3.0 + (1.0 + 8.0 / p).sqrt()) / 2.0;
    let lower_branch = (1.0 / p - 2.0).min(1.0);
    if upper_branch >= 1.0 {
        upper_branch
    } else {
        lower_branch.max(0.0)
    }
}

/// The two roots entering `alpha0` for `1 < p <= 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alpha0Parts {
    /// `h1(0; alpha, p) = 0`.
    pub alpha1: f64,
    /// `h1(1; alpha, p) = 0`.
    pub alpha2: f64,
}

fn first_root<F>(f: F, lo: f64, hi: f64) -> Result<Root>
where
    F: Fn(f64) -> f64 + Sync,
{
    let changes = sign_changes(&f, lo, hi, BRACKET_POINTS)?;
    let &(a, b) = changes
        .first()
        .ok_or_else(|| Error::Bracket(format!("no sign change on [{lo}, {hi}]")))?;
    bisect(&f, a, b, ALPHA0_TOL, MAX_BISECTIONS)
}

pub fn alpha0_parts(p: f64) -> Result<Alpha0Parts> {
    if !(p > 1.0 && p <= 2.0) {
        return param_err(format!("alpha1/alpha2 defined for 1 < p <= 2, got {p}"));
    }
    let hi = 1.0 + 1.0 / p;
    let alpha1 = first_root(|a| h1_unchecked(0.0, a, p), 1.0, hi)?.nonpos_end();
    let alpha2 = first_root(|a| h1_unchecked(1.0, a, p), 1.0, hi)?.nonpos_end();
    Ok(Alpha0Parts { alpha1, alpha2 })
}

/// Upper end of the `alpha` range of the forward power-weighted family.
pub fn alpha0_super_one(p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return param_err(format!("alpha0 needs p > 1, got {p}"));
    }
    if p <= 2.0 {
        let parts = alpha0_parts(p)?;
        Ok(parts.alpha1.min(parts.alpha2))
    } else {
        // alpha(alpha-1) = 2/p at the cap.
        let cap = (1.0 + (1.0 + 8.0 / p).sqrt()) / 2.0;
        Ok(first_root(|a| h2_unchecked(1.0, a, p), 1.0, cap)?.nonpos_end())
    }
}

/// Scan of `phi45(., p, r, a)` over `grid`, with the exact zero at `y = 0`.
pub fn scan_phi45(p: f64, r: f64, a: f64, grid: &GridSpec) -> Result<ScanResult> {
    check_open_unit("p", p)?;
    check_open_unit("r", r)?;
    scan_margin(grid, grid.lo == 0.0, |y| phi45_margin(y, p, r, a))
}

pub fn scan_f35(p: f64, alpha: f64, grid: &GridSpec) -> Result<ScanResult> {
    if !(p > 0.0 && p < 0.5) || !(alpha > 0.0 && alpha < 1.0 / p) {
        return param_err(format!("f35 needs 0 < p < 1/2 and 0 < alpha < 1/p, got p = {p}, alpha = {alpha}"));
    }
    scan_margin(grid, grid.lo == 0.0, |x| f35_margin(x, p, alpha))
}

pub fn scan_ineq32(alpha: f64, p: f64, grid: &GridSpec) -> Result<ScanResult> {
    if !(p > 1.0) || !(alpha > 1.0) {
        return param_err(format!("ineq32 needs p > 1 and alpha > 1, got p = {p}, alpha = {alpha}"));
    }
    scan_margin(grid, grid.lo == 0.0, |y| ineq32_margin_scaled(y, alpha, p))
}

/// Scan of `-h1` or `-h2` (whichever applies to `p`), so that a pass certifies `h <= 0`.
pub fn scan_h1h2(alpha: f64, p: f64, grid: &GridSpec) -> Result<ScanResult> {
    if p <= 2.0 {
        h1(0.0, alpha, p)?;
        scan_margin(grid, false, |y| Margin::new(-h1_unchecked(y, alpha, p), 1.0))
    } else {
        h2(0.0, alpha, p)?;
        scan_margin(grid, false, |y| Margin::new(-h2_unchecked(y, alpha, p), 1.0))
    }
}

/// Result of the two-dimensional scan of `lemma1_f` and `lemma1_g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma1Scan {
    pub f: ScanResult,
    pub g: ScanResult,
    /// `g` nondecreasing in `x` along every row (within tolerance).
    pub g_monotone: bool,
    /// Most negative step `g(x_{i+1}) - g(x_i)` seen.
    pub worst_g_step: f64,
}

impl Lemma1Scan {
    pub fn pass(&self) -> bool {
        self.f.pass && self.g.pass && self.g_monotone
    }
}

/// Scans the lemma functions on the tensor grid `x_grid x t_grid`.
///
/// The `x = 0` column is assigned the exact value 0. Rows are evaluated in
/// parallel and reduced in `t` order.
pub fn scan_lemma1(x_grid: &GridSpec, t_grid: &GridSpec) -> Result<Lemma1Scan> {
    x_grid.validate()?;
    t_grid.validate()?;
    if !(t_grid.lo > 0.5 && t_grid.hi < 1.0) {
        return param_err("lemma scan needs t inside (1/2, 1)");
    }
    let xs = x_grid.points();
    let rows: Vec<(f64, (Margin, f64), (Margin, f64), f64)> = t_grid
        .points()
        .into_par_iter()
        .map(|t| {
            let mut f_min = (Margin::new(f64::INFINITY, 1.0), 0.0);
            let mut g_min = (Margin::new(f64::INFINITY, 1.0), 0.0);
            let mut worst_step = f64::INFINITY;
            let mut prev_g: Option<f64> = None;
            for &x in &xs {
                let (f, g) = if x == 0.0 {
                    (Margin::exact_zero(), Margin::exact_zero())
                } else {
                    (lemma1_f_margin(x, t), lemma1_g_margin(x, t))
                };
                if f.value < f_min.0.value {
                    f_min = (f, x);
                }
                if g.value < g_min.0.value {
                    g_min = (g, x);
                }
                if let Some(pg) = prev_g {
                    worst_step = worst_step.min(g.value - pg);
                }
                prev_g = Some(g.value);
            }
            (t, f_min, g_min, worst_step)
        })
        .collect();

    let mut f_best = (Margin::new(f64::INFINITY, 1.0), (0.0, 0.0));
    let mut g_best = (Margin::new(f64::INFINITY, 1.0), (0.0, 0.0));
    let mut worst_step = f64::INFINITY;
    for (t, (fm, fx), (gm, gx), step) in rows {
        if fm.value < f_best.0.value {
            f_best = (fm, (fx, t));
        }
        if gm.value < g_best.0.value {
            g_best = (gm, (gx, t));
        }
        worst_step = worst_step.min(step);
    }
    let to_result = |(m, (x, _t)): (Margin, (f64, f64))| ScanResult {
        min_margin: m.value,
        argmin: x,
        pass: m.value >= -m.tolerance(),
        refine_depth_used: 0,
    };
    Ok(Lemma1Scan {
        f: to_result(f_best),
        g: to_result(g_best),
        g_monotone: worst_step >= -crate::scan::TOL_SCAN,
        worst_g_step: worst_step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn best_constant_examples() {
        assert_eq!(best_constant(0.5, 0.5).unwrap(), 1.0);
        assert!((best_constant(0.3, 0.3).unwrap() - 0.7755).abs() < 1e-4);
        assert_relative_eq!(best_constant(1.0 / 3.0, 1.0 / 3.0).unwrap(), 0.5f64.powf(1.0 / 3.0), max_relative = 1e-14);
        assert!(best_constant(1.0, 0.5).is_err());
        assert!(best_constant(0.5, 0.0).is_err());
    }

    #[test]
    fn crit_limit_at_third() {
        let limit = 3.0 - 2.0 * 2f64.sqrt();
        assert_eq!(crit14(1.0 / 3.0).unwrap(), limit);
        assert!((crit14(1.0 / 3.0 + 1e-9).unwrap() - limit).abs() < 1e-7);
        assert!((crit27(1.0 / 3.0 + 1e-9).unwrap() - limit).abs() < 1e-7);
        assert!((0.17157 - limit).abs() < 1e-5);
    }

    #[test]
    fn crit14_signs() {
        assert!(crit14(0.346).unwrap() > 0.0);
        assert!(crit14(0.35).unwrap() < 0.0);
        assert!(crit27(0.346).unwrap() > 0.0);
        // Frozen from a 40-digit evaluation.
        assert!((crit14(0.35).unwrap() - -0.044889954203516705).abs() < 1e-12);
        assert!((crit14(0.346).unwrap() - 0.007188153425712459).abs() < 1e-12);
        assert!(crit14(0.3).is_err());
        assert!(crit14(0.5).is_err());
    }

    #[test]
    fn crit14_and_crit27_agree_in_sign() {
        for i in 1..100 {
            let p = 1.0 / 3.0 + (0.5 - 1.0 / 3.0) * i as f64 / 100.0;
            let (a, b) = (crit14(p).unwrap(), crit27(p).unwrap());
            assert_eq!(a >= 0.0, b >= 0.0, "p = {p}");
            assert_relative_eq!(a, b, max_relative = 1e-10, epsilon = 1e-13);
        }
    }

    #[test]
    fn phi45_examples() {
        for &(p, r, a) in &[(0.3, 0.2, 0.0), (0.45, 0.45, critical_shift(0.45)), (0.1, 0.9, -0.5)] {
            assert_eq!(phi45(0.0, p, r, a), 0.0);
        }
        let grid = GridSpec::unit();
        let ok = scan_phi45(0.34, 0.34, critical_shift(0.34), &grid).unwrap();
        assert!(ok.pass, "{ok:?}");
        let bad = scan_phi45(0.4, 0.4, critical_shift(0.4) - 0.05, &grid).unwrap();
        assert!(!bad.pass);
        assert!(bad.min_margin < -1e-4);
    }

    #[test]
    fn lemma1_examples() {
        assert_eq!(lemma1_f(0.0, 0.7), 0.0);
        assert_eq!(lemma1_g(0.0, 0.7), 0.0);
        let direct = 2f64.powf(1.75) - 2.5f64.powf(-0.75) * 1.5f64.powf(1.75) - 2.0;
        assert_relative_eq!(lemma1_f(1.0, 0.75), direct, max_relative = 1e-14);
        assert!((lemma1_f(1.0, 0.75) - 0.341).abs() < 1e-3);
        assert!(lemma1_g(1.0, 0.6) > 0.0);
        let mut prev = 0.0;
        for i in 1..=100 {
            let g = lemma1_g(i as f64 / 100.0, 0.6);
            assert!(g >= prev);
            prev = g;
        }
    }

    #[test]
    fn lemma1_scan_passes() {
        let scan = scan_lemma1(&GridSpec::new(0.0, 1.0, 201).unwrap(), &GridSpec::new(0.505, 0.995, 50).unwrap()).unwrap();
        assert!(scan.pass(), "{scan:?}");
    }

    #[test]
    fn f35_reduces_to_phi45() {
        for i in 0..=20 {
            let x = i as f64 / 20.0;
            for &p in &[0.1, 0.25, 0.4] {
                assert_relative_eq!(f35(x, p, 1.0), phi45(x, p, p, 0.0), max_relative = 1e-13, epsilon = 1e-15);
            }
        }
        assert_eq!(f35(0.0, 0.2, 1.5), 0.0);
        assert!(f35(1.0, 1.0 / 6.0, 2.0) >= 0.0);
        assert!(scan_f35(1.0 / 6.0, 2.0, &GridSpec::unit()).unwrap().pass);
    }

    #[test]
    fn h36_examples() {
        assert_relative_eq!(h36(1.0, 0.25).unwrap(), 26.0, max_relative = 1e-12);
        let v = h36(2.0, 1.0 / 6.0).unwrap();
        assert!((v - 13.2).abs() < 0.05, "{v}");
        assert!(matches!(h36(1.0, 0.5), Err(Error::Singular(_))));
        assert!(matches!(h36(1.0, 0.5 - 1e-7), Err(Error::Singular(_))));
        assert!(matches!(h36(3.0, 0.3), Err(Error::Parameter(_))));
    }

    #[test]
    fn h36_sign_matches_phi45_scan_at_alpha_one() {
        for &p in &[0.1, 0.2, 0.3, 0.33, 0.4, 0.45] {
            let h = h36(1.0, p).unwrap();
            let scan = scan_phi45(p, p, 0.0, &GridSpec::unit()).unwrap();
            // h36 >= 0 is sufficient, so it may only err on the conservative side.
            if h >= 0.0 {
                assert!(scan.pass, "p = {p}");
            }
        }
    }

    #[test]
    fn ineq32_examples() {
        assert_eq!(ineq32_margin(0.0, 1.3, 2.0), 0.0);
        let p = 2.0;
        assert!(ineq32_margin(1.0, 1.0 + 1.0 / p + 0.05, p) < 0.0);
        assert!(scan_ineq32(1.1, 2.0, &GridSpec::unit()).unwrap().pass);
    }

    #[test]
    fn h1_h2_examples() {
        for &alpha in &[1.05, 1.1, 1.3] {
            assert_relative_eq!(h1(0.0, alpha, 2.0).unwrap(), alpha * (alpha - 1.0) - 0.25, max_relative = 1e-14);
        }
        assert!(h1(0.0, 1.1, 2.5).is_err());
        assert!(h2(0.0, 1.1, 2.0).is_err());
        for &p in &[2.5, 3.0, 5.0] {
            let a0 = alpha0_super_one(p).unwrap();
            assert!(h2(1.0, a0, p).unwrap().abs() < 1e-9, "p = {p}");
        }
    }

    #[test]
    fn alpha0_super_one_at_two() {
        let expected = (1.0 + (1.0 + 4.0 * (5f64.sqrt() - 2.0)).sqrt()) / 2.0;
        let a0 = alpha0_super_one(2.0).unwrap();
        assert!((a0 - expected).abs() < 1e-9);
        assert!((a0 - 1.1972).abs() < 1e-3);
        assert!(alpha0_super_one(1.0).is_err());
    }

    #[test]
    fn alpha0_parts_below_cap() {
        for &p in &[1.1, 1.5, 2.0] {
            let parts = alpha0_parts(p).unwrap();
            assert!(parts.alpha1 <= 1.0 + 1.0 / p);
            assert!(parts.alpha2 <= 1.0 + 1.0 / p);
        }
        let a0 = alpha0_super_one(1.5).unwrap() - 1e-4;
        let res = scan_h1h2(a0, 1.5, &GridSpec::unit()).unwrap();
        assert!(res.pass);
    }

    #[test]
    fn p_star_bracket() {
        let root = p_star_root(1e-9, BRACKET_POINTS).unwrap();
        let p_star = root.nonneg_end();
        assert!((0.346..=0.350).contains(&p_star));
        assert!(root.iterations <= 60);
        assert!(root.f_lo > 0.0 && root.f_hi < 0.0);
        let fine = p_star_root(1e-9, 2 * BRACKET_POINTS).unwrap().nonneg_end();
        assert!((fine - p_star).abs() < 1e-9);
        // 40-digit reference.
        assert!((p_star - 0.34655256894746615).abs() < 2e-9);
    }

    #[test]
    fn alpha0_sub_half_examples() {
        assert!(alpha0_sub_half(1.0 / 6.0).unwrap() >= 2.0);
        assert!(alpha0_sub_half(1.0 / 3.0).unwrap() >= 1.0);
        for &p in &[0.1, 1.0 / 6.0, 0.25, 0.3, 1.0 / 3.0, 0.4, 0.45] {
            let a0 = alpha0_sub_half(p).unwrap();
            assert!(h36(a0, p).unwrap() >= 0.0);
            assert!(h36(a0 + 0.01, p).unwrap() < 0.0, "p = {p}");
            assert!(a0 + 1e-12 >= alpha_sufficient_sub_half(p), "p = {p}");
        }
        assert!(matches!(alpha0_sub_half(0.5), Err(Error::Singular(_))));
    }

    #[test]
    fn crit27_monotone_pieces() {
        let n = 200;
        let ps: Vec<f64> = (1..n).map(|i| 1.0 / 3.0 + (1.0 / 6.0) * i as f64 / n as f64).collect();
        for w in ps.windows(2) {
            assert!(crit27_lhs(w[1]) < crit27_lhs(w[0]));
            assert!(crit27_rhs(w[1]) > crit27_rhs(w[0]));
        }
    }
}
