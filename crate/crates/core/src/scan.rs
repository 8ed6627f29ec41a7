//! Grid scans of criterion margins and bracketed bisection.
//!
//! Scans evaluate in parallel but reduce sequentially in grid order, so the
//! reported minimum and its location do not depend on the worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param_err, Error, Result};

/// Relative tolerance of the pass rule.
pub const TOL_SCAN: f64 = 1e-12;
/// Margins below this (relative to scale) trigger local refinement.
pub const REFINE_TRIGGER: f64 = 1e-9;
/// Points in the coarse sign scan used to establish brackets.
pub const BRACKET_POINTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub max_refine_depth: usize,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        let grid = GridSpec { lo, hi, count, max_refine_depth: 3 };
        grid.validate()?;
        Ok(grid)
    }

    pub fn unit() -> Self {
        GridSpec { lo: 0.0, hi: 1.0, count: 2001, max_refine_depth: 3 }
    }

    pub fn with_refine_depth(mut self, depth: usize) -> Self {
        self.max_refine_depth = depth;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo < self.hi) || !self.lo.is_finite() || !self.hi.is_finite() {
            return param_err(format!("grid needs lo < hi, got [{}, {}]", self.lo, self.hi));
        }
        if self.count < 2 {
            return param_err(format!("grid needs at least 2 points, got {}", self.count));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.count - 1) as f64
    }

    /// The `i`-th grid point; the last point is exactly `hi`.
    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.hi
        } else {
            self.lo + i as f64 * self.step()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.point(i)).collect()
    }
}

/// A criterion value together with the magnitude of the terms that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Margin {
    pub value: f64,
    pub scale: f64,
}

impl Margin {
    pub fn new(value: f64, scale: f64) -> Self {
        Margin { value, scale }
    }

    /// An analytically exact zero (used at the double root `y = 0`).
    pub fn exact_zero() -> Self {
        Margin { value: 0.0, scale: 1.0 }
    }

    pub fn tolerance(&self) -> f64 {
        TOL_SCAN * self.scale.abs().max(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub min_margin: f64,
    pub argmin: f64,
    pub pass: bool,
    pub refine_depth_used: usize,
}

impl ScanResult {
    fn from_margin(margin: Margin, argmin: f64, depth: usize) -> Self {
        ScanResult {
            min_margin: margin.value,
            argmin,
            pass: margin.value >= -margin.tolerance(),
            refine_depth_used: depth,
        }
    }

    /// Summarizes a sequence of relative slacks indexed from `first_index`.
    ///
    /// Non-finite slacks count as failures.
    pub fn from_slacks(slacks: &[f64], first_index: usize) -> Self {
        let mut best = f64::INFINITY;
        let mut arg = first_index;
        for (i, &s) in slacks.iter().enumerate() {
            let s = if s.is_nan() { f64::NEG_INFINITY } else { s };
            if s < best {
                best = s;
                arg = first_index + i;
            }
        }
        ScanResult::from_margin(Margin::new(best, 1.0), arg as f64, 0)
    }

    /// First index whose slack violates the pass rule.
    pub fn first_failure(slacks: &[f64], first_index: usize) -> Option<usize> {
        slacks
            .iter()
            .position(|&s| !(s >= -TOL_SCAN))
            .map(|i| i + first_index)
    }
}

fn reduce_min(points: &[f64], margins: &[Margin]) -> (Margin, f64) {
    let mut best = margins[0];
    let mut arg = points[0];
    for (&x, &m) in points.iter().zip(margins).skip(1) {
        // NaN is treated as the worst possible margin.
        let v = if m.value.is_nan() { f64::NEG_INFINITY } else { m.value };
        if v < best.value || best.value.is_nan() {
            best = Margin::new(v, m.scale);
            arg = x;
        }
    }
    (best, arg)
}

/// Scans `margin` over `grid`, refining around a near-zero minimum.
///
/// When `exact_zero_at_lo` is set, the lower endpoint is assigned the exact
/// value 0 instead of a floating evaluation, and a minimum located there is
/// not refined.
pub fn scan_margin<F>(grid: &GridSpec, exact_zero_at_lo: bool, margin: F) -> Result<ScanResult>
where
    F: Fn(f64) -> Margin + Sync,
{
    grid.validate()?;
    let eval = |x: f64| {
        if exact_zero_at_lo && x == grid.lo {
            Margin::exact_zero()
        } else {
            margin(x)
        }
    };
    let points = grid.points();
    let margins: Vec<Margin> = points.par_iter().map(|&x| eval(x)).collect();
    let (mut best, mut arg) = reduce_min(&points, &margins);

    let mut depth = 0;
    let mut half_width = grid.step();
    while depth < grid.max_refine_depth
        && best.value.abs() < REFINE_TRIGGER * best.scale.abs().max(1.0)
        && !(exact_zero_at_lo && arg == grid.lo)
    {
        depth += 1;
        let lo = (arg - half_width).max(grid.lo);
        let hi = (arg + half_width).min(grid.hi);
        let local = GridSpec { lo, hi, count: 21, max_refine_depth: 0 };
        let local_points = local.points();
        let local_margins: Vec<Margin> = local_points.par_iter().map(|&x| eval(x)).collect();
        let (m, x) = reduce_min(&local_points, &local_margins);
        if m.value < best.value {
            best = m;
            arg = x;
        }
        half_width /= 10.0;
    }
    Ok(ScanResult::from_margin(best, arg, depth))
}

/// Outcome of a bisection: the final bracket and the evidence straddling it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
    pub iterations: usize,
}

impl Root {
    /// Bracket end on which the function is nonnegative.
    pub fn nonneg_end(&self) -> f64 {
        if self.f_lo >= 0.0 {
            self.lo
        } else {
            self.hi
        }
    }

    /// Bracket end on which the function is nonpositive.
    pub fn nonpos_end(&self) -> f64 {
        if self.f_lo <= 0.0 {
            self.lo
        } else {
            self.hi
        }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

fn is_nonneg(v: f64) -> bool {
    v >= 0.0
}

/// Bisection on `[lo, hi]`, which must carry a sign change.
///
/// Stops when the bracket is narrower than `tol`.
pub fn bisect<F>(f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> Result<Root>
where
    F: Fn(f64) -> f64,
{
    if !(tol > 0.0) {
        return param_err(format!("bisection tolerance must be positive, got {tol}"));
    }
    let (mut lo, mut hi) = (lo, hi);
    let (mut f_lo, mut f_hi) = (f(lo), f(hi));
    if f_lo.is_nan() || f_hi.is_nan() || is_nonneg(f_lo) == is_nonneg(f_hi) {
        return Err(Error::Bracket(format!(
            "f({lo}) = {f_lo}, f({hi}) = {f_hi}"
        )));
    }
    let mut iterations = 0;
    while hi - lo > tol && iterations < max_iter {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid.is_nan() {
            return Err(Error::Bracket(format!("f({mid}) is NaN")));
        }
        if is_nonneg(f_mid) == is_nonneg(f_lo) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
        iterations += 1;
    }
    Ok(Root { lo, hi, f_lo, f_hi, iterations })
}

/// Scans `count` points of `[lo, hi]` and returns every adjacent pair whose
/// signs differ (zero counts as nonnegative), in increasing order.
pub fn sign_changes<F>(f: F, lo: f64, hi: f64, count: usize) -> Result<Vec<(f64, f64)>>
where
    F: Fn(f64) -> f64 + Sync,
{
    let grid = GridSpec::new(lo, hi, count)?;
    let points = grid.points();
    let values: Vec<f64> = points.par_iter().map(|&x| f(x)).collect();
    Ok(points
        .windows(2)
        .zip(values.windows(2))
        .filter(|(_, v)| !v[0].is_nan() && !v[1].is_nan() && is_nonneg(v[0]) != is_nonneg(v[1]))
        .map(|(x, _)| (x[0], x[1]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_hits_endpoints() {
        let grid = GridSpec::new(0.505, 0.995, 199).unwrap();
        let pts = grid.points();
        assert_eq!(pts[0], 0.505);
        assert_eq!(pts[198], 0.995);
        assert!(GridSpec::new(1.0, 1.0, 10).is_err());
        assert!(GridSpec::new(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn scan_finds_minimum_and_fails() {
        let grid = GridSpec::unit();
        let res = scan_margin(&grid, false, |x| Margin::new((x - 0.3) * (x - 0.3) - 0.01, 1.0)).unwrap();
        assert!((res.argmin - 0.3).abs() < 1e-3);
        assert!((res.min_margin + 0.01).abs() < 1e-9);
        assert!(!res.pass);
    }

    #[test]
    fn refinement_triggers_on_near_zero_minimum() {
        let grid = GridSpec::new(0.0, 1.0, 11).unwrap();
        // Double root at 0.3333.., between grid points; the coarse grid misses the minimum.
        let res = scan_margin(&grid, false, |x| Margin::new((x - 1.0 / 3.0).powi(2) * 1e-8, 1.0)).unwrap();
        assert!(res.refine_depth_used > 0);
        assert!((res.argmin - 1.0 / 3.0).abs() < 1e-3);
        assert!(res.pass);
    }

    #[test]
    fn exact_zero_endpoint_is_used() {
        let grid = GridSpec::unit();
        // Floating evaluation would be slightly negative at 0.
        let res = scan_margin(&grid, true, |x| Margin::new(x * x - 1e-10 * (x == 0.0) as u8 as f64, 1.0)).unwrap();
        assert_eq!(res.min_margin, 0.0);
        assert_eq!(res.refine_depth_used, 0);
        assert!(res.pass);
    }

    #[test]
    fn bisection_brackets_sqrt2() {
        let root = bisect(|x| 2.0 - x * x, 1.0, 2.0, 1e-12, 200).unwrap();
        assert!(root.hi - root.lo <= 1e-12);
        assert!(root.f_lo >= 0.0 && root.f_hi < 0.0);
        assert!((root.nonneg_end() - 2f64.sqrt()).abs() < 1e-12);
        assert!(root.nonneg_end() <= 2f64.sqrt());
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-9, 100).is_err());
    }

    #[test]
    fn bisection_iteration_bound() {
        let root = bisect(|x| 0.4 - x, 0.0, 1.0, 1e-9, 60).unwrap();
        assert!(root.iterations <= 30);
    }

    #[test]
    fn sign_changes_in_order() {
        let changes = sign_changes(|x| (x - 0.25) * (x - 0.75), 0.0, 1.0, 1000).unwrap();
        assert_eq!(changes.len(), 2);
        assert!(changes[0].0 < 0.25 && changes[0].1 > 0.25);
    }

    #[test]
    fn slack_summary() {
        let res = ScanResult::from_slacks(&[0.3, -0.2, 0.1, f64::NAN], 1);
        assert_eq!(res.min_margin, f64::NEG_INFINITY);
        assert_eq!(res.argmin, 4.0);
        assert!(!res.pass);
        assert_eq!(ScanResult::first_failure(&[0.3, -0.2, 0.1], 1), Some(2));
    }
}
