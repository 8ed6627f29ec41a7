//! Extremal-family probes, counterexample search, duality cross-checks and
//! the small-N exhaustive grid.

use rayon::prelude::*;

use super::family::{FamilyKind, InequalityFamily};
use super::means::{comparison_bound_slack, MeanSign};
use super::optimize::{descend, restart_start, worse};
use crate::error::{param_err, Result};
use crate::params::Params;
use crate::sampling::{log_uniform_vec, rng_for};

/// Ratio on the extremal family `a_n = n^(-x)` (see [`InequalityFamily::extremal_exponent`]).
pub fn extremal_ratio(family: &InequalityFamily, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return param_err(format!("eps must be positive, got {eps}"));
    }
    family.ratio(&family.extremal_sequence(eps))
}

/// A sequence violating the family's inequality, with the number of evaluations spent.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub vector: Vec<f64>,
    pub ratio: f64,
    /// Which candidate class produced it.
    pub source: CandidateSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateSource {
    /// Unit vector `e_j` (one-based).
    Unit(usize),
    Extremal,
    Random,
    Descent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleSearch {
    pub found: Option<Counterexample>,
    pub evaluations: usize,
    /// Worst ratio seen, whether or not it violates.
    pub worst_ratio: f64,
}

/// Tries unit vectors, extremal sequences, seeded random draws and finally
/// coordinate descent, stopping at the first violation or when `budget`
/// evaluations are spent.
pub fn find_counterexample(family: &InequalityFamily, budget: usize, seed: u64) -> Result<CounterexampleSearch> {
    let mut evaluations = 0usize;
    let mut worst = f64::NAN;
    let note = |ratio: f64, worst: &mut f64| {
        if worst.is_nan() || worse(family, ratio, *worst) {
            *worst = ratio;
        }
    };
    let done = |ratio: f64, vector: Vec<f64>, source, evaluations, worst| CounterexampleSearch {
        found: Some(Counterexample { vector, ratio, source }),
        evaluations,
        worst_ratio: worst,
    };

    if let Some(units) = family.unit_vector_ratios() {
        for (j, &ratio) in units.iter().enumerate() {
            if evaluations >= budget {
                break;
            }
            evaluations += 1;
            note(ratio, &mut worst);
            if !family.passes(ratio) {
                let mut v = vec![0.0; family.n];
                v[j] = 1.0;
                return Ok(done(ratio, v, CandidateSource::Unit(j + 1), evaluations, worst));
            }
        }
    }
    for eps in [0.1, 0.01, 0.001] {
        if evaluations >= budget {
            break;
        }
        evaluations += 1;
        let v = family.extremal_sequence(eps);
        let ratio = family.ratio(&v)?;
        note(ratio, &mut worst);
        if !family.passes(ratio) {
            return Ok(done(ratio, v, CandidateSource::Extremal, evaluations, worst));
        }
    }
    for i in 0..16u64 {
        if evaluations >= budget {
            break;
        }
        evaluations += 1;
        let v = log_uniform_vec(&mut rng_for(seed, 1_000 + i), family.n);
        let ratio = family.ratio(&v)?;
        note(ratio, &mut worst);
        if !family.passes(ratio) {
            return Ok(done(ratio, v, CandidateSource::Random, evaluations, worst));
        }
    }
    let mut restart = 0;
    while evaluations < budget && family.n >= 2 && restart < 8 {
        let start = restart_start(family, seed, restart);
        let run = descend(family, &start, usize::MAX, Some(budget - evaluations))?;
        evaluations += run.evaluations.max(1);
        note(run.ratio, &mut worst);
        if !family.passes(run.ratio) {
            return Ok(done(run.ratio, run.vector, CandidateSource::Descent, evaluations, worst));
        }
        restart += 1;
    }
    Ok(CounterexampleSearch { found: None, evaluations, worst_ratio: worst })
}

/// Random-trial cross-check of the primal weighted family and its dual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualPairReport {
    pub trials: usize,
    pub dual_failures: usize,
    pub primal_failures: usize,
    /// Largest dual ratio seen (valid means `<= dual_constant`).
    pub worst_dual: f64,
    pub dual_constant: f64,
    /// Smallest primal ratio seen (valid means `>= primal_constant`).
    pub worst_primal: f64,
    pub primal_constant: f64,
}

impl DualPairReport {
    pub fn pass(&self) -> bool {
        self.dual_failures == 0 && self.primal_failures == 0
    }
}

/// For each trial, draws a positive sequence for the dual inequality and an
/// independent one for the primal weighted inequality, both log-uniform on
/// `[1e-3, 1e3]` (so bounded away from zero).
pub fn dual_pair_check(p: f64, r: f64, n: usize, trials: usize, seed: u64) -> Result<DualPairReport> {
    let params = Params::new(p, r);
    let dual = InequalityFamily::new(FamilyKind::Dual, params, n)?;
    let primal = InequalityFamily::new(FamilyKind::WeightedReverse, params, n)?;
    let results: Vec<Result<(f64, f64)>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let x = log_uniform_vec(&mut rng_for(seed, 2 * t as u64), n);
            let y = log_uniform_vec(&mut rng_for(seed, 2 * t as u64 + 1), n);
            Ok((dual.ratio(&x)?, primal.ratio(&y)?))
        })
        .collect();
    let mut report = DualPairReport {
        trials,
        dual_failures: 0,
        primal_failures: 0,
        worst_dual: f64::NEG_INFINITY,
        dual_constant: dual.constant(),
        worst_primal: f64::INFINITY,
        primal_constant: primal.constant(),
    };
    for res in results {
        let (d, pr) = res?;
        report.dual_failures += usize::from(!dual.passes(d));
        report.primal_failures += usize::from(!primal.passes(pr));
        report.worst_dual = report.worst_dual.max(d);
        report.worst_primal = report.worst_primal.min(pr);
    }
    Ok(report)
}

/// Ratio of the Stolarsky-mean family plus the comparison-bound check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFamilyEval {
    pub ratio: f64,
    pub constant: f64,
    pub pass: bool,
    /// Worst relative slack of the comparison bounds; nonnegative when they hold.
    pub bound_slack: f64,
}

pub fn mean_family_ratio(alpha: f64, beta: f64, sign: MeanSign, p: f64, a: &[f64]) -> Result<MeanFamilyEval> {
    let params = Params::diagonal(p).with_alpha(alpha).with_beta(beta);
    let family = InequalityFamily::new(FamilyKind::MeanReverse(sign), params, a.len())?;
    let ratio = family.ratio(a)?;
    Ok(MeanFamilyEval {
        ratio,
        constant: family.constant(),
        pass: family.passes(ratio),
        bound_slack: comparison_bound_slack(alpha, beta, sign, a.len())?,
    })
}

pub fn beta_limit_ratio(alpha: f64, p: f64, a: &[f64]) -> Result<f64> {
    let params = Params::diagonal(p).with_alpha(alpha);
    InequalityFamily::new(FamilyKind::BetaLimit, params, a.len())?.ratio(a)
}

/// Best ratio over all compositions of `units` mass units into `N` nonnegative parts.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMinimum {
    pub ratio: f64,
    pub composition: Vec<u32>,
    pub points: usize,
}

pub fn composition_grid_min(family: &InequalityFamily, units: u32) -> Result<GridMinimum> {
    let n = family.n;
    if n == 0 || n > 12 {
        return param_err(format!("composition grid supports 1 <= N <= 12, got {n}"));
    }
    if units == 0 {
        return param_err("need at least one mass unit");
    }
    // Split on the first coordinate so the enumeration runs in parallel.
    let per_first: Vec<Result<GridMinimum>> = (0..=units)
        .into_par_iter()
        .map(|first| {
            let mut best = GridMinimum { ratio: f64::NAN, composition: Vec::new(), points: 0 };
            let mut comp = vec![0u32; n];
            comp[0] = first;
            let mut a = vec![0.0; n];
            visit(&mut comp, 1, units - first, &mut |c| {
                if family.kind.needs_positive() && c.iter().any(|&x| x == 0) {
                    return Ok(());
                }
                for (dst, &x) in a.iter_mut().zip(c) {
                    *dst = x as f64;
                }
                let ratio = family.ratio(&a)?;
                best.points += 1;
                if best.ratio.is_nan() || worse(family, ratio, best.ratio) {
                    best.ratio = ratio;
                    best.composition = c.to_vec();
                }
                Ok(())
            })?;
            Ok(best)
        })
        .collect();
    let mut out = GridMinimum { ratio: f64::NAN, composition: Vec::new(), points: 0 };
    for part in per_first {
        let part = part?;
        out.points += part.points;
        if !part.ratio.is_nan() && (out.ratio.is_nan() || worse(family, part.ratio, out.ratio)) {
            out.ratio = part.ratio;
            out.composition = part.composition;
        }
    }
    if out.points == 0 {
        return param_err("grid contains no admissible point");
    }
    Ok(out)
}

fn visit<F: FnMut(&[u32]) -> Result<()>>(comp: &mut [u32], i: usize, left: u32, f: &mut F) -> Result<()> {
    if i + 1 == comp.len() || comp.len() == 1 {
        if comp.len() == 1 {
            if left == 0 {
                return f(comp);
            }
            return Ok(());
        }
        comp[i] = left;
        return f(comp);
    }
    for x in 0..=left {
        comp[i] = x;
        visit(comp, i + 1, left - x, f)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::best_constant;
    use crate::sampling::DEFAULT_SEED;

    #[test]
    fn extremal_examples() {
        let fam = InequalityFamily::new(FamilyKind::WeightedReverse, Params::diagonal(0.25), 10_000).unwrap();
        let c = best_constant(0.25, 0.25).unwrap();
        let r = extremal_ratio(&fam, 0.005).unwrap();
        assert!(r >= c && r <= 1.05 * c, "{r} vs {c}");
        let half = InequalityFamily::new(FamilyKind::ReverseHardy, Params::diagonal(0.5), 10_000).unwrap();
        assert!(extremal_ratio(&half, 0.01).unwrap() < 1.0);
        assert!(extremal_ratio(&fam, 0.0).is_err());
    }

    #[test]
    fn counterexample_examples() {
        let fam = InequalityFamily::new(FamilyKind::ReverseHardy, Params::diagonal(0.6), 100).unwrap();
        let found = find_counterexample(&fam, 100_000, DEFAULT_SEED).unwrap().found.unwrap();
        assert_eq!(found.source, CandidateSource::Unit(1));

        let fwd = InequalityFamily::new(FamilyKind::AlphaForward, Params::new(2.0, 2.0).with_alpha(4.0), 100).unwrap();
        let found = find_counterexample(&fwd, 100_000, DEFAULT_SEED).unwrap().found.unwrap();
        assert_eq!(found.source, CandidateSource::Unit(1));

        let ok = InequalityFamily::new(FamilyKind::ReverseHardy, Params::diagonal(0.3), 100).unwrap();
        let search = find_counterexample(&ok, 100_000, DEFAULT_SEED).unwrap();
        assert!(search.found.is_none());
        assert!(search.evaluations <= 100_000);
    }

    #[test]
    fn dual_pair_examples() {
        assert!(dual_pair_check(0.3, 0.3, 100, 100, DEFAULT_SEED).unwrap().pass());
        assert!(dual_pair_check(0.346, 0.346, 100, 100, DEFAULT_SEED).unwrap().pass());
    }

    #[test]
    fn grid_enumerates_all_compositions() {
        let fam = InequalityFamily::new(FamilyKind::WeightedReverse, Params::diagonal(0.3), 4).unwrap();
        let grid = composition_grid_min(&fam, 16).unwrap();
        // C(16 + 3, 3)
        assert_eq!(grid.points, 969);
        assert_eq!(grid.composition.iter().sum::<u32>(), 16);
        let one = InequalityFamily::new(FamilyKind::WeightedReverse, Params::diagonal(0.3), 1).unwrap();
        assert_eq!(composition_grid_min(&one, 16).unwrap().points, 1);
    }

    #[test]
    fn mean_family_examples() {
        let a: Vec<f64> = (1..=2000).map(|k| (k as f64).powf(-1.0 / 0.2 - 0.01)).collect();
        let eval = mean_family_ratio(0.5, 2.0, MeanSign::Minus, 0.2, &a).unwrap();
        assert!(eval.pass && eval.bound_slack >= -1e-12);
        let mut rng = rng_for(DEFAULT_SEED, 9);
        let a = log_uniform_vec(&mut rng, 300);
        let eval = mean_family_ratio(2.0, 1.0, MeanSign::Plus, 1.0 / 6.0, &a).unwrap();
        assert!(eval.pass && eval.bound_slack >= -1e-12);
        assert!(mean_family_ratio(2.0, 1.0, MeanSign::Minus, 0.1, &a).is_err());
    }

    #[test]
    fn beta_limit_single_support() {
        let (alpha, p, n) = (0.5, 0.4, 500);
        let mut a = vec![0.0; n];
        a[n - 1] = 1.0;
        let mut h = 0.0;
        let mut lhs = 0.0;
        for m in 1..=n {
            h += (m as f64).powf(alpha - 1.0);
            lhs += ((n as f64).powf(alpha - 1.0) / h).powf(p);
        }
        let r = beta_limit_ratio(alpha, p, &a).unwrap();
        assert!(((r - lhs) / lhs).abs() < 1e-12);
    }
}
