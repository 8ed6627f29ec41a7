//! Multi-restart coordinate descent over the cone of nonnegative sequences.
//!
//! The search runs over cumulative sums `S_n` instead of `a_n`: moving one
//! `S_j` changes one left term and two right terms, so each trial step is
//! `O(1)`. Head-sum families are reversed so that the same tail-sum code
//! serves both.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::family::{Direction, FamilyKind, InequalityFamily};
use crate::error::{param_err, Result};
use crate::params::Params;
use crate::sampling::{log_uniform_vec, rng_for, DEFAULT_SEED};

/// Convergence threshold on the change of `ln(ratio)` over a sweep.
pub const SWEEP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub seed: u64,
    pub restarts: usize,
    /// Maximum number of full coordinate sweeps per restart.
    pub max_iters: usize,
    /// Cap on trial evaluations per restart.
    pub budget: Option<usize>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { seed: DEFAULT_SEED, restarts: 8, max_iters: 5000, budget: None }
    }
}

impl SearchOptions {
    pub fn new(seed: u64, restarts: usize, max_iters: usize) -> Self {
        SearchOptions { seed, restarts, max_iters, budget: None }
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = Some(budget);
        self
    }
}

/// Worst ratio found by a search, with the sequence attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioCertificate {
    pub kind: FamilyKind,
    pub params: Params,
    pub n: usize,
    pub best_ratio: f64,
    pub constant: f64,
    pub pass: bool,
    pub extremal_vector: Vec<f64>,
    /// Total coordinate sweeps across restarts.
    pub iterations: usize,
    pub evaluations: usize,
    pub seed: u64,
    /// Restart index that produced the best ratio.
    pub restart: usize,
    /// Whether the winning restart met the convergence test.
    pub converged: bool,
}

/// JSON layout of a certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub family: String,
    pub params: Params,
    #[serde(rename = "N")]
    pub n: usize,
    pub best_ratio: f64,
    pub constant: f64,
    pub pass: bool,
    pub seed: u64,
    pub iterations: usize,
    pub vector_hash: String,
}

/// SHA-256 of the little-endian bytes of the sequence, hex encoded.
pub fn vector_hash(a: &[f64]) -> String {
    let mut hasher = Sha256::new();
    for x in a {
        hasher.update(x.to_le_bytes());
    }
    hex::encode(hasher.finalize())
}

impl RatioCertificate {
    pub fn record(&self) -> CertificateRecord {
        CertificateRecord {
            family: self.kind.name().to_string(),
            params: self.params,
            n: self.n,
            best_ratio: self.best_ratio,
            constant: self.constant,
            pass: self.pass,
            seed: self.seed,
            iterations: self.iterations,
            vector_hash: vector_hash(&self.extremal_vector),
        }
    }

    /// `n,a_n` rows of the extremal vector.
    pub fn vector_csv(&self) -> String {
        let mut out = String::from("n,a\n");
        for (i, x) in self.extremal_vector.iter().enumerate() {
            out.push_str(&format!("{},{:.16e}\n", i + 1, x));
        }
        out
    }
}

/// Outcome of one descent run.
#[derive(Debug, Clone, PartialEq)]
pub struct DescentRun {
    pub ratio: f64,
    pub vector: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

struct Workspace<'a> {
    e: f64,
    /// `+1` to minimize the ratio, `-1` to maximize it.
    sign: f64,
    outer: Vec<f64>,
    inner: Vec<f64>,
    rhs_w: Vec<f64>,
    s: Vec<f64>,
    lhs: f64,
    rhs: f64,
    family: &'a InequalityFamily,
}

impl<'a> Workspace<'a> {
    fn new(family: &'a InequalityFamily, a: &[f64]) -> Self {
        let f = family.form();
        let flip = |v: &[f64]| -> Vec<f64> {
            let mut v = v.to_vec();
            if !f.tail {
                v.reverse();
            }
            v
        };
        let a = flip(a);
        let outer = flip(&f.outer);
        let inner = flip(&f.inner);
        let rhs_w = flip(&f.rhs);
        let mut s = vec![0.0; a.len()];
        let mut acc = 0.0;
        for k in (0..a.len()).rev() {
            acc += inner[k] * a[k];
            s[k] = acc;
        }
        let sign = match family.direction() {
            Direction::Lower => 1.0,
            Direction::Upper => -1.0,
        };
        let mut ws = Workspace { e: f.exponent, sign, outer, inner, rhs_w, s, lhs: 0.0, rhs: 0.0, family };
        ws.recompute();
        ws
    }

    fn a_at(&self, k: usize, s_k: f64, s_next: f64) -> f64 {
        ((s_k - s_next) / self.inner[k]).max(0.0)
    }

    fn next(&self, k: usize) -> f64 {
        self.s.get(k + 1).copied().unwrap_or(0.0)
    }

    fn lterm(&self, j: usize, s: f64) -> f64 {
        self.outer[j] * s.powf(self.e)
    }

    fn rterm(&self, k: usize, a: f64) -> f64 {
        self.rhs_w[k] * a.powf(self.e)
    }

    fn recompute(&mut self) {
        let n = self.s.len();
        self.lhs = (0..n).map(|j| self.lterm(j, self.s[j])).sum();
        self.rhs = (0..n).map(|k| self.rterm(k, self.a_at(k, self.s[k], self.next(k)))).sum();
    }

    fn objective(&self, lhs: f64, rhs: f64) -> f64 {
        let v = self.sign * (lhs.ln() - rhs.ln());
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }

    /// Objective after moving `S_j` to `x`, with the changed sums.
    fn trial(&self, j: usize, x: f64) -> (f64, f64, f64) {
        let old = self.s[j];
        let next = self.next(j);
        let mut lhs = self.lhs - self.lterm(j, old) + self.lterm(j, x);
        let mut rhs = self.rhs - self.rterm(j, self.a_at(j, old, next)) + self.rterm(j, self.a_at(j, x, next));
        if j > 0 {
            let prev = self.s[j - 1];
            rhs += self.rterm(j - 1, self.a_at(j - 1, prev, x)) - self.rterm(j - 1, self.a_at(j - 1, prev, old));
        }
        if !lhs.is_finite() || !rhs.is_finite() || rhs <= 0.0 || lhs <= 0.0 {
            lhs = f64::NAN;
            rhs = f64::NAN;
        }
        (self.objective(lhs, rhs), lhs, rhs)
    }

    fn vector(&self) -> Vec<f64> {
        let n = self.s.len();
        let mut a: Vec<f64> = (0..n).map(|k| self.a_at(k, self.s[k], self.next(k))).collect();
        if !self.family.form().tail {
            a.reverse();
        }
        a
    }
}

/// Coordinate descent from `start`, toward smaller ratios for reverse
/// families and larger ratios for forward ones.
pub fn descend(family: &InequalityFamily, start: &[f64], max_iters: usize, budget: Option<usize>) -> Result<DescentRun> {
    family.check_input(start)?;
    let mut ws = Workspace::new(family, start);
    let n = ws.s.len();
    let mut steps = vec![0.5f64; n];
    let mut current = ws.objective(ws.lhs, ws.rhs);
    let mut evaluations = 0usize;
    let mut stalls = 0usize;
    let mut iterations = 0usize;
    let mut converged = false;
    let budget = budget.unwrap_or(usize::MAX);

    'sweeps: while iterations < max_iters {
        iterations += 1;
        let before = current;
        for j in 0..n {
            if evaluations + 4 > budget {
                break 'sweeps;
            }
            let lo = ws.next(j);
            let hi = if j == 0 { f64::INFINITY } else { ws.s[j - 1] };
            let x = ws.s[j];
            let d = steps[j];
            let mut cands = [x * (1.0 + d), x / (1.0 + d), f64::NAN, x - d * (x - lo)];
            if hi.is_finite() {
                cands[2] = x + d * (hi - x);
            } else if x == 0.0 {
                cands[2] = d;
            }
            let mut best: Option<(f64, f64, f64, f64)> = None;
            for c in cands {
                if c.is_nan() {
                    continue;
                }
                let c = c.clamp(lo, hi);
                if c == x {
                    continue;
                }
                evaluations += 1;
                let (obj, lhs, rhs) = ws.trial(j, c);
                if obj < best.map_or(current, |b| b.0) {
                    best = Some((obj, c, lhs, rhs));
                }
            }
            match best {
                Some((obj, c, lhs, rhs)) => {
                    ws.s[j] = c;
                    ws.lhs = lhs;
                    ws.rhs = rhs;
                    current = obj;
                    steps[j] = (steps[j] * 2.0).min(1.0);
                }
                None => steps[j] *= 0.5,
            }
        }
        ws.recompute();
        current = ws.objective(ws.lhs, ws.rhs);
        let max_step = steps.iter().cloned().fold(0.0, f64::max);
        if (before - current).abs() < SWEEP_TOL {
            stalls += 1;
        } else {
            stalls = 0;
        }
        if (stalls >= 3 && max_step < 1e-4) || max_step < 1e-12 {
            converged = true;
            break;
        }
    }
    let vector = ws.vector();
    let ratio = family.ratio(&vector)?;
    Ok(DescentRun { ratio, vector, iterations, evaluations, converged })
}

/// Starting point of restart `index`: extremal sequences for the first two,
/// seeded log-uniform draws afterwards.
pub fn restart_start(family: &InequalityFamily, seed: u64, index: usize) -> Vec<f64> {
    match index {
        0 => family.extremal_sequence(0.1),
        1 => family.extremal_sequence(0.01),
        _ => log_uniform_vec(&mut rng_for(seed, index as u64), family.n),
    }
}

/// Whether `x` is a worse (more violating) ratio than `y` for this family.
pub(crate) fn worse(family: &InequalityFamily, x: f64, y: f64) -> bool {
    match family.direction() {
        Direction::Lower => x < y,
        Direction::Upper => x > y,
    }
}

/// Runs all restarts in parallel and keeps the worst ratio, ties broken by restart index.
pub fn search_worst_ratio(family: &InequalityFamily, opts: &SearchOptions) -> Result<RatioCertificate> {
    if family.n < 2 {
        return param_err("ratio search needs N >= 2");
    }
    if opts.restarts == 0 {
        return param_err("need at least one restart");
    }
    let runs: Vec<Result<DescentRun>> = (0..opts.restarts)
        .into_par_iter()
        .map(|i| descend(family, &restart_start(family, opts.seed, i), opts.max_iters, opts.budget))
        .collect();
    let mut best: Option<(usize, DescentRun)> = None;
    let (mut iterations, mut evaluations) = (0, 0);
    for (i, run) in runs.into_iter().enumerate() {
        let run = run?;
        iterations += run.iterations;
        evaluations += run.evaluations;
        let better = best.as_ref().map_or(true, |(_, b)| worse(family, run.ratio, b.ratio));
        if better {
            best = Some((i, run));
        }
    }
    let (restart, run) = best.expect("at least one restart");
    Ok(RatioCertificate {
        kind: family.kind,
        params: family.params,
        n: family.n,
        best_ratio: run.ratio,
        constant: family.constant(),
        pass: family.passes(run.ratio),
        extremal_vector: run.vector,
        iterations,
        evaluations,
        seed: opts.seed,
        restart,
        converged: run.converged,
    })
}

/// Minimizes the ratio of a reverse family over nonnegative sequences.
pub fn minimize_ratio(family: &InequalityFamily, seed: u64, restarts: usize, max_iters: usize) -> Result<RatioCertificate> {
    if !family.kind.is_reverse() {
        return param_err(format!("minimize_ratio needs a reverse family, got {}", family.kind));
    }
    search_worst_ratio(family, &SearchOptions::new(seed, restarts, max_iters))
}
