//! Subcommand implementations. Each returns a [`Report`]; the caller renders it.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;
use steckin_core::chains::{self, ChainCheck, WeightChain};
use steckin_core::criteria;
use steckin_core::matnorm::{self, FactorableMatrix, Generator};
use steckin_core::oracle::{self, CandidateSource, FamilyKind, InequalityFamily, SearchOptions};
use steckin_core::params::critical_shift;
use steckin_core::sampling::DEFAULT_SEED;
use steckin_core::scan::{GridSpec, Margin};
use steckin_core::{Params, ScanResult};

use crate::args::{Cli, Command, Common, ConstructArgs, CriteriaArgs, MatnormArgs, OracleArgs, ThresholdArgs};
use crate::config::ConfigFile;
use crate::report::{Format, Report, ReportRow};
use crate::CliError;

pub const DEFAULT_N: usize = 10_000;
pub const DEFAULT_RESTARTS: usize = 8;
pub const SEED_ENV: &str = "STECKIN_SEED";

const KNOWN_KEYS: &[&str] = &[
    "p", "r", "alpha", "beta", "a", "alpha-opt", "n", "seed", "restarts", "out", "format", "jobs", "family", "grid",
    "rows", "target", "tol", "construction", "chain-out", "minimize", "counterexample", "extremal", "max-iters",
    "budget", "vector-out", "generator", "check", "L", "iters", "samples",
];

/// Effective settings after merging flags, config file, environment and defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub params: Params,
    /// Whether `a` was given explicitly.
    pub shift_given: bool,
    pub n: usize,
    pub seed: u64,
    pub restarts: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

pub fn parse_seed(s: &str) -> Result<u64, CliError> {
    let s = s.trim();
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|_| CliError::Usage(format!("invalid seed '{s}'")))
}

fn load_config(common: &Common) -> Result<ConfigFile, CliError> {
    let cfg = match &common.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let unknown = cfg.unknown_keys(KNOWN_KEYS);
    if !unknown.is_empty() {
        return Err(CliError::Usage(format!("unknown config keys: {}", unknown.join(", "))));
    }
    Ok(cfg)
}

fn resolve(mut c: Common, cfg: &ConfigFile) -> Result<Settings, CliError> {
    cfg.fill(&mut c.p, "p")?;
    cfg.fill(&mut c.r, "r")?;
    cfg.fill(&mut c.alpha, "alpha")?;
    cfg.fill(&mut c.beta, "beta")?;
    cfg.fill(&mut c.a, "a")?;
    cfg.fill(&mut c.alpha_opt, "alpha-opt")?;
    cfg.fill(&mut c.n, "n")?;
    cfg.fill(&mut c.seed, "seed")?;
    cfg.fill(&mut c.restarts, "restarts")?;
    cfg.fill(&mut c.out, "out")?;
    cfg.fill(&mut c.format, "format")?;
    cfg.fill(&mut c.jobs, "jobs")?;
    let seed = match c.seed.or_else(|| std::env::var(SEED_ENV).ok()) {
        Some(s) => parse_seed(&s)?,
        None => DEFAULT_SEED,
    };
    let defaults = Params::default();
    let p = c.p.unwrap_or(defaults.p);
    let params = Params {
        p,
        r: c.r.unwrap_or(p),
        alpha: c.alpha,
        beta: c.beta,
        a: c.a.unwrap_or(0.0),
        alpha_opt: c.alpha_opt,
    };
    Ok(Settings {
        params,
        shift_given: c.a.is_some(),
        n: c.n.unwrap_or(DEFAULT_N),
        seed,
        restarts: c.restarts.unwrap_or(DEFAULT_RESTARTS),
        format: c.format.unwrap_or(Format::Csv),
        out: c.out,
        jobs: c.jobs,
    })
}

fn init_pool(jobs: Option<usize>) {
    if let Some(j) = jobs {
        // A second initialization (e.g. repeated in-process runs) keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global();
    }
}

pub fn dispatch(cli: Cli) -> Result<(Report, Settings), CliError> {
    let common = match &cli.command {
        Command::Criteria(a) => a.common.clone(),
        Command::Threshold(a) => a.common.clone(),
        Command::Construct(a) => a.common.clone(),
        Command::Oracle(a) => a.common.clone(),
        Command::Matnorm(a) => a.common.clone(),
    };
    let cfg = load_config(&common)?;
    let settings = resolve(common, &cfg)?;
    init_pool(settings.jobs);
    let report = match cli.command {
        Command::Criteria(a) => cmd_criteria(a, &cfg, &settings)?,
        Command::Threshold(a) => cmd_threshold(a, &cfg, &settings)?,
        Command::Construct(a) => cmd_construct(a, &cfg, &settings)?,
        Command::Oracle(a) => cmd_oracle(a, &cfg, &settings)?,
        Command::Matnorm(a) => cmd_matnorm(a, &cfg, &settings)?,
    };
    Ok((report, settings))
}

/// Row builder carrying the echoed parameters.
struct Rows<'a> {
    s: &'a Settings,
    params: Params,
    n: usize,
    report: Report,
}

impl<'a> Rows<'a> {
    fn new(s: &'a Settings) -> Self {
        Rows { s, params: s.params, n: s.n, report: Report::default() }
    }

    fn push(&mut self, id: impl Into<String>, value: f64, constant: Option<f64>, margin: f64, pass: bool, t: Instant) {
        self.report.push(ReportRow {
            check_id: id.into(),
            p: self.params.p,
            r: self.params.r,
            alpha: self.params.alpha,
            beta: self.params.beta,
            a: self.params.a,
            n: self.n,
            seed: self.s.seed,
            value,
            constant,
            margin,
            pass,
            runtime_ms: t.elapsed().as_millis() as u64,
        });
    }

    fn scan(&mut self, id: &str, scan: &ScanResult, t: Instant) {
        self.push(id, scan.argmin, None, scan.min_margin, scan.pass, t);
    }

    fn chain(&mut self, id: &str, check: &ChainCheck, t: Instant) {
        self.scan(id, &check.scan, t);
    }
}

fn required<T: Clone>(v: &Option<T>, name: &str) -> Result<T, CliError> {
    v.clone().ok_or_else(|| CliError::Usage(format!("--{name} is required")))
}

fn grid_count(grid: Option<usize>, default: usize) -> usize {
    grid.unwrap_or(default)
}

fn cmd_criteria(mut args: CriteriaArgs, cfg: &ConfigFile, s: &Settings) -> Result<Report, CliError> {
    cfg.fill(&mut args.family, "family")?;
    cfg.fill(&mut args.grid, "grid")?;
    cfg.fill_flag(&mut args.rows, "rows")?;
    let family = required(&args.family, "family")?;
    let mut rows = Rows::new(s);
    let Params { p, r, .. } = s.params;
    let t = Instant::now();
    let unit = || GridSpec::new(0.0, 1.0, grid_count(args.grid, 2001));
    let alpha = || required(&s.params.alpha, "alpha");
    let one_dim: Option<(GridSpec, Box<dyn Fn(f64) -> Margin>)> = match family.as_str() {
        "lemma1" => {
            let x = unit()?;
            let tg = GridSpec::new(0.505, 0.995, 199)?;
            let res = criteria::scan_lemma1(&x, &tg)?;
            rows.scan("criteria/lemma1/f", &res.f, t);
            rows.push("criteria/lemma1/g", res.g.argmin, None, res.g.min_margin, res.g.pass, t);
            rows.push("criteria/lemma1/g-monotone", res.worst_g_step, None, res.worst_g_step, res.g_monotone, t);
            rows.push("criteria/lemma1", res.f.min_margin.min(res.g.min_margin), None, res.f.min_margin.min(res.g.min_margin), res.pass(), t);
            None
        }
        "phi45" => {
            let a = if s.shift_given { s.params.a } else { critical_shift(p) };
            rows.params.a = a;
            let grid = unit()?;
            let res = criteria::scan_phi45(p, r, a, &grid)?;
            rows.scan("criteria/phi45", &res, t);
            Some((grid, Box::new(move |y| criteria::phi45_margin(y, p, r, a))))
        }
        "f35" => {
            let alpha = alpha()?;
            let grid = unit()?;
            let res = criteria::scan_f35(p, alpha, &grid)?;
            rows.scan("criteria/f35", &res, t);
            Some((grid, Box::new(move |x| criteria::f35_margin(x, p, alpha))))
        }
        "ineq32" => {
            let alpha = alpha()?;
            let grid = unit()?;
            let res = criteria::scan_ineq32(alpha, p, &grid)?;
            rows.scan("criteria/ineq32", &res, t);
            Some((grid, Box::new(move |y| criteria::ineq32_margin_scaled(y, alpha, p))))
        }
        "h1h2" => {
            let alpha = alpha()?;
            let grid = unit()?;
            let res = criteria::scan_h1h2(alpha, p, &grid)?;
            rows.scan("criteria/h1h2", &res, t);
            let h = move |y: f64| {
                let v = if p <= 2.0 { criteria::h1(y, alpha, p) } else { criteria::h2(y, alpha, p) };
                Margin::new(-v.unwrap_or(f64::NAN), 1.0)
            };
            Some((grid, Box::new(h)))
        }
        "h36" => {
            let v = criteria::h36(alpha()?, p)?;
            rows.push("criteria/h36", v, None, v, v >= 0.0, t);
            None
        }
        "crit14" => {
            let v = criteria::crit14(p)?;
            rows.push("criteria/crit14", v, None, v, v >= 0.0, t);
            None
        }
        "crit27" => {
            let v = criteria::crit27(p)?;
            rows.push("criteria/crit27", v, None, v, v >= 0.0, t);
            None
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown criteria family '{other}' (expected lemma1, phi45, f35, h36, ineq32, h1h2, crit14, crit27)"
            )))
        }
    };
    if let (true, Some((grid, f))) = (args.rows, one_dim) {
        let id = format!("criteria/{family}/cell");
        let mut summary = rows.report.rows.pop().expect("summary row");
        for x in grid.points() {
            let m = f(x);
            rows.push(id.clone(), x, None, m.value, m.value >= -m.tolerance(), t);
        }
        summary.runtime_ms = t.elapsed().as_millis() as u64;
        rows.report.push(summary);
    }
    Ok(rows.report)
}

fn cmd_threshold(mut args: ThresholdArgs, cfg: &ConfigFile, s: &Settings) -> Result<Report, CliError> {
    cfg.fill(&mut args.target, "target")?;
    cfg.fill(&mut args.tol, "tol")?;
    let target = required(&args.target, "target")?;
    let tol = args.tol.unwrap_or(1e-9);
    let mut rows = Rows::new(s);
    let p = s.params.p;
    let t = Instant::now();
    let (id, value, lo, hi, f_lo, f_hi) = match target.as_str() {
        "p-star" => {
            let root = criteria::p_star_root(tol, steckin_core::scan::BRACKET_POINTS)?;
            ("threshold/p-star", root.nonneg_end(), root.lo, root.hi, root.f_lo, root.f_hi)
        }
        "alpha0-sub-half" => {
            let root = criteria::alpha0_sub_half_root(p)?;
            ("threshold/alpha0-sub-half", root.nonneg_end(), root.lo, root.hi, root.f_lo, root.f_hi)
        }
        "alpha0-super-one" => {
            let value = criteria::alpha0_super_one(p)?;
            // Worst side of the sufficient condition; nonpositive below the root.
            let g = |alpha: f64| -> f64 {
                if p <= 2.0 {
                    let h0 = criteria::h1(0.0, alpha, p).unwrap_or(f64::NAN);
                    let h1 = criteria::h1(1.0, alpha, p).unwrap_or(f64::NAN);
                    h0.max(h1)
                } else {
                    criteria::h2(1.0, alpha, p).unwrap_or(f64::NAN)
                }
            };
            let d = tol.max(1e-7);
            ("threshold/alpha0-super-one", value, value - d, value + d, g(value - d), g(value + d))
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown target '{other}' (expected p-star, alpha0-sub-half, alpha0-super-one)"
            )))
        }
    };
    let opposite = f_lo.signum() != f_hi.signum() || f_lo == 0.0 || f_hi == 0.0;
    rows.push(format!("{id}/lo"), lo, None, f_lo, true, t);
    rows.push(format!("{id}/hi"), hi, None, f_hi, true, t);
    rows.push(id, value, None, hi - lo, opposite, t);
    rows.report.attach("bracket", json!({ "lo": lo, "hi": hi, "f_lo": f_lo, "f_hi": f_hi }));
    Ok(rows.report)
}

fn write_chain(chain: &WeightChain, check: &ChainCheck, path: Option<&Path>) -> Result<(), CliError> {
    if let Some(path) = path {
        let mut f = std::io::BufWriter::new(fs::File::create(path)?);
        chain.write_csv(Some(check), &mut f)?;
    }
    Ok(())
}

fn cmd_construct(mut args: ConstructArgs, cfg: &ConfigFile, s: &Settings) -> Result<Report, CliError> {
    cfg.fill(&mut args.construction, "construction")?;
    cfg.fill(&mut args.chain_out, "chain-out")?;
    let construction = required(&args.construction, "construction")?;
    let mut rows = Rows::new(s);
    let Params { p, r, .. } = s.params;
    let a = if s.shift_given { s.params.a } else { critical_shift(p) };
    let t = Instant::now();
    let out = args.chain_out.as_deref();
    match construction.as_str() {
        "main" => {
            rows.params.a = a;
            let chain = chains::build_b_chain(p, r, a, s.params.alpha_opt, s.n)?;
            let check = chains::verify_induction_43(&chain)?;
            rows.chain("construct/main", &check, t);
            write_chain(&chain, &check, out)?;
        }
        "nu" => {
            rows.params.a = a;
            let chain = chains::build_nu_chain(p, r, a, s.n)?;
            let check = chains::verify_303(&chain)?;
            rows.chain("construct/nu", &check, t);
            write_chain(&chain, &check, out)?;
        }
        "alternative" => {
            let chain = chains::alternative_b_chain(p, s.n)?;
            rows.params = chain.params;
            let check = chains::verify_alternative(&chain)?;
            rows.chain("construct/alternative", &check, t);
            write_chain(&chain, &check, out)?;
        }
        "section4" => {
            let alpha = required(&s.params.alpha, "alpha")?;
            let chain = chains::build_w_chain_sec4(p, alpha, s.n)?;
            let residual = chains::section4_identity_residual(&chain)?;
            rows.push("construct/section4/identity", residual, None, 1e-12 - residual, residual < 1e-12, t);
            let check = chains::verify_35(&chain)?;
            rows.chain("construct/section4", &check, t);
            write_chain(&chain, &check, out)?;
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown construction '{other}' (expected main, alternative, section4, nu)"
            )))
        }
    }
    Ok(rows.report)
}

fn signed_margin(family: &InequalityFamily, ratio: f64) -> f64 {
    if family.kind.is_reverse() {
        ratio - family.constant()
    } else {
        family.constant() - ratio
    }
}

fn write_vector(path: Option<&Path>, v: &[f64]) -> Result<(), CliError> {
    if let Some(path) = path {
        let mut text = String::from("n,a\n");
        for (i, x) in v.iter().enumerate() {
            text.push_str(&format!("{},{:.16e}\n", i + 1, x));
        }
        fs::write(path, text)?;
    }
    Ok(())
}

fn cmd_oracle(mut args: OracleArgs, cfg: &ConfigFile, s: &Settings) -> Result<Report, CliError> {
    cfg.fill(&mut args.family, "family")?;
    cfg.fill_flag(&mut args.minimize, "minimize")?;
    cfg.fill_flag(&mut args.counterexample, "counterexample")?;
    cfg.fill(&mut args.extremal, "extremal")?;
    cfg.fill(&mut args.max_iters, "max-iters")?;
    cfg.fill(&mut args.budget, "budget")?;
    cfg.fill(&mut args.vector_out, "vector-out")?;
    let kind: FamilyKind = required(&args.family, "family")?.parse()?;
    let family = InequalityFamily::new(kind, s.params, s.n)?;
    let mut rows = Rows::new(s);
    let name = kind.name();
    let minimize = args.minimize || (!args.counterexample && args.extremal.is_none());
    let constant = Some(family.constant());
    let vector_out = args.vector_out.as_deref();

    if let Some(eps) = args.extremal {
        let t = Instant::now();
        let ratio = oracle::extremal_ratio(&family, eps)?;
        rows.push(format!("oracle/{name}/extremal"), ratio, constant, signed_margin(&family, ratio), family.passes(ratio), t);
    }
    if args.counterexample {
        let t = Instant::now();
        let search = oracle::find_counterexample(&family, args.budget.unwrap_or(100_000), s.seed)?;
        match &search.found {
            Some(cx) => {
                let source = match cx.source {
                    CandidateSource::Unit(j) => format!("e_{j}"),
                    CandidateSource::Extremal => "extremal".into(),
                    CandidateSource::Random => "random".into(),
                    CandidateSource::Descent => "descent".into(),
                };
                eprintln!("counterexample: {source} (ratio {:.16e} vs constant {:.16e})", cx.ratio, family.constant());
                rows.push(format!("oracle/{name}/counterexample"), cx.ratio, constant, signed_margin(&family, cx.ratio), false, t);
                rows.report.attach(
                    "counterexample",
                    json!({
                        "source": source,
                        "ratio": cx.ratio,
                        "evaluations": search.evaluations,
                        "vector_hash": oracle::vector_hash(&cx.vector),
                    }),
                );
                write_vector(vector_out, &cx.vector)?;
            }
            None => {
                let w = search.worst_ratio;
                rows.push(format!("oracle/{name}/counterexample"), w, constant, signed_margin(&family, w), true, t);
                rows.report.attach("counterexample", json!({ "source": null, "evaluations": search.evaluations }));
            }
        }
    }
    if minimize {
        let t = Instant::now();
        let opts = SearchOptions::new(s.seed, s.restarts, args.max_iters.unwrap_or(500));
        let cert = oracle::search_worst_ratio(&family, &opts)?;
        let id = if kind.is_reverse() { "minimize" } else { "maximize" };
        rows.push(format!("oracle/{name}/{id}"), cert.best_ratio, constant, signed_margin(&family, cert.best_ratio), cert.pass, t);
        rows.report.attach("certificate", serde_json::to_value(cert.record()).map_err(std::io::Error::from)?);
        rows.report.attach("converged", json!(cert.converged));
        if !args.counterexample {
            write_vector(vector_out, &cert.extremal_vector)?;
        }
    }
    Ok(rows.report)
}

fn read_raw_matrix(path: &str) -> Result<FactorableMatrix, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {path}: {e}")))?;
    let (mut lambda, mut big) = (Vec::new(), Vec::new());
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Option<(f64, f64)> = match fields.as_slice() {
            [l, b] => l.parse().ok().zip(b.parse().ok()),
            _ => None,
        };
        match parsed {
            Some((l, b)) => {
                lambda.push(l);
                big.push(b);
            }
            None if i == 0 => continue,
            None => return Err(CliError::Usage(format!("{path}:{}: expected lambda,Lambda", i + 1))),
        }
    }
    Ok(FactorableMatrix::from_raw(lambda, big)?)
}

fn cmd_matnorm(mut args: MatnormArgs, cfg: &ConfigFile, s: &Settings) -> Result<Report, CliError> {
    cfg.fill(&mut args.generator, "generator")?;
    cfg.fill(&mut args.check, "check")?;
    cfg.fill(&mut args.l, "L")?;
    cfg.fill(&mut args.iters, "iters")?;
    cfg.fill(&mut args.samples, "samples")?;
    cfg.fill_flag(&mut args.rows, "rows")?;
    let spec = required(&args.generator, "generator")?;
    let matrix = match spec.strip_prefix("csv:") {
        Some(path) => read_raw_matrix(path)?,
        None => FactorableMatrix::from_generator(spec.parse::<Generator>()?, s.n)?,
    };
    let check = args.check.clone().unwrap_or_else(|| "all".into());
    if !["norm", "thm31", "cor1", "random", "all"].contains(&check.as_str()) {
        return Err(CliError::Usage(format!("unknown check '{check}' (expected norm, thm31, cor1, random, all)")));
    }
    let want = |c: &str| check == "all" || check == c;
    let p = s.params.p;
    let mut rows = Rows::new(s);
    rows.n = matrix.n();
    let alpha = match matrix.generator {
        Some(Generator::PowerWeights(a)) | Some(Generator::Stolarsky(a, _)) => Some(a),
        _ => None,
    };
    rows.params.alpha = alpha.or(s.params.alpha);
    if let Some(Generator::Stolarsky(_, b)) = matrix.generator {
        rows.params.beta = Some(b);
    }
    let l = args.l.unwrap_or_else(|| alpha.map_or(1.0, |a| 1.0 / a));
    let a = s.params.a;
    let bound = p / (p - l);

    if want("norm") {
        let t = Instant::now();
        let est = matnorm::lp_norm_lower(&matrix, p, args.iters.unwrap_or(10_000))?;
        let ok = est.max_recompute_error <= 1e-10 && est.lower_bound <= bound + 1e-9;
        rows.push("matnorm/norm", est.lower_bound, Some(bound), bound - est.lower_bound, ok, t);
        rows.report.attach(
            "norm",
            json!({ "iterations": est.iterations, "converged": est.converged, "max_recompute_error": est.max_recompute_error }),
        );
    }
    let per_n = |rows: &mut Rows, id: &str, c: &ChainCheck, t: Instant| {
        if args.rows {
            for (i, slack) in c.slacks.iter().enumerate() {
                let n = (c.first_index + i) as f64;
                rows.push(format!("{id}/n"), n, None, *slack, *slack >= -steckin_core::scan::TOL_SCAN, t);
            }
        }
        rows.chain(id, c, t);
    };
    if want("thm31") {
        let t = Instant::now();
        let c = matnorm::check_thm31(&matrix, p, l, a)?;
        per_n(&mut rows, "matnorm/thm31", &c, t);
    }
    if want("cor1") {
        let t = Instant::now();
        let c = matnorm::check_cor1(&matrix, p, l, a)?;
        per_n(&mut rows, "matnorm/cor1", &c, t);
        let v = matnorm::implication_violations(&matrix, p, l, a)?;
        rows.push("matnorm/implication", v.len() as f64, None, 0.0 - v.len() as f64, v.is_empty(), t);
    }
    if want("random") {
        let t = Instant::now();
        let worst = matnorm::random_ratio_max(&matrix, p, args.samples.unwrap_or(100), s.seed)?;
        let thm = matnorm::check_thm31(&matrix, p, l, a)?;
        // Only a certified instance makes a sampled excess an alarm.
        let ok = !thm.pass() || worst <= bound + 1e-9;
        rows.push("matnorm/random", worst, Some(bound), bound - worst, ok, t);
    }
    if matrix.drops_last_condition() {
        rows.report.attach("dropped_last_condition", json!(true));
    }
    Ok(rows.report)
}
