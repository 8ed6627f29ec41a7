//! Brute-force truncated evaluation of the inequality families: ratios,
//! ratio minimization, extremal probes, counterexample search and the
//! Stolarsky-mean machinery.

mod family;
mod means;
mod optimize;
mod probes;

pub use family::{Direction, FamilyKind, InequalityFamily, PowerSumForm};
pub use means::{comparison_bound_slack, mean_weight, stolarsky_mean, stolarsky_or_identric, MeanSign};
pub use optimize::{
    descend, minimize_ratio, restart_start, search_worst_ratio, vector_hash, CertificateRecord, DescentRun,
    RatioCertificate, SearchOptions, SWEEP_TOL,
};
pub use probes::{
    beta_limit_ratio, composition_grid_min, dual_pair_check, extremal_ratio, find_counterexample, mean_family_ratio,
    CandidateSource, Counterexample, CounterexampleSearch, DualPairReport, GridMinimum, MeanFamilyEval,
};
