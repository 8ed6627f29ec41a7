//! Verification toolkit for Copson and Levin–Stečkin type series inequalities.
//!
//! * [`criteria`]: closed-form criterion functions, grid scans and threshold root-finding.
//! * [`chains`]: weight-sequence constructions and their finite induction checks.
//! * [`oracle`]: brute-force truncated ratios, ratio minimization and counterexample search.
//! * [`matnorm`]: factorable lower-triangular matrices, lp-norm lower bounds and
//!   sufficient-condition checks for upper bounds.

pub mod chains;
pub mod criteria;
pub mod error;
pub mod matnorm;
pub mod oracle;
pub mod params;
pub mod sampling;
pub mod scan;

pub use error::{Error, Result};
pub use params::Params;
pub use scan::{GridSpec, ScanResult};
