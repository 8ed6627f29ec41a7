use approx::assert_relative_eq;
use steckin_core::criteria::*;
use steckin_core::matnorm::*;
use steckin_core::oracle::*;
use steckin_core::params::Params;

// Reference values computed independently with mpmath (40 digits) and numpy.

#[test]
fn p_star_reference() {
    let root = p_star_root(1e-12, 1000).unwrap().nonneg_end();
    assert!((root - 0.346_552_568_947_466_16).abs() < 1e-11);
    assert_relative_eq!(crit14(0.346).unwrap(), 0.007_188_153_425_712_124, max_relative = 1e-10);
}

#[test]
fn alpha0_reference() {
    let parts = alpha0_parts(2.0).unwrap();
    assert!((parts.alpha1 - 1.207_106_781_186_547_5).abs() < 1e-8);
    assert!((parts.alpha2 - 1.197_185_755_376_420_2).abs() < 1e-8);
    assert!((alpha0_super_one(2.0).unwrap() - 1.197_185_755_376_420_2).abs() < 1e-8);
}

#[test]
fn h36_reference() {
    assert_relative_eq!(h36(1.0, 0.25).unwrap(), 26.0, max_relative = 1e-12);
}

#[test]
fn cesaro_norm_reference() {
    let m = FactorableMatrix::from_generator(Generator::Cesaro, 10_000).unwrap();
    let est = lp_norm_lower(&m, 2.0, 200).unwrap();
    assert_relative_eq!(est.lower_bound, 1.817_999_126_585_837_3, max_relative = 1e-9);
}

#[test]
fn reverse_hardy_grid_reference() {
    let fam = InequalityFamily::new(FamilyKind::ReverseHardy, Params::diagonal(0.45), 3).unwrap();
    assert_relative_eq!(fam.constant(), 0.913_655_390_618_115_7, max_relative = 1e-14);
    let grid = composition_grid_min(&fam, 200).unwrap();
    assert_relative_eq!(grid.ratio, 0.942_310_136_621_688_7, max_relative = 1e-12);
}
