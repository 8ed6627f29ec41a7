use approx::assert_relative_eq;
use proptest::prelude::*;
use steckin_core::oracle::*;
use steckin_core::params::Params;

fn family_for(kind: FamilyKind, n: usize) -> InequalityFamily {
    let params = match kind {
        FamilyKind::ReverseHardy => Params::diagonal(0.3),
        FamilyKind::WeightedReverse | FamilyKind::Dual => Params::new(0.3, 0.4),
        FamilyKind::AlphaReverse => Params::diagonal(0.4).with_alpha(1.5),
        FamilyKind::MeanReverse(MeanSign::Plus) => Params::diagonal(0.4).with_alpha(2.0).with_beta(1.5),
        FamilyKind::MeanReverse(MeanSign::Minus) => Params::diagonal(0.4).with_alpha(0.5).with_beta(2.0),
        FamilyKind::BetaLimit => Params::diagonal(0.4).with_alpha(0.5),
        FamilyKind::AlphaForward => Params::diagonal(2.0).with_alpha(1.1),
        FamilyKind::MeanForward => Params::diagonal(2.0).with_alpha(1.1).with_beta(3.0),
    };
    InequalityFamily::new(kind, params, n).unwrap()
}

fn positive_vec(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-6.0f64..6.0, len).prop_map(|v| v.into_iter().map(f64::exp).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ratios_are_homogeneous(a in positive_vec(25), log_scale in -20.0f64..20.0) {
        let s = log_scale.exp();
        let scaled: Vec<f64> = a.iter().map(|x| x * s).collect();
        for kind in FamilyKind::ALL {
            let fam = family_for(kind, a.len());
            assert_relative_eq!(fam.ratio(&a).unwrap(), fam.ratio(&scaled).unwrap(), max_relative = 1e-12);
        }
    }

    #[test]
    fn zero_padding_is_monotone(a in positive_vec(12), pad in 1usize..30) {
        let mut padded = a.clone();
        padded.resize(a.len() + pad, 0.0);
        for kind in FamilyKind::ALL {
            if kind.needs_positive() {
                continue;
            }
            let short = family_for(kind, a.len()).ratio(&a).unwrap();
            let long = family_for(kind, padded.len()).ratio(&padded).unwrap();
            match kind.direction() {
                Direction::Lower => assert_relative_eq!(short, long, max_relative = 1e-13),
                Direction::Upper => prop_assert!(long >= short * (1.0 - 1e-13)),
            }
        }
    }

    #[test]
    fn stolarsky_mean_monotone_in_index(x in 1e-3f64..1e3, y in 1e-3f64..1e3, r1 in -6.0f64..6.0, step in 1e-3f64..4.0) {
        let r2 = r1 + step;
        prop_assume!(r1.abs() > 1e-3 && r2.abs() > 1e-3);
        let lo = stolarsky_or_identric(r1, x, y).unwrap();
        let hi = stolarsky_or_identric(r2, x, y).unwrap();
        prop_assert!(lo <= hi * (1.0 + 1e-12));
        prop_assert!(lo >= x.min(y) * (1.0 - 1e-12) && hi <= x.max(y) * (1.0 + 1e-12));
    }

    #[test]
    fn mean_comparison_bounds_hold(alpha in 1.0f64..4.0, beta_frac in 0.01f64..1.0, alpha_minus in 0.05f64..0.95, beta_minus in 0.0f64..5.0, n in 1usize..300) {
        let plus = comparison_bound_slack(alpha, alpha.min(beta_frac * alpha.max(1.0)), MeanSign::Plus, n).unwrap();
        prop_assert!(plus >= -1e-12);
        let minus = comparison_bound_slack(alpha_minus, alpha_minus + beta_minus, MeanSign::Minus, n).unwrap();
        prop_assert!(minus >= -1e-12);
    }
}

#[test]
fn search_never_beats_proven_constants() {
    let cases = [
        (FamilyKind::ReverseHardy, Params::diagonal(0.25)),
        (FamilyKind::ReverseHardy, Params::diagonal(0.3)),
        (FamilyKind::WeightedReverse, Params::new(0.3, 0.3)),
        (FamilyKind::Dual, Params::new(0.3, 0.3)),
        (FamilyKind::AlphaForward, Params::diagonal(2.0).with_alpha(1.1)),
    ];
    for (kind, params) in cases {
        let fam = InequalityFamily::new(kind, params, 30).unwrap();
        let cert = search_worst_ratio(&fam, &SearchOptions::new(7, 3, 300)).unwrap();
        assert!(cert.pass, "{kind}: ratio {} vs constant {}", cert.best_ratio, cert.constant);
    }
}

#[test]
fn searches_are_deterministic() {
    let fam = InequalityFamily::new(FamilyKind::ReverseHardy, Params::diagonal(0.3), 20).unwrap();
    let a = minimize_ratio(&fam, 11, 3, 100).unwrap();
    let b = minimize_ratio(&fam, 11, 3, 100).unwrap();
    assert_eq!(a.best_ratio.to_bits(), b.best_ratio.to_bits());
    assert_eq!(vector_hash(&a.extremal_vector), vector_hash(&b.extremal_vector));
}
