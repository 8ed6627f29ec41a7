use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::Rng;
use steckin_core::chains::*;
use steckin_core::criteria::crit14;
use steckin_core::params::{conjugate, critical_shift};
use steckin_core::sampling::{log_uniform, log_uniform_vec, rng_for, DEFAULT_SEED};

#[test]
fn three_routes_agree_where_base_case_holds() {
    for &p in &[0.335, 0.34, 0.343, 0.346] {
        assert!(crit14(p).unwrap() >= 0.0);
        let a = critical_shift(p);
        assert!(verify_induction_43(&build_b_chain(p, p, a, None, 10_000).unwrap()).unwrap().pass(), "main p = {p}");
        assert!(verify_303(&build_nu_chain(p, p, a, 10_000).unwrap()).unwrap().pass(), "nu p = {p}");
        assert!(verify_alternative(&alternative_b_chain(p, 10_000).unwrap()).unwrap().pass(), "alt p = {p}");
    }
}

#[test]
fn dual_induction_feeds_the_summation_inequality() {
    let p = 0.34;
    let n = 200;
    let chain = build_nu_chain(p, p, critical_shift(p), n).unwrap();
    let lambda: Vec<f64> = (1..=n + 1).map(|i| (i as f64).powf(-1.0)).collect();
    for trial in 0..100 {
        let a = log_uniform_vec(&mut rng_for(DEFAULT_SEED, trial), n);
        assert!(verify_302(&lambda, &a, &chain.nu, conjugate(p)).unwrap());
    }
}

#[test]
fn randomized_lemmas_never_fail() {
    let mut failures = 0;
    for i in 0..1000u64 {
        let mut rng = rng_for(DEFAULT_SEED, i);
        let n = rng.gen_range(1..=40);
        let w = log_uniform_vec(&mut rng, n);
        let a = log_uniform_vec(&mut rng, n);
        let p = rng.gen_range(0.05..0.95);
        failures += usize::from(!verify_51(&w, &a, p).unwrap());
    }
    assert_eq!(failures, 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn backward_recursion_is_exact(p in 0.3345f64..0.49, n in 1usize..=200) {
        let chain = build_b_chain(p, p, critical_shift(p), None, n).unwrap();
        let f: Vec<f64> = chain.b.iter().map(|b| b.powf(p - 1.0)).collect();
        let fast = partial_product_sums(&f);
        for m in 0..n {
            let direct: f64 = (0..=m).map(|k| f[k..=m].iter().product::<f64>()).sum();
            assert_relative_eq!(fast[m], direct, max_relative = 1e-10);
        }
    }

    #[test]
    fn w_sum_identity(p in 0.02f64..0.49, frac in 0.01f64..0.99, n in 1usize..2000) {
        let alpha = frac / p;
        let chain = build_w_chain_sec4(p, alpha, n).unwrap();
        prop_assert!(section4_identity_residual(&chain).unwrap() < 1e-12);
    }

    #[test]
    fn chains_are_finite_and_positive(p in 0.3345f64..0.49, n in 1usize..500) {
        let main = build_b_chain(p, p, critical_shift(p), None, n).unwrap();
        prop_assert!(main.b.iter().chain(&main.w).all(|x| x.is_finite() && *x > 0.0));
        let alt = alternative_b_chain(p, n).unwrap();
        prop_assert!(alt.b.iter().chain(&alt.w).all(|x| x.is_finite() && *x > 0.0));
        let nu = build_nu_chain(p, p, critical_shift(p), n).unwrap();
        prop_assert_eq!(nu.nu[0], 0.0);
    }

    #[test]
    fn lemma61_both_branches(seed in any::<u64>(), n in 2usize..30, p_pos in 0.05f64..0.95, p_neg in -5.0f64..-0.05) {
        let mut rng = rng_for(seed, 0);
        let lambda = log_uniform_vec(&mut rng, n);
        let a = log_uniform_vec(&mut rng, n);
        let eta = log_uniform_vec(&mut rng, n);
        let shrink: Vec<f64> = (0..n).map(|_| log_uniform(&mut rng, 1e-3, 1.0)).collect();
        let mu_low: Vec<f64> = eta.iter().zip(&shrink).map(|(e, s)| e * s).collect();
        let mu_high: Vec<f64> = eta.iter().zip(&shrink).map(|(e, s)| e / s).collect();
        prop_assert!(verify_lemma61(&lambda, &a, &mu_low, &eta, p_pos).unwrap());
        prop_assert!(verify_lemma61(&lambda, &a, &mu_high, &eta, p_neg).unwrap());
    }

    #[test]
    fn summation_inequality_outside_unit_interval(seed in any::<u64>(), n in 1usize..30, e_neg in -5.0f64..-0.05, e_big in 1.05f64..5.0) {
        let mut rng = rng_for(seed, 0);
        let lambda = log_uniform_vec(&mut rng, n + 1);
        let a = log_uniform_vec(&mut rng, n);
        let mut nu = log_uniform_vec(&mut rng, n + 1);
        nu[0] = 0.0;
        prop_assert!(verify_302(&lambda, &a, &nu, e_neg).unwrap());
        prop_assert!(verify_302(&lambda, &a, &nu, e_big).unwrap());
    }
}
