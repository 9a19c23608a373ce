use approx::assert_abs_diff_eq;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use smcmc_core::theory::*;
use smcmc_core::{ExecPolicy, SmcmcError};

fn two_state(p: f64, q: f64) -> FiniteChain {
    FiniteChain::new(DMatrix::from_row_slice(2, 2, &[1.0 - p, p, q, 1.0 - q])).unwrap()
}

fn rows_equal_pi(pi: &[f64]) -> FiniteChain {
    let n = pi.len();
    FiniteChain::new(DMatrix::from_fn(n, n, |_, j| pi[j])).unwrap()
}

#[test]
fn one_step_chain_has_zero_error() {
    let chain = rows_equal_pi(&[0.1, 0.2, 0.3, 0.4]);
    let p0 = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
    let o = check_universal(&chain, &p0, 10).unwrap();
    assert!(o.passed());
    assert_abs_diff_eq!(o.min_margin, 0.0, epsilon = 1e-15);
}

#[test]
fn stationary_start_stays_put() {
    let chain = two_state(0.3, 0.2);
    let o = check_universal(&chain, &chain.stationary().clone(), 20).unwrap();
    assert!(o.passed());
    assert!(o.min_margin.abs() < 1e-15);
}

#[test]
fn universal_on_random_chains() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let chain = random_chain(5, &mut rng);
        let p0 = random_distribution(5, &mut rng);
        assert!(check_universal(&chain, &p0, 50).unwrap().passed());
    }
}

#[test]
fn universal_is_tight_on_two_states() {
    // the 2-state chain contracts by exactly |1 - p - q| = 0.8 per step from a point mass
    let chain = two_state(0.1, 0.1);
    let p0 = DVector::from_vec(vec![1.0, 0.0]);
    let o = check_universal(&chain, &p0, 5).unwrap();
    assert!(o.passed());
    assert!(o.min_margin.abs() < 1e-12);
}

#[test]
fn dobrushin_examples() {
    let o = check_dobrushin_dominance(&rows_equal_pi(&[0.5, 0.5]));
    assert_eq!(o.min_margin, 0.0);
    let o = check_dobrushin_dominance(&two_state(0.1, 0.1));
    assert_abs_diff_eq!(o.min_margin, 1.6 - 0.8, epsilon = 1e-14);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        assert!(check_dobrushin_dominance(&random_chain(4, &mut rng)).passed());
    }
}

#[test]
fn trivial_drift_certificate() {
    // V = 1 and C = everything: drift holds with b = 1 - lambda
    let chain = two_state(0.2, 0.3);
    let rho = uniform_rho(&chain);
    let cert = DriftCertificate {
        v: vec![1.0; 2],
        small_set: vec![true; 2],
        rho,
        lambda: 0.5,
        b: 0.5,
    };
    let p0 = DVector::from_vec(vec![1.0, 0.0]);
    let t = 6;
    let b = drift_bound(&chain, &cert, &p0, t, t).unwrap();
    let expect = rho.powi(6) + 0.5f64.powi(6) * 2.0f64.powi(5);
    assert_abs_diff_eq!(b, expect, epsilon = 1e-15);
    assert!(check_drift(&chain, &cert, &p0, 20).unwrap().passed());
    assert!(matches!(
        drift_bound(&chain, &cert, &p0, 3, 4),
        Err(SmcmcError::Contract(_))
    ));
}

#[test]
fn invalid_drift_certificate_is_distinct_error() {
    let chain = two_state(0.2, 0.3);
    let cert = DriftCertificate {
        v: vec![1.0; 2],
        small_set: vec![false; 2],
        rho: 0.5,
        lambda: 0.5,
        b: 0.0,
    };
    let p0 = DVector::from_vec(vec![0.5, 0.5]);
    assert!(matches!(
        drift_bound(&chain, &cert, &p0, 3, 1),
        Err(SmcmcError::InvalidCertificate(_))
    ));
}

#[test]
fn searched_drift_certificates_hold() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let chain = random_chain(4, &mut rng);
        let p0 = random_distribution(4, &mut rng);
        let cert = search_drift_certificate(&chain, &p0, 10).expect("a certificate exists");
        cert.validate(&chain).unwrap();
        assert!(check_drift(&chain, &cert, &p0, 30).unwrap().passed());
    }
}

#[test]
fn smcmc_constant_sequence_has_zero_error() {
    let chain = two_state(0.2, 0.4);
    let inst = SmcmcInstance {
        chains: vec![chain.clone(), chain.clone(), chain],
        m: vec![1, 3],
    };
    let o = smcmc_bound_check(&inst).unwrap();
    assert!(o.full.passed() && o.weak.passed());
    assert!(o.full.min_margin.abs() < 1e-15);
}

#[test]
fn smcmc_single_step_bound_value() {
    // t = 1: full bound is eps_1 * alpha_1, weak bound 2 * eps_1 * alpha_1
    let c0 = two_state(0.2, 0.4);
    let c1 = two_state(0.3, 0.3);
    let eps = uniform_rho(&c1).powi(2);
    let alpha = 0.5 * l1_distance(c0.stationary(), c1.stationary());
    let p = c1.evolve(c0.stationary(), 2);
    let err = l1_distance(&p, c1.stationary());
    let o = smcmc_bound_check(&SmcmcInstance {
        chains: vec![c0, c1],
        m: vec![2],
    })
    .unwrap();
    assert_abs_diff_eq!(o.full.min_margin, eps * alpha - err, epsilon = 1e-15);
    assert_abs_diff_eq!(o.weak.min_margin, 2.0 * eps * alpha - err, epsilon = 1e-15);
}

#[test]
fn smcmc_full_bound_counterexample() {
    // one sweep of [[.9,.1],[.1,.9]] from a point mass: exact error 0.8,
    // while eps * alpha = 0.8 * 0.5 = 0.4; the weaker bound 0.8 is attained
    let c0 =
        FiniteChain::with_stationary(DMatrix::identity(2, 2), DVector::from_vec(vec![1.0, 0.0])).unwrap();
    let c1 = two_state(0.1, 0.1);
    let o = smcmc_bound_check(&SmcmcInstance {
        chains: vec![c0, c1],
        m: vec![1],
    })
    .unwrap();
    assert_eq!(o.full.violations, 1);
    assert_abs_diff_eq!(o.full.max_violation, 0.4, epsilon = 1e-14);
    assert!(o.weak.passed());
    assert!(o.weak.min_margin.abs() < 1e-14);
}

#[test]
fn v_norm_with_unit_weights_matches_universal() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let chain = random_chain(5, &mut rng);
    let p0 = random_distribution(5, &mut rng);
    let cert = VCertificate {
        v: vec![1.0; 5],
        rho: uniform_rho(&chain),
    };
    let a = v_norm_check(&chain, &cert, &p0, 30).unwrap();
    let b = check_universal(&chain, &p0, 30).unwrap();
    assert_abs_diff_eq!(a.min_margin, b.min_margin, epsilon = 1e-15);
    let o = v_norm_check(&chain, &cert, chain.stationary(), 10).unwrap();
    assert!(o.min_margin.abs() < 1e-15);
}

#[test]
fn v_norm_rejects_bad_certificate() {
    let chain = two_state(0.1, 0.1);
    let cert = VCertificate {
        v: vec![1.0; 2],
        rho: 0.5,
    };
    let p0 = DVector::from_vec(vec![1.0, 0.0]);
    assert!(matches!(
        v_norm_check(&chain, &cert, &p0, 3),
        Err(SmcmcError::InvalidCertificate(_))
    ));
}

#[test]
fn spectral_two_state_closed_form() {
    let chain = two_state(0.25, 0.25);
    let h = [0.0, 1.0];
    for t in 1..=10 {
        assert_abs_diff_eq!(
            stationary_acf(&chain, &h, t).unwrap(),
            0.5f64.powi(t as i32),
            epsilon = 1e-14
        );
    }
    let s = spectral_acf_check(&chain, &h, 500).unwrap();
    assert_abs_diff_eq!(s.lambda1, 0.5, epsilon = 1e-12);
    assert!(s.passed && !s.flagged);
    assert!(s.rel_error < 1e-10);
}

#[test]
fn spectral_second_eigenfunction_is_flagged() {
    // symmetric 3-state chain with eigenvalues 1, 0.55 and 0.25; the
    // antisymmetric function (0, -1, 1) is the 0.25 eigenfunction and is
    // orthogonal to the 0.55 one
    let t = DMatrix::from_row_slice(3, 3, &[0.7, 0.15, 0.15, 0.15, 0.55, 0.3, 0.15, 0.3, 0.55]);
    let chain = FiniteChain::new(t).unwrap();
    let h = [0.0, -1.0, 1.0];
    let s = spectral_acf_check(&chain, &h, 20).unwrap();
    assert_abs_diff_eq!(s.lambda1, 0.55, epsilon = 1e-12);
    assert!(s.flagged && s.passed);
    assert_abs_diff_eq!(s.rate, 0.25, epsilon = 1e-6);
    let generic = spectral_acf_check(&chain, &[0.0, 0.0, 1.0], 500).unwrap();
    assert!(!generic.flagged && generic.passed);
}

#[test]
fn spectral_rejects_bad_inputs() {
    let t = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.5, 0.0, 0.5]);
    let chain = FiniteChain::new(t).unwrap();
    assert!(matches!(
        spectral_acf_check(&chain, &[0.0, 1.0, 2.0], 10),
        Err(SmcmcError::Contract(_))
    ));
    let rev = two_state(0.2, 0.2);
    assert!(matches!(
        spectral_acf_check(&rev, &[3.0, 3.0], 10),
        Err(SmcmcError::Contract(_))
    ));
}

#[test]
fn reversible_generator_is_reversible() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..20 {
        let c = random_reversible_chain(6, &mut rng);
        assert!(c.is_reversible(1e-12));
        let h = random_function(6, &mut rng);
        assert!(spectral_acf_check(&c, &h, 500).unwrap().passed);
    }
}

#[test]
fn minorization_tightness_on_random_chains() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let o = check_minorization_tightness(&random_chain(5, &mut rng));
        assert!(o.passed() && !o.flagged);
    }
}

fn quad_hellinger_sq(m1: f64, s1: f64, m2: f64, s2: f64) -> f64 {
    // midpoint rule for 1/2 * integral (sqrt p - sqrt q)^2 over a wide window
    let pdf = |x: f64, m: f64, s: f64| {
        (-0.5 * ((x - m) / s).powi(2)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt())
    };
    let lo = (m1 - 12.0 * s1).min(m2 - 12.0 * s2);
    let hi = (m1 + 12.0 * s1).max(m2 + 12.0 * s2);
    let n = 200_000;
    let dx = (hi - lo) / n as f64;
    (0..n)
        .map(|i| {
            let x = lo + (i as f64 + 0.5) * dx;
            (pdf(x, m1, s1).sqrt() - pdf(x, m2, s2).sqrt()).powi(2)
        })
        .sum::<f64>()
        * dx
        * 0.5
}

fn quad_l1(m1: f64, s1: f64, m2: f64, s2: f64) -> f64 {
    let pdf = |x: f64, m: f64, s: f64| {
        (-0.5 * ((x - m) / s).powi(2)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt())
    };
    let lo = (m1 - 12.0 * s1).min(m2 - 12.0 * s2);
    let hi = (m1 + 12.0 * s1).max(m2 + 12.0 * s2);
    let n = 200_000;
    let dx = (hi - lo) / n as f64;
    (0..n)
        .map(|i| {
            let x = lo + (i as f64 + 0.5) * dx;
            (pdf(x, m1, s1) - pdf(x, m2, s2)).abs()
        })
        .sum::<f64>()
        * dx
}

#[test]
fn hellinger_examples() {
    assert_eq!(hellinger_normal(1.0, 2.0, 1.0, 2.0), 0.0);
    let h = hellinger_normal(0.0, 1.0, 0.0, 2.0);
    assert_abs_diff_eq!(h * h, 1.0 - (0.8f64).sqrt(), epsilon = 1e-15);
    assert_abs_diff_eq!(h * h, quad_hellinger_sq(0.0, 1.0, 0.0, 2.0), epsilon = 1e-9);
}

#[test]
fn hellinger_controls_l1_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    use rand::Rng;
    for _ in 0..50 {
        let (m1, m2) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let (s1, s2) = (rng.random_range(0.3..2.5), rng.random_range(0.3..2.5));
        let h = hellinger_normal(m1, s1, m2, s2);
        let l1 = quad_l1(m1, s1, m2, s2);
        assert_abs_diff_eq!(l1, l1_normal(m1, s1, m2, s2), epsilon = 1e-8);
        assert!(l1 <= 2.0 * std::f64::consts::SQRT_2 * h + 1e-9);
        assert!(2.0 * h * h <= l1 + 1e-9);
    }
}

#[test]
fn l1_not_bounded_by_twice_normalized_hellinger() {
    // small location shift: L1 ~ 0.798 d while 2H ~ 0.707 d
    let d = 1e-3;
    assert!(l1_normal(0.0, 1.0, d, 1.0) > 2.0 * hellinger_normal(0.0, 1.0, d, 1.0));
}

#[test]
fn posterior_drift_examples() {
    let a = discrete_posterior_drift(&[0.0, 0.0], 1, |k, _| if k == 0 { 0.0 } else { -1.0 });
    // prior (1/2, 1/2) to posterior (e/(1+e), 1/(1+e))
    let e = 1f64.exp();
    assert_abs_diff_eq!(a[0], e / (1.0 + e) - 0.5, epsilon = 1e-15);
    let rep = mixture_grid_drift(&[0.5; 30], &[-1.0, 0.0, 1.0], 1.0, 0.0, 0.1);
    assert!(rep.iter().all(|a| a.is_finite() && *a >= 0.0));
}

#[test]
fn normal_mean_drift_matches_quadrature_and_decays() {
    let y = [0.3, -1.2, 0.8];
    let a = normal_mean_drift(0.0, 1.0, 1.0, &y);
    // first step: N(0,1) to N(0.15, 1/2)
    assert_abs_diff_eq!(a[0], 0.5 * quad_l1(0.0, 1.0, 0.15, 0.5f64.sqrt()), epsilon = 1e-8);
    let report = run_suite("posterior", 200, 1, ExecPolicy::Sequential).unwrap();
    assert!(report[0].passed(), "{report:?}");
}

#[test]
fn unknown_suite_is_config_error() {
    assert!(matches!(
        run_suite("nope", 1, 0, ExecPolicy::Sequential),
        Err(SmcmcError::Config(_))
    ));
}

#[test]
fn suite_is_deterministic_across_policies() {
    let a = run_suite("universal", 20, 5, ExecPolicy::Sequential).unwrap();
    let b = run_suite("universal", 20, 5, ExecPolicy::Parallel).unwrap();
    assert_eq!(a, b);
}

#[test]
fn full_suite_report() {
    let start = std::time::Instant::now();
    let reports = run_suite("all", 100, 2024, ExecPolicy::Parallel).unwrap();
    for r in &reports {
        println!("{r:?}");
    }
    println!("elapsed {:?}", start.elapsed());
}
