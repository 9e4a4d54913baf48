use bregman_core::problems::{DiagonalQuadratic, LogSumExp, PowerNorm, QuadraticPlusQuartic};
use bregman_core::taylorstep::{
    g_step, lemma1_constant, regularized_model, smoothness_epsilon, verify_lemma1, StepConfig,
    StepError,
};
use bregman_core::ObjectiveOracle;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn step_constant_values() {
    assert_eq!(lemma1_constant(2, 2.0), 0.25);
    assert_eq!(lemma1_constant(2, 1.0), 0.5);
    // (N² − 1)^{(p−2)/(2p−2)} / (2N) at p = 3, N = 2: 3^{1/4} / 4
    assert!((lemma1_constant(3, 2.0) - 3f64.powf(0.25) / 4.0).abs() < 1e-15);
    // p = 4, N = 4: 15^{1/3} / 8
    assert!((lemma1_constant(4, 4.0) - 15f64.cbrt() / 8.0).abs() < 1e-15);
    assert_eq!(lemma1_constant(3, 1.0), 0.0);
}

#[test]
fn gradient_step_on_1d_quadratic_lands_on_minimizer() {
    let lam = 4.0;
    let f = DiagonalQuadratic::new(vec![lam]).unwrap();
    let cfg = StepConfig::new(2, 1.0 / lam, 1.0).unwrap();
    let (y, _) = g_step(&f, &[3.0], &cfg).unwrap();
    assert!(y[0].abs() < 1e-15);
}

#[test]
fn p2_step_is_scaled_gradient_step() {
    let f = LogSumExp::seeded(4, 3, 1);
    let x = [0.3, -0.2, 0.5, 0.1];
    let cfg = StepConfig::new(2, 0.2, 2.0).unwrap();
    let (y, _) = g_step(&f, &x, &cfg).unwrap();
    let g = f.gradient(&x);
    for i in 0..4 {
        assert!((y[i] - (x[i] - 0.1 * g[i])).abs() < 1e-14);
    }
}

#[test]
fn unsupported_order_is_capability_error() {
    let f = PowerNorm::new(3.0, 2).unwrap();
    assert_eq!(f.derivative_order(), 2);
    let cfg = StepConfig::new(4, 1.0, 2.0).unwrap();
    assert!(matches!(
        g_step(&f, &[1.0, 0.5], &cfg),
        Err(StepError::Capability(_))
    ));
    assert!(StepConfig::new(5, 1.0, 2.0).is_err());
    assert!(StepConfig::new(2, -1.0, 2.0).is_err());
}

#[test]
fn zero_third_derivative_gives_infinite_epsilon() {
    let f = DiagonalQuadratic::new(vec![1.0, 10.0]).unwrap();
    assert_eq!(smoothness_epsilon(&f, 2).unwrap(), 0.1);
    assert_eq!(smoothness_epsilon(&f, 4).unwrap(), f64::INFINITY);
    let g = QuadraticPlusQuartic::new(vec![1.0, 1.0], 0.5).unwrap();
    assert_eq!(smoothness_epsilon(&g, 4).unwrap(), 2.0);
}

#[test]
fn certificates_hold_on_seeded_sweep() {
    let f = LogSumExp::seeded(5, 4, 42);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for p in 2..=4u32 {
        let eps = smoothness_epsilon(&f, p).unwrap();
        for n in [1.5, 2.0, 4.0] {
            let cfg = StepConfig::new(p, eps, n).unwrap();
            for trial in 0..100 {
                let x: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
                let (_, cert) = g_step(&f, &x, &cfg).unwrap();
                assert!(cert.progress_ok, "p={p} N={n} trial {trial}: {cert:?}");
                assert!(cert.move_ok, "p={p} N={n} trial {trial}: {cert:?}");
            }
        }
    }
}

#[test]
fn g_step_is_deterministic() {
    let f = LogSumExp::seeded(5, 4, 3);
    let x = [0.7, -0.1, 0.2, 1.1, -0.4];
    for p in 2..=4u32 {
        let cfg = StepConfig::new(p, 0.5, 2.0).unwrap();
        let (a, _) = g_step(&f, &x, &cfg).unwrap();
        let (b, _) = g_step(&f, &x, &cfg).unwrap();
        assert!(a
            .iter()
            .zip(b.iter())
            .all(|(u, v)| u.to_bits() == v.to_bits()));
    }
}

proptest! {
    #[test]
    fn step_minimizes_regularized_model(
        x in prop::collection::vec(-1.5f64..1.5, 5),
        d in prop::collection::vec(-1.0f64..1.0, 5),
        p in 2u32..=4,
        n in prop::sample::select(vec![1.5, 2.0, 4.0]),
    ) {
        let f = LogSumExp::seeded(5, 4, 8);
        let cfg = StepConfig::new(p, smoothness_epsilon(&f, p).unwrap(), n).unwrap();
        let (y, cert) = g_step(&f, &x, &cfg).unwrap();
        let at = regularized_model(&f, &x, &y, &cfg).unwrap();
        for s in [1e-3, 1e-2, 1e-1] {
            let z: Vec<f64> = y.iter().zip(&d).map(|(a, b)| a + s * b).collect();
            let m = regularized_model(&f, &x, &z, &cfg).unwrap();
            prop_assert!(m >= at - 1e-10 * (1.0 + at.abs()), "model decreased at step {s}: {m} < {at}");
        }
        let again = verify_lemma1(&f, &x, &y, &cfg).unwrap();
        prop_assert_eq!(again.progress_ok, cert.progress_ok);
    }

    #[test]
    fn progress_lower_bound_holds(x in prop::collection::vec(-2.0f64..2.0, 3), p in 2u32..=4) {
        let f = QuadraticPlusQuartic::new(vec![1.0, 2.0, 0.5], 0.1).unwrap();
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt() + 1.0;
        let eps = match smoothness_epsilon(&f, p) {
            Ok(e) => e.min(1.0),
            Err(_) => 1.0 / f.hessian_bound_on_ball(r),
        };
        let cfg = StepConfig::new(p, eps, 2.0).unwrap();
        let (_, cert) = g_step(&f, &x, &cfg).unwrap();
        prop_assert!(cert.progress >= cert.lemma1_lower - 1e-8, "{cert:?}");
        prop_assert!(cert.move_norm <= cert.move_bounds.1 + 1e-8, "{cert:?}");
    }
}
