use std::sync::Arc;

use bregman_core::accel::*;
use bregman_core::mirror::{Euclidean, PowerMirror};
use bregman_core::problems::{
    DiagonalQuadratic, LeastSquares, PowerNorm, QuadraticPlusQuartic, Zero,
};
use bregman_core::taylor::rising_factorial;
use bregman_core::taylorstep::{smoothness_epsilon, StepConfig};
use bregman_core::{bregman_divergence, ObjectiveOracle, Point};
use proptest::prelude::*;

fn quadratic() -> DiagonalQuadratic {
    DiagonalQuadratic::new(vec![1.0, 10.0]).unwrap()
}

fn x0() -> Point {
    Point::new(vec![1.0, 1.0]).unwrap()
}

/// ψ_k(x) recomputed from its definition.
fn psi_oracle(
    f: &dyn ObjectiveOracle,
    rec: &RunRecord,
    cfg: &AccelConfig,
    x: &[f64],
    k: usize,
) -> f64 {
    let p = cfg.p;
    let mut s = 0.0;
    for i in 0..=k {
        let y = &rec.y[i];
        let g = f.gradient(y);
        let lin: f64 = g
            .iter()
            .zip(x.iter().zip(y.iter()))
            .map(|(gi, (xi, yi))| gi * (xi - yi))
            .sum();
        let w: f64 = (0..p - 1).map(|j| (i + j as usize) as f64).product();
        s += w * (f.value(y) - f.min_value().unwrap() + lin);
    }
    cfg.c * f64::from(p) * s
        + bregman_divergence(cfg.mirror.as_ref(), x, &cfg.x0).unwrap() / cfg.epsilon
}

#[test]
fn first_coupling_returns_start() {
    let f = quadratic();
    let cfg = AccelConfig::new(2, 0.1, x0()).unwrap();
    let rec = accelerated(&f, &cfg, 3);
    assert_eq!(rec.x[1].as_slice(), x0().as_slice());
    assert_eq!(rec.z[0].as_slice(), x0().as_slice());
}

#[test]
fn default_constant_is_sixteenth_for_p2() {
    let cfg = AccelConfig::new(2, 0.1, x0()).unwrap();
    assert_eq!((cfg.n, cfg.c), (2.0, 1.0 / 16.0));
}

#[test]
fn config_validation() {
    let e: Arc<dyn bregman_core::MirrorMap> = Arc::new(Euclidean);
    assert!(AccelConfig::with_params(2, 0.1, 2.0, 0.1, e.clone(), x0()).is_err());
    assert!(AccelConfig::with_params(2, 0.1, 1.0, 0.01, e.clone(), x0()).is_err());
    // Euclidean is not uniformly convex of order 3
    assert!(AccelConfig::with_params(3, 0.1, 2.0, 1e-3, e, x0()).is_err());
    let d3: Arc<dyn bregman_core::MirrorMap> =
        Arc::new(PowerMirror::regularizer(3.0, &x0()).unwrap());
    assert!(AccelConfig::with_params(3, 0.1, 2.0, 1e-3, d3, x0()).is_ok());
}

#[test]
fn psi_zero_at_start() {
    let f = quadratic();
    let cfg = AccelConfig::new(2, 0.1, x0()).unwrap();
    let rec = accelerated(&f, &cfg, 5);
    assert_eq!(estimate_sequence_value(&rec, &cfg, &x0(), 0).unwrap(), 0.0);
    assert!(estimate_sequence_value(&rec, &cfg, &x0(), 6).is_err());
}

#[test]
fn accelerated_bound_p2_closed_form() {
    let f = quadratic();
    let cfg = AccelConfig::new(2, 0.1, x0()).unwrap();
    let rec = accelerated(&f, &cfg, 200);
    assert_eq!(rec.termination, Termination::Completed);
    for k in 1..=200 {
        let kf = k as f64;
        // ½||x0 − x*||² / (Cεk(k+1)) with ||x0||² = 2
        let bound = 1.0 / (cfg.c * 0.1 * kf * (kf + 1.0));
        assert!((rec.bound[k] - bound).abs() <= 1e-12 * bound);
        assert!(rec.f_gap_y[k] <= bound + 1e-9, "k = {k}");
    }
}

#[test]
fn estimate_sequence_invariants_p3_least_squares() {
    let f = LeastSquares::seeded(20, 10, 7).unwrap();
    let start = Point::new(vec![1.0; 10]).unwrap();
    let eps = smoothness_epsilon(&f, 3).unwrap().min(1.0);
    let cfg = AccelConfig::new(3, eps, start).unwrap();
    let rec = accelerated(&f, &cfg, 150);
    let xs = f.minimizer().unwrap();
    let d0 = bregman_divergence(cfg.mirror.as_ref(), &xs, &cfg.x0).unwrap();
    for k in 1..rec.len() {
        assert!(rec.f_gap_y[k] <= rec.bound[k] + 1e-9, "bound at k = {k}");
        assert!(rec.psi[k] >= rec.ckp_fy[k] - 1e-9, "ψ_k(z_k) at k = {k}");
        assert!(rec.psi_grad_norm[k] <= 1e-8, "∇ψ_k(z_k) at k = {k}");
        let at_opt = estimate_sequence_value(&rec, &cfg, &xs, k).unwrap();
        assert!(
            at_opt <= d0 / eps + 1e-9 * (1.0 + d0 / eps),
            "ψ_k(x*) at k = {k}"
        );
        let cert = rec.certificates[k].as_ref().unwrap();
        assert!(cert.progress_ok && cert.move_ok);
    }
    for k in [1, 10, 100] {
        let z = &rec.z[k];
        let oracle = psi_oracle(&f, &rec, &cfg, z, k);
        assert!((rec.psi[k] - oracle).abs() <= 1e-10 * (1.0 + oracle.abs()));
    }
}

#[test]
fn psi_gradient_vanishes_only_at_z() {
    let f = quadratic();
    let cfg = AccelConfig::new(2, 0.1, x0()).unwrap();
    let rec = accelerated(&f, &cfg, 20);
    let g = estimate_sequence_gradient(&rec, &cfg, &[0.5, 0.5], 20).unwrap();
    assert!(g.iter().any(|v| v.abs() > 1e-3));
}

#[test]
fn plain_step_on_1d_quadratic() {
    let f = DiagonalQuadratic::new(vec![5.0]).unwrap();
    let rec = higher_order_descent(
        &f,
        StepConfig::new(2, 0.2, 1.0).unwrap(),
        Point::new(vec![2.0]).unwrap(),
        3,
    );
    assert!(rec.x[1][0].abs() < 1e-15);
}

#[test]
fn plain_method_invariants() {
    let f = quadratic();
    for p in [2u32, 3] {
        let eps = smoothness_epsilon(&f, p).unwrap().min(1.0);
        let rec = higher_order_descent(&f, StepConfig::new(p, eps, 1.0).unwrap(), x0(), 500);
        assert!((rec.radius - 11f64.sqrt()).abs() < 1e-12);
        for k in 1..rec.len() {
            assert!(rec.f_gap_x[k] <= rec.f_gap_x[k - 1] + 1e-10);
            assert!(rec.f_gap_x[k] <= rec.bound[k]);
            assert!(rec.f_gap_x[k] <= rec.recursion[k] + 1e-9);
        }
    }
}

#[test]
fn uniform_rate_report_p2() {
    let f = quadratic();
    let rec = higher_order_descent(&f, StepConfig::new(2, 0.1, 2.0).unwrap(), x0(), 300);
    let rep = uniformly_convex_descent_rate_check(&rec, &f).unwrap();
    assert_eq!(rep.m, 0.25);
    assert!((rep.contraction - 1.0 / (1.0 + 0.1 / 4.0)).abs() < 1e-15);
    assert!(rep.all_ok);
}

#[test]
fn naive_first_step_is_weighted_mirror_step() {
    let f = quadratic();
    let (p, c, eps) = (2u32, 0.25, 0.01);
    let rec = naive_discretization(&f, &Euclidean, p, c, eps, x0(), 2);
    assert_eq!(rec.k[0], 3);
    let g = f.gradient(&x0());
    let w = eps * c * 2.0 * 3.0;
    for (zi, gi) in rec.z[0].iter().zip(&g) {
        assert!((zi - (1.0 - w * gi)).abs() < 1e-15);
    }
    // x_4 = (2/3) z_3 + (1/3) x_3
    for i in 0..2 {
        assert!((rec.x[1][i] - (2.0 / 3.0 * rec.z[0][i] + 1.0 / 3.0)).abs() < 1e-15);
    }
}

#[test]
fn naive_scheme_p3_diverges() {
    let f = quadratic();
    let c = AccelConfig::max_c(3, 2.0);
    let rec = naive_discretization(&f, &Euclidean, 3, c, 0.01, x0(), 100_000);
    assert!(
        matches!(rec.termination, Termination::Diverged(_)),
        "{:?}",
        rec.termination
    );
}

#[test]
fn naive_scheme_p2_stays_bounded() {
    // At p = 2 the linear recursion has spectral radius below one on this quadratic.
    let f = quadratic();
    let rec = naive_discretization(&f, &Euclidean, 2, 0.25, 0.01, x0(), 20_000);
    assert_eq!(rec.termination, Termination::Completed);
}

#[test]
fn exponential_scheme_weights() {
    let f = quadratic();
    let rec = exponential_discretization(&f, &Euclidean, 1.0, 1.0, x0(), 3).unwrap();
    for k in 0..3 {
        assert_eq!(rec.x[k + 1].as_slice(), rec.z[k].as_slice());
    }
    let rec = exponential_discretization(&f, &Euclidean, 1.0, 0.1, x0(), 3).unwrap();
    for k in 0..3 {
        for i in 0..2 {
            let want = 0.1 * rec.z[k][i] + 0.9 * rec.x[k][i];
            assert!((rec.x[k + 1][i] - want).abs() < 1e-15);
        }
    }
    assert!(exponential_discretization(&f, &Euclidean, 2.0, 1.0, x0(), 3).is_err());
}

#[test]
fn exponential_scheme_diagnostic_runs() {
    let f = quadratic();
    let rec = exponential_discretization(&f, &Euclidean, 0.5, 0.1, x0(), 2000).unwrap();
    assert!(!rec.progress_ratio.is_empty());
}

#[test]
fn epoch_length_arithmetic() {
    assert_eq!(restart_epoch_length(2, 0.01), 160);
    assert_eq!(restart_epoch_length(2, 0.1), 51);
    assert_eq!(restart_epoch_length(3, 0.5), 31);
}

#[test]
fn restart_contracts_on_power_norm() {
    let f = PowerNorm::new(3.0, 3).unwrap();
    let rec = restart_accelerated(&f, 1.0, Point::new(vec![1.0, -0.5, 0.25]).unwrap(), 3).unwrap();
    let s = rec.restart.unwrap();
    assert_eq!(s.epochs.len(), 3);
    assert!(s.epochs.iter().all(|e| e.contraction_ok));
    assert!(s.bound_ok);
}

#[test]
fn restart_on_quadratic_plus_quartic() {
    let f = QuadraticPlusQuartic::new(vec![1.0, 1.0], 0.01).unwrap();
    let rec = restart_accelerated(&f, 0.1, x0(), 3).unwrap();
    let s = rec.restart.unwrap();
    assert!(s.epochs.iter().all(|e| e.contraction_ok));
    assert!(s.bound_ok, "{} > {}", s.final_gap, s.final_bound);
}

#[test]
fn restart_requires_uniform_convexity() {
    let f = Zero::new(2);
    assert!(restart_accelerated(&f, 0.1, x0(), 1).is_err());
    // κ = εσ must lie in (0, 1)
    assert!(restart_accelerated(&quadratic(), 2.0, x0(), 1).is_err());
}

#[test]
fn rising_factorial_weights_used() {
    assert_eq!(rising_factorial(4, 2), 20.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn accelerated_bound_on_random_quadratics(
        lam in prop::collection::vec(0.05f64..10.0, 3),
        start in prop::collection::vec(-2.0f64..2.0, 3),
        p in 2u32..=3,
    ) {
        let f = DiagonalQuadratic::new(lam).unwrap();
        let eps = smoothness_epsilon(&f, p).unwrap().min(1.0);
        let cfg = AccelConfig::new(p, eps, Point::new(start).unwrap()).unwrap();
        let rec = accelerated(&f, &cfg, 100);
        prop_assert_eq!(rec.termination, Termination::Completed);
        for k in 1..rec.len() {
            prop_assert!(rec.f_gap_y[k] <= rec.bound[k] + 1e-9);
            prop_assert!(rec.psi[k] >= rec.ckp_fy[k] - 1e-9);
        }
    }

    #[test]
    fn plain_method_descends(
        lam in prop::collection::vec(0.05f64..10.0, 3),
        start in prop::collection::vec(-2.0f64..2.0, 3),
    ) {
        let f = DiagonalQuadratic::new(lam).unwrap();
        let eps = smoothness_epsilon(&f, 2).unwrap();
        let rec = higher_order_descent(&f, StepConfig::new(2, eps, 1.0).unwrap(), Point::new(start).unwrap(), 100);
        for k in 1..rec.len() {
            prop_assert!(rec.f_gap_x[k] <= rec.f_gap_x[k - 1] + 1e-10);
            prop_assert!(rec.f_gap_x[k] <= rec.recursion[k] + 1e-9);
        }
    }
}
