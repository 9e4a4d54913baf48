use bregman_core::flows::*;
use bregman_core::mirror::{Euclidean, PowerMirror, QuarticEuclidean};
use bregman_core::problems::{DiagonalQuadratic, PowerNorm, Zero};
use bregman_core::scaling::{ScalingTriple, TimeMap};
use bregman_core::{MirrorMap, Point};
use proptest::prelude::*;

fn quadratic() -> DiagonalQuadratic {
    DiagonalQuadratic::new(vec![1.0, 10.0]).unwrap()
}

fn x0() -> Point {
    Point::new(vec![1.0, 1.0]).unwrap()
}

fn sup_x(a: &Trajectory, expected: impl Fn(usize) -> Vec<f64>) -> f64 {
    (0..a.len())
        .map(|i| {
            let e = expected(i);
            a.x(i)
                .iter()
                .zip(&e)
                .map(|(u, v)| (u - v).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

#[test]
fn p2_energy_nonincreasing_and_rate_bound_holds() {
    let f = quadratic();
    let s = ScalingTriple::polynomial(2.0, 1.0).unwrap();
    let sys = build_el_system(&Euclidean, &f, s.clone()).unwrap();
    let tr = integrate(&sys, &x0(), 0.1, 100.0, &Controls::default()).unwrap();
    for i in 1..tr.len() {
        assert!(
            tr.energy[i] <= tr.energy[i - 1] * (1.0 + 1e-6),
            "energy rose at t = {}",
            tr.times[i]
        );
    }
    let e0 = tr.energy[0];
    for i in 0..tr.len() {
        let bound = e0 * (-s.beta(tr.times[i])).exp();
        assert!(
            tr.f_gap[i] <= bound * (1.0 + 1e-6),
            "gap above bound at t = {}",
            tr.times[i]
        );
    }
    let slope = fit_rate(&tr.times, &tr.f_gap, (1.0, 50.0)).unwrap();
    assert!(slope <= -2.0 + 0.3, "slope {slope}");
}

#[test]
fn energy_at_matches_system_energy() {
    let f = quadratic();
    let h = PowerMirror::new(3.0, vec![0.0, 0.0]).unwrap();
    let s = ScalingTriple::polynomial(3.0, 1.0).unwrap();
    let sys = build_el_system(&h, &f, s.clone()).unwrap();
    let state = [0.4, -0.2, 0.3, 0.7];
    let direct = energy_at(&h, &f, &s, 2.0, &state[..2], &state[2..], &[0.0, 0.0]).unwrap();
    assert!((direct - sys.energy(2.0, &state)).abs() < 1e-14);
}

#[test]
fn hamiltonian_matches_euler_lagrange() {
    let f = quadratic();
    let s = ScalingTriple::polynomial(2.0, 1.0).unwrap();
    for h in [&Euclidean as &dyn MirrorMap, &QuarticEuclidean] {
        let a = integrate(
            &build_hamiltonian_system(h, &f, s.clone()).unwrap(),
            &x0(),
            0.1,
            10.0,
            &Controls::rk4(10_000),
        )
        .unwrap();
        let b = integrate(
            &build_el_system(h, &f, s.clone()).unwrap(),
            &x0(),
            0.1,
            10.0,
            &Controls::rk4(10_000),
        )
        .unwrap();
        let m = sup_x(&a, |i| b.x(i).to_vec());
        assert!(m <= 1e-4, "{}: {m}", h.name());
    }
}

#[test]
fn force_free_motion_matches_closed_form() {
    let z = Zero::new(2);
    let z0 = [0.3, -0.5];
    for s in [
        ScalingTriple::polynomial(2.0, 1.0).unwrap(),
        ScalingTriple::exponential(1.0).unwrap(),
    ] {
        let sys = build_el_system(&Euclidean, &z, s.clone()).unwrap();
        let t0 = s.valid_from().max(0.1);
        let y0 = [1.0, 1.0, z0[0], z0[1]];
        let tr = integrate_state(&sys, &y0, t0, 10.0, &Controls::rk4(10_000)).unwrap();
        let m = sup_x(&tr, |i| {
            natural_motion(&s, t0, &[1.0, 1.0], &z0, tr.times[i])
        });
        assert!(m <= 1e-6, "{s:?}: {m}");
    }
}

#[test]
fn massless_flow_approaches_gradient_flow() {
    let f = quadratic();
    let ng = integrate(
        &build_natural_gradient_flow(&Euclidean, &f).unwrap(),
        &x0(),
        0.0,
        2.0,
        &Controls::default(),
    )
    .unwrap();
    let mut prev = f64::INFINITY;
    for m in [0.1, 0.01, 0.001] {
        let ms = integrate(
            &build_massless_system(&Euclidean, &f, m).unwrap(),
            &x0(),
            0.0,
            2.0,
            &Controls::default(),
        )
        .unwrap();
        let d = sup_x(&ms, |i| ng.sample(ms.times[i]).unwrap());
        assert!(d < prev, "m = {m}: {d} >= {prev}");
        prev = d;
    }
}

#[test]
fn euclidean_r3_rate() {
    let f = quadratic();
    let tr = integrate(
        &build_euclidean_r_system(&f, 3.0, ForceScaling::Unit).unwrap(),
        &x0(),
        0.1,
        100.0,
        &Controls::default(),
    )
    .unwrap();
    let slope = fit_rate(&tr.times, &tr.f_gap, (1.0, 100.0)).unwrap();
    assert!(slope <= -2.0 + 0.2, "slope {slope}");
}

#[test]
fn rescaled_flow_on_power_norm_is_exponential_decay() {
    for p in [2.0, 3.0] {
        let f = PowerNorm::new(p, 3).unwrap();
        let start = Point::new(vec![1.0, -0.5, 0.3]).unwrap();
        let tr = integrate(
            &build_rescaled_gradient_flow(&f, p).unwrap(),
            &start,
            0.0,
            10.0,
            &Controls::default(),
        )
        .unwrap();
        let m = sup_x(&tr, |i| {
            start.iter().map(|v| v * (-tr.times[i]).exp()).collect()
        });
        assert!(m <= 1e-5, "p = {p}: {m}");
    }
}

#[test]
fn dilated_p2_flow_matches_p3_flow() {
    let f = quadratic();
    let tau = TimeMap::power(1.5).unwrap();
    let (t0, t_end) = (0.1f64, 10.0);
    let s0 = tau.tau(t0);
    let s2 = ScalingTriple::polynomial(2.0, 1.0).unwrap().with_t_min(s0);
    let tr2 = integrate(
        &build_el_system(&Euclidean, &f, s2).unwrap(),
        &x0(),
        s0,
        tau.tau(t_end),
        &Controls::adaptive(1e-10, 1e-13),
    )
    .unwrap();
    let s3 = ScalingTriple::polynomial(3.0, 1.0).unwrap();
    let tr3 = integrate(
        &build_el_system(&Euclidean, &f, s3).unwrap(),
        &x0(),
        t0,
        t_end,
        &Controls::adaptive(1e-10, 1e-13),
    )
    .unwrap();
    let grid: Vec<f64> = tr3.times.iter().copied().filter(|t| *t >= 0.5).collect();
    let dil = dilate_trajectory(&tr2, &tau, &grid).unwrap();
    let m = sup_x(&dil, |i| tr3.sample(grid[i]).unwrap());
    assert!(m <= 1e-3, "{m}");
}

#[test]
fn invalid_builders_rejected() {
    let f = quadratic();
    assert!(build_rescaled_gradient_flow(&f, 1.5).is_err());
    assert!(build_euclidean_r_system(&f, 1.0, ForceScaling::Matched(1.0)).is_err());
    let h = PowerMirror::new(3.0, vec![0.0, 0.0]).unwrap();
    assert!(integrate(
        &build_el_system(&h, &f, ScalingTriple::polynomial(2.0, 1.0).unwrap()).unwrap(),
        &Point::new(vec![1.0]).unwrap(),
        0.1,
        1.0,
        &Controls::rk4(10)
    )
    .is_err());
}

proptest! {
    #[test]
    fn lagrangian_field_vanishes_at_rest(p in 2.0f64..4.0, t in 0.2f64..20.0) {
        let f = quadratic();
        let sys = build_el_system(&QuarticEuclidean, &f, ScalingTriple::polynomial(p, 1.0).unwrap()).unwrap();
        let state = [0.0, 0.0, 0.0, 0.0];
        let v = sys.vector_field(t, &state).unwrap();
        prop_assert!(v.iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn rescaled_field_has_unit_scaled_norm(x in prop::collection::vec(-2.0f64..2.0, 2), p in 2.0f64..5.0) {
        let f = quadratic();
        let sys = build_rescaled_gradient_flow(&f, p).unwrap();
        let g = bregman_core::ObjectiveOracle::gradient(&f, &x);
        let gn = g.iter().map(|a| a * a).sum::<f64>().sqrt();
        prop_assume!(gn > 1e-6);
        let v = sys.vector_field(0.0, &x).unwrap();
        let vn = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        // ||Ẋ|| = ||∇f||^{1/(p−1)}
        prop_assert!((vn - gn.powf(1.0 / (p - 1.0))).abs() <= 1e-12 * (1.0 + vn));
    }

    #[test]
    fn rk4_refinement_converges(steps in 50usize..200) {
        let f = quadratic();
        let sys = build_el_system(&Euclidean, &f, ScalingTriple::exponential(0.5).unwrap()).unwrap();
        let a = integrate(&sys, &x0(), 0.0, 1.0, &Controls::rk4(steps)).unwrap();
        let b = integrate(&sys, &x0(), 0.0, 1.0, &Controls::rk4(2 * steps)).unwrap();
        let c = integrate(&sys, &x0(), 0.0, 1.0, &Controls::rk4(4 * steps)).unwrap();
        let e1 = a.last_x().iter().zip(b.last_x()).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        let e2 = b.last_x().iter().zip(c.last_x()).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        prop_assume!(e2 > 1e-13);
        prop_assert!(e1 / e2 > 8.0, "ratio {}", e1 / e2);
    }
}
