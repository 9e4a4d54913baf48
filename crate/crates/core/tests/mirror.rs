use bregman_core::mirror::{builtin_mirror_maps, Euclidean, PowerMirror, QuarticEuclidean};
use bregman_core::{bregman_divergence, MirrorMap};
use proptest::prelude::*;

fn vec3() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, 3)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn fd_gradient(h: &dyn MirrorMap, x: &[f64]) -> Vec<f64> {
    let e = 1e-6;
    (0..x.len())
        .map(|i| {
            let mut a = x.to_vec();
            let mut b = x.to_vec();
            a[i] += e;
            b[i] -= e;
            (h.value(&a) - h.value(&b)) / (2.0 * e)
        })
        .collect()
}

#[test]
fn euclidean_divergence_is_half_squared_distance() {
    let d = bregman_divergence(&Euclidean, &[1.0, 2.0], &[0.0, 0.0]).unwrap();
    assert_eq!(d, 2.5);
}

#[test]
fn divergence_rejects_dimension_mismatch() {
    assert!(bregman_divergence(&Euclidean, &[1.0], &[0.0, 0.0]).is_err());
}

#[test]
fn regularizer_value_matches_closed_form() {
    // d_3(z) = (2/3)||z − x0||^3
    let h = PowerMirror::regularizer(3.0, &[1.0, 0.0]).unwrap();
    let z = [1.0, 2.0];
    approx::assert_relative_eq!(h.value(&z), 2.0 / 3.0 * 8.0, max_relative = 1e-14);
    let uc = h.uniform_convexity().unwrap();
    assert_eq!((uc.order, uc.sigma), (3.0, 1.0));
}

#[test]
fn quartic_euclidean_dual_inverts_gradient() {
    let x = [0.3, -1.7];
    let w = QuarticEuclidean.gradient(&x);
    let back = QuarticEuclidean.dual_gradient(&w);
    for (a, b) in x.iter().zip(&back) {
        assert!((a - b).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn dual_gradient_round_trip(x in vec3()) {
        for (name, h) in builtin_mirror_maps(3) {
            let back = h.dual_gradient(&h.gradient(&x));
            let err = back.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            prop_assert!(err <= 1e-10 * (1.0 + norm(&x)), "{name}: round trip error {err}");
        }
    }

    #[test]
    fn divergence_dominates_uniform_convexity(x in vec3(), y in vec3()) {
        for (name, h) in builtin_mirror_maps(3) {
            let d = bregman_divergence(h.as_ref(), &y, &x).unwrap();
            let uc = h.uniform_convexity().unwrap();
            let diff: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
            let lower = uc.sigma / uc.order * norm(&diff).powf(uc.order);
            prop_assert!(d >= lower - 1e-10 * (1.0 + lower), "{name}: D = {d} < {lower}");
        }
    }

    #[test]
    fn divergence_vanishes_on_diagonal(x in vec3()) {
        for (name, h) in builtin_mirror_maps(3) {
            let d = bregman_divergence(h.as_ref(), &x, &x).unwrap();
            prop_assert!(d.abs() <= 1e-12, "{name}: D(x, x) = {d}");
        }
    }

    #[test]
    fn gradient_matches_finite_differences(x in vec3()) {
        for (name, h) in builtin_mirror_maps(3) {
            let g = h.gradient(&x);
            let fd = fd_gradient(h.as_ref(), &x);
            for (a, b) in g.iter().zip(&fd) {
                prop_assert!((a - b).abs() <= 1e-5 * (1.0 + a.abs()), "{name}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn hessian_matches_finite_differences(x in vec3()) {
        for (name, h) in builtin_mirror_maps(3) {
            let Some(hm) = h.hessian_dense(&x) else { continue };
            let e = 1e-6;
            for j in 0..3 {
                let mut a = x.clone();
                let mut b = x.clone();
                a[j] += e;
                b[j] -= e;
                let (ga, gb) = (h.gradient(&a), h.gradient(&b));
                for i in 0..3 {
                    let fd = (ga[i] - gb[i]) / (2.0 * e);
                    prop_assert!((hm[(i, j)] - fd).abs() <= 1e-5 * (1.0 + fd.abs()), "{name}: H[{i},{j}]");
                }
            }
        }
    }
}
