//! Objective functions with analytic derivatives up to third order.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::DMatrix;

use crate::point::{add, sub, Point};

/// Declared uniform convexity: `D_f(y, x) >= (sigma / order) * ||y - x||^order`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformConvexity {
    pub order: f64,
    pub sigma: f64,
}

/// A convex objective `f : R^d -> R`.
///
/// Methods taking points accept any slice of length [`dim`](Self::dim).
/// Derivatives of order `k` are `Some` exactly when
/// `k <= derivative_order()`.
pub trait ObjectiveOracle: Send + Sync + core::fmt::Debug {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    /// Highest analytic derivative order (1, 2 or 3).
    fn derivative_order(&self) -> u32;

    fn hessian_dense(&self, _x: &[f64]) -> Option<DMatrix<f64>> {
        None
    }

    fn hessian_apply(&self, x: &[f64], v: &[f64]) -> Option<Vec<f64>> {
        self.hessian_dense(x).map(|h| crate::linalg::matvec(&h, v))
    }

    /// `∇³f(x)[v, v]`, a vector.
    fn third_apply(&self, _x: &[f64], _v: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// The matrix `∇³f(x)[u]`, i.e. entry `(i, j)` is `∇³f(x)[u, e_i, e_j]`.
    ///
    /// The default recovers it from [`third_apply`](Self::third_apply) by
    /// polarization.
    fn third_contract(&self, x: &[f64], u: &[f64]) -> Option<DMatrix<f64>> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for j in 0..d {
            let mut e = alloc::vec![0.0; d];
            e[j] = 1.0;
            let plus = self.third_apply(x, &add(u, &e))?;
            let minus = self.third_apply(x, &sub(u, &e))?;
            for i in 0..d {
                m[(i, j)] = 0.25 * (plus[i] - minus[i]);
            }
        }
        Some((&m + m.transpose()) * 0.5)
    }

    /// Lipschitz constant `L_s` of the `s`-th derivative, if known globally.
    fn smoothness(&self, _order: u32) -> Option<f64> {
        None
    }

    fn uniform_convexity(&self) -> Option<UniformConvexity> {
        None
    }

    fn minimizer(&self) -> Option<Point> {
        None
    }

    fn min_value(&self) -> Option<f64> {
        self.minimizer().map(|x| self.value(&x))
    }

    /// Exact radius of the level set `{x : f(x) <= f(x0)}` around the
    /// minimizer, when computable in closed form.
    fn level_set_radius(&self, _x0: &[f64]) -> Option<f64> {
        None
    }
}

/// `f(x) - f*`, or NaN when the optimal value is unknown.
pub fn f_gap(f: &dyn ObjectiveOracle, x: &[f64]) -> f64 {
    match f.min_value() {
        Some(fs) => f.value(x) - fs,
        None => f64::NAN,
    }
}
