//! Benchmark objectives.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::linalg;
use crate::objective::{ObjectiveOracle, UniformConvexity};
use crate::point::{dot, norm, Point};

/// `f(x) = ½ Σ λ_i x_i²` with `λ_i > 0`.
#[derive(Debug, Clone)]
pub struct DiagonalQuadratic {
    lambda: Vec<f64>,
    name: String,
}

impl DiagonalQuadratic {
    pub fn new(lambda: Vec<f64>) -> Result<Self, Error> {
        if lambda.is_empty() || lambda.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::InvalidInput(
                "quadratic eigenvalues must be positive and finite".into(),
            ));
        }
        let name = format!("quadratic{:?}", lambda);
        Ok(Self { lambda, name })
    }

    /// The two-dimensional benchmark `½(x₁² + 10x₂²)`.
    pub fn ill_conditioned_2d() -> Self {
        let mut q = Self::new(alloc::vec![1.0, 10.0]).expect("valid eigenvalues");
        q.name = "illcond2d".into();
        q
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda.iter().cloned().fold(0.0, f64::max)
    }
}

impl ObjectiveOracle for DiagonalQuadratic {
    fn name(&self) -> &str {
        &self.name
    }
    fn dim(&self) -> usize {
        self.lambda.len()
    }
    fn value(&self, x: &[f64]) -> f64 {
        0.5 * x
            .iter()
            .zip(&self.lambda)
            .map(|(xi, l)| l * xi * xi)
            .sum::<f64>()
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.lambda).map(|(xi, l)| l * xi).collect()
    }
    fn derivative_order(&self) -> u32 {
        3
    }
    fn hessian_dense(&self, _x: &[f64]) -> Option<DMatrix<f64>> {
        Some(linalg::diag(&self.lambda))
    }
    fn hessian_apply(&self, _x: &[f64], v: &[f64]) -> Option<Vec<f64>> {
        Some(v.iter().zip(&self.lambda).map(|(vi, l)| l * vi).collect())
    }
    fn third_apply(&self, _x: &[f64], v: &[f64]) -> Option<Vec<f64>> {
        Some(alloc::vec![0.0; v.len()])
    }
    fn third_contract(&self, _x: &[f64], _u: &[f64]) -> Option<DMatrix<f64>> {
        Some(DMatrix::zeros(self.dim(), self.dim()))
    }
    fn smoothness(&self, order: u32) -> Option<f64> {
        match order {
            1 => Some(self.lambda_max()),
            2 | 3 => Some(0.0),
            _ => None,
        }
    }
    fn uniform_convexity(&self) -> Option<UniformConvexity> {
        Some(UniformConvexity {
            order: 2.0,
            sigma: self.lambda_min(),
        })
    }
    fn minimizer(&self) -> Option<Point> {
        Some(Point::zeros(self.dim()))
    }
    fn min_value(&self) -> Option<f64> {
        Some(0.0)
    }
    fn level_set_radius(&self, x0: &[f64]) -> Option<f64> {
        Some((2.0 * self.value(x0) / self.lambda_min()).sqrt())
    }
}

/// `f(x) = log Σ_i exp(⟨a_i, x⟩ + b_i)`.
///
/// The seeded constructor emits the rows in pairs `(a, b)`, `(−a, b)`, which
/// makes `x* = 0` a minimizer.
#[derive(Debug, Clone)]
pub struct LogSumExp {
    a: DMatrix<f64>,
    b: Vec<f64>,
    symmetric: bool,
    row_norm_max: f64,
}

impl LogSumExp {
    /// General affine forms; no minimizer is declared.
    pub fn new(a: DMatrix<f64>, b: Vec<f64>) -> Result<Self, Error> {
        if a.nrows() != b.len() || a.nrows() == 0 || a.ncols() == 0 {
            return Err(Error::InvalidInput("log-sum-exp shape mismatch".into()));
        }
        let row_norm_max = (0..a.nrows()).map(|i| a.row(i).norm()).fold(0.0, f64::max);
        Ok(Self {
            a,
            b,
            symmetric: false,
            row_norm_max,
        })
    }

    /// `pairs` symmetric row pairs in dimension `dim`, entries uniform in
    /// `[-1, 1]`, offsets uniform in `[-0.5, 0.5]`.
    pub fn seeded(dim: usize, pairs: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = 2 * pairs.max(1);
        let mut a = DMatrix::zeros(m, dim.max(1));
        let mut b = alloc::vec![0.0; m];
        for k in 0..m / 2 {
            let off: f64 = rng.random_range(-0.5..0.5);
            for j in 0..a.ncols() {
                let v: f64 = rng.random_range(-1.0..1.0);
                a[(2 * k, j)] = v;
                a[(2 * k + 1, j)] = -v;
            }
            b[2 * k] = off;
            b[2 * k + 1] = off;
        }
        let mut f = Self::new(a, b).expect("consistent shapes");
        f.symmetric = true;
        f
    }

    /// Softmax weights and the affine values `Ax + b`.
    fn softmax(&self, x: &[f64]) -> (Vec<f64>, f64) {
        let z = &self.a * DVector::from_column_slice(x);
        let zs: Vec<f64> = z.iter().zip(&self.b).map(|(zi, bi)| zi + bi).collect();
        let mx = zs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = zs.iter().map(|v| (v - mx).exp()).collect();
        let s: f64 = e.iter().sum();
        (e.iter().map(|v| v / s).collect(), mx + s.ln())
    }

    /// Rows centered by the softmax mean row.
    fn centered(&self, s: &[f64]) -> DMatrix<f64> {
        let mean = self.a.transpose() * DVector::from_column_slice(s);
        let mut c = self.a.clone();
        for i in 0..c.nrows() {
            for j in 0..c.ncols() {
                c[(i, j)] -= mean[j];
            }
        }
        c
    }
}

impl ObjectiveOracle for LogSumExp {
    fn name(&self) -> &str {
        "logsumexp"
    }
    fn dim(&self) -> usize {
        self.a.ncols()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.softmax(x).1
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let (s, _) = self.softmax(x);
        (self.a.transpose() * DVector::from_vec(s))
            .as_slice()
            .to_vec()
    }
    fn derivative_order(&self) -> u32 {
        3
    }
    fn hessian_dense(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        let (s, _) = self.softmax(x);
        let c = self.centered(&s);
        let ws = DMatrix::from_fn(c.nrows(), c.ncols(), |i, j| s[i] * c[(i, j)]);
        Some(c.transpose() * ws)
    }
    fn third_apply(&self, x: &[f64], v: &[f64]) -> Option<Vec<f64>> {
        let (s, _) = self.softmax(x);
        let c = self.centered(&s);
        let al = &c * DVector::from_column_slice(v);
        let var: f64 = al.iter().zip(&s).map(|(a, si)| si * a * a).sum();
        let w = DVector::from_fn(s.len(), |i, _| s[i] * (al[i] * al[i] - var));
        Some((self.a.transpose() * w).as_slice().to_vec())
    }
    fn third_contract(&self, x: &[f64], u: &[f64]) -> Option<DMatrix<f64>> {
        let (s, _) = self.softmax(x);
        let c = self.centered(&s);
        let al = &c * DVector::from_column_slice(u);
        let ws = DMatrix::from_fn(c.nrows(), c.ncols(), |i, j| s[i] * al[i] * c[(i, j)]);
        Some(c.transpose() * ws)
    }
    /// Cumulant bounds with `a = max_i ||a_i||`: `a²`, `2a³`, `4a⁴`.
    fn smoothness(&self, order: u32) -> Option<f64> {
        let a = self.row_norm_max;
        match order {
            1 => Some(a * a),
            2 => Some(2.0 * a.powi(3)),
            3 => Some(4.0 * a.powi(4)),
            _ => None,
        }
    }
    fn minimizer(&self) -> Option<Point> {
        self.symmetric.then(|| Point::zeros(self.dim()))
    }
}

/// `f(x) = (1/p) ||x||^p`, `p >= 2`.
#[derive(Debug, Clone)]
pub struct PowerNorm {
    p: f64,
    dim: usize,
    name: String,
}

impl PowerNorm {
    pub fn new(p: f64, dim: usize) -> Result<Self, Error> {
        if !(p >= 2.0 && p.is_finite()) || dim == 0 {
            return Err(Error::InvalidInput(format!(
                "power norm needs p >= 2, got {p}"
            )));
        }
        Ok(Self {
            p,
            dim,
            name: format!("powernorm{p}"),
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

impl ObjectiveOracle for PowerNorm {
    fn name(&self) -> &str {
        &self.name
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> f64 {
        norm(x).powf(self.p) / self.p
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let r = norm(x);
        if r == 0.0 {
            return alloc::vec![0.0; x.len()];
        }
        let c = r.powf(self.p - 2.0);
        x.iter().map(|v| c * v).collect()
    }
    fn derivative_order(&self) -> u32 {
        if self.p == 2.0 || self.p >= 4.0 {
            3
        } else {
            2
        }
    }
    fn hessian_dense(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        let p = self.p;
        if p == 2.0 {
            return Some(linalg::identity(self.dim));
        }
        let r = norm(x);
        if r == 0.0 {
            return Some(DMatrix::zeros(self.dim, self.dim));
        }
        let mut h = linalg::outer(x, x) * ((p - 2.0) * r.powf(p - 4.0));
        for i in 0..self.dim {
            h[(i, i)] += r.powf(p - 2.0);
        }
        Some(h)
    }
    fn third_apply(&self, x: &[f64], u: &[f64]) -> Option<Vec<f64>> {
        if self.derivative_order() < 3 {
            return None;
        }
        let p = self.p;
        let r = norm(x);
        if p == 2.0 || r == 0.0 {
            return Some(alloc::vec![0.0; u.len()]);
        }
        let xu = dot(x, u);
        let uu = dot(u, u);
        let c1 = (p - 2.0) * r.powf(p - 4.0);
        let c2 = (p - 2.0) * (p - 4.0) * r.powf(p - 6.0) * xu * xu;
        Some(
            x.iter()
                .zip(u)
                .map(|(xi, ui)| c1 * (2.0 * xu * ui + uu * xi) + c2 * xi)
                .collect(),
        )
    }
    /// Only the top derivative is globally Lipschitz: `L_{p-1} = (p-1)!` for
    /// integer `p`.
    fn smoothness(&self, order: u32) -> Option<f64> {
        let p = self.p;
        if p.fract() != 0.0 || order as f64 != p - 1.0 {
            return if p == 2.0 && order >= 2 {
                Some(0.0)
            } else {
                None
            };
        }
        Some((1..=order).map(|i| i as f64).product::<f64>())
    }
    /// `σ = 2^{2-p}`; the constant 1 fails already in one dimension for
    /// `p = 4` at `x = 1, y = -1`.
    fn uniform_convexity(&self) -> Option<UniformConvexity> {
        Some(UniformConvexity {
            order: self.p,
            sigma: 2.0.powf(2.0 - self.p),
        })
    }
    fn minimizer(&self) -> Option<Point> {
        Some(Point::zeros(self.dim))
    }
    fn min_value(&self) -> Option<f64> {
        Some(0.0)
    }
    fn level_set_radius(&self, x0: &[f64]) -> Option<f64> {
        Some(norm(x0))
    }
}

/// `f(x) = ½ ||Ax − b||²` with seeded uniform data.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    a: DMatrix<f64>,
    b: DVector<f64>,
    ata: DMatrix<f64>,
    x_star: Point,
    f_star: f64,
    lmin: f64,
    lmax: f64,
    seed: u64,
}

impl LeastSquares {
    /// Entries of `A` and `b` uniform in `[-1, 1]`; requires `m >= d` so the
    /// normal equations are (almost surely) nonsingular.
    pub fn seeded(m: usize, d: usize, seed: u64) -> Result<Self, Error> {
        if m < d || d == 0 {
            return Err(Error::InvalidInput(
                "least squares needs m >= d >= 1".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(m, d, |_, _| rng.random_range(-1.0..1.0));
        let b = DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0));
        let ata = a.transpose() * &a;
        let atb = a.transpose() * &b;
        let x = ata
            .clone()
            .cholesky()
            .ok_or_else(|| Error::InvalidInput("singular normal equations".into()))?
            .solve(&atb);
        let eig = linalg::sym_eigen(&ata);
        let lmin = eig.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let lmax = eig.values.iter().cloned().fold(0.0, f64::max);
        let x_star = Point::from_slice(x.as_slice())?;
        let mut ls = Self {
            a,
            b,
            ata,
            x_star,
            f_star: 0.0,
            lmin,
            lmax,
            seed,
        };
        ls.f_star = ls.value(&ls.x_star.clone());
        Ok(ls)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl ObjectiveOracle for LeastSquares {
    fn name(&self) -> &str {
        "leastsquares"
    }
    fn dim(&self) -> usize {
        self.a.ncols()
    }
    fn value(&self, x: &[f64]) -> f64 {
        let r = &self.a * DVector::from_column_slice(x) - &self.b;
        0.5 * r.norm_squared()
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let r = &self.a * DVector::from_column_slice(x) - &self.b;
        (self.a.transpose() * r).as_slice().to_vec()
    }
    fn derivative_order(&self) -> u32 {
        3
    }
    fn hessian_dense(&self, _x: &[f64]) -> Option<DMatrix<f64>> {
        Some(self.ata.clone())
    }
    fn third_apply(&self, _x: &[f64], v: &[f64]) -> Option<Vec<f64>> {
        Some(alloc::vec![0.0; v.len()])
    }
    fn third_contract(&self, _x: &[f64], _u: &[f64]) -> Option<DMatrix<f64>> {
        Some(DMatrix::zeros(self.dim(), self.dim()))
    }
    fn smoothness(&self, order: u32) -> Option<f64> {
        match order {
            1 => Some(self.lmax),
            2 | 3 => Some(0.0),
            _ => None,
        }
    }
    fn uniform_convexity(&self) -> Option<UniformConvexity> {
        Some(UniformConvexity {
            order: 2.0,
            sigma: self.lmin,
        })
    }
    fn minimizer(&self) -> Option<Point> {
        Some(self.x_star.clone())
    }
    fn min_value(&self) -> Option<f64> {
        Some(self.f_star)
    }
    fn level_set_radius(&self, x0: &[f64]) -> Option<f64> {
        let gap = (self.value(x0) - self.f_star).max(0.0);
        Some((2.0 * gap / self.lmin).sqrt())
    }
}

/// `f(x) = ½ Σ λ_i x_i² + (μ/4) ||x||⁴`: strongly convex, not globally smooth.
#[derive(Debug, Clone)]
pub struct QuadraticPlusQuartic {
    quad: DiagonalQuadratic,
    mu: f64,
}

impl QuadraticPlusQuartic {
    pub fn new(lambda: Vec<f64>, mu: f64) -> Result<Self, Error> {
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::InvalidInput("quartic weight must be >= 0".into()));
        }
        Ok(Self {
            quad: DiagonalQuadratic::new(lambda)?,
            mu,
        })
    }

    /// Bound on `||∇²f||` over the ball of radius `r` around 0.
    pub fn hessian_bound_on_ball(&self, r: f64) -> f64 {
        self.quad.lambda_max() + 3.0 * self.mu * r * r
    }
}

impl ObjectiveOracle for QuadraticPlusQuartic {
    fn name(&self) -> &str {
        "quadquartic"
    }
    fn dim(&self) -> usize {
        self.quad.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        let r2 = dot(x, x);
        self.quad.value(x) + 0.25 * self.mu * r2 * r2
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let r2 = dot(x, x);
        let mut g = self.quad.gradient(x);
        for (gi, xi) in g.iter_mut().zip(x) {
            *gi += self.mu * r2 * xi;
        }
        g
    }
    fn derivative_order(&self) -> u32 {
        3
    }
    fn hessian_dense(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        let mut h = linalg::diag(self.quad.lambda()) + linalg::outer(x, x) * (2.0 * self.mu);
        let r2 = dot(x, x);
        for i in 0..self.dim() {
            h[(i, i)] += self.mu * r2;
        }
        Some(h)
    }
    fn third_apply(&self, x: &[f64], u: &[f64]) -> Option<Vec<f64>> {
        let xu = dot(x, u);
        let uu = dot(u, u);
        Some(
            x.iter()
                .zip(u)
                .map(|(xi, ui)| self.mu * (4.0 * xu * ui + 2.0 * uu * xi))
                .collect(),
        )
    }
    fn smoothness(&self, order: u32) -> Option<f64> {
        (order == 3).then_some(6.0 * self.mu)
    }
    fn uniform_convexity(&self) -> Option<UniformConvexity> {
        Some(UniformConvexity {
            order: 2.0,
            sigma: self.quad.lambda_min(),
        })
    }
    fn minimizer(&self) -> Option<Point> {
        Some(Point::zeros(self.dim()))
    }
    fn min_value(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// `f ≡ 0`, the force-free case.
#[derive(Debug, Clone)]
pub struct Zero {
    dim: usize,
}

impl Zero {
    pub fn new(dim: usize) -> Self {
        Self { dim: dim.max(1) }
    }
}

impl ObjectiveOracle for Zero {
    fn name(&self) -> &str {
        "zero"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, _x: &[f64]) -> f64 {
        0.0
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        alloc::vec![0.0; x.len()]
    }
    fn derivative_order(&self) -> u32 {
        3
    }
    fn hessian_dense(&self, _x: &[f64]) -> Option<DMatrix<f64>> {
        Some(DMatrix::zeros(self.dim, self.dim))
    }
    fn third_apply(&self, _x: &[f64], v: &[f64]) -> Option<Vec<f64>> {
        Some(alloc::vec![0.0; v.len()])
    }
    fn smoothness(&self, _order: u32) -> Option<f64> {
        Some(0.0)
    }
    fn minimizer(&self) -> Option<Point> {
        Some(Point::zeros(self.dim))
    }
    fn min_value(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// Catalog entry: identifier plus constructed oracle.
pub type CatalogEntry = (&'static str, Box<dyn ObjectiveOracle>);

/// The default benchmark corpus, all seeded by `seed`.
pub fn builtin_problems(seed: u64) -> Vec<CatalogEntry> {
    alloc::vec![
        (
            "quadratic",
            Box::new(DiagonalQuadratic::new(alloc::vec![1.0, 10.0]).unwrap())
                as Box<dyn ObjectiveOracle>,
        ),
        (
            "illcond2d",
            Box::new(DiagonalQuadratic::ill_conditioned_2d())
        ),
        ("logsumexp", Box::new(LogSumExp::seeded(5, 4, seed))),
        ("powernorm3", Box::new(PowerNorm::new(3.0, 3).unwrap())),
        ("powernorm4", Box::new(PowerNorm::new(4.0, 3).unwrap())),
        (
            "leastsquares",
            Box::new(LeastSquares::seeded(20, 10, seed).unwrap())
        ),
        (
            "quadquartic",
            Box::new(QuadraticPlusQuartic::new(alloc::vec![1.0, 1.0], 0.1).unwrap())
        ),
        ("zero", Box::new(Zero::new(2))),
    ]
}

/// Looks up a catalog problem by identifier.
pub fn problem_by_name(name: &str, seed: u64) -> Result<Box<dyn ObjectiveOracle>, Error> {
    builtin_problems(seed)
        .into_iter()
        .find(|(id, _)| *id == name)
        .map(|(_, f)| f)
        .ok_or_else(|| Error::InvalidInput(format!("unknown problem '{name}'")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn quadratic_values() {
        let q = DiagonalQuadratic::new(vec![1.0, 1.0]).unwrap();
        assert_eq!(q.value(&[3.0, 4.0]), 12.5);
        assert_eq!(q.gradient(&[3.0, 4.0]), vec![3.0, 4.0]);
        assert!((q.level_set_radius(&[3.0, 4.0]).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn power_norm_minimizer() {
        let f = PowerNorm::new(4.0, 2).unwrap();
        assert_eq!(f.gradient(&[0.0, 0.0]), vec![0.0, 0.0]);
        assert_eq!(f.smoothness(3), Some(6.0));
        assert_eq!(PowerNorm::new(3.0, 2).unwrap().smoothness(2), Some(2.0));
        assert_eq!(f.uniform_convexity().unwrap().sigma, 0.25);
    }

    #[test]
    fn seeded_logsumexp_minimizer_is_stationary() {
        let f = LogSumExp::seeded(5, 4, 7);
        let x = f.minimizer().unwrap();
        assert!(norm(&f.gradient(&x)) <= 1e-10);
    }

    #[test]
    fn least_squares_minimizer_is_stationary() {
        let f = LeastSquares::seeded(20, 10, 3).unwrap();
        let x = f.minimizer().unwrap();
        assert!(norm(&f.gradient(&x)) <= 1e-10);
    }

    #[test]
    fn catalog_lookup() {
        assert!(problem_by_name("quadratic", 0).is_ok());
        assert!(problem_by_name("nope", 0).is_err());
    }
}
