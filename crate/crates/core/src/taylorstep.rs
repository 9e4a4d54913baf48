//! The regularized Taylor step
//! `G_{p,ε,N}(x) = argmin_y { f_{p−1}(y; x) + (N/(εp)) ||y − x||^p }`
//! and its certificates.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::{DMatrix, DVector};

use crate::error::Error;
use crate::linalg;
use crate::objective::ObjectiveOracle;
use crate::point::{add, dot, norm, sub, Point};

/// Errors of the Taylor step.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StepError {
    #[error("capability not available: {0}")]
    Capability(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("subproblem solver stalled at residual {residual:e}")]
    Solver { best: Point, residual: f64 },
}

impl From<Error> for StepError {
    fn from(e: Error) -> Self {
        match e {
            Error::Capability(s) => StepError::Capability(s),
            other => StepError::Input(format!("{other}")),
        }
    }
}

/// Order `p`, step size `ε` and regularization factor `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    pub p: u32,
    pub epsilon: f64,
    pub n: f64,
}

impl StepConfig {
    pub fn new(p: u32, epsilon: f64, n: f64) -> Result<Self, Error> {
        if !(2..=4).contains(&p) {
            return Err(Error::Capability(format!(
                "step order p = {p} not in 2..=4"
            )));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidInput(
                "epsilon must be positive and finite".into(),
            ));
        }
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidInput("N must be positive and finite".into()));
        }
        Ok(Self { p, epsilon, n })
    }

    /// `M = (N² − 1)^{(p−2)/(2p−2)} / (2N)`; zero when `N <= 1` and `p > 2`,
    /// where the bound is vacuous.
    pub fn lemma1_constant(&self) -> f64 {
        lemma1_constant(self.p, self.n)
    }
}

pub fn lemma1_constant(p: u32, n: f64) -> f64 {
    if p == 2 {
        return 1.0 / (2.0 * n);
    }
    let base = n * n - 1.0;
    if base <= 0.0 {
        return 0.0;
    }
    let pf = f64::from(p);
    base.powf((pf - 2.0) / (2.0 * pf - 2.0)) / (2.0 * n)
}

/// Progress and move quantities for a pair `y = G(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCertificate {
    pub x: Point,
    pub y: Point,
    pub grad_y_norm: f64,
    /// `⟨∇f(y), x − y⟩`.
    pub progress: f64,
    /// `M ε^{1/(p−1)} ||∇f(y)||^{p/(p−1)}`.
    pub lemma1_lower: f64,
    /// `||x − y||`.
    pub move_norm: f64,
    /// `(M (ε||∇f(y)||)^{1/(p−1)}, (ε||∇f(y)||/(N−1))^{1/(p−1)})`; the upper
    /// end is infinite when `N <= 1`.
    pub move_bounds: (f64, f64),
    /// Norm of the subproblem optimality residual at `y`.
    pub residual: f64,
    pub progress_ok: bool,
    pub move_ok: bool,
}

const CERT_SLACK: f64 = 1e-8;

/// Model gradient `Σ_{i=1}^{p−1} ∇^i f(x)[u]^{i−1}/(i−1)! + (N/ε)||u||^{p−2} u`.
fn model_gradient(
    g: &[f64],
    h: Option<&DMatrix<f64>>,
    t: Option<Vec<f64>>,
    u: &[f64],
    cfg: &StepConfig,
) -> Vec<f64> {
    let mut r = g.to_vec();
    if let Some(h) = h {
        let hu = linalg::matvec(h, u);
        r = add(&r, &hu);
    }
    if let Some(t) = t {
        for (ri, ti) in r.iter_mut().zip(&t) {
            *ri += 0.5 * ti;
        }
    }
    let un = norm(u);
    let c = cfg.n / cfg.epsilon * un.powi(cfg.p as i32 - 2);
    for (ri, ui) in r.iter_mut().zip(u) {
        *ri += c * ui;
    }
    r
}

/// Residual of the subproblem optimality condition at `y`.
pub fn step_residual(
    f: &dyn ObjectiveOracle,
    x: &[f64],
    y: &[f64],
    cfg: &StepConfig,
) -> Result<f64, StepError> {
    let u = sub(y, x);
    let g = f.gradient(x);
    let h = if cfg.p >= 3 {
        Some(hessian(f, x)?)
    } else {
        None
    };
    let t = if cfg.p >= 4 {
        Some(third(f, x, &u)?)
    } else {
        None
    };
    Ok(norm(&model_gradient(&g, h.as_ref(), t, &u, cfg)))
}

fn hessian(f: &dyn ObjectiveOracle, x: &[f64]) -> Result<DMatrix<f64>, StepError> {
    f.hessian_dense(x)
        .ok_or_else(|| StepError::Capability(format!("{} has no Hessian", f.name())))
}

fn third(f: &dyn ObjectiveOracle, x: &[f64], u: &[f64]) -> Result<Vec<f64>, StepError> {
    f.third_apply(x, u)
        .ok_or_else(|| StepError::Capability(format!("{} has no third derivative", f.name())))
}

/// Computes `y = G_{p,ε,N}(x)` and its certificate.
pub fn g_step(
    f: &dyn ObjectiveOracle,
    x: &[f64],
    cfg: &StepConfig,
) -> Result<(Point, StepCertificate), StepError> {
    if x.len() != f.dim() {
        return Err(StepError::Input(format!(
            "point has dimension {}, f has {}",
            x.len(),
            f.dim()
        )));
    }
    if f.derivative_order() + 1 < cfg.p {
        return Err(StepError::Capability(format!(
            "p = {} needs derivatives of order {}, {} provides {}",
            cfg.p,
            cfg.p - 1,
            f.name(),
            f.derivative_order()
        )));
    }
    let g = f.gradient(x);
    let u = match cfg.p {
        2 => g.iter().map(|gi| -cfg.epsilon / cfg.n * gi).collect(),
        3 => solve_cubic(&g, &hessian(f, x)?, cfg)?,
        4 => solve_quartic(f, x, &g, cfg)?,
        p => return Err(StepError::Capability(format!("p = {p} unsupported"))),
    };
    let y = Point::from_vec_unchecked(add(x, &u));
    if !crate::point::all_finite(&y) {
        return Err(StepError::Solver {
            best: Point::from_slice(x)?,
            residual: f64::INFINITY,
        });
    }
    let cert = verify_lemma1(f, x, &y, cfg)?;
    let tol = match cfg.p {
        2 | 3 => 1e-9,
        _ => 1e-6,
    } * (1.0 + norm(&g));
    if !(cert.residual <= tol) {
        return Err(StepError::Solver {
            best: y,
            residual: cert.residual,
        });
    }
    Ok((y, cert))
}

/// Solves `g + Hu + (N/ε)||u||u = 0` through the secular equation in `r = ||u||`.
fn solve_cubic(g: &[f64], h: &DMatrix<f64>, cfg: &StepConfig) -> Result<Vec<f64>, StepError> {
    let gn = norm(g);
    if gn == 0.0 {
        return Ok(alloc::vec![0.0; g.len()]);
    }
    let c = cfg.n / cfg.epsilon;
    let eig = linalg::sym_eigen(h);
    let gt = eig.vectors.transpose() * DVector::from_column_slice(g);
    let lam = &eig.values;
    let lmin = lam.iter().cloned().fold(f64::INFINITY, f64::min);

    // φ(r) = ||u(r)|| − r is decreasing on (lo, hi] and changes sign there.
    let u_norm = |r: f64| -> f64 {
        lam.iter()
            .zip(gt.iter())
            .map(|(l, gi)| {
                let q = gi / (l + c * r);
                q * q
            })
            .sum::<f64>()
            .sqrt()
    };
    let mut lo = (-lmin / c).max(0.0);
    let mut hi = (gn / c).sqrt();
    if hi <= lo {
        return Err(StepError::Solver {
            best: Point::zeros(g.len()),
            residual: f64::INFINITY,
        });
    }
    let mut r = hi;
    for _ in 0..200 {
        let un = u_norm(r);
        let phi = un - r;
        if phi > 0.0 {
            lo = r;
        } else {
            hi = r;
        }
        if phi == 0.0 || hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        // dφ/dr = −(c/||u||) Σ g̃²/(λ + cr)³ − 1
        let s3: f64 = lam
            .iter()
            .zip(gt.iter())
            .map(|(l, gi)| gi * gi / (l + c * r).powi(3))
            .sum();
        let dphi = -c * s3 / un - 1.0;
        let newton = r - phi / dphi;
        r = if newton > lo && newton < hi && newton.is_finite() {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    let coeff = DVector::from_fn(lam.len(), |i, _| -gt[i] / (lam[i] + c * r));
    Ok((&eig.vectors * coeff).as_slice().to_vec())
}

/// Minimizes the regularized third-order model by damped Newton with Armijo
/// backtracking.
fn solve_quartic(
    f: &dyn ObjectiveOracle,
    x: &[f64],
    g: &[f64],
    cfg: &StepConfig,
) -> Result<Vec<f64>, StepError> {
    let d = g.len();
    let gn = norm(g);
    let h = hessian(f, x)?;
    let c = cfg.n / cfg.epsilon;
    let model = |u: &[f64]| -> Result<f64, StepError> {
        let t = third(f, x, u)?;
        let un2 = dot(u, u);
        Ok(dot(g, u)
            + 0.5 * dot(&linalg::matvec(&h, u), u)
            + dot(&t, u) / 6.0
            + 0.25 * c * un2 * un2)
    };
    let target = 1e-12 * (1.0 + gn);
    let mut u = alloc::vec![0.0; d];
    let mut mu_val = 0.0;
    let mut res = gn;
    for _ in 0..500 {
        let grad = model_gradient(g, Some(&h), Some(third(f, x, &u)?), &u, cfg);
        res = norm(&grad);
        if res <= target {
            break;
        }
        let tc = f.third_contract(x, &u).ok_or_else(|| {
            StepError::Capability(format!("{} has no third derivative", f.name()))
        })?;
        let un2 = dot(&u, &u);
        let mut hm = &h + tc + linalg::outer(&u, &u) * (2.0 * c);
        for i in 0..d {
            hm[(i, i)] += c * un2;
        }
        let eig = linalg::sym_eigen(&hm);
        let lmin = eig.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let lmax = eig.values.iter().cloned().fold(0.0, f64::max);
        let shift = if lmin > 1e-14 * lmax.max(1.0) {
            0.0
        } else {
            -lmin + 1e-10 * lmax.max(res)
        };
        let gt = eig.vectors.transpose() * DVector::from_column_slice(&grad);
        let coeff = DVector::from_fn(d, |i, _| -gt[i] / (eig.values[i] + shift));
        let step = (&eig.vectors * coeff).as_slice().to_vec();
        let slope = dot(&grad, &step);
        let mut a = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand = add(&u, &step.iter().map(|s| a * s).collect::<Vec<_>>());
            let mc = model(&cand)?;
            if mc <= mu_val + 1e-4 * a * slope
                || (mc - mu_val).abs() <= 1e-16 * mu_val.abs().max(1e-300)
            {
                u = cand;
                mu_val = mc;
                accepted = true;
                break;
            }
            a *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let grad = model_gradient(g, Some(&h), Some(third(f, x, &u)?), &u, cfg);
    res = res.min(norm(&grad));
    if res > 1e-6 * (1.0 + gn) {
        return Err(StepError::Solver {
            best: Point::from_vec_unchecked(add(x, &u)),
            residual: res,
        });
    }
    Ok(u)
}

/// Evaluates the progress and move inequalities and the optimality residual at `(x, y)`.
pub fn verify_lemma1(
    f: &dyn ObjectiveOracle,
    x: &[f64],
    y: &[f64],
    cfg: &StepConfig,
) -> Result<StepCertificate, StepError> {
    let gy = f.gradient(y);
    let gyn = norm(&gy);
    let diff = sub(x, y);
    let progress = dot(&gy, &diff);
    let move_norm = norm(&diff);
    let q = 1.0 / (f64::from(cfg.p) - 1.0);
    let m = cfg.lemma1_constant();
    let lemma1_lower = m * cfg.epsilon.powf(q) * gyn.powf(f64::from(cfg.p) * q);
    let root = (cfg.epsilon * gyn).powf(q);
    let upper = if cfg.n > 1.0 {
        root / (cfg.n - 1.0).powf(q)
    } else {
        f64::INFINITY
    };
    let lower = m * root;
    let residual = step_residual(f, x, y, cfg)?;
    Ok(StepCertificate {
        x: Point::from_slice(x)?,
        y: Point::from_slice(y)?,
        grad_y_norm: gyn,
        progress,
        lemma1_lower,
        move_norm,
        move_bounds: (lower, upper),
        residual,
        progress_ok: progress >= lemma1_lower - CERT_SLACK,
        move_ok: lower - CERT_SLACK <= move_norm && move_norm <= upper + CERT_SLACK,
    })
}

/// `ε = (p−1)! / L_{p−1}`; infinite when the declared constant is zero.
pub fn smoothness_epsilon(f: &dyn ObjectiveOracle, p: u32) -> Result<f64, Error> {
    if p < 2 {
        return Err(Error::InvalidInput("p must be >= 2".into()));
    }
    let l = f.smoothness(p - 1).ok_or_else(|| {
        Error::Capability(format!(
            "{} declares no smoothness of order {}",
            f.name(),
            p - 1
        ))
    })?;
    let fact: f64 = (1..p).map(f64::from).product();
    Ok(if l == 0.0 { f64::INFINITY } else { fact / l })
}

/// Regularized model value `f_{p−1}(y; x) + (N/(εp))||y − x||^p`.
pub fn regularized_model(
    f: &dyn ObjectiveOracle,
    x: &[f64],
    y: &[f64],
    cfg: &StepConfig,
) -> Result<f64, Error> {
    let m = crate::taylor::taylor_model(f, x, cfg.p - 1, y)?;
    let pf = f64::from(cfg.p);
    Ok(m + cfg.n / (cfg.epsilon * pf) * norm(&sub(y, x)).powf(pf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{DiagonalQuadratic, PowerNorm};
    use alloc::vec;

    #[test]
    fn p2_unit_quadratic_reaches_minimizer() {
        let f = DiagonalQuadratic::new(vec![1.0, 1.0]).unwrap();
        let (y, _) = g_step(&f, &[1.0, 0.0], &StepConfig::new(2, 1.0, 1.0).unwrap()).unwrap();
        assert_eq!(y.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn p3_scalar_example_matches_grid_search() {
        let f = DiagonalQuadratic::new(vec![1.0]).unwrap();
        let cfg = StepConfig::new(3, 1.0, 2.0).unwrap();
        let (y, cert) = g_step(&f, &[1.0], &cfg).unwrap();
        assert!((y[0] - 0.5).abs() < 1e-12);
        assert!(cert.residual < 1e-12);
        // Brute force over u ∈ [−2, 0]: model u + u²/2 + (2/3)|u|³.
        let model = |u: f64| u + 0.5 * u * u + (2.0 / 3.0) * u.abs().powi(3);
        let (mut best, mut bu) = (f64::INFINITY, 0.0);
        for i in 0..=200_000 {
            let u = -2.0 + 2.0 * i as f64 / 200_000.0;
            if model(u) < best {
                best = model(u);
                bu = u;
            }
        }
        assert!((bu + 0.5).abs() < 1e-4);
    }

    #[test]
    fn stationary_point_is_fixed() {
        let f = DiagonalQuadratic::new(vec![1.0, 3.0]).unwrap();
        for p in 2..=4 {
            let (y, _) = g_step(&f, &[0.0, 0.0], &StepConfig::new(p, 0.5, 2.0).unwrap()).unwrap();
            assert_eq!(y.as_slice(), &[0.0, 0.0]);
        }
    }

    #[test]
    fn step_constant_p2() {
        assert_eq!(lemma1_constant(2, 2.0), 0.25);
        let cfg = StepConfig::new(2, 0.3, 2.0).unwrap();
        let f = DiagonalQuadratic::new(vec![2.0]).unwrap();
        let cert = verify_lemma1(&f, &[1.0], &[0.4], &cfg).unwrap();
        assert!((cert.lemma1_lower - 0.25 * 0.3 * 0.64).abs() < 1e-15);
        assert!((cert.move_bounds.1 - 0.3 * 0.8).abs() < 1e-15);
    }

    #[test]
    fn smoothness_epsilon_examples() {
        let q = DiagonalQuadratic::new(vec![1.0, 10.0]).unwrap();
        assert!((smoothness_epsilon(&q, 2).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(
            smoothness_epsilon(&PowerNorm::new(4.0, 2).unwrap(), 4).unwrap(),
            1.0
        );
        assert_eq!(
            smoothness_epsilon(&PowerNorm::new(3.0, 2).unwrap(), 3).unwrap(),
            1.0
        );
        assert!(smoothness_epsilon(&PowerNorm::new(3.0, 2).unwrap(), 2).is_err());
    }

    #[test]
    fn p4_residual_small_on_power_norm() {
        let f = PowerNorm::new(4.0, 3).unwrap();
        let cfg = StepConfig::new(4, 1.0, 2.0).unwrap();
        let (_, cert) = g_step(&f, &[0.7, -0.2, 1.1], &cfg).unwrap();
        assert!(cert.residual < 1e-9, "{}", cert.residual);
        assert!(cert.progress_ok && cert.move_ok);
    }
}
