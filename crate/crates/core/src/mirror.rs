//! Distance-generating functions and Bregman divergences.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::DMatrix;

use crate::error::{check_dims, Error};
use crate::linalg;
use crate::objective::UniformConvexity;
use crate::point::{dot, norm, sub, Point};

/// A strictly convex, essentially smooth `h : R^d -> R` with an explicit
/// inverse gradient `∇h* = (∇h)^{-1}`.
///
/// Essential smoothness of user-supplied maps is the caller's obligation.
pub trait MirrorMap: Send + Sync + core::fmt::Debug {
    fn name(&self) -> &str;

    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    /// `∇h*(w)`, the point whose gradient is `w`.
    fn dual_gradient(&self, w: &[f64]) -> Vec<f64>;

    fn hessian_dense(&self, _x: &[f64]) -> Option<DMatrix<f64>> {
        None
    }

    fn uniform_convexity(&self) -> Option<UniformConvexity> {
        None
    }

    /// Whether `h = ½||x||²` exactly.
    fn is_euclidean(&self) -> bool {
        false
    }
}

/// `D_h(y, x) = h(y) − h(x) − ⟨∇h(x), y − x⟩`.
pub fn bregman_divergence(h: &dyn MirrorMap, y: &[f64], x: &[f64]) -> Result<f64, Error> {
    check_dims(x.len(), y.len())?;
    Ok(h.value(y) - h.value(x) - dot(&h.gradient(x), &sub(y, x)))
}

/// `h(x) = ½ ||x||²`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Euclidean;

impl MirrorMap for Euclidean {
    fn name(&self) -> &str {
        "euclidean"
    }
    fn value(&self, x: &[f64]) -> f64 {
        0.5 * dot(x, x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }
    fn dual_gradient(&self, w: &[f64]) -> Vec<f64> {
        w.to_vec()
    }
    fn hessian_dense(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        Some(linalg::identity(x.len()))
    }
    fn uniform_convexity(&self) -> Option<UniformConvexity> {
        Some(UniformConvexity {
            order: 2.0,
            sigma: 1.0,
        })
    }
    fn is_euclidean(&self) -> bool {
        true
    }
}

/// `h(x) = (s/p) ||x − w||^p`.
#[derive(Debug, Clone)]
pub struct PowerMirror {
    p: f64,
    scale: f64,
    anchor: Vec<f64>,
    name: String,
}

impl PowerMirror {
    /// Unit scale: `σ = 2^{2-p}`.
    pub fn new(p: f64, anchor: Vec<f64>) -> Result<Self, Error> {
        Self::with_scale(p, 1.0, anchor)
    }

    pub fn with_scale(p: f64, scale: f64, anchor: Vec<f64>) -> Result<Self, Error> {
        if !(p >= 2.0 && p.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "mirror order must be >= 2, got {p}"
            )));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidInput("mirror scale must be positive".into()));
        }
        if anchor.is_empty() || anchor.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidInput(
                "mirror anchor must be finite and nonempty".into(),
            ));
        }
        let name = if scale == 1.0 {
            format!("pth_power{p}")
        } else {
            format!("d{p}")
        };
        Ok(Self {
            p,
            scale,
            anchor,
            name,
        })
    }

    /// `d_p(z) = (2^{p-2}/p) ||z − x0||^p`, 1-uniformly convex of order `p`.
    pub fn regularizer(p: f64, x0: &[f64]) -> Result<Self, Error> {
        Self::with_scale(p, 2.0.powf(p - 2.0), x0.to_vec())
    }

    pub fn order(&self) -> f64 {
        self.p
    }

    pub fn anchor(&self) -> &[f64] {
        &self.anchor
    }
}

impl MirrorMap for PowerMirror {
    fn name(&self) -> &str {
        &self.name
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.scale / self.p * norm(&sub(x, &self.anchor)).powf(self.p)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let v = sub(x, &self.anchor);
        let r = norm(&v);
        if r == 0.0 {
            return alloc::vec![0.0; v.len()];
        }
        let c = self.scale * r.powf(self.p - 2.0);
        v.iter().map(|vi| c * vi).collect()
    }
    fn dual_gradient(&self, u: &[f64]) -> Vec<f64> {
        let nu = norm(u);
        if nu == 0.0 {
            return self.anchor.clone();
        }
        // |∇h(x)| = s r^{p-1}, so r = (|u|/s)^{1/(p-1)} along û.
        let r = (nu / self.scale).powf(1.0 / (self.p - 1.0));
        self.anchor
            .iter()
            .zip(u)
            .map(|(w, ui)| w + r * ui / nu)
            .collect()
    }
    fn hessian_dense(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        let d = x.len();
        if self.p == 2.0 {
            return Some(linalg::identity(d) * self.scale);
        }
        let v = sub(x, &self.anchor);
        let r = norm(&v);
        if r == 0.0 {
            return Some(DMatrix::zeros(d, d));
        }
        let mut h = linalg::outer(&v, &v) * (self.scale * (self.p - 2.0) * r.powf(self.p - 4.0));
        for i in 0..d {
            h[(i, i)] += self.scale * r.powf(self.p - 2.0);
        }
        Some(h)
    }
    fn uniform_convexity(&self) -> Option<UniformConvexity> {
        Some(UniformConvexity {
            order: self.p,
            sigma: self.scale * 2.0.powf(2.0 - self.p),
        })
    }
    fn is_euclidean(&self) -> bool {
        self.p == 2.0 && self.scale == 1.0 && self.anchor.iter().all(|a| *a == 0.0)
    }
}

/// `h(x) = ½||x||² + ¼||x||⁴`: non-Euclidean with a nonsingular Hessian
/// everywhere.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuarticEuclidean;

impl MirrorMap for QuarticEuclidean {
    fn name(&self) -> &str {
        "quartic_euclidean"
    }
    fn value(&self, x: &[f64]) -> f64 {
        let r2 = dot(x, x);
        0.5 * r2 + 0.25 * r2 * r2
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let c = 1.0 + dot(x, x);
        x.iter().map(|v| c * v).collect()
    }
    fn dual_gradient(&self, u: &[f64]) -> Vec<f64> {
        let s = norm(u);
        if s == 0.0 {
            return alloc::vec![0.0; u.len()];
        }
        // Solve r³ + r = s (Cardano), then polish with Newton.
        let a = (0.5 * s + (0.25 * s * s + 1.0 / 27.0).sqrt()).cbrt();
        let mut r = a - 1.0 / (3.0 * a);
        for _ in 0..3 {
            r -= (r * r * r + r - s) / (3.0 * r * r + 1.0);
        }
        u.iter().map(|ui| r * ui / s).collect()
    }
    fn hessian_dense(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        let mut h = linalg::outer(x, x) * 2.0;
        let c = 1.0 + dot(x, x);
        for i in 0..x.len() {
            h[(i, i)] += c;
        }
        Some(h)
    }
    fn uniform_convexity(&self) -> Option<UniformConvexity> {
        Some(UniformConvexity {
            order: 2.0,
            sigma: 1.0,
        })
    }
}

pub type MirrorEntry = (String, Box<dyn MirrorMap>);

/// Catalog of maps in dimension `d`: `euclidean`, `pth_power{3,4}` anchored
/// at 0, `d{3,4}` anchored at 0, and `quartic_euclidean`.
pub fn builtin_mirror_maps(d: usize) -> Vec<MirrorEntry> {
    let zero = alloc::vec![0.0; d.max(1)];
    let mut out: Vec<MirrorEntry> = alloc::vec![("euclidean".into(), Box::new(Euclidean))];
    for p in [3.0, 4.0] {
        let m = PowerMirror::new(p, zero.clone()).expect("valid order");
        out.push((m.name().into(), Box::new(m)));
        let m = PowerMirror::regularizer(p, &zero).expect("valid order");
        out.push((m.name().into(), Box::new(m)));
    }
    out.push(("quartic_euclidean".into(), Box::new(QuarticEuclidean)));
    out
}

/// Resolves a mirror identifier. `pth_power` and `d` variants take their
/// order from the suffix (`pth_power3`, `d4`) and are anchored at `anchor`.
pub fn mirror_by_name(name: &str, anchor: &Point) -> Result<Box<dyn MirrorMap>, Error> {
    let parse = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| Error::InvalidInput(format!("bad mirror order in '{name}'")))
    };
    match name {
        "euclidean" => Ok(Box::new(Euclidean)),
        "quartic_euclidean" => Ok(Box::new(QuarticEuclidean)),
        _ => {
            if let Some(p) = name.strip_prefix("pth_power") {
                Ok(Box::new(PowerMirror::new(parse(p)?, anchor.to_vec())?))
            } else if let Some(p) = name.strip_prefix('d') {
                Ok(Box::new(PowerMirror::regularizer(parse(p)?, anchor)?))
            } else {
                Err(Error::InvalidInput(format!("unknown mirror '{name}'")))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn euclidean_divergence() {
        assert_eq!(
            bregman_divergence(&Euclidean, &[1.0, 2.0], &[0.0, 0.0]).unwrap(),
            2.5
        );
        assert!(bregman_divergence(&Euclidean, &[1.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn quartic_one_dimensional_divergence() {
        // h = ¼x⁴ is the p = 4 power map with zero anchor.
        let h = PowerMirror::new(4.0, vec![0.0]).unwrap();
        let by_hand = 0.25 * 16.0 - 0.25 - 1.0;
        assert!((bregman_divergence(&h, &[2.0], &[1.0]).unwrap() - by_hand).abs() < 1e-14);
        // Integral form: D = ∫_1^2 (h'(s) − h'(1)) ds with h'(s) = s³.
        let n = 20_000;
        let step = 1.0 / n as f64;
        let quad: f64 = (0..n)
            .map(|i| {
                let s = 1.0 + (i as f64 + 0.5) * step;
                (s * s * s - 1.0) * step
            })
            .sum();
        assert!((quad - 2.75).abs() < 1e-8);
    }

    #[test]
    fn power_dual_inverts_gradient() {
        let h = PowerMirror::new(4.0, vec![0.0, 0.0]).unwrap();
        let z = h.dual_gradient(&[8.0, 0.0]);
        assert!((z[0] - 2.0).abs() < 1e-14 && z[1] == 0.0);
        assert_eq!(h.gradient(&[2.0, 0.0]), vec![8.0, 0.0]);
        let uc = PowerMirror::new(3.0, vec![0.0])
            .unwrap()
            .uniform_convexity()
            .unwrap();
        assert_eq!((uc.order, uc.sigma), (3.0, 0.5));
    }

    #[test]
    fn regularizer_is_one_uniformly_convex() {
        let d = PowerMirror::regularizer(3.0, &[1.0, 1.0]).unwrap();
        assert_eq!(d.uniform_convexity().unwrap().sigma, 1.0);
        assert!(PowerMirror::new(1.5, vec![0.0]).is_err());
    }

    #[test]
    fn quartic_euclidean_dual() {
        let h = QuarticEuclidean;
        let x = [0.3, -2.0, 1.1];
        let back = h.dual_gradient(&h.gradient(&x));
        for (a, b) in back.iter().zip(&x) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn lookup_by_name() {
        let a = Point::new(vec![0.0, 0.0]).unwrap();
        assert_eq!(
            mirror_by_name("pth_power3", &a).unwrap().name(),
            "pth_power3"
        );
        assert_eq!(mirror_by_name("d4", &a).unwrap().name(), "d4");
        assert!(mirror_by_name("x", &a).is_err());
    }
}
