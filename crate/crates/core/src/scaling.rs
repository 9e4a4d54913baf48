//! Scaling triples `(α_t, β_t, γ_t)` with analytic time derivatives.

use alloc::boxed::Box;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Error;

/// Default start time for triples singular at `t = 0`.
pub const DEFAULT_T_MIN: f64 = 0.1;

const IDEAL_TOL: f64 = 1e-10;

/// A strictly increasing smooth time map `τ` with `τ̇ > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeMap {
    Identity,
    /// `τ(t) = t^k`, `k > 0`, on `t > 0`.
    Power {
        exponent: f64,
    },
    /// `τ(t) = e^{ct}`, `c > 0`.
    Exp {
        rate: f64,
    },
    /// `τ(t) = a t + b`, `a > 0`.
    Affine {
        scale: f64,
        shift: f64,
    },
}

impl TimeMap {
    pub fn power(exponent: f64) -> Result<Self, Error> {
        if exponent > 0.0 && exponent.is_finite() {
            Ok(TimeMap::Power { exponent })
        } else {
            Err(Error::InvalidInput(
                "time map must be increasing (exponent > 0)".into(),
            ))
        }
    }

    pub fn exp(rate: f64) -> Result<Self, Error> {
        if rate > 0.0 && rate.is_finite() {
            Ok(TimeMap::Exp { rate })
        } else {
            Err(Error::InvalidInput(
                "time map must be increasing (rate > 0)".into(),
            ))
        }
    }

    pub fn affine(scale: f64, shift: f64) -> Result<Self, Error> {
        if scale > 0.0 && scale.is_finite() && shift.is_finite() {
            Ok(TimeMap::Affine { scale, shift })
        } else {
            Err(Error::InvalidInput(
                "time map must be increasing (scale > 0)".into(),
            ))
        }
    }

    pub fn tau(&self, t: f64) -> f64 {
        match *self {
            TimeMap::Identity => t,
            TimeMap::Power { exponent } => t.powf(exponent),
            TimeMap::Exp { rate } => (rate * t).exp(),
            TimeMap::Affine { scale, shift } => scale * t + shift,
        }
    }

    pub fn tau_dot(&self, t: f64) -> f64 {
        match *self {
            TimeMap::Identity => 1.0,
            TimeMap::Power { exponent } => exponent * t.powf(exponent - 1.0),
            TimeMap::Exp { rate } => rate * (rate * t).exp(),
            TimeMap::Affine { scale, .. } => scale,
        }
    }

    pub fn tau_ddot(&self, t: f64) -> f64 {
        match *self {
            TimeMap::Identity | TimeMap::Affine { .. } => 0.0,
            TimeMap::Power { exponent } => exponent * (exponent - 1.0) * t.powf(exponent - 2.0),
            TimeMap::Exp { rate } => rate * rate * (rate * t).exp(),
        }
    }

    /// `τ^{-1}(s)`; NaN outside the range of `τ`.
    pub fn inverse(&self, s: f64) -> f64 {
        match *self {
            TimeMap::Identity => s,
            TimeMap::Power { exponent } => {
                if s >= 0.0 {
                    s.powf(1.0 / exponent)
                } else {
                    f64::NAN
                }
            }
            TimeMap::Exp { rate } => {
                if s > 0.0 {
                    s.ln() / rate
                } else {
                    f64::NAN
                }
            }
            TimeMap::Affine { scale, shift } => (s - shift) / scale,
        }
    }
}

/// User-supplied triple: six functions of `t` and a start time.
pub struct CustomTriple {
    pub alpha: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub beta: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub gamma: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub alpha_dot: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub beta_dot: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub gamma_dot: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub valid_from: f64,
}

impl core::fmt::Debug for CustomTriple {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("CustomTriple")
            .field("valid_from", &self.valid_from)
            .finish_non_exhaustive()
    }
}

/// Family tag of a triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Polynomial { p: f64, c: f64 },
    Exponential { c: f64 },
    Custom,
}

/// The parameter functions of the Bregman Lagrangian.
#[derive(Debug, Clone)]
pub enum ScalingTriple {
    /// `α = log p − log t`, `β = p log t + log C`, `γ = p log t`.
    Polynomial {
        p: f64,
        c: f64,
        t_min: f64,
    },
    /// `α = log c`, `β = γ = ct`.
    Exponential {
        c: f64,
    },
    /// `α = −log m`, `β = log m`, `γ = t/m`.
    Massless {
        m: f64,
    },
    /// `α = log(r−1) − log t`, `β = 2 log t − 2 log(r−1)`, `γ = (r−1) log t`:
    /// the Euclidean system `ẍ + (r/t)ẋ + ∇f = 0`.
    EuclideanR {
        r: f64,
        t_min: f64,
    },
    Custom(Arc<CustomTriple>),
    /// `α̃ = α∘τ + log τ̇`, `β̃ = β∘τ`, `γ̃ = γ∘τ`.
    Dilated {
        base: Box<ScalingTriple>,
        tau: TimeMap,
    },
}

fn positive(name: &str, v: f64) -> Result<(), Error> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

impl ScalingTriple {
    pub fn polynomial(p: f64, c: f64) -> Result<Self, Error> {
        positive("p", p)?;
        positive("C", c)?;
        Ok(ScalingTriple::Polynomial {
            p,
            c,
            t_min: DEFAULT_T_MIN,
        })
    }

    pub fn exponential(c: f64) -> Result<Self, Error> {
        positive("c", c)?;
        Ok(ScalingTriple::Exponential { c })
    }

    pub fn massless(m: f64) -> Result<Self, Error> {
        positive("m", m)?;
        Ok(ScalingTriple::Massless { m })
    }

    /// Requires `r > 1` so that `log(r − 1)` is defined.
    pub fn euclidean_r(r: f64) -> Result<Self, Error> {
        if !(r > 1.0 && r.is_finite()) {
            return Err(Error::InvalidInput(format!("r must exceed 1, got {r}")));
        }
        Ok(ScalingTriple::EuclideanR {
            r,
            t_min: DEFAULT_T_MIN,
        })
    }

    pub fn custom(c: CustomTriple) -> Self {
        ScalingTriple::Custom(Arc::new(c))
    }

    pub fn with_t_min(self, t: f64) -> Self {
        match self {
            ScalingTriple::Polynomial { p, c, .. } => ScalingTriple::Polynomial { p, c, t_min: t },
            ScalingTriple::EuclideanR { r, .. } => ScalingTriple::EuclideanR { r, t_min: t },
            other => other,
        }
    }

    pub fn alpha(&self, t: f64) -> f64 {
        match self {
            ScalingTriple::Polynomial { p, .. } => p.ln() - t.ln(),
            ScalingTriple::Exponential { c } => c.ln(),
            ScalingTriple::Massless { m } => -m.ln(),
            ScalingTriple::EuclideanR { r, .. } => (r - 1.0).ln() - t.ln(),
            ScalingTriple::Custom(c) => (c.alpha)(t),
            ScalingTriple::Dilated { base, tau } => base.alpha(tau.tau(t)) + tau.tau_dot(t).ln(),
        }
    }

    pub fn beta(&self, t: f64) -> f64 {
        match self {
            ScalingTriple::Polynomial { p, c, .. } => p * t.ln() + c.ln(),
            ScalingTriple::Exponential { c } => c * t,
            ScalingTriple::Massless { m } => m.ln(),
            ScalingTriple::EuclideanR { r, .. } => 2.0 * t.ln() - 2.0 * (r - 1.0).ln(),
            ScalingTriple::Custom(c) => (c.beta)(t),
            ScalingTriple::Dilated { base, tau } => base.beta(tau.tau(t)),
        }
    }

    pub fn gamma(&self, t: f64) -> f64 {
        match self {
            ScalingTriple::Polynomial { p, .. } => p * t.ln(),
            ScalingTriple::Exponential { c } => c * t,
            ScalingTriple::Massless { m } => t / m,
            ScalingTriple::EuclideanR { r, .. } => (r - 1.0) * t.ln(),
            ScalingTriple::Custom(c) => (c.gamma)(t),
            ScalingTriple::Dilated { base, tau } => base.gamma(tau.tau(t)),
        }
    }

    pub fn alpha_dot(&self, t: f64) -> f64 {
        match self {
            ScalingTriple::Polynomial { .. } | ScalingTriple::EuclideanR { .. } => -1.0 / t,
            ScalingTriple::Exponential { .. } | ScalingTriple::Massless { .. } => 0.0,
            ScalingTriple::Custom(c) => (c.alpha_dot)(t),
            ScalingTriple::Dilated { base, tau } => {
                let td = tau.tau_dot(t);
                td * base.alpha_dot(tau.tau(t)) + tau.tau_ddot(t) / td
            }
        }
    }

    pub fn beta_dot(&self, t: f64) -> f64 {
        match self {
            ScalingTriple::Polynomial { p, .. } => p / t,
            ScalingTriple::Exponential { c } => *c,
            ScalingTriple::Massless { .. } => 0.0,
            ScalingTriple::EuclideanR { .. } => 2.0 / t,
            ScalingTriple::Custom(c) => (c.beta_dot)(t),
            ScalingTriple::Dilated { base, tau } => tau.tau_dot(t) * base.beta_dot(tau.tau(t)),
        }
    }

    pub fn gamma_dot(&self, t: f64) -> f64 {
        match self {
            ScalingTriple::Polynomial { p, .. } => p / t,
            ScalingTriple::Exponential { c } => *c,
            ScalingTriple::Massless { m } => 1.0 / m,
            ScalingTriple::EuclideanR { r, .. } => (r - 1.0) / t,
            ScalingTriple::Custom(c) => (c.gamma_dot)(t),
            ScalingTriple::Dilated { base, tau } => tau.tau_dot(t) * base.gamma_dot(tau.tau(t)),
        }
    }

    /// Earliest admissible time.
    pub fn valid_from(&self) -> f64 {
        match self {
            ScalingTriple::Polynomial { t_min, .. } | ScalingTriple::EuclideanR { t_min, .. } => {
                *t_min
            }
            ScalingTriple::Exponential { .. } | ScalingTriple::Massless { .. } => 0.0,
            ScalingTriple::Custom(c) => c.valid_from,
            ScalingTriple::Dilated { base, tau } => {
                let s = tau.inverse(base.valid_from());
                if s.is_nan() {
                    0.0
                } else {
                    s.max(0.0)
                }
            }
        }
    }

    pub fn family(&self) -> Family {
        match self {
            ScalingTriple::Polynomial { p, c, .. } => Family::Polynomial { p: *p, c: *c },
            ScalingTriple::Exponential { c } => Family::Exponential { c: *c },
            _ => Family::Custom,
        }
    }
}

/// Outcome of [`ideal_scaling_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdealScalingReport {
    /// `β̇ ≤ e^α` on the grid.
    pub beta_ok: bool,
    /// `γ̇ = e^α` on the grid.
    pub gamma_ok: bool,
    /// `β̇ = e^α` on the grid.
    pub beta_tight: bool,
}

/// Checks the ideal scaling conditions on `grid` with absolute tolerance
/// `1e-10`.
pub fn ideal_scaling_check(s: &ScalingTriple, grid: &[f64]) -> IdealScalingReport {
    let mut rep = IdealScalingReport {
        beta_ok: true,
        gamma_ok: true,
        beta_tight: true,
    };
    for &t in grid {
        let ea = s.alpha(t).exp();
        let bd = s.beta_dot(t);
        rep.beta_ok &= bd <= ea + IDEAL_TOL;
        rep.gamma_ok &= (s.gamma_dot(t) - ea).abs() <= IDEAL_TOL;
        rep.beta_tight &= (bd - ea).abs() <= IDEAL_TOL;
    }
    rep
}

/// The triple of the reparameterized curve `Y_t = X_{τ(t)}`.
pub fn dilate_triple(s: &ScalingTriple, tau: TimeMap) -> ScalingTriple {
    match tau {
        TimeMap::Identity => s.clone(),
        _ => ScalingTriple::Dilated {
            base: Box::new(s.clone()),
            tau,
        },
    }
}

/// `n` log-spaced times in `[a, b]`.
pub fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return alloc::vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ideal_scaling_examples() {
        let all = IdealScalingReport {
            beta_ok: true,
            gamma_ok: true,
            beta_tight: true,
        };
        let poly = ScalingTriple::polynomial(2.0, 1.0).unwrap();
        assert_eq!(ideal_scaling_check(&poly, &[1.0, 2.0, 5.0]), all);
        let ex = ScalingTriple::exponential(1.0).unwrap();
        assert_eq!(ideal_scaling_check(&ex, &[0.5, 1.0]), all);
        let r5 = ScalingTriple::euclidean_r(5.0).unwrap();
        let rep = ideal_scaling_check(&r5, &[1.0, 2.0, 5.0]);
        assert!(rep.beta_ok && rep.gamma_ok && !rep.beta_tight);
    }

    #[test]
    fn suboptimal_custom_beta() {
        let r = 5.0_f64;
        let c = ScalingTriple::custom(CustomTriple {
            alpha: Box::new(move |t: f64| (r - 1.0).ln() - t.ln()),
            beta: Box::new(|t: f64| 2.0 * t.ln()),
            gamma: Box::new(move |t: f64| (r - 1.0) * t.ln()),
            alpha_dot: Box::new(|t: f64| -1.0 / t),
            beta_dot: Box::new(|t: f64| 2.0 / t),
            gamma_dot: Box::new(move |t: f64| (r - 1.0) / t),
            valid_from: 0.1,
        });
        let rep = ideal_scaling_check(&c, &[1.0, 3.0]);
        assert!(rep.beta_ok && !rep.beta_tight);
        assert_eq!(c.family(), Family::Custom);
    }

    #[test]
    fn decreasing_time_maps_rejected() {
        assert!(TimeMap::power(-1.0).is_err());
        assert!(TimeMap::exp(0.0).is_err());
        assert!(TimeMap::affine(-2.0, 0.0).is_err());
    }

    #[test]
    fn dilation_valid_from() {
        let d = dilate_triple(
            &ScalingTriple::polynomial(2.0, 1.0).unwrap(),
            TimeMap::power(2.0).unwrap(),
        );
        assert!((d.valid_from() - 0.1f64.sqrt()).abs() < 1e-15);
    }
}
