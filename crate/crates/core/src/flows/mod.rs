//! Continuous-time dynamics.
//!
//! Every flow is a first-order system in a flat state vector. Second-order
//! flows carry a dual slice after the position: `W = ∇h(Z)` for the
//! Euler-Lagrange form, the momentum `P` for the Hamiltonian form, and the
//! velocity `V` for the Euclidean damped oscillator.

mod analysis;
mod integrate;

pub use analysis::{dilate_trajectory, energy_at, fit_rate, natural_motion, rescaled_flow_energy};
pub use integrate::{
    integrate, integrate_state, Controls, FlowError, Method, StepStats, Trajectory,
};
#[allow(unused_imports)]
use num_traits::Float;

use alloc::format;
use alloc::vec::Vec;

use crate::error::Error;
use crate::linalg;
use crate::mirror::{bregman_divergence, MirrorMap};
use crate::objective::ObjectiveOracle;
use crate::point::{dot, norm, sub, Point};
use crate::scaling::{ideal_scaling_check, ScalingTriple};

/// Below this gradient norm the rescaled gradient field is zero.
pub const GRADIENT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FlowKind {
    EulerLagrange,
    Hamiltonian,
    RescaledGradient,
    NaturalGradient,
    EuclideanR,
    MasslessLagrangian(f64),
}

/// Names of the state slices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// `(X, W)`
    XW,
    /// `(X, P)`
    XP,
    /// `(X, V)`
    XV,
    /// `X` only.
    X,
}

impl Layout {
    /// Label of the second slice, if any.
    pub fn second(&self) -> Option<&'static str> {
        match self {
            Layout::XW => Some("W"),
            Layout::XP => Some("P"),
            Layout::XV => Some("V"),
            Layout::X => None,
        }
    }

    pub fn blocks(&self) -> usize {
        if matches!(self, Layout::X) {
            1
        } else {
            2
        }
    }
}

/// Force scaling of the Euclidean `r`-system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ForceScaling {
    /// `ẍ + (r/t)ẋ + ∇f = 0`.
    Unit,
    /// `ẍ + (r/t)ẋ + C p² t^{p−2} ∇f = 0` with `p = r − 1`.
    Matched(f64),
}

#[derive(Clone)]
enum Dynamics<'a> {
    Lagrangian {
        h: &'a dyn MirrorMap,
        s: ScalingTriple,
    },
    Hamiltonian {
        h: &'a dyn MirrorMap,
        s: ScalingTriple,
    },
    Rescaled {
        p: f64,
    },
    Natural {
        h: &'a dyn MirrorMap,
    },
    EuclideanR {
        r: f64,
        force: ForceScaling,
    },
}

/// A first-order ODE system `ẏ = F(t, y)` together with its initial data
/// and energy functional.
#[derive(Clone)]
pub struct FlowSystem<'a> {
    kind: FlowKind,
    layout: Layout,
    dim: usize,
    f: &'a dyn ObjectiveOracle,
    x_star: Option<Point>,
    f_star: Option<f64>,
    dynamics: Dynamics<'a>,
}

impl core::fmt::Debug for FlowSystem<'_> {
    fn fmt(&self, fm: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        fm.debug_struct("FlowSystem")
            .field("kind", &self.kind)
            .field("layout", &self.layout)
            .field("dim", &self.dim)
            .field("objective", &self.f.name())
            .finish()
    }
}

/// Failure to evaluate the field at a particular state.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum FieldError {
    Singular,
}

impl<'a> FlowSystem<'a> {
    fn new(
        kind: FlowKind,
        layout: Layout,
        f: &'a dyn ObjectiveOracle,
        dynamics: Dynamics<'a>,
    ) -> Self {
        Self {
            kind,
            layout,
            dim: f.dim(),
            f,
            x_star: f.minimizer(),
            f_star: f.min_value(),
            dynamics,
        }
    }

    pub fn kind(&self) -> FlowKind {
        self.kind
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    /// Dimension `d` of the position.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn state_dim(&self) -> usize {
        self.dim * self.layout.blocks()
    }

    pub fn objective(&self) -> &'a dyn ObjectiveOracle {
        self.f
    }

    pub fn scaling(&self) -> Option<&ScalingTriple> {
        match &self.dynamics {
            Dynamics::Lagrangian { s, .. } | Dynamics::Hamiltonian { s, .. } => Some(s),
            _ => None,
        }
    }

    pub fn mirror(&self) -> Option<&'a dyn MirrorMap> {
        match self.dynamics {
            Dynamics::Lagrangian { h, .. }
            | Dynamics::Hamiltonian { h, .. }
            | Dynamics::Natural { h } => Some(h),
            _ => None,
        }
    }

    /// Earliest admissible start time.
    pub fn valid_from(&self) -> f64 {
        match &self.dynamics {
            Dynamics::Lagrangian { s, .. } | Dynamics::Hamiltonian { s, .. } => s.valid_from(),
            Dynamics::EuclideanR { .. } => crate::scaling::DEFAULT_T_MIN,
            _ => 0.0,
        }
    }

    /// Initial state with zero initial velocity.
    pub fn initial_state_from(&self, x0: &Point, _t0: f64) -> Result<Vec<f64>, Error> {
        crate::error::check_dims(self.dim, x0.dim())?;
        let mut y = x0.to_vec();
        match &self.dynamics {
            Dynamics::Lagrangian { h, .. } => y.extend(h.gradient(x0)),
            Dynamics::Hamiltonian { .. } | Dynamics::EuclideanR { .. } => {
                y.extend(core::iter::repeat_n(0.0, self.dim))
            }
            Dynamics::Rescaled { .. } | Dynamics::Natural { .. } => {}
        }
        Ok(y)
    }

    /// Position slice of a state.
    pub fn position<'s>(&self, state: &'s [f64]) -> &'s [f64] {
        &state[..self.dim]
    }

    pub(crate) fn field(&self, t: f64, y: &[f64], out: &mut [f64]) -> Result<(), FieldError> {
        let d = self.dim;
        let x = &y[..d];
        match &self.dynamics {
            Dynamics::Lagrangian { h, s } => {
                let w = &y[d..];
                let z = h.dual_gradient(w);
                let ea = s.alpha(t).exp();
                let eab = (s.alpha(t) + s.beta(t)).exp();
                let g = self.f.gradient(x);
                for i in 0..d {
                    out[i] = ea * (z[i] - x[i]);
                    out[d + i] = -eab * g[i];
                }
            }
            Dynamics::Hamiltonian { h, s } => {
                let pm = &y[d..];
                let (a, b, c) = (s.alpha(t), s.beta(t), s.gamma(t));
                let eg = (-c).exp();
                let mut w = h.gradient(x);
                for i in 0..d {
                    w[i] += eg * pm[i];
                }
                let bracket = sub(&h.dual_gradient(&w), x);
                let hb = if h.is_euclidean() {
                    bracket.clone()
                } else {
                    let hx = h.hessian_dense(x).ok_or(FieldError::Singular)?;
                    linalg::matvec(&hx, &bracket)
                };
                let g = self.f.gradient(x);
                let ea = a.exp();
                let eag = (a + c).exp();
                let eabg = (a + b + c).exp();
                for i in 0..d {
                    out[i] = ea * bracket[i];
                    out[d + i] = -eag * hb[i] + ea * pm[i] - eabg * g[i];
                }
            }
            Dynamics::Rescaled { p } => {
                let g = self.f.gradient(x);
                let gn = norm(&g);
                if gn <= GRADIENT_FLOOR {
                    out[..d].iter_mut().for_each(|o| *o = 0.0);
                } else {
                    let sc = gn.powf((p - 2.0) / (p - 1.0));
                    for i in 0..d {
                        out[i] = -g[i] / sc;
                    }
                }
            }
            Dynamics::Natural { h } => {
                let g = self.f.gradient(x);
                let hx = h.hessian_dense(x).ok_or(FieldError::Singular)?;
                let neg: Vec<f64> = g.iter().map(|v| -v).collect();
                let v = linalg::solve(&hx, &neg).ok_or(FieldError::Singular)?;
                out[..d].copy_from_slice(&v);
            }
            Dynamics::EuclideanR { r, force } => {
                let v = &y[d..];
                let g = self.f.gradient(x);
                let coef = match force {
                    ForceScaling::Unit => 1.0,
                    ForceScaling::Matched(c) => {
                        let p = r - 1.0;
                        c * p * p * t.powf(p - 2.0)
                    }
                };
                for i in 0..d {
                    out[i] = v[i];
                    out[d + i] = -(r / t) * v[i] - coef * g[i];
                }
            }
        }
        Ok(())
    }

    /// Evaluates `F(t, y)`.
    pub fn vector_field(&self, t: f64, state: &[f64]) -> Result<Vec<f64>, Error> {
        crate::error::check_dims(self.state_dim(), state.len())?;
        let mut out = alloc::vec![0.0; state.len()];
        self.field(t, state, &mut out)
            .map_err(|_| Error::Precondition(format!("singular Hessian at t = {t}")))?;
        Ok(out)
    }

    /// `f(X) − f*`, NaN if `f*` is unknown.
    pub fn f_gap(&self, state: &[f64]) -> f64 {
        match self.f_star {
            Some(fs) => self.f.value(&state[..self.dim]) - fs,
            None => f64::NAN,
        }
    }

    /// Lyapunov energy at `(t, state)` when defined for this flow and `x*` is
    /// known; NaN otherwise.
    pub fn energy(&self, t: f64, state: &[f64]) -> f64 {
        let (Some(xs), Some(_)) = (&self.x_star, self.f_star) else {
            return f64::NAN;
        };
        let d = self.dim;
        let x = &state[..d];
        let gap = self.f_gap(state);
        match &self.dynamics {
            Dynamics::Lagrangian { h, s } => {
                let z = h.dual_gradient(&state[d..]);
                bregman_divergence(*h, xs, &z).unwrap_or(f64::NAN) + s.beta(t).exp() * gap
            }
            Dynamics::Hamiltonian { h, s } => {
                let eg = (-s.gamma(t)).exp();
                let mut w = h.gradient(x);
                for (wi, pi) in w.iter_mut().zip(&state[d..]) {
                    *wi += eg * pi;
                }
                let z = h.dual_gradient(&w);
                bregman_divergence(*h, xs, &z).unwrap_or(f64::NAN) + s.beta(t).exp() * gap
            }
            Dynamics::EuclideanR { r, force } => {
                // Z = X + e^{−α} V with e^{−α} = t/(r − 1).
                let p = r - 1.0;
                let z: Vec<f64> = x
                    .iter()
                    .zip(&state[d..])
                    .map(|(xi, vi)| xi + t / p * vi)
                    .collect();
                let dz = sub(&z, xs);
                let eb = match force {
                    ForceScaling::Unit => t * t / (p * p),
                    ForceScaling::Matched(c) => c * t.powf(p),
                };
                0.5 * dot(&dz, &dz) + eb * gap
            }
            _ => f64::NAN,
        }
    }
}

fn check_scaling_grid(s: &ScalingTriple) -> Vec<f64> {
    let t0 = s.valid_from().max(1e-3);
    (0..=40)
        .map(|i| t0 + 0.25 * i as f64 + 0.01 * (i * i) as f64)
        .collect()
}

/// Euler-Lagrange flow `Ẋ = e^α(∇h*(W) − X)`, `Ẇ = −e^{α+β}∇f(X)`.
pub fn build_el_system<'a>(
    h: &'a dyn MirrorMap,
    f: &'a dyn ObjectiveOracle,
    s: ScalingTriple,
) -> Result<FlowSystem<'a>, Error> {
    if !ideal_scaling_check(&s, &check_scaling_grid(&s)).gamma_ok {
        return Err(Error::Precondition("scaling violates γ̇ = e^α".into()));
    }
    let kind = match s {
        ScalingTriple::Massless { m } => FlowKind::MasslessLagrangian(m),
        _ => FlowKind::EulerLagrange,
    };
    Ok(FlowSystem::new(
        kind,
        Layout::XW,
        f,
        Dynamics::Lagrangian { h, s },
    ))
}

/// Hamiltonian flow in `(X, P)` with `P(t0) = 0`.
pub fn build_hamiltonian_system<'a>(
    h: &'a dyn MirrorMap,
    f: &'a dyn ObjectiveOracle,
    s: ScalingTriple,
) -> Result<FlowSystem<'a>, Error> {
    if h.hessian_dense(&alloc::vec![0.0; f.dim()]).is_none() {
        return Err(Error::Capability(format!(
            "mirror {} has no Hessian",
            h.name()
        )));
    }
    Ok(FlowSystem::new(
        FlowKind::Hamiltonian,
        Layout::XP,
        f,
        Dynamics::Hamiltonian { h, s },
    ))
}

/// `Ẋ = −∇f(X) / ||∇f(X)||^{(p−2)/(p−1)}`.
pub fn build_rescaled_gradient_flow<'a>(
    f: &'a dyn ObjectiveOracle,
    p: f64,
) -> Result<FlowSystem<'a>, Error> {
    if !(p >= 2.0 && p.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "rescaled flow needs p >= 2, got {p}"
        )));
    }
    Ok(FlowSystem::new(
        FlowKind::RescaledGradient,
        Layout::X,
        f,
        Dynamics::Rescaled { p },
    ))
}

/// `Ẋ = −[∇²h(X)]^{−1} ∇f(X)`.
pub fn build_natural_gradient_flow<'a>(
    h: &'a dyn MirrorMap,
    f: &'a dyn ObjectiveOracle,
) -> Result<FlowSystem<'a>, Error> {
    if h.hessian_dense(&alloc::vec![0.0; f.dim()]).is_none() {
        return Err(Error::Capability(format!(
            "mirror {} has no Hessian",
            h.name()
        )));
    }
    Ok(FlowSystem::new(
        FlowKind::NaturalGradient,
        Layout::X,
        f,
        Dynamics::Natural { h },
    ))
}

/// Euler-Lagrange flow for `α = −log m`, `β = log m`, `γ = t/m`.
pub fn build_massless_system<'a>(
    h: &'a dyn MirrorMap,
    f: &'a dyn ObjectiveOracle,
    m: f64,
) -> Result<FlowSystem<'a>, Error> {
    build_el_system(h, f, ScalingTriple::massless(m)?)
}

/// The Euclidean damped system `ẍ + (r/t)ẋ + c(t)∇f = 0` in `(X, V)`.
pub fn build_euclidean_r_system(
    f: &dyn ObjectiveOracle,
    r: f64,
    force: ForceScaling,
) -> Result<FlowSystem<'_>, Error> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidInput(format!("r must be positive, got {r}")));
    }
    if let ForceScaling::Matched(c) = force {
        if !(r > 1.0 && c > 0.0) {
            return Err(Error::InvalidInput(
                "matched force needs r > 1 and C > 0".into(),
            ));
        }
    }
    Ok(FlowSystem::new(
        FlowKind::EuclideanR,
        Layout::XV,
        f,
        Dynamics::EuclideanR { r, force },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mirror::{Euclidean, PowerMirror};
    use crate::problems::{DiagonalQuadratic, Zero};
    use alloc::vec;

    #[test]
    fn polynomial_el_field() {
        let f = DiagonalQuadratic::new(vec![1.0, 10.0]).unwrap();
        let h = Euclidean;
        let sys = build_el_system(&h, &f, ScalingTriple::polynomial(3.0, 1.0).unwrap()).unwrap();
        let t = 2.0;
        let y = [1.0, 1.0, 0.5, -0.5];
        let v = sys.vector_field(t, &y).unwrap();
        // Ẋ = (p/t)(W − X), Ẇ = −p t^{p−1} ∇f(X)
        let expect = [
            1.5 * (0.5 - 1.0),
            1.5 * (-0.5 - 1.0),
            -12.0 * 1.0,
            -12.0 * 10.0,
        ];
        for (a, b) in v.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn exponential_el_field() {
        let f = DiagonalQuadratic::new(vec![2.0]).unwrap();
        let h = Euclidean;
        let c = 0.7;
        let sys = build_el_system(&h, &f, ScalingTriple::exponential(c).unwrap()).unwrap();
        let v = sys.vector_field(1.5, &[1.0, 3.0]).unwrap();
        assert!((v[0] - c * 2.0).abs() < 1e-12);
        assert!((v[1] + c * (c * 1.5).exp() * 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_force_keeps_w() {
        let f = Zero::new(2);
        let h = PowerMirror::new(3.0, vec![0.0, 0.0]).unwrap();
        let sys = build_el_system(&h, &f, ScalingTriple::polynomial(2.0, 1.0).unwrap()).unwrap();
        let v = sys.vector_field(1.0, &[1.0, 2.0, 0.3, 0.1]).unwrap();
        assert_eq!(&v[2..], &[0.0, 0.0]);
    }

    #[test]
    fn non_ideal_gamma_rejected() {
        let f = Zero::new(1);
        let s = crate::scaling::dilate_triple(
            &ScalingTriple::exponential(1.0).unwrap(),
            crate::scaling::TimeMap::affine(2.0, 0.0).unwrap(),
        );
        assert!(build_el_system(&Euclidean, &f, s).is_ok());
        let bad = ScalingTriple::custom(crate::scaling::CustomTriple {
            alpha: alloc::boxed::Box::new(|_| 0.0),
            beta: alloc::boxed::Box::new(|t| t),
            gamma: alloc::boxed::Box::new(|t| 2.0 * t),
            alpha_dot: alloc::boxed::Box::new(|_| 0.0),
            beta_dot: alloc::boxed::Box::new(|_| 1.0),
            gamma_dot: alloc::boxed::Box::new(|_| 2.0),
            valid_from: 0.0,
        });
        assert!(matches!(
            build_el_system(&Euclidean, &f, bad),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn euclidean_hamiltonian_reduces() {
        let f = DiagonalQuadratic::new(vec![1.0, 4.0]).unwrap();
        let s = ScalingTriple::polynomial(2.0, 0.5).unwrap();
        let sys = build_hamiltonian_system(&Euclidean, &f, s.clone()).unwrap();
        let (t, y) = (1.3, [0.4, -0.2, 0.7, 1.1]);
        let v = sys.vector_field(t, &y).unwrap();
        let a_g = (s.alpha(t) - s.gamma(t)).exp();
        let abg = (s.alpha(t) + s.beta(t) + s.gamma(t)).exp();
        assert!((v[0] - a_g * 0.7).abs() < 1e-12 && (v[1] - a_g * 1.1).abs() < 1e-12);
        assert!((v[2] + abg * 0.4).abs() < 1e-10 && (v[3] + abg * 4.0 * -0.2).abs() < 1e-10);
        // P = 0 at a stationary point: X does not move.
        let v0 = sys.vector_field(t, &[0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(v0[0], 0.0);
    }

    #[test]
    fn rescaled_field() {
        let f = DiagonalQuadratic::new(vec![1.0, 3.0]).unwrap();
        let sys = build_rescaled_gradient_flow(&f, 2.0).unwrap();
        assert_eq!(
            sys.vector_field(0.0, &[1.0, 1.0]).unwrap(),
            vec![-1.0, -3.0]
        );
        let p4 = crate::problems::PowerNorm::new(4.0, 2).unwrap();
        let sys = build_rescaled_gradient_flow(&p4, 4.0).unwrap();
        let v = sys.vector_field(0.0, &[0.6, -0.8]).unwrap();
        assert!((v[0] + 0.6).abs() < 1e-14 && (v[1] - 0.8).abs() < 1e-14);
        assert_eq!(sys.vector_field(0.0, &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn natural_gradient_quartic_mirror_1d() {
        let h = PowerMirror::new(4.0, vec![0.0]).unwrap();
        let f = DiagonalQuadratic::new(vec![1.0]).unwrap();
        let sys = build_natural_gradient_flow(&h, &f).unwrap();
        for x in [0.5, -1.5, 2.0] {
            let v = sys.vector_field(0.0, &[x]).unwrap();
            assert!((v[0] + 1.0 / (3.0 * x)).abs() < 1e-12);
        }
        assert!(sys.vector_field(0.0, &[0.0]).is_err());
        let e = build_natural_gradient_flow(&Euclidean, &f).unwrap();
        assert_eq!(e.vector_field(0.0, &[2.0]).unwrap(), vec![-2.0]);
    }
}
