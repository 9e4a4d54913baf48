use alloc::boxed::Box;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::point::norm;

use super::{FieldError, FlowSystem, Layout};

/// Integration method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Classical fourth-order Runge-Kutta with `steps` equal steps.
    Rk4 { steps: usize },
    /// RK4 with step-doubling error control.
    Rk4Adaptive { rel_tol: f64, abs_tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Controls {
    pub method: Method,
    /// State norm above which integration stops with [`FlowError::Diverged`].
    pub divergence_threshold: f64,
    /// Adaptive mode only: hard cap on accepted steps.
    pub max_steps: usize,
    /// Record every `record_every`-th step (the last step is always kept).
    pub record_every: usize,
}

impl Controls {
    pub fn rk4(steps: usize) -> Self {
        Self {
            method: Method::Rk4 { steps },
            divergence_threshold: crate::DIVERGENCE_THRESHOLD,
            max_steps: 10_000_000,
            record_every: 1,
        }
    }

    pub fn adaptive(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            method: Method::Rk4Adaptive { rel_tol, abs_tol },
            ..Self::rk4(0)
        }
    }

    pub fn record_every(mut self, n: usize) -> Self {
        self.record_every = n.max(1);
        self
    }
}

impl Default for Controls {
    /// Adaptive RK4 with relative tolerance `1e-8`.
    fn default() -> Self {
        Self::adaptive(1e-8, 1e-12)
    }
}

/// Integrator diagnostics.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub field_evals: usize,
    pub min_step: f64,
    pub max_step: f64,
}

/// Sampled solution of a flow.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub layout: Layout,
    pub dim: usize,
    pub times: Vec<f64>,
    /// Full state vectors.
    pub states: Vec<Vec<f64>>,
    /// Field values `F(t, y)` at the samples.
    pub derivs: Vec<Vec<f64>>,
    /// `f(X_t) − f*`, NaN where unknown.
    pub f_gap: Vec<f64>,
    /// Lyapunov energy, NaN where undefined.
    pub energy: Vec<f64>,
    pub stats: StepStats,
}

impl Trajectory {
    fn empty(layout: Layout, dim: usize) -> Self {
        Self {
            layout,
            dim,
            times: Vec::new(),
            states: Vec::new(),
            derivs: Vec::new(),
            f_gap: Vec::new(),
            energy: Vec::new(),
            stats: StepStats {
                min_step: f64::INFINITY,
                ..StepStats::default()
            },
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Position at sample `i`.
    pub fn x(&self, i: usize) -> &[f64] {
        &self.states[i][..self.dim]
    }

    /// Second slice (`W`, `P` or `V`) at sample `i`.
    pub fn second(&self, i: usize) -> Option<&[f64]> {
        (self.layout.blocks() == 2).then(|| &self.states[i][self.dim..])
    }

    pub fn last_x(&self) -> &[f64] {
        self.x(self.len() - 1)
    }

    /// Cubic Hermite interpolation of the full state at `t`.
    pub fn sample(&self, t: f64) -> Option<Vec<f64>> {
        let n = self.times.len();
        if n == 0 || t < self.times[0] || t > self.times[n - 1] {
            return None;
        }
        let j = match self.times.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(j) => return Some(self.states[j].clone()),
            Err(j) => j,
        };
        let (i0, i1) = (j - 1, j);
        let (t0, t1) = (self.times[i0], self.times[i1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        Some(
            (0..self.states[i0].len())
                .map(|k| {
                    h00 * self.states[i0][k]
                        + h10 * h * self.derivs[i0][k]
                        + h01 * self.states[i1][k]
                        + h11 * h * self.derivs[i1][k]
                })
                .collect(),
        )
    }

    /// Linear interpolation of a per-sample scalar series at `t`.
    pub fn interp_scalar(&self, series: &[f64], t: f64) -> Option<f64> {
        let n = self.times.len();
        if n == 0 || t < self.times[0] || t > self.times[n - 1] {
            return None;
        }
        match self.times.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(j) => Some(series[j]),
            Err(j) => {
                let (t0, t1) = (self.times[j - 1], self.times[j]);
                let w = (t - t0) / (t1 - t0);
                Some((1.0 - w) * series[j - 1] + w * series[j])
            }
        }
    }

    fn push(&mut self, sys: &FlowSystem<'_>, t: f64, y: &[f64], dy: Vec<f64>) {
        self.times.push(t);
        self.f_gap.push(sys.f_gap(y));
        self.energy.push(sys.energy(t, y));
        self.states.push(y.to_vec());
        self.derivs.push(dy);
    }
}

/// Integration failures. Divergence and non-finite values carry the
/// trajectory up to the failure.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FlowError {
    #[error("state norm exceeded the divergence threshold at t = {t}")]
    Diverged { t: f64, partial: Box<Trajectory> },
    #[error("non-finite vector field at t = {t}")]
    NonFinite { t: f64, partial: Box<Trajectory> },
    #[error("singular linear system at t = {t}")]
    Singular { t: f64, state: Vec<f64> },
    #[error("step limit reached at t = {t}")]
    StepLimit { t: f64, partial: Box<Trajectory> },
    #[error("invalid integration request: {0}")]
    Input(alloc::string::String),
}

struct Stepper<'s, 'a> {
    sys: &'s FlowSystem<'a>,
    evals: usize,
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
}

impl<'s, 'a> Stepper<'s, 'a> {
    fn new(sys: &'s FlowSystem<'a>) -> Self {
        let n = sys.state_dim();
        let z = alloc::vec![0.0; n];
        Self {
            sys,
            evals: 0,
            k: [z.clone(), z.clone(), z.clone(), z.clone()],
            tmp: z,
        }
    }

    fn eval(&mut self, t: f64, y: &[f64], out: &mut [f64]) -> Result<(), FieldError> {
        self.evals += 1;
        self.sys.field(t, y, out)
    }

    /// One RK4 step from `(t, y)` with known `dy = F(t, y)`.
    fn step(&mut self, t: f64, y: &[f64], dy: &[f64], h: f64) -> Result<Vec<f64>, FieldError> {
        let n = y.len();
        let [_, k2, k3, k4] = &mut self.k;
        let mut tmp = core::mem::take(&mut self.tmp);
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * dy[i];
        }
        self.evals += 1;
        self.sys.field(t + 0.5 * h, &tmp, k2)?;
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        self.evals += 1;
        self.sys.field(t + 0.5 * h, &tmp, k3)?;
        for i in 0..n {
            tmp[i] = y[i] + h * k3[i];
        }
        self.evals += 1;
        self.sys.field(t + h, &tmp, k4)?;
        let out = (0..n)
            .map(|i| y[i] + h / 6.0 * (dy[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect();
        self.tmp = tmp;
        Ok(out)
    }
}

/// Integrates from the system's zero-velocity initial state at `x0`.
pub fn integrate(
    sys: &FlowSystem<'_>,
    x0: &crate::point::Point,
    t0: f64,
    t_end: f64,
    controls: &Controls,
) -> Result<Trajectory, FlowError> {
    let y0 = sys
        .initial_state_from(x0, t0)
        .map_err(|e| FlowError::Input(alloc::format!("{e}")))?;
    integrate_state(sys, &y0, t0, t_end, controls)
}

/// Integrates from an arbitrary full initial state.
pub fn integrate_state(
    sys: &FlowSystem<'_>,
    y0: &[f64],
    t0: f64,
    t_end: f64,
    controls: &Controls,
) -> Result<Trajectory, FlowError> {
    if y0.len() != sys.state_dim() {
        return Err(FlowError::Input(alloc::format!(
            "state has length {}, system needs {}",
            y0.len(),
            sys.state_dim()
        )));
    }
    if !(t_end > t0) || t0 < sys.valid_from() - 1e-15 || !t0.is_finite() || !t_end.is_finite() {
        return Err(FlowError::Input(alloc::format!(
            "need valid_from ({}) <= t0 < t_end, got [{t0}, {t_end}]",
            sys.valid_from()
        )));
    }
    let mut traj = Trajectory::empty(sys.layout(), sys.dim());
    let mut st = Stepper::new(sys);
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut dy = alloc::vec![0.0; n];
    let mut t = t0;
    if st.eval(t, &y, &mut dy).is_err() {
        return Err(FlowError::Singular { t, state: y });
    }
    if !crate::point::all_finite(&dy) {
        return Err(FlowError::NonFinite {
            t,
            partial: Box::new(traj),
        });
    }
    traj.push(sys, t, &y, dy.clone());

    let span = t_end - t0;
    let every = controls.record_every.max(1);
    let mut count = 0usize;
    let mut h = match controls.method {
        Method::Rk4 { steps } => {
            if steps == 0 {
                return Err(FlowError::Input("rk4 needs at least one step".into()));
            }
            span / steps as f64
        }
        Method::Rk4Adaptive { .. } => span * 1e-4,
    };
    let fixed_steps = match controls.method {
        Method::Rk4 { steps } => Some(steps),
        _ => None,
    };

    loop {
        let (t_new, y_new, last) = match (controls.method, fixed_steps) {
            (Method::Rk4 { .. }, Some(steps)) => {
                let i = count + 1;
                let t_new = if i == steps {
                    t_end
                } else {
                    t0 + span * i as f64 / steps as f64
                };
                let y_new = st
                    .step(t, &y, &dy, t_new - t)
                    .map_err(|_| FlowError::Singular {
                        t,
                        state: y.clone(),
                    })?;
                (t_new, y_new, i == steps)
            }
            (Method::Rk4Adaptive { rel_tol, abs_tol }, _) => {
                let mut accepted = None;
                for _ in 0..200 {
                    let hh = h.min(t_end - t);
                    let full = st.step(t, &y, &dy, hh);
                    let half = st.step(t, &y, &dy, 0.5 * hh).and_then(|mid| {
                        let mut dmid = alloc::vec![0.0; n];
                        st.eval(t + 0.5 * hh, &mid, &mut dmid)?;
                        st.step(t + 0.5 * hh, &mid, &dmid, 0.5 * hh)
                    });
                    let (y1, y2) = match (full, half) {
                        (Ok(a), Ok(b)) => (a, b),
                        _ => {
                            // Try a smaller step before giving up.
                            traj.stats.rejected += 1;
                            h = 0.25 * hh;
                            if h < 1e-14 * span {
                                return Err(FlowError::Singular {
                                    t,
                                    state: y.clone(),
                                });
                            }
                            continue;
                        }
                    };
                    let mut err: f64 = 0.0;
                    for i in 0..n {
                        let sc = abs_tol + rel_tol * y[i].abs().max(y2[i].abs());
                        err = err.max((y2[i] - y1[i]).abs() / 15.0 / sc);
                    }
                    if !err.is_finite() {
                        err = f64::INFINITY;
                    }
                    let fac = if err == 0.0 {
                        4.0
                    } else {
                        (0.9 * err.powf(-0.2)).clamp(0.1, 4.0)
                    };
                    if err <= 1.0 {
                        let t_new = if hh >= t_end - t { t_end } else { t + hh };
                        traj.stats.min_step = traj.stats.min_step.min(hh);
                        traj.stats.max_step = traj.stats.max_step.max(hh);
                        h = hh * fac;
                        accepted = Some((t_new, y2, t_new >= t_end));
                        break;
                    }
                    traj.stats.rejected += 1;
                    h = hh * fac;
                    if h < 1e-14 * span.max(t.abs()) {
                        break;
                    }
                }
                match accepted {
                    Some(a) => a,
                    None => {
                        return Err(FlowError::StepLimit {
                            t,
                            partial: Box::new(traj),
                        });
                    }
                }
            }
            _ => unreachable!("fixed steps are set exactly for the fixed method"),
        };
        count += 1;
        t = t_new;
        y = y_new;
        if st.eval(t, &y, &mut dy).is_err() {
            return Err(FlowError::Singular { t, state: y });
        }
        if !crate::point::all_finite(&y) || !crate::point::all_finite(&dy) {
            return Err(FlowError::NonFinite {
                t,
                partial: Box::new(traj),
            });
        }
        if norm(&y) > controls.divergence_threshold {
            traj.push(sys, t, &y, dy.clone());
            return Err(FlowError::Diverged {
                t,
                partial: Box::new(traj),
            });
        }
        if last || count.is_multiple_of(every) {
            traj.push(sys, t, &y, dy.clone());
        }
        if fixed_steps.is_some() {
            traj.stats.min_step = h;
            traj.stats.max_step = h;
        }
        if last {
            break;
        }
        if count >= controls.max_steps {
            return Err(FlowError::StepLimit {
                t,
                partial: Box::new(traj),
            });
        }
    }
    traj.stats.accepted = count;
    traj.stats.field_evals = st.evals;
    Ok(traj)
}
