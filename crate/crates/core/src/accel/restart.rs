use alloc::format;
use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Error;
use crate::mirror::PowerMirror;
use crate::objective::ObjectiveOracle;
use crate::point::{dist, Point};
use crate::taylorstep::{g_step, StepConfig};

use super::{accelerated, gap, AccelConfig, ConfigSnapshot, RunRecord, Termination};

/// One restart round.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochSummary {
    pub epoch: usize,
    /// `||x̂_{j−1} − x*||^p`.
    pub dist_p_before: f64,
    /// `||x̂_j − x*||^p`.
    pub dist_p_after: f64,
    /// `dist_p_after / dist_p_before`.
    pub ratio: f64,
    /// `ratio <= 1/e`.
    pub contraction_ok: bool,
    pub inner_termination: Termination,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestartSummary {
    pub kappa: f64,
    /// Iterations per round.
    pub m: usize,
    pub epochs: Vec<EpochSummary>,
    /// `f(ŷ) − f*` after the trailing step.
    pub final_gap: f64,
    /// `3||x̂_0 − x*||^p / (εp e^{epochs})`.
    pub final_bound: f64,
    pub bound_ok: bool,
}

/// `m = ⌈8p / κ^{1/p}⌉`.
pub fn restart_epoch_length(p: u32, kappa: f64) -> usize {
    let pf = f64::from(p);
    (8.0 * pf / kappa.powf(1.0 / pf)).ceil() as usize
}

const BOUND_SLACK: f64 = 1e-9;

/// Restarted accelerated method with `N = 2`, `C = 1/(4p)^p` and mirror
/// `d_p` re-anchored at each round's input. Each round runs `m` iterations
/// and outputs `y_m`.
///
/// Row `j` holds `x̂_j` and `ŷ_j = G_{p,ε,2}(x̂_j)`; `bound` on row `j` is
/// `3||x̂_0 − x*||^p / (εp e^j)`.
pub fn restart_accelerated(
    f: &dyn ObjectiveOracle,
    epsilon: f64,
    x0: Point,
    epochs: usize,
) -> Result<RunRecord, Error> {
    let uc = f.uniform_convexity().ok_or_else(|| {
        Error::Precondition(format!("{} declares no uniform convexity", f.name()))
    })?;
    let p = uc.order.round() as u32;
    if (uc.order - f64::from(p)).abs() > 0.0 {
        return Err(Error::Precondition(format!(
            "order {} is not an integer",
            uc.order
        )));
    }
    let kappa = epsilon * uc.sigma;
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::Precondition(format!(
            "kappa = {kappa} outside (0, 1)"
        )));
    }
    let xs = f
        .minimizer()
        .ok_or_else(|| Error::Precondition(format!("{} declares no minimizer", f.name())))?;
    let step = StepConfig::new(p, epsilon, 2.0)?;
    let m = restart_epoch_length(p, kappa);
    let pf = f64::from(p);
    let c = 1.0 / (4.0 * pf).powf(pf);

    let snapshot = ConfigSnapshot {
        method: "restart".into(),
        problem: f.name().to_string(),
        mirror: format!("d{p}"),
        p,
        epsilon,
        n: 2.0,
        c,
        iterations: epochs * m,
        extra: alloc::vec![("m".into(), m as f64), ("kappa".into(), kappa)],
    };
    let mut rec = RunRecord::new(snapshot, f.min_value());
    let d0 = dist(&x0, &xs).powf(pf);
    let mut summaries = Vec::new();
    let mut xhat = x0;

    for j in 0..=epochs {
        if j > 0 {
            let mirror = Arc::new(PowerMirror::regularizer(pf, &xhat)?);
            let cfg = AccelConfig::with_params(p, epsilon, 2.0, c, mirror, xhat.clone())?;
            let inner = accelerated(f, &cfg, m);
            let before = dist(&xhat, &xs).powf(pf);
            let out = match inner.termination {
                Termination::Completed => inner.y.last().cloned(),
                _ => None,
            };
            let Some(next) = out else {
                rec.termination = match inner.termination {
                    Termination::Diverged(_) => Termination::Diverged(j),
                    _ => Termination::SolverError(j),
                };
                summaries.push(EpochSummary {
                    epoch: j,
                    dist_p_before: before,
                    dist_p_after: f64::NAN,
                    ratio: f64::NAN,
                    contraction_ok: false,
                    inner_termination: inner.termination,
                });
                break;
            };
            let after = dist(&next, &xs).powf(pf);
            let ratio = if before > 0.0 { after / before } else { 0.0 };
            summaries.push(EpochSummary {
                epoch: j,
                dist_p_before: before,
                dist_p_after: after,
                ratio,
                contraction_ok: after
                    <= before / core::f64::consts::E * (1.0 + BOUND_SLACK) + 1e-300,
                inner_termination: inner.termination,
            });
            xhat = next;
        }
        let (yhat, cert) = match g_step(f, &xhat, &step) {
            Ok(v) => v,
            Err(_) => {
                rec.termination = Termination::SolverError(j);
                break;
            }
        };
        rec.push_row(j, xhat.clone(), gap(f, &xhat));
        *RunRecord::last_mut(&mut rec.f_gap_y) = gap(f, &yhat);
        *RunRecord::last_mut(&mut rec.f_y) = f.value(&yhat);
        *RunRecord::last_mut(&mut rec.certificates) = Some(cert);
        *RunRecord::last_mut(&mut rec.bound) = 3.0 * d0 / (epsilon * pf * (j as f64).exp());
        rec.grad_y.push(f.gradient(&yhat));
        rec.y.push(yhat);
    }

    let final_gap = rec.f_gap_y.last().copied().unwrap_or(f64::NAN);
    let final_bound = rec.bound.last().copied().unwrap_or(f64::NAN);
    rec.radius = dist(&rec.x[0], &xs);
    rec.restart = Some(RestartSummary {
        kappa,
        m,
        epochs: summaries,
        final_gap,
        final_bound,
        bound_ok: final_gap <= final_bound * (1.0 + BOUND_SLACK) + 1e-15,
    });
    Ok(rec)
}
