use alloc::format;
use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Error;
use crate::mirror::{bregman_divergence, MirrorMap, PowerMirror};
use crate::objective::ObjectiveOracle;
use crate::point::{norm, Point};
use crate::taylor::rising_factorial;
use crate::taylorstep::{g_step, lemma1_constant, StepConfig};

use super::{gap, ConfigSnapshot, RunRecord, Termination};

/// Configuration of the rate-matching method.
#[derive(Debug, Clone)]
pub struct AccelConfig {
    pub p: u32,
    pub epsilon: f64,
    pub n: f64,
    pub c: f64,
    pub mirror: Arc<dyn MirrorMap>,
    pub x0: Point,
}

impl AccelConfig {
    /// `N = 2`, `C = M^{p−1}/p^p`, and the mirror `d_p` anchored at `x0`
    /// (the Euclidean map when `p = 2`).
    pub fn new(p: u32, epsilon: f64, x0: Point) -> Result<Self, Error> {
        let mirror: Arc<dyn MirrorMap> = if p == 2 {
            Arc::new(crate::mirror::Euclidean)
        } else {
            Arc::new(PowerMirror::regularizer(f64::from(p), &x0)?)
        };
        Self::with_params(p, epsilon, 2.0, Self::max_c(p, 2.0), mirror, x0)
    }

    /// Validates `N > 1`, `C <= M^{p−1}/p^p` and that the mirror is
    /// 1-uniformly convex of order `p`.
    pub fn with_params(
        p: u32,
        epsilon: f64,
        n: f64,
        c: f64,
        mirror: Arc<dyn MirrorMap>,
        x0: Point,
    ) -> Result<Self, Error> {
        StepConfig::new(p, epsilon, n)?;
        if !(n > 1.0) {
            return Err(Error::Precondition(format!(
                "accelerated method needs N > 1, got {n}"
            )));
        }
        let cmax = Self::max_c(p, n);
        if !(c > 0.0 && c <= cmax * (1.0 + 1e-12)) {
            return Err(Error::Precondition(format!("C = {c} outside (0, {cmax}]")));
        }
        match mirror.uniform_convexity() {
            Some(uc) if uc.order == f64::from(p) && uc.sigma >= 1.0 - 1e-12 => {}
            _ => {
                return Err(Error::Precondition(format!(
                    "mirror {} is not 1-uniformly convex of order {p}",
                    mirror.name()
                )))
            }
        }
        Ok(Self {
            p,
            epsilon,
            n,
            c,
            mirror,
            x0,
        })
    }

    /// `M^{p−1} / p^p`.
    pub fn max_c(p: u32, n: f64) -> f64 {
        lemma1_constant(p, n).powi(p as i32 - 1) / f64::from(p).powi(p as i32)
    }

    pub fn step(&self) -> StepConfig {
        StepConfig {
            p: self.p,
            epsilon: self.epsilon,
            n: self.n,
        }
    }
}

/// `ψ_k(x)` evaluated by direct summation over the recorded `y_i`.
pub fn estimate_sequence_value(
    record: &RunRecord,
    cfg: &AccelConfig,
    x: &[f64],
    k: usize,
) -> Result<f64, Error> {
    let rows = rows_upto(record, k)?;
    let shift = record.f_star.unwrap_or(0.0);
    let pm1 = cfg.p - 1;
    let mut acc = 0.0;
    for i in 0..=rows {
        let w = rising_factorial(record.k[i] as u64, pm1);
        if w == 0.0 {
            continue;
        }
        let y = &record.y[i];
        let lin: f64 = record.grad_y[i]
            .iter()
            .zip(x)
            .zip(y.iter())
            .map(|((g, xi), yi)| g * (xi - yi))
            .sum();
        acc += w * (record.f_y[i] - shift + lin);
    }
    Ok(cfg.c * f64::from(cfg.p) * acc
        + bregman_divergence(cfg.mirror.as_ref(), x, &cfg.x0)? / cfg.epsilon)
}

/// `∇ψ_k(x) = Cp Σ i^{(p−1)} ∇f(y_i) + (∇h(x) − ∇h(x0))/ε`.
pub fn estimate_sequence_gradient(
    record: &RunRecord,
    cfg: &AccelConfig,
    x: &[f64],
    k: usize,
) -> Result<Vec<f64>, Error> {
    let rows = rows_upto(record, k)?;
    let d = x.len();
    let mut s = alloc::vec![0.0; d];
    for i in 0..=rows {
        let w = rising_factorial(record.k[i] as u64, cfg.p - 1);
        for (sj, gj) in s.iter_mut().zip(&record.grad_y[i]) {
            *sj += w * gj;
        }
    }
    let cp = cfg.c * f64::from(cfg.p);
    let hx = cfg.mirror.gradient(x);
    let h0 = cfg.mirror.gradient(&cfg.x0);
    Ok((0..d)
        .map(|j| cp * s[j] + (hx[j] - h0[j]) / cfg.epsilon)
        .collect())
}

fn rows_upto(record: &RunRecord, k: usize) -> Result<usize, Error> {
    if record.y.len() != record.len() {
        return Err(Error::InvalidInput("record has no y sequence".into()));
    }
    record
        .k
        .iter()
        .position(|&ki| ki == k)
        .ok_or_else(|| Error::InvalidInput(format!("iteration {k} not in record")))
}

/// Runs `K` iterations of
/// `x_{k+1} = p/(k+p) z_k + k/(k+p) y_k`, `y_k = G_{p,ε,N}(x_k)`,
/// `∇h(z_k) = ∇h(z_{k−1}) − εCp k^{(p−1)} ∇f(y_k)`, from `z_0 = x_0`.
pub fn accelerated(f: &dyn ObjectiveOracle, cfg: &AccelConfig, iterations: usize) -> RunRecord {
    let p = cfg.p;
    let pf = f64::from(p);
    let h = cfg.mirror.as_ref();
    let snapshot = ConfigSnapshot {
        method: "accelerated".into(),
        problem: f.name().to_string(),
        mirror: h.name().to_string(),
        p,
        epsilon: cfg.epsilon,
        n: cfg.n,
        c: cfg.c,
        iterations,
        extra: Vec::new(),
    };
    let mut rec = RunRecord::new(snapshot, f.min_value());
    let x_star = f.minimizer();
    let d0 = x_star
        .as_ref()
        .and_then(|xs| bregman_divergence(h, xs, &cfg.x0).ok())
        .unwrap_or(f64::NAN);
    let step = cfg.step();
    let mut dual = h.gradient(&cfg.x0);
    let mut x = cfg.x0.clone();
    let mut z = cfg.x0.clone();
    let mut y_prev: Option<Point> = None;

    for k in 0..=iterations {
        if k >= 1 {
            let km = (k - 1) as f64;
            let a = pf / (km + pf);
            let yp = y_prev.as_ref().expect("y recorded at previous iteration");
            x = Point::from_vec_unchecked(
                z.iter()
                    .zip(yp.iter())
                    .map(|(zi, yi)| a * zi + (1.0 - a) * yi)
                    .collect(),
            );
        }
        let (y, cert) = match g_step(f, &x, &step) {
            Ok(v) => v,
            Err(_) => {
                rec.termination = Termination::SolverError(k);
                break;
            }
        };
        let gy = f.gradient(&y);
        let w = rising_factorial(k as u64, p - 1);
        if k >= 1 {
            let coef = cfg.epsilon * cfg.c * pf * w;
            for (dj, gj) in dual.iter_mut().zip(&gy) {
                *dj -= coef * gj;
            }
            z = Point::from_vec_unchecked(h.dual_gradient(&dual));
        }
        let gap_y = gap(f, &y);
        rec.push_row(k, x.clone(), gap(f, &x));
        *RunRecord::last_mut(&mut rec.f_gap_y) = gap_y;
        *RunRecord::last_mut(&mut rec.f_y) = f.value(&y);
        *RunRecord::last_mut(&mut rec.certificates) = Some(cert);
        let kp = rising_factorial(k as u64, p);
        *RunRecord::last_mut(&mut rec.ckp_fy) =
            cfg.c * kp * (f.value(&y) - rec.f_star.unwrap_or(0.0));
        if k >= 1 {
            *RunRecord::last_mut(&mut rec.bound) = d0 / (cfg.c * cfg.epsilon * kp);
        }
        rec.y.push(y.clone());
        rec.z.push(z.clone());
        rec.grad_y.push(gy);

        let diverged = [&x, &y, &z]
            .iter()
            .any(|v| !(norm(v) <= crate::DIVERGENCE_THRESHOLD));
        if diverged {
            rec.termination = Termination::Diverged(k);
            break;
        }
        y_prev = Some(y);
    }

    // Estimate-sequence certificates by direct summation.
    let n = rec.len();
    for r in 0..n {
        let k = rec.k[r];
        let zk = rec.z[r].clone();
        if let Ok(v) = estimate_sequence_value(&rec, cfg, &zk, k) {
            rec.psi[r] = v;
        }
        if let Ok(g) = estimate_sequence_gradient(&rec, cfg, &zk, k) {
            rec.psi_grad_norm[r] = norm(&g);
        }
    }
    rec.radius = x_star
        .map(|xs| crate::point::dist(&xs, &cfg.x0))
        .unwrap_or(f64::NAN);
    rec
}
