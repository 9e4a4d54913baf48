use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::mirror::MirrorMap;
use crate::objective::ObjectiveOracle;
use crate::point::{all_finite, dot, norm, Point};

use super::{gap, ConfigSnapshot, RunRecord, Termination};

fn snapshot(
    method: &str,
    f: &dyn ObjectiveOracle,
    h: &dyn MirrorMap,
    p: u32,
    epsilon: f64,
    c: f64,
    iterations: usize,
) -> ConfigSnapshot {
    ConfigSnapshot {
        method: method.into(),
        problem: f.name().to_string(),
        mirror: h.name().to_string(),
        p,
        epsilon,
        n: f64::NAN,
        c,
        iterations,
        extra: Vec::new(),
    }
}

fn blown(v: &[f64]) -> bool {
    !all_finite(v) || !(norm(v) <= crate::DIVERGENCE_THRESHOLD)
}

/// Direct discretization of the Lagrangian flow: from `k_0 = p + 1` and
/// `z = x = x_0`,
/// `∇h(z_k) = ∇h(z_{k−1}) − εCp k^{p−1} ∇f(x_k)`,
/// `x_{k+1} = (p/k) z_k + ((k−p)/k) x_k`.
///
/// Runs `K` steps or until the state norm exceeds the divergence threshold.
pub fn naive_discretization(
    f: &dyn ObjectiveOracle,
    h: &dyn MirrorMap,
    p: u32,
    c: f64,
    epsilon: f64,
    x0: Point,
    iterations: usize,
) -> RunRecord {
    let mut rec = RunRecord::new(
        snapshot("naive", f, h, p, epsilon, c, iterations),
        f.min_value(),
    );
    let pf = f64::from(p);
    let k0 = p as usize + 1;
    let mut dual = h.gradient(&x0);
    let mut x = x0.into_vec();
    for k in k0..=k0 + iterations {
        let kf = k as f64;
        let g = f.gradient(&x);
        let coef = epsilon * c * pf * kf.powf(pf - 1.0);
        for (dj, gj) in dual.iter_mut().zip(&g) {
            *dj -= coef * gj;
        }
        let z = h.dual_gradient(&dual);
        rec.push_row(k, Point::from_vec_unchecked(x.clone()), gap(f, &x));
        rec.z.push(Point::from_vec_unchecked(z.clone()));
        if blown(&x) || blown(&z) {
            rec.termination = Termination::Diverged(k);
            return rec;
        }
        let a = pf / kf;
        x = z
            .iter()
            .zip(&x)
            .map(|(zi, xi)| a * zi + (1.0 - a) * xi)
            .collect();
    }
    rec
}

/// Discretization of the exponential-scaling flow:
/// `∇h(z_k) = ∇h(z_{k−1}) − δc e^{cδk} ∇f(x_k)`,
/// `x_{k+1} = cδ z_k + (1 − cδ) x_k`.
///
/// Records `⟨∇f(x_k), x_k − x_{k+1}⟩ / ||∇f(x_k)||` on row `k` as
/// `progress_ratio`. Diagnostic only: no rate is claimed.
pub fn exponential_discretization(
    f: &dyn ObjectiveOracle,
    h: &dyn MirrorMap,
    c: f64,
    delta: f64,
    x0: Point,
    iterations: usize,
) -> Result<RunRecord, crate::Error> {
    let cd = c * delta;
    if !(c > 0.0 && delta > 0.0 && cd <= 1.0) {
        return Err(crate::Error::Precondition(format!(
            "need c, delta > 0 and c*delta <= 1, got {cd}"
        )));
    }
    let mut snap = snapshot("exponential", f, h, 0, f64::NAN, c, iterations);
    snap.extra.push(("delta".into(), delta));
    let mut rec = RunRecord::new(snap, f.min_value());
    let mut dual = h.gradient(&x0);
    let mut x = x0.into_vec();
    for k in 0..=iterations {
        let g = f.gradient(&x);
        let coef = delta * c * (cd * k as f64).exp();
        for (dj, gj) in dual.iter_mut().zip(&g) {
            *dj -= coef * gj;
        }
        let z = h.dual_gradient(&dual);
        rec.push_row(k, Point::from_vec_unchecked(x.clone()), gap(f, &x));
        rec.z.push(Point::from_vec_unchecked(z.clone()));
        if blown(&x) || blown(&z) {
            rec.termination = Termination::Diverged(k);
            return Ok(rec);
        }
        let next: Vec<f64> = z
            .iter()
            .zip(&x)
            .map(|(zi, xi)| cd * zi + (1.0 - cd) * xi)
            .collect();
        let gn = norm(&g);
        if gn > 0.0 {
            let mv: Vec<f64> = x.iter().zip(&next).map(|(a, b)| a - b).collect();
            *RunRecord::last_mut(&mut rec.progress_ratio) = dot(&g, &mv) / gn;
        }
        x = next;
    }
    Ok(rec)
}
