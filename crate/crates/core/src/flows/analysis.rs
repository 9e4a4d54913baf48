use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Error;
use crate::mirror::{bregman_divergence, MirrorMap};
use crate::objective::ObjectiveOracle;
use crate::scaling::{ScalingTriple, TimeMap};

use super::Trajectory;

/// `E_t = D_h(x*, ∇h*(W)) + e^{β_t}(f(X) − f(x*))`.
#[allow(clippy::too_many_arguments)]
pub fn energy_at(
    h: &dyn MirrorMap,
    f: &dyn ObjectiveOracle,
    s: &ScalingTriple,
    t: f64,
    x: &[f64],
    w: &[f64],
    x_star: &[f64],
) -> Result<f64, Error> {
    crate::error::check_dims(x.len(), w.len())?;
    let z = h.dual_gradient(w);
    let gap = f.value(x) - f.value(x_star);
    Ok(bregman_divergence(h, x_star, &z)? + s.beta(t).exp() * gap)
}

/// The two monitors of the rescaled gradient flow: `(f − f*)^{−1/(p−1)}`
/// (infinite at a nonpositive gap) and `t^p (f − f*)`.
pub fn rescaled_flow_energy(
    f: &dyn ObjectiveOracle,
    p: f64,
    t: f64,
    x: &[f64],
    x_star: &[f64],
) -> (f64, f64) {
    let gap = f.value(x) - f.value(x_star);
    gap_monitors(gap, p, t)
}

pub(crate) fn gap_monitors(gap: f64, p: f64, t: f64) -> (f64, f64) {
    let primary = if gap > 0.0 {
        gap.powf(-1.0 / (p - 1.0))
    } else {
        f64::INFINITY
    };
    (primary, t.powf(p) * gap)
}

/// Closed-form force-free motion `X_t = a e^{−γ_t} + b` for data
/// `X(t0) = x0`, `∇h*(W) = z0`.
pub fn natural_motion(s: &ScalingTriple, t0: f64, x0: &[f64], z0: &[f64], t: f64) -> Vec<f64> {
    let decay = (s.gamma(t0) - s.gamma(t)).exp();
    x0.iter()
        .zip(z0)
        .map(|(x, z)| (x - z) * decay + z)
        .collect()
}

/// Samples `Y_t = X_{τ(t)}` on `grid`.
///
/// States are interpolated by cubic Hermite polynomials from the stored
/// field values; gaps and energies are interpolated linearly. Derivatives
/// are scaled by `τ̇`.
pub fn dilate_trajectory(
    traj: &Trajectory,
    tau: &TimeMap,
    grid: &[f64],
) -> Result<Trajectory, Error> {
    let mut out = Trajectory {
        layout: traj.layout,
        dim: traj.dim,
        times: Vec::with_capacity(grid.len()),
        states: Vec::with_capacity(grid.len()),
        derivs: Vec::with_capacity(grid.len()),
        f_gap: Vec::with_capacity(grid.len()),
        energy: Vec::with_capacity(grid.len()),
        stats: traj.stats,
    };
    let (lo, hi) = match (traj.times.first(), traj.times.last()) {
        (Some(a), Some(b)) => (*a, *b),
        _ => return Err(Error::InvalidInput("empty trajectory".into())),
    };
    let mut prev = f64::NEG_INFINITY;
    for &t in grid {
        if t <= prev {
            return Err(Error::InvalidInput(
                "dilation grid must be increasing".into(),
            ));
        }
        prev = t;
        let s = tau.tau(t);
        // Absorb rounding at the end points.
        let s = if (s - lo).abs() <= 1e-12 * lo.abs().max(1.0) {
            lo
        } else if (s - hi).abs() <= 1e-12 * hi.abs().max(1.0) {
            hi
        } else {
            s
        };
        let state = traj.sample(s).ok_or_else(|| {
            Error::InvalidInput(alloc::format!("τ({t}) = {s} outside [{lo}, {hi}]"))
        })?;
        let j = traj.times.partition_point(|v| *v < s).min(traj.len() - 1);
        let td = tau.tau_dot(t);
        out.derivs
            .push(traj.derivs[j].iter().map(|v| td * v).collect());
        out.states.push(state);
        out.times.push(t);
        out.f_gap
            .push(traj.interp_scalar(&traj.f_gap, s).unwrap_or(f64::NAN));
        out.energy
            .push(traj.interp_scalar(&traj.energy, s).unwrap_or(f64::NAN));
    }
    Ok(out)
}

/// Least-squares slope of `log gap` against `log t` over samples with
/// `t ∈ [t_lo, t_hi]` and `gap > 0`.
pub fn fit_rate(times: &[f64], gaps: &[f64], window: (f64, f64)) -> Result<f64, Error> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(gaps)
        .filter(|(t, g)| {
            **t >= window.0 && **t <= window.1 && **g > 0.0 && g.is_finite() && **t > 0.0
        })
        .map(|(t, g)| (t.ln(), g.ln()))
        .collect();
    if pts.len() < 10 {
        return Err(Error::InvalidInput(alloc::format!(
            "rate fit needs >= 10 positive samples in window, found {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("rate fit needs distinct times".into()));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mirror::Euclidean;
    use crate::problems::DiagonalQuadratic;
    use alloc::vec;

    #[test]
    fn monitors() {
        assert_eq!(gap_monitors(0.25, 2.0, 1.0).0, 4.0);
        assert!((gap_monitors(0.5, 3.0, 2.0).1 - 4.0).abs() < 1e-15);
        assert_eq!(gap_monitors(0.0, 3.0, 2.0).0, f64::INFINITY);
    }

    #[test]
    fn exact_power_law_slope() {
        let t: Vec<f64> = (1..=50).map(|i| i as f64).collect();
        let g: Vec<f64> = t.iter().map(|v| v.powi(-2)).collect();
        assert!((fit_rate(&t, &g, (1.0, 50.0)).unwrap() + 2.0).abs() < 1e-12);
        assert!(fit_rate(&t, &g, (1.0, 5.0)).is_err());
    }

    #[test]
    fn energy_vanishes_at_optimum() {
        let f = DiagonalQuadratic::new(vec![1.0, 2.0]).unwrap();
        let s = ScalingTriple::polynomial(2.0, 1.0).unwrap();
        let e = energy_at(
            &Euclidean,
            &f,
            &s,
            3.0,
            &[0.0, 0.0],
            &[0.0, 0.0],
            &[0.0, 0.0],
        )
        .unwrap();
        assert_eq!(e, 0.0);
        // Euclidean: ½||Z − x*||² + t² gap.
        let e = energy_at(
            &Euclidean,
            &f,
            &s,
            2.0,
            &[1.0, 0.0],
            &[0.0, 2.0],
            &[0.0, 0.0],
        )
        .unwrap();
        assert!((e - (2.0 + 4.0 * 0.5)).abs() < 1e-14);
    }
}
