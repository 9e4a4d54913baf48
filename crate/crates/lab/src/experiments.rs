//! Single experiments driven by an [`ExperimentConfig`].

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use bregman_core::accel::{
    accelerated, exponential_discretization, higher_order_descent, naive_discretization,
    restart_accelerated, AccelConfig, RunRecord, Termination,
};
use bregman_core::flows::{
    build_el_system, build_euclidean_r_system, build_hamiltonian_system, build_massless_system,
    build_natural_gradient_flow, build_rescaled_gradient_flow, dilate_trajectory, fit_rate,
    integrate, FlowSystem, Trajectory,
};
use bregman_core::mirror::mirror_by_name;
use bregman_core::taylorstep::{smoothness_epsilon, StepConfig};
use bregman_core::{MirrorMap, ObjectiveOracle, Point, ScalingTriple, TimeMap};

use crate::acceptance::{acceptance_suite, SuiteOptions};
use crate::config::{Algorithm, ExperimentConfig, ExperimentKind, FamilyChoice, FlowChoice, Scale};
use crate::error::{config, internal, LabError};
use crate::io;
use crate::report::{invariant, CheckResult, ReportSummary, RunSummary};

/// Output directory: the configured one, else `runs/<kind>`.
pub fn out_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| {
        let kind = serde_json::to_value(cfg.kind)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        PathBuf::from("runs").join(kind)
    })
}

/// Runs one experiment, writes its traces and `summary.json`, and returns the summary.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ReportSummary, LabError> {
    cfg.validate()?;
    let dir = out_dir(cfg);
    let start = Instant::now();
    let mut summary = match cfg.kind {
        ExperimentKind::Acceptance => {
            let opts = SuiteOptions {
                scale: cfg.scale,
                seed: cfg.seed,
                out: Some(dir.clone()),
                negative_control: cfg.negative_control,
            };
            acceptance_suite(&opts, &mut |c| println!("{}", c.line()))
        }
        _ => {
            let mut s =
                ReportSummary::new(&kind_name(cfg.kind), cfg.seed, serde_json::to_value(cfg)?);
            let f = cfg.problem.build(cfg.seed)?;
            let x0 = cfg.start(f.dim())?;
            let ctx = Run {
                cfg,
                f: f.as_ref(),
                x0,
                dir: &dir,
            };
            match cfg.kind {
                ExperimentKind::Flow => ctx.flow(&mut s)?,
                ExperimentKind::Optimize => ctx.optimize(&mut s)?,
                ExperimentKind::Compare => ctx.compare(&mut s)?,
                ExperimentKind::DilationCheck => ctx.dilation(&mut s)?,
                ExperimentKind::Restart => ctx.restart(&mut s)?,
                ExperimentKind::NaiveDemo => ctx.naive_demo(&mut s)?,
                ExperimentKind::Acceptance => unreachable!(),
            }
            for c in &s.checks {
                println!("{}", c.line());
            }
            s
        }
    };
    if cfg.kind != ExperimentKind::Acceptance {
        let elapsed = start.elapsed().as_secs_f64();
        for c in &mut summary.checks {
            c.runtime_s = elapsed;
        }
    }
    summary.write(&dir)?;
    Ok(summary)
}

/// Floor below which gaps are excluded from rate fits.
pub const GAP_FLOOR: f64 = 1e-10;

/// Log-log slope of the gap over `window`, cut at the first sample below
/// [`GAP_FLOOR`]. Returns the slope and the upper end actually used.
pub fn fitted_slope(tr: &Trajectory, window: (f64, f64)) -> Result<(f64, f64), LabError> {
    let hi = tr
        .times
        .iter()
        .zip(&tr.f_gap)
        .find(|(t, g)| **t >= window.0 && **g < GAP_FLOOR)
        .map_or(window.1, |(t, _)| t.min(window.1));
    let slope = fit_rate(&tr.times, &tr.f_gap, (window.0, hi)).map_err(internal)?;
    Ok((slope, hi))
}

fn kind_name(kind: ExperimentKind) -> String {
    serde_json::to_value(kind)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default()
}

struct Run<'a> {
    cfg: &'a ExperimentConfig,
    f: &'a dyn ObjectiveOracle,
    x0: Point,
    dir: &'a PathBuf,
}

impl Run<'_> {
    fn mirror(&self) -> Result<Box<dyn MirrorMap>, LabError> {
        self.cfg.method.mirror(&self.x0)
    }

    fn epsilon(&self, p: u32) -> f64 {
        self.cfg
            .method
            .epsilon
            .unwrap_or_else(|| smoothness_epsilon(self.f, p).map_or(1.0, |e| e.min(1.0)))
    }

    fn iterations(&self) -> usize {
        match self.cfg.scale {
            Scale::Quick => self.cfg.method.iterations,
            Scale::Full => self.cfg.method.iterations * 4,
        }
    }

    fn integrate(&self, sys: &FlowSystem<'_>, t0: f64, t1: f64) -> Result<Trajectory, LabError> {
        integrate(sys, &self.x0, t0, t1, &self.cfg.integration.controls()).map_err(internal)
    }

    fn build_flow<'s>(
        &self,
        h: &'s dyn MirrorMap,
        f: &'s dyn ObjectiveOracle,
        s: ScalingTriple,
    ) -> Result<FlowSystem<'s>, LabError> {
        let m = &self.cfg.method;
        let sys = match m.flow {
            FlowChoice::Lagrangian => build_el_system(h, f, s),
            FlowChoice::Hamiltonian => build_hamiltonian_system(h, f, s),
            FlowChoice::Rescaled => build_rescaled_gradient_flow(f, f64::from(m.p)),
            FlowChoice::Natural => build_natural_gradient_flow(h, f),
            FlowChoice::Massless => build_massless_system(h, f, m.m),
            FlowChoice::EuclideanR => build_euclidean_r_system(f, m.r, m.force()),
        };
        sys.map_err(config)
    }

    fn default_t0(&self, sys: &FlowSystem<'_>) -> f64 {
        let singular = matches!(
            self.cfg.method.flow,
            FlowChoice::Lagrangian | FlowChoice::Hamiltonian | FlowChoice::EuclideanR
        ) && !(self.cfg.method.family == FamilyChoice::Exponential
            && self.cfg.method.flow != FlowChoice::EuclideanR);
        let t0 = if singular { 0.1 } else { 0.0 };
        self.cfg.integration.t0.unwrap_or(t0).max(sys.valid_from())
    }

    fn emit_run(&self, stem: &str, rec: &RunRecord) -> Result<(), LabError> {
        io::emit_run(&self.dir.join("traces"), stem, rec)
    }

    fn flow(&self, s: &mut ReportSummary) -> Result<(), LabError> {
        let h = self.mirror()?;
        let triple = self.cfg.method.triple()?;
        let sys = self.build_flow(h.as_ref(), self.f, triple.clone())?;
        let t0 = self.default_t0(&sys);
        let t1 = self.cfg.integration.t_end;
        let tr = self.integrate(&sys, t0, t1)?;
        io::emit_trajectory(&self.dir.join("traces"), "flow", &tr)?;
        let finite = tr.f_gap.iter().all(|g| g.is_finite());
        s.push(
            CheckResult::new("finite trajectory", finite, tr.len() as f64, f64::NAN).with_detail(
                format!(
                    "{} samples, {} field evaluations, final gap {:.3e}",
                    tr.len(),
                    tr.stats.field_evals,
                    tr.f_gap.last().copied().unwrap_or(f64::NAN)
                ),
            ),
        );
        if matches!(
            self.cfg.method.flow,
            FlowChoice::Lagrangian | FlowChoice::Hamiltonian
        ) {
            let rise = (1..tr.len())
                .map(|i| (tr.energy[i] - tr.energy[i - 1]) / tr.energy[i - 1].abs().max(1e-300))
                .fold(0.0, f64::max);
            s.push(CheckResult::new(
                "energy nonincreasing",
                rise <= 1e-6,
                rise,
                1e-6,
            ));
            let e0 = tr.energy[0];
            let worst = (0..tr.len())
                .map(|i| tr.f_gap[i] / (e0 * (-triple.beta(tr.times[i])).exp()))
                .fold(f64::NEG_INFINITY, f64::max);
            s.push(CheckResult::new(
                "gap <= E0 exp(-beta_t)",
                worst <= 1.0 + 1e-6,
                worst,
                1.0 + 1e-6,
            ));
        }
        // Default window skips the first decade of t.
        let window = self.cfg.method.window.unwrap_or((10.0 * t0.max(0.1), t1));
        let polynomial_rate = matches!(
            self.cfg.method.flow,
            FlowChoice::Lagrangian | FlowChoice::Hamiltonian
        ) && self.cfg.method.family == FamilyChoice::Polynomial;
        match fitted_slope(&tr, window) {
            Ok((slope, hi)) if polynomial_rate => {
                let bound = -f64::from(self.cfg.method.p) + 0.3;
                s.push(
                    CheckResult::new("fitted log-log slope", slope <= bound, slope, bound)
                        .with_detail(format!("window [{}, {hi:.3}]", window.0)),
                );
            }
            Ok((slope, hi)) => s.push(CheckResult::info(
                "fitted log-log slope",
                slope,
                format!("window [{}, {hi:.3}]", window.0),
            )),
            Err(e) => s.push(CheckResult::info(
                "fitted log-log slope",
                f64::NAN,
                e.to_string(),
            )),
        }
        Ok(())
    }

    fn optimize(&self, s: &mut ReportSummary) -> Result<(), LabError> {
        let m = &self.cfg.method;
        let k = self.iterations();
        let rec = self.discrete(m.algorithm, m.p, k)?;
        self.emit_run(&format!("{}_p{}", rec.config.method, m.p), &rec)?;
        self.record_checks(s, &rec);
        Ok(())
    }

    fn discrete(&self, alg: Algorithm, p: u32, k: usize) -> Result<RunRecord, LabError> {
        let m = &self.cfg.method;
        let eps = self.epsilon(p);
        Ok(match alg {
            Algorithm::Accelerated => {
                let n = m.n.unwrap_or(2.0);
                let c = m.c.unwrap_or_else(|| AccelConfig::max_c(p, n));
                // The default mirror is the order-p regularizer anchored at x0.
                let h: Arc<dyn MirrorMap> = if m.mirror == "euclidean" {
                    AccelConfig::new(p, eps, self.x0.clone())
                        .map_err(config)?
                        .mirror
                } else {
                    Arc::from(mirror_by_name(&m.mirror, &self.x0).map_err(config)?)
                };
                let cfg =
                    AccelConfig::with_params(p, eps, n, c, h, self.x0.clone()).map_err(config)?;
                accelerated(self.f, &cfg, k)
            }
            Algorithm::Descent => {
                let cfg = StepConfig::new(p, eps, m.n.unwrap_or(1.0)).map_err(config)?;
                higher_order_descent(self.f, cfg, self.x0.clone(), k)
            }
            Algorithm::Naive => {
                let c = m.c.unwrap_or_else(|| AccelConfig::max_c(p, 2.0));
                naive_discretization(
                    self.f,
                    self.mirror()?.as_ref(),
                    p,
                    c,
                    eps,
                    self.x0.clone(),
                    k,
                )
            }
            Algorithm::Exponential => {
                let delta = m.delta.unwrap_or(0.1);
                exponential_discretization(
                    self.f,
                    self.mirror()?.as_ref(),
                    m.rate,
                    delta,
                    self.x0.clone(),
                    k,
                )
                .map_err(config)?
            }
        })
    }

    fn record_checks(&self, s: &mut ReportSummary, rec: &RunRecord) {
        let label = format!("{} p={}", rec.config.method, rec.config.p);
        let mut inv = Vec::new();
        let has_bound = rec.bound.iter().skip(1).any(|b| b.is_finite());
        if has_bound {
            let gaps = if rec.f_gap_y.iter().skip(1).any(|g| g.is_finite()) {
                &rec.f_gap_y
            } else {
                &rec.f_gap_x
            };
            let ok: Vec<bool> = (1..rec.len())
                .map(|i| rec.bound[i].is_nan() || gaps[i] <= rec.bound[i] + 1e-9)
                .collect();
            let ratio = (1..rec.len())
                .map(|i| gaps[i] / rec.bound[i])
                .filter(|r| r.is_finite())
                .fold(0.0, f64::max);
            let r = invariant("bound", ok);
            s.push(
                CheckResult::new(format!("{label}: gap <= bound"), r.pass, ratio, 1.0)
                    .with_detail(format!("{} violations", r.violations)),
            );
            inv.push(r);
        }
        if rec.psi.iter().any(|v| v.is_finite()) {
            let r = invariant(
                "psi_lower_bound",
                (0..rec.len()).map(|i| rec.psi[i] >= rec.ckp_fy[i] - 1e-9),
            );
            s.push(CheckResult::new(
                format!("{label}: psi_k(z_k) >= C eps k^(p) f(y_k)"),
                r.pass,
                r.violations as f64,
                0.0,
            ));
            inv.push(r);
        }
        let certs: Vec<bool> = rec
            .certificates
            .iter()
            .flatten()
            .map(|c| c.progress_ok && c.move_ok)
            .collect();
        if !certs.is_empty() {
            let r = invariant("step_certificate", certs);
            s.push(CheckResult::new(
                format!("{label}: step certificates"),
                r.pass,
                r.violations as f64,
                0.0,
            ));
            inv.push(r);
        }
        s.push(
            CheckResult::new(
                format!("{label}: termination"),
                !matches!(rec.termination, Termination::SolverError(_)),
                f64::NAN,
                f64::NAN,
            )
            .with_detail(format!(
                "{:?}, final gap {:.3e}",
                rec.termination,
                last_gap(rec)
            )),
        );
        s.runs.push(RunSummary::from_record(rec, inv));
    }

    fn compare(&self, s: &mut ReportSummary) -> Result<(), LabError> {
        let p = self.cfg.method.p;
        let k = self.iterations();
        let acc = self.discrete(Algorithm::Accelerated, p, k)?;
        let plain = self.discrete(Algorithm::Descent, p, k)?;
        self.emit_run("accelerated", &acc)?;
        self.emit_run("descent", &plain)?;
        self.record_checks(s, &acc);
        self.record_checks(s, &plain);
        let (ga, gp) = (last_gap(&acc), last_gap(&plain));
        s.push(CheckResult::info(
            "final gap ratio accelerated/plain",
            ga / gp,
            format!("accelerated {ga:.3e}, plain {gp:.3e} after {k} steps"),
        ));
        // Matching flow with the same C, sampled at t = k δ with δ = ε^{1/p}.
        let h = self.mirror()?;
        let delta = acc.config.epsilon.powf(1.0 / f64::from(p));
        let t_end = self.cfg.integration.t_end.min(delta * k as f64);
        let triple = ScalingTriple::polynomial(f64::from(p), acc.config.c).map_err(config)?;
        let tr = self.integrate(
            &build_el_system(h.as_ref(), self.f, triple).map_err(config)?,
            0.1,
            t_end,
        )?;
        io::emit_trajectory(&self.dir.join("traces"), "flow", &tr)?;
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for i in 0..acc.len() {
            let t = delta * acc.k[i] as f64;
            if t < 1.0 || t > t_end {
                continue;
            }
            if let Some(g) = tr.interp_scalar(&tr.f_gap, t) {
                lo = lo.min(acc.f_gap_y[i] / g);
                hi = hi.max(acc.f_gap_y[i] / g);
            }
        }
        let factor = hi.max(1.0 / lo);
        s.push(CheckResult::info(
            "discrete/flow gap factor",
            factor,
            format!("ratio in [{lo:.3e}, {hi:.3e}] on t in [1, {t_end:.2}], delta = {delta:.3}"),
        ));
        Ok(())
    }

    fn dilation(&self, s: &mut ReportSummary) -> Result<(), LabError> {
        let p = f64::from(self.cfg.method.p);
        let c = self.cfg.method.c.unwrap_or(1.0);
        let h = self.mirror()?;
        let tau = TimeMap::power(p / 2.0).map_err(config)?;
        let t0 = self.cfg.integration.t0.unwrap_or(0.1);
        let t1 = self.cfg.integration.t_end;
        let s2 = ScalingTriple::polynomial(2.0, c)
            .map_err(config)?
            .with_t_min(tau.tau(t0));
        let base = self.integrate(
            &build_el_system(h.as_ref(), self.f, s2).map_err(config)?,
            tau.tau(t0),
            tau.tau(t1),
        )?;
        let sp = ScalingTriple::polynomial(p, c).map_err(config)?;
        let direct = self.integrate(
            &build_el_system(h.as_ref(), self.f, sp).map_err(config)?,
            t0,
            t1,
        )?;
        let lo = (5.0 * t0).min(t1);
        let grid: Vec<f64> = direct.times.iter().copied().filter(|&t| t >= lo).collect();
        let dil = dilate_trajectory(&base, &tau, &grid).map_err(internal)?;
        io::emit_trajectory(&self.dir.join("traces"), "direct", &direct)?;
        io::emit_trajectory(&self.dir.join("traces"), "dilated", &dil)?;
        let mut sup: f64 = 0.0;
        for (i, t) in grid.iter().enumerate() {
            let d = direct
                .sample(*t)
                .ok_or_else(|| internal("sample outside trajectory"))?;
            for (a, b) in dil.x(i).iter().zip(&d) {
                sup = sup.max((a - b).abs());
            }
        }
        s.push(
            CheckResult::new(
                "dilated p=2 flow matches direct flow",
                sup <= 1e-3,
                sup,
                1e-3,
            )
            .with_detail(format!("tau(t) = t^{}, t in [{lo}, {t1}]", p / 2.0)),
        );
        Ok(())
    }

    fn restart(&self, s: &mut ReportSummary) -> Result<(), LabError> {
        let eps = self.epsilon(self.cfg.method.p);
        let rec = restart_accelerated(self.f, eps, self.x0.clone(), self.cfg.method.epochs)
            .map_err(config)?;
        self.emit_run("restart", &rec)?;
        let sum = rec
            .restart
            .as_ref()
            .ok_or_else(|| internal("missing restart summary"))?;
        let worst = sum.epochs.iter().map(|e| e.ratio).fold(0.0, f64::max);
        let contraction = invariant(
            "epoch_contraction",
            sum.epochs.iter().map(|e| e.contraction_ok),
        );
        s.push(
            CheckResult::new(
                "epoch contraction",
                contraction.pass,
                worst,
                (-1.0f64).exp(),
            )
            .with_detail(format!("kappa {:.3e}, m {}", sum.kappa, sum.m)),
        );
        s.push(CheckResult::new(
            "final bound",
            sum.bound_ok,
            sum.final_gap,
            sum.final_bound,
        ));
        s.runs.push(RunSummary::from_record(
            &rec,
            vec![contraction, invariant("final_bound", [sum.bound_ok])],
        ));
        Ok(())
    }

    fn naive_demo(&self, s: &mut ReportSummary) -> Result<(), LabError> {
        let p = self.cfg.method.p;
        let k = self.iterations();
        let naive = self.discrete(Algorithm::Naive, p, k)?;
        let acc = self.discrete(Algorithm::Accelerated, p, k)?;
        self.emit_run("naive", &naive)?;
        self.emit_run("accelerated", &acc)?;
        s.push(CheckResult::info(
            "naive scheme final gap",
            last_gap(&naive),
            format!("{:?} with C = {:.4e}", naive.termination, naive.config.c),
        ));
        s.runs.push(RunSummary::from_record(&naive, Vec::new()));
        self.record_checks(s, &acc);
        Ok(())
    }
}

fn last_gap(rec: &RunRecord) -> f64 {
    let y = rec.f_gap_y.last().copied().unwrap_or(f64::NAN);
    if y.is_finite() {
        y
    } else {
        rec.f_gap_x.last().copied().unwrap_or(f64::NAN)
    }
}
