//! The acceptance suite: one check per criterion, each at stated tolerances.

use std::path::{Path, PathBuf};
use std::time::Instant;

use bregman_core::accel::{
    accelerated, higher_order_descent, naive_discretization, restart_accelerated,
    uniformly_convex_descent_rate_check, AccelConfig, RunRecord, Termination,
};
use bregman_core::flows::{
    build_el_system, build_euclidean_r_system, build_hamiltonian_system, build_massless_system,
    build_natural_gradient_flow, build_rescaled_gradient_flow, dilate_trajectory, fit_rate,
    integrate, integrate_state, natural_motion, rescaled_flow_energy, Controls, FlowSystem,
    ForceScaling, Trajectory,
};
use bregman_core::mirror::{Euclidean, PowerMirror, QuarticEuclidean};
use bregman_core::problems::{DiagonalQuadratic, LeastSquares, LogSumExp, PowerNorm, Zero};
use bregman_core::scaling::{dilate_triple, log_grid, ScalingTriple, TimeMap};
use bregman_core::taylorstep::{g_step, smoothness_epsilon, StepConfig};
use bregman_core::{MirrorMap, ObjectiveOracle, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::Scale;
use crate::error::{internal, LabError};
use crate::experiments::fitted_slope;
use crate::io;
use crate::report::{invariant, CheckResult, ReportSummary, RunSummary, Status};

pub const CRITERIA: u32 = 17;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    pub scale: Scale,
    pub seed: u64,
    /// Directory for CSV traces and `summary.json`.
    pub out: Option<PathBuf>,
    /// Overstates every step size in the discrete-bound runs by 100x.
    pub negative_control: bool,
}

impl SuiteOptions {
    pub fn new(scale: Scale, seed: u64) -> Self {
        Self {
            scale,
            seed,
            out: None,
            negative_control: false,
        }
    }
}

struct Ctx {
    full: bool,
    seed: u64,
    out: Option<PathBuf>,
    negative: bool,
    runs: Vec<RunSummary>,
}

impl Ctx {
    fn pick<T>(&self, quick: T, full: T) -> T {
        if self.full {
            full
        } else {
            quick
        }
    }

    fn traj(&self, stem: &str, t: &Trajectory) -> Result<(), LabError> {
        match &self.out {
            Some(dir) => io::emit_trajectory(&dir.join("traces"), stem, t),
            None => Ok(()),
        }
    }

    fn run(&self, stem: &str, r: &RunRecord) -> Result<(), LabError> {
        match &self.out {
            Some(dir) => io::emit_run(&dir.join("traces"), stem, r),
            None => Ok(()),
        }
    }
}

/// Pass/fail accumulator for one criterion.
struct Tally {
    ok: bool,
    measured: f64,
    bound: f64,
    notes: Vec<String>,
}

impl Tally {
    fn new(bound: f64) -> Self {
        Self {
            ok: true,
            measured: f64::NEG_INFINITY,
            bound,
            notes: Vec::new(),
        }
    }

    fn part(&mut self, ok: bool, note: String) {
        self.ok &= ok;
        if ok {
            self.notes.push(note);
        } else {
            self.notes.push(format!("FAILED {note}"));
        }
    }

    fn measure(&mut self, v: f64) {
        if v.is_nan() {
            self.ok = false;
        }
        self.measured = self.measured.max(v);
    }

    fn finish(self, name: &str) -> CheckResult {
        CheckResult::new(name, self.ok, self.measured, self.bound)
            .with_detail(self.notes.join("; "))
    }
}

fn flow(
    sys: &FlowSystem<'_>,
    x0: &Point,
    t0: f64,
    t1: f64,
    c: &Controls,
) -> Result<Trajectory, LabError> {
    integrate(sys, x0, t0, t1, c).map_err(internal)
}

fn sup_dist(
    a: &Trajectory,
    expected: impl Fn(usize) -> Option<Vec<f64>>,
    window: (f64, f64),
) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..a.len() {
        let t = a.times[i];
        if t < window.0 || t > window.1 {
            continue;
        }
        let Some(e) = expected(i) else {
            return f64::NAN;
        };
        for (u, v) in a.x(i).iter().zip(&e) {
            m = m.max((u - v).abs());
        }
    }
    m
}

fn quadratic() -> DiagonalQuadratic {
    DiagonalQuadratic::new(vec![1.0, 10.0]).expect("valid eigenvalues")
}

fn ones(d: usize) -> Point {
    Point::new(vec![1.0; d]).expect("finite")
}

fn eps_for(f: &dyn ObjectiveOracle, p: u32) -> f64 {
    smoothness_epsilon(f, p).map_or(1.0, |e| e.min(1.0))
}

type Criterion = fn(&mut Ctx) -> Result<Vec<CheckResult>, LabError>;

const SUITE: &[(&[u32], Criterion)] = &[
    (&[1, 2], c01_02_continuous_rate),
    (&[3], c03_dilation),
    (&[4, 5, 6], c04_06_accelerated),
    (&[7], c07_plain),
    (&[8], c08_rescaled),
    (&[9], c09_naive),
    (&[10], c10_hamiltonian),
    (&[11], c11_natural_motion),
    (&[12], c12_massless),
    (&[13], c13_r_systems),
    (&[14], c14_uniform_discrete),
    (&[15], c15_uniform_continuous),
    (&[16], c16_correspondence),
];

const NAMES: [&str; 17] = [
    "continuous-time rate",
    "Lyapunov monotonicity",
    "time dilation",
    "discrete accelerated bound",
    "estimate-sequence invariants",
    "step certificates",
    "plain method",
    "rescaled gradient flow",
    "naive-discretization contrast",
    "Hamiltonian equivalence",
    "natural motion",
    "massless limits",
    "Euclidean r-threshold",
    "uniform convexity, discrete",
    "uniform convexity, continuous",
    "discrete-continuous correspondence",
    "determinism",
];

pub fn criterion_name(n: u32) -> String {
    format!("C{n:02} {}", NAMES[(n - 1) as usize])
}

fn run_criteria(
    ctx: &mut Ctx,
    summary: &mut ReportSummary,
    on_check: &mut dyn FnMut(&CheckResult),
) {
    for (ids, f) in SUITE {
        let start = Instant::now();
        let checks = match f(ctx) {
            Ok(c) => c,
            Err(e) => ids
                .iter()
                .map(|_| {
                    CheckResult::new("", false, f64::NAN, f64::NAN)
                        .with_detail(format!("error: {e}"))
                })
                .collect(),
        };
        let each = start.elapsed().as_secs_f64() / ids.len() as f64;
        for (mut c, &id) in checks.into_iter().zip(ids.iter()) {
            c.name = criterion_name(id);
            c.criterion = Some(id);
            c.runtime_s = each;
            on_check(&c);
            summary.push(c);
        }
    }
}

/// Runs every criterion; `on_check` sees each result as it completes.
pub fn acceptance_suite(
    opts: &SuiteOptions,
    on_check: &mut dyn FnMut(&CheckResult),
) -> ReportSummary {
    let config = serde_json::json!({
        "scale": match opts.scale { Scale::Quick => "quick", Scale::Full => "full" },
        "seed": opts.seed,
        "negative_control": opts.negative_control,
    });
    let mut summary = ReportSummary::new("acceptance", opts.seed, config);
    summary.scale = Some(
        if opts.scale == Scale::Full {
            "full"
        } else {
            "quick"
        }
        .into(),
    );
    let mut ctx = Ctx {
        full: opts.scale == Scale::Full,
        seed: opts.seed,
        out: opts.out.clone(),
        negative: opts.negative_control,
        runs: Vec::new(),
    };
    run_criteria(&mut ctx, &mut summary, on_check);

    let start = Instant::now();
    let mut c17 = match c17_determinism(opts.seed) {
        Ok(c) => c,
        Err(e) => {
            CheckResult::new("", false, f64::NAN, f64::NAN).with_detail(format!("error: {e}"))
        }
    };
    c17.name = criterion_name(17);
    c17.criterion = Some(17);
    c17.runtime_s = start.elapsed().as_secs_f64();
    on_check(&c17);
    summary.push(c17);
    summary.runs = ctx.runs;
    summary
}

// Criteria 1 and 2 share their flow runs.
fn c01_02_continuous_rate(ctx: &mut Ctx) -> Result<Vec<CheckResult>, LabError> {
    let f = quadratic();
    let x0 = ones(2);
    let t_end = ctx.pick(20.0, 50.0);
    let controls = Controls::adaptive(1e-8, 1e-12);
    let mut rate = Tally::new(f64::NAN);
    let mut mono = Tally::new(1e-6);
    let monotone = |tr: &Trajectory| -> f64 {
        (1..tr.len())
            .map(|i| (tr.energy[i] - tr.energy[i - 1]) / tr.energy[i - 1].abs().max(1e-300))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    for p in [2u32, 3, 4] {
        let pf = f64::from(p);
        let mut mirrors: Vec<(String, Box<dyn MirrorMap>)> =
            vec![("euclidean".into(), Box::new(Euclidean))];
        if p > 2 {
            mirrors.push((
                format!("pth_power{p}"),
                Box::new(PowerMirror::new(pf, vec![0.0, 0.0]).map_err(internal)?),
            ));
        }
        for (name, h) in &mirrors {
            let s = ScalingTriple::polynomial(pf, 1.0).map_err(internal)?;
            let sys = build_el_system(h.as_ref(), &f, s.clone()).map_err(internal)?;
            let tr = flow(&sys, &x0, 0.1, t_end, &controls)?;
            ctx.traj(&format!("c01_p{p}_{name}"), &tr)?;
            let (slope, hi) = fitted_slope(&tr, (1.0, t_end))?;
            let e0 = tr.energy[0];
            let worst = (0..tr.len())
                .map(|i| tr.f_gap[i] / (e0 * (-s.beta(tr.times[i])).exp()))
                .fold(f64::NEG_INFINITY, f64::max);
            rate.part(
                slope <= -pf + 0.3,
                format!(
                    "p={p} {name}: slope {slope:.3} on [1, {hi:.1}] (<= {:.1})",
                    -pf + 0.3
                ),
            );
            rate.part(worst <= 1.0 + 1e-6, format!("gap/bound <= {worst:.3e}"));
            rate.measure(slope + pf);
            let rise = monotone(&tr);
            mono.measure(rise);
            mono.part(
                rise <= 1e-6,
                format!("p={p} {name}: max relative rise {rise:.2e}"),
            );
        }
    }
    rate.bound = 0.3;
    let c = 1.0;
    let t_exp = ctx.pick(5.0, 10.0);
    let sys = build_el_system(
        &Euclidean,
        &f,
        ScalingTriple::exponential(c).map_err(internal)?,
    )
    .map_err(internal)?;
    let tr = flow(&sys, &x0, 0.0, t_exp, &controls)?;
    ctx.traj("c02_exponential", &tr)?;
    let rise = monotone(&tr);
    mono.measure(rise);
    mono.part(
        rise <= 1e-6,
        format!("exponential c=1 t in [0, {t_exp}]: max relative rise {rise:.2e}"),
    );
    Ok(vec![rate.finish(""), mono.finish("")])
}

fn c03_dilation(ctx: &mut Ctx) -> Result<Vec<CheckResult>, LabError> {
    let f = quadratic();
    let x0 = ones(2);
    let t_end = ctx.pick(5.0, 10.0);
    let controls = Controls::adaptive(1e-10, 1e-13);
    let mut t = Tally::new(1e-3);
    for p in [3.0, 4.0] {
        let tau = TimeMap::power(p / 2.0).map_err(internal)?;
        let t0 = 0.1f64;
        let s0 = tau.tau(t0);
        let s2 = ScalingTriple::polynomial(2.0, 1.0)
            .map_err(internal)?
            .with_t_min(s0);
        let tr2 = flow(
            &build_el_system(&Euclidean, &f, s2).map_err(internal)?,
            &x0,
            s0,
            tau.tau(t_end),
            &controls,
        )?;
        let sp = ScalingTriple::polynomial(p, 1.0).map_err(internal)?;
        let trp = flow(
            &build_el_system(&Euclidean, &f, sp).map_err(internal)?,
            &x0,
            t0,
            t_end,
            &controls,
        )?;
        ctx.traj(&format!("c03_p{p}_direct"), &trp)?;
        let grid: Vec<f64> = trp.times.iter().copied().filter(|&s| s >= 0.5).collect();
        let dil = dilate_trajectory(&tr2, &tau, &grid).map_err(internal)?;
        let d = sup_dist(&dil, |i| trp.sample(grid[i]), (0.5, t_end));
        t.measure(d);
        t.part(
            d <= 1e-3,
            format!("p={p}: sup |X| diff {d:.2e} on t in [0.5, {t_end}]"),
        );
    }
    let d = dilate_triple(
        &ScalingTriple::polynomial(2.0, 1.0).map_err(internal)?,
        TimeMap::power(2.0).map_err(internal)?,
    );
    let p4 = ScalingTriple::polynomial(4.0, 1.0).map_err(internal)?;
    let sym = log_grid(0.5, 20.0, 20)
        .into_iter()
        .map(|s| {
            (d.alpha(s) - p4.alpha(s))
                .abs()
                .max((d.beta(s) - p4.beta(s)).abs())
                .max((d.gamma(s) - p4.gamma(s)).abs())
        })
        .fold(0.0, f64::max);
    t.part(
        sym <= 1e-12,
        format!("dilate(poly2, t^2) vs poly4: {sym:.1e}"),
    );
    Ok(vec![t.finish("")])
}

// Criteria 4, 5 and 6 share their runs.
fn c04_06_accelerated(ctx: &mut Ctx) -> Result<Vec<CheckResult>, LabError> {
    let q = quadratic();
    let ls = LeastSquares::seeded(20, 10, ctx.seed).map_err(internal)?;
    let k23 = ctx.pick(300, 2000);
    let k4 = ctx.pick(100, 500);
    let cases: [(&dyn ObjectiveOracle, u32, usize); 5] = [
        (&q, 2, k23),
        (&ls, 2, k23),
        (&q, 3, k23),
        (&ls, 3, k23),
        (&q, 4, k4),
    ];
    let mut c4 = Tally::new(1.0);
    let mut c5 = Tally::new(1e-8);
    let mut c6 = Tally::new(f64::NAN);
    let mut c6_fails = 0usize;
    let mut c6_total = 0usize;
    for (f, p, k) in cases {
        let mut eps = eps_for(f, p);
        if ctx.negative {
            eps *= 100.0;
        }
        let cfg = AccelConfig::new(p, eps, ones(f.dim())).map_err(internal)?;
        let rec = accelerated(f, &cfg, k);
        let label = format!("{} p={p} K={k}", f.name());
        ctx.run(&format!("c04_{}_p{p}", f.name()), &rec)?;
        let completed = rec.termination == Termination::Completed;
        let bound_ok: Vec<bool> = (1..rec.len())
            .map(|i| rec.f_gap_y[i] <= rec.bound[i] + 1e-9)
            .collect();
        let ratio = (1..rec.len())
            .map(|i| rec.f_gap_y[i] / rec.bound[i])
            .fold(f64::NEG_INFINITY, f64::max);
        c4.measure(ratio);
        c4.part(
            completed && bound_ok.iter().all(|&b| b) && rec.len() == k + 1,
            format!(
                "{label} eps={eps:.3e}: max gap/bound {ratio:.3e}, {:?}",
                rec.termination
            ),
        );
        let psi_ok: Vec<bool> = (0..rec.len())
            .map(|i| rec.psi[i] >= rec.ckp_fy[i] - 1e-9)
            .collect();
        let grad_ok: Vec<bool> = (0..rec.len())
            .map(|i| rec.psi_grad_norm[i] <= 1e-8)
            .collect();
        let gmax = rec.psi_grad_norm.iter().copied().fold(0.0, f64::max);
        c5.measure(gmax);
        c5.part(
            psi_ok.iter().chain(&grad_ok).all(|&b| b),
            format!(
                "{label}: {} psi violations, max |grad psi| {gmax:.1e}",
                psi_ok.iter().filter(|b| !**b).count()
            ),
        );
        let cert_ok: Vec<bool> = rec
            .certificates
            .iter()
            .map(|c| c.as_ref().is_some_and(|c| c.progress_ok && c.move_ok))
            .collect();
        c6_total += cert_ok.len();
        c6_fails += cert_ok.iter().filter(|b| !**b).count();
        ctx.runs.push(RunSummary::from_record(
            &rec,
            vec![
                invariant("accelerated_bound", bound_ok),
                invariant("psi_lower_bound", psi_ok),
                invariant("psi_stationary", grad_ok),
                invariant("step_certificate", cert_ok),
            ],
        ));
    }
    c6.part(
        c6_fails == 0,
        format!("y-steps: {c6_fails}/{c6_total} certificate failures"),
    );

    let lse = LogSumExp::seeded(5, 4, ctx.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let trials = ctx.pick(20, 100);
    let mut worst_slack: f64 = f64::INFINITY;
    for p in 2..=4u32 {
        let eps = eps_for(&lse, p);
        for n in [1.5, 2.0, 4.0] {
            let cfg = StepConfig::new(p, eps, n).map_err(internal)?;
            let mut fails = 0;
            for _ in 0..trials {
                let x: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
                match g_step(&lse, &x, &cfg) {
                    Ok((_, c)) => {
                        worst_slack = worst_slack.min(c.progress - c.lemma1_lower);
                        if !(c.progress_ok && c.move_ok) {
                            fails += 1;
                        }
                    }
                    Err(_) => fails += 1,
                }
            }
            c6.part(
                fails == 0,
                format!("p={p} N={n}: {fails}/{trials} failures"),
            );
        }
    }
    c6.measured = worst_slack;
    c6.bound = -1e-8;
    Ok(vec![c4.finish(""), c5.finish(""), c6.finish("")])
}

fn c07_plain(ctx: &mut Ctx) -> Result<Vec<CheckResult>, LabError> {
    let f = quadratic();
    let k = ctx.pick(300, 2000);
    let mut t = Tally::new(1.0);
    for p in [2u32, 3] {
        let eps = eps_for(&f, p);
        let rec = higher_order_descent(
            &f,
            StepConfig::new(p, eps, 1.0).map_err(internal)?,
            ones(2),
            k,
        );
        ctx.run(&format!("c07_plain_p{p}"), &rec)?;
        let desc: Vec<bool> = (1..rec.len())
            .map(|i| rec.f_gap_x[i] <= rec.f_gap_x[i - 1] + 1e-10)
            .collect();
        let bound: Vec<bool> = (1..rec.len())
            .map(|i| rec.f_gap_x[i] <= rec.bound[i])
            .collect();
        let recur: Vec<bool> = (1..rec.len())
            .map(|i| rec.f_gap_x[i] <= rec.recursion[i] + 1e-9)
            .collect();
        let ratio = (1..rec.len())
            .map(|i| rec.f_gap_x[i] / rec.bound[i])
            .fold(f64::NEG_INFINITY, f64::max);
        t.measure(ratio);
        let inv = [
            invariant("descent", desc),
            invariant("descent_bound", bound),
            invariant("delta_recursion", recur),
        ];
        let ok = rec.termination == Termination::Completed && inv.iter().all(|i| i.pass);
        t.part(
            ok,
            format!(
                "p={p} K={k} R={:.3}: violations descent {} bound {} recursion {}",
                rec.radius, inv[0].violations, inv[1].violations, inv[2].violations
            ),
        );
        ctx.runs.push(RunSummary::from_record(&rec, inv.to_vec()));
    }
    Ok(vec![t.finish("")])
}

fn c08_rescaled(ctx: &mut Ctx) -> Result<Vec<CheckResult>, LabError> {
    let controls = Controls::adaptive(1e-8, 1e-12);
    let mut t = Tally::new(-2.0 + 0.3);
    let f = quadratic();
    let x0 = ones(2);
    let p = 3.0;
    // The gap reaches the numerical floor near t = 2.2; past it the field chatters.
    let t_end = 5.0;
    let tr = flow(
        &build_rescaled_gradient_flow(&f, p).map_err(internal)?,
        &x0,
        0.0,
        t_end,
        &controls,
    )?;
    ctx.traj("c08_rescaled_p3", &tr)?;
    let hi = tr
        .times
        .iter()
        .zip(&tr.f_gap)
        .find(|(_, g)| **g < 1e-10)
        .map_or(t_end, |(s, _)| *s);
    let slope = fit_rate(&tr.times, &tr.f_gap, (1.0, hi)).map_err(internal)?;
    t.measure(slope);
    t.part(
        slope <= -2.0 + 0.3,
        format!("p=3 slope {slope:.2} on t in [1, {hi:.2}]"),
    );

    let xs = f.minimizer().ok_or_else(|| internal("no minimizer"))?;
    let r = f
        .level_set_radius(&x0)
        .ok_or_else(|| internal("no radius"))?;
    let (e0, _) = rescaled_flow_energy(&f, p, tr.times[0], tr.x(0), &xs);
    let slope_lower = 1.0 / ((p - 1.0) * r.powf(p / (p - 1.0)));
    let mut primary_bad = 0;
    let mut alt_bad = 0;
    let alt_const = (p - 1.0).powf(p - 1.0) * r.powf(p);
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..tr.len() {
        let s = tr.times[i];
        if tr.f_gap[i] <= 1e-14 {
            break;
        }
        let (e, alt) = rescaled_flow_energy(&f, p, s, tr.x(i), &xs);
        if e < (e0 + (s - tr.times[0]) * slope_lower) * (1.0 - 1e-6) {
            primary_bad += 1;
        }
        if let Some((s_prev, a_prev)) = prev {
            if alt - a_prev > alt_const * (s - s_prev) + 1e-6 {
                alt_bad += 1;
            }
        }
        prev = Some((s, alt));
    }
    t.part(
        primary_bad == 0,
        format!("primary monitor: {primary_bad} violations"),
    );
    t.part(
        alt_bad == 0,
        format!("alternative monitor: {alt_bad} violations"),
    );

    for p in [2.0, 3.0] {
        let g = PowerNorm::new(p, 3).map_err(internal)?;
        let start = Point::new(vec![1.0, -0.5, 0.3]).map_err(internal)?;
        let tr = flow(
            &build_rescaled_gradient_flow(&g, p).map_err(internal)?,
            &start,
            0.0,
            10.0,
            &controls,
        )?;
        ctx.traj(&format!("c08_powernorm_p{p}"), &tr)?;
        let d = sup_dist(
            &tr,
            |i| Some(start.iter().map(|v| v * (-tr.times[i]).exp()).collect()),
            (0.0, 10.0),
        );
        t.part(
            d <= 1e-5,
            format!("powernorm p={p}: sup vs e^-t x0 {d:.1e}"),
        );
    }
    Ok(vec![t.finish("")])
}

fn c09_naive(ctx: &mut Ctx) -> Result<Vec<CheckResult>, LabError> {
    let f = quadratic();
    let eps = 0.01;
    let mut t = Tally::new(1e5);
    let p = 3;
    let c = AccelConfig::max_c(p, 2.0);
    let naive = naive_discretization(&f, &Euclidean, p, c, eps, ones(2), 100_000);
    ctx.run("c09_naive_p3", &naive)?;
    let diverged_at = match naive.termination {
        Termination::Diverged(k) => Some(k),
        _ => None,
    };
    t.measure(diverged_at.map_or(f64::INFINITY, |k| k as f64));
    t.part(
        diverged_at.is_some(),
        format!("naive p=3 C={c:.4e}: {:?}", naive.termination),
    );
    ctx.runs.push(RunSummary::from_record(
        &naive,
        vec![invariant("diverged", [diverged_at.is_some()])],
    ));

    let k = ctx.pick(300, 2000);
    let cfg = AccelConfig::new(p, eps, ones(2)).map_err(internal)?;
    let acc = accelerated(&f, &cfg, k);
    ctx.run("c09_accelerated_p3", &acc)?;
    let ok: Vec<bool> = (1..acc.len())
        .map(|i| acc.f_gap_y[i] <= acc.bound[i] + 1e-9)
        .collect();
    let pass = acc.termination == Termination::Completed && ok.iter().all(|&b| b);
    t.part(pass, format!("accelerated p=3 K={k}: bound at every k"));
    ctx.runs.push(RunSummary::from_record(
        &acc,
        vec![invariant("accelerated_bound", ok)],
    ));

    // p = 2 is reported for reference; the linear recursion is stable there.
    let k2 = ctx.pick(10_000, 100_000);
    let p2 = naive_discretization(&f, &Euclidean, 2, 0.25, eps, ones(2), k2);
    t.notes.push(format!(
        "reference: naive p=2 C=1/4 over {k2} steps -> {:?}",
        p2.termination
    ));
    Ok(vec![t.finish("")])
}

fn c10_hamiltonian(ctx: &mut Ctx) -> Result<Vec<CheckResult>, LabError> {
    let f = quadratic();
    let x0 = ones(2);
    let s = ScalingTriple::polynomial(2.0, 1.0).map_err(internal)?;
    let c = Controls::rk4(10_000);
    let mut t = Tally::new(1e-4);
    for h in [&Euclidean as &dyn MirrorMap, &QuarticEuclidean] {
        let a = flow(
            &build_hamiltonian_system(h, &f, s.clone()).map_err(internal)?,
            &x0,
            0.1,
            10.0,
            &c,
        )?;
        let b = flow(
            &build_el_system(h, &f, s.clone()).map_err(internal)?,
            &x0,
            0.1,
            10.0,
            &c,
        )?;
        ctx.traj(&format!("c10_hamiltonian_{}", h.name()), &a)?;
        let d = sup_dist(&a, |i| Some(b.x(i).to_vec()), (0.1, 10.0));
        t.measure(d);
        t.part(d <= 1e-4, format!("{}: sup {d:.1e}", h.name()));
    }
    Ok(vec![t.finish("")])
}

fn c11_natural_motion(ctx: &mut Ctx) -> Result<Vec<CheckResult>, LabError> {
    let zero = Zero::new(2);
    let x0 = [1.0, 1.0];
    let z0 = [0.3, -0.5];
    let c = Controls::rk4(10_000);
    let mut t = Tally::new(1e-6);
    let triples = [
        (
            "poly2",
            ScalingTriple::polynomial(2.0, 1.0).map_err(internal)?,
        ),
        (
            "poly3",
            ScalingTriple::polynomial(3.0, 1.0).map_err(internal)?,
        ),
        ("exp1", ScalingTriple::exponential(1.0).map_err(internal)?),
    ];
    for (label, s) in triples {
        for h in [&Euclidean as &dyn MirrorMap, &QuarticEuclidean] {
            let sys = build_el_system(h, &zero, s.clone()).map_err(internal)?;
            let t0 = s.valid_from().max(0.1);
            let mut y0 = x0.to_vec();
            y0.extend(h.gradient(&z0));
            let tr = integrate_state(&sys, &y0, t0, 10.0, &c).map_err(internal)?;
            ctx.traj(&format!("c11_{label}_{}", h.name()), &tr)?;
            let d = sup_dist(
                &tr,
                |i| Some(natural_motion(&s, t0, &x0, &z0, tr.times[i])),
                (t0, 10.0),
            );
            t.measure(d);
            t.part(d <= 1e-6, format!("{label} {}: {d:.1e}", h.name()));
        }
    }
    Ok(vec![t.finish("")])
}

fn c12_massless(ctx: &mut Ctx) -> Result<Vec<CheckResult>, LabError> {
    let f = quadratic();
    let x0 = ones(2);
    let c = Controls::adaptive(1e-8, 1e-12);
    let mut t = Tally::new(f64::NAN);
    for h in [&QuarticEuclidean as &dyn MirrorMap, &Euclidean] {
        let ng = flow(
            &build_natural_gradient_flow(h, &f).map_err(internal)?,
            &x0,
            0.0,
            2.0,
            &c,
        )?;
        let mut dists = Vec::new();
        for m in [0.1, 0.01, 0.001] {
            let ms = flow(
                &build_massless_system(h, &f, m).map_err(internal)?,
                &x0,
                0.0,
                2.0,
                &c,
            )?;
            ctx.traj(&format!("c12_{}_m{m}", h.name()), &ms)?;
            dists.push(sup_dist(&ms, |i| ng.sample(ms.times[i]), (0.0, 2.0)));
        }
        let decreasing = dists.windows(2).all(|w| w[1] < w[0]);
        t.measure(dists[2]);
        t.part(
            decreasing,
            format!(
                "{}: sup distances {:.2e} > {:.2e} > {:.2e}",
                h.name(),
                dists[0],
                dists[1],
                dists[2]
            ),
        );
    }
    Ok(vec![t.finish("")])
}

fn c13_r_systems(ctx: &mut Ctx) -> Result<Vec<CheckResult>, LabError> {
    let f = quadratic();
    let x0 = ones(2);
    let c = Controls::adaptive(1e-8, 1e-12);
    let mut t = Tally::new(0.3);
    for r in [3.0, 4.0, 5.0] {
        let tr = flow(
            &build_euclidean_r_system(&f, r, ForceScaling::Unit).map_err(internal)?,
            &x0,
            0.1,
            100.0,
            &c,
        )?;
        ctx.traj(&format!("c13_unit_r{r}"), &tr)?;
        let (slope, hi) = fitted_slope(&tr, (1.0, 100.0))?;
        t.measure(slope + 2.0);
        t.part(
            slope <= -2.0 + 0.2,
            format!("unit r={r}: slope {slope:.2} on [1, {hi:.1}]"),
        );
    }
    for r in [3.0, 4.0] {
        let sys = build_euclidean_r_system(&f, r, ForceScaling::Matched(1.0)).map_err(internal)?;
        let tr = flow(&sys, &x0, 0.1, 50.0, &c)?;
        ctx.traj(&format!("c13_matched_r{r}"), &tr)?;
        let slope = fit_rate(&tr.times, &tr.f_gap, (1.0, 50.0)).map_err(internal)?;
        t.measure(slope + (r - 1.0));
        t.part(
            slope <= -(r - 1.0) + 0.3,
            format!("matched r={r}: slope {slope:.2}"),
        );
    }
    Ok(vec![t.finish("")])
}

fn c14_uniform_discrete(ctx: &mut Ctx) -> Result<Vec<CheckResult>, LabError> {
    let f = quadratic();
    let k = ctx.pick(300, 2000);
    let mut t = Tally::new((-1.0f64).exp());
    let rec = higher_order_descent(
        &f,
        StepConfig::new(2, 0.1, 2.0).map_err(internal)?,
        ones(2),
        k,
    );
    ctx.run("c14_plain_uniform", &rec)?;
    let rep = uniformly_convex_descent_rate_check(&rec, &f)
        .ok_or_else(|| internal("no uniform convexity"))?;
    let geo = rep.geometric_ok.iter().filter(|b| !**b).count();
    let inc = rep.increment_ok.iter().filter(|b| !**b).count();
    t.part(
        rep.all_ok,
        format!("plain p=2 N=2 eps=0.1 K={k}: {geo} bound / {inc} increment violations"),
    );
    ctx.runs.push(RunSummary::from_record(
        &rec,
        vec![
            invariant("geometric_bound", rep.geometric_ok.clone()),
            invariant("energy_increment", rep.increment_ok.clone()),
        ],
    ));

    let pn = PowerNorm::new(3.0, 3).map_err(internal)?;
    let cases: [(&dyn ObjectiveOracle, f64, Point); 2] = [
        (&f, 0.1, ones(2)),
        (
            &pn,
            1.0,
            Point::new(vec![1.0, -0.5, 0.25]).map_err(internal)?,
        ),
    ];
    for (g, eps, x0) in cases {
        let rec = restart_accelerated(g, eps, x0, 3).map_err(internal)?;
        ctx.run(&format!("c14_restart_{}", g.name()), &rec)?;
        let s = rec
            .restart
            .as_ref()
            .ok_or_else(|| internal("missing restart summary"))?;
        let worst = s
            .epochs
            .iter()
            .map(|e| e.ratio)
            .fold(f64::NEG_INFINITY, f64::max);
        t.measure(worst);
        let ok = s.epochs.len() == 3 && s.epochs.iter().all(|e| e.contraction_ok) && s.bound_ok;
        t.part(
            ok,
            format!(
                "restart {} p={} m={}: worst ratio {worst:.2e}, final gap {:.2e} <= {:.2e}",
                g.name(),
                rec.config.p,
                s.m,
                s.final_gap,
                s.final_bound
            ),
        );
        ctx.runs.push(RunSummary::from_record(
            &rec,
            vec![
                invariant(
                    "epoch_contraction",
                    s.epochs.iter().map(|e| e.contraction_ok),
                ),
                invariant("final_bound", [s.bound_ok]),
            ],
        ));
    }
    Ok(vec![t.finish("")])
}

fn c15_uniform_continuous(ctx: &mut Ctx) -> Result<Vec<CheckResult>, LabError> {
    let controls = Controls::adaptive(1e-8, 1e-12);
    let mut t = Tally::new(1.0 + 1e-4);
    for p in [2.0, 3.0] {
        let g = PowerNorm::new(p, 3).map_err(internal)?;
        let sigma = g
            .uniform_convexity()
            .ok_or_else(|| internal("no uniform convexity"))?
            .sigma;
        let start = Point::new(vec![1.0, -0.5, 0.3]).map_err(internal)?;
        let tr = flow(
            &build_rescaled_gradient_flow(&g, p).map_err(internal)?,
            &start,
            0.0,
            10.0,
            &controls,
        )?;
        ctx.traj(&format!("c15_powernorm_p{p}"), &tr)?;
        let rate = sigma.powf(1.0 / (p - 1.0));
        let g0 = tr.f_gap[0];
        let worst = (0..tr.len())
            .map(|i| tr.f_gap[i] / (g0 * (-rate * tr.times[i]).exp()))
            .fold(f64::NEG_INFINITY, f64::max);
        t.measure(worst);
        t.part(
            worst <= 1.0 + 1e-4,
            format!("p={p} sigma={sigma}: max gap/bound {worst:.3e}"),
        );
    }
    Ok(vec![t.finish("")])
}

fn c16_correspondence(ctx: &mut Ctx) -> Result<Vec<CheckResult>, LabError> {
    let f = quadratic();
    let x0 = ones(2);
    let delta = 0.05f64;
    let cfg = AccelConfig::new(2, delta * delta, x0.clone()).map_err(internal)?;
    let k_end = (10.0 / delta).round() as usize;
    let rec = accelerated(&f, &cfg, k_end);
    ctx.run("c16_accelerated", &rec)?;
    // The flow uses the same C as the discrete method.
    let s = ScalingTriple::polynomial(2.0, cfg.c).map_err(internal)?;
    let tr = flow(
        &build_el_system(&Euclidean, &f, s).map_err(internal)?,
        &x0,
        0.1,
        10.0,
        &Controls::adaptive(1e-10, 1e-13),
    )?;
    ctx.traj("c16_flow", &tr)?;
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for k in 0..=k_end {
        let time = delta * k as f64;
        if !(1.0..=10.0).contains(&time) {
            continue;
        }
        let g = tr
            .interp_scalar(&tr.f_gap, time)
            .ok_or_else(|| internal("sample outside trajectory"))?;
        let r = rec.f_gap_y[k] / g;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    let factor = hi.max(1.0 / lo);
    let mut t = Tally::new(10.0);
    t.measure(factor);
    t.part(
        factor <= 10.0,
        format!(
            "C={}: discrete/continuous gap ratio in [{lo:.3}, {hi:.3}] on t in [1, 10]",
            cfg.c
        ),
    );
    Ok(vec![t.finish("")])
}

fn collect_csvs(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, LabError> {
    let mut out = Vec::new();
    let traces = dir.join("traces");
    for entry in std::fs::read_dir(&traces)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "csv") {
            let name = path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            out.push((name, std::fs::read(&path)?));
        }
    }
    out.sort();
    Ok(out)
}

fn c17_determinism(seed: u64) -> Result<CheckResult, LabError> {
    let a = tempfile::tempdir()?;
    let b = tempfile::tempdir()?;
    for dir in [a.path(), b.path()] {
        let mut ctx = Ctx {
            full: false,
            seed,
            out: Some(dir.to_path_buf()),
            negative: false,
            runs: Vec::new(),
        };
        let mut sink = ReportSummary::new("determinism", seed, serde_json::Value::Null);
        run_criteria(&mut ctx, &mut sink, &mut |_| {});
    }
    let (ca, cb) = (collect_csvs(a.path())?, collect_csvs(b.path())?);
    let differing =
        ca.iter().zip(&cb).filter(|(x, y)| x != y).count() + ca.len().abs_diff(cb.len());
    let ok = differing == 0 && !ca.is_empty();
    Ok(
        CheckResult::new("", ok, differing as f64, 0.0).with_detail(format!(
            "{} CSVs from two quick-scale runs with seed {seed}; {differing} differ",
            ca.len()
        )),
    )
}

/// True when every criterion appears exactly once.
pub fn covers_all_criteria(summary: &ReportSummary) -> bool {
    (1..=CRITERIA).all(|n| {
        summary
            .checks
            .iter()
            .filter(|c| c.criterion == Some(n))
            .count()
            == 1
    })
}

pub fn status_counts(summary: &ReportSummary) -> (usize, usize, usize) {
    let count = |s: Status| summary.checks.iter().filter(|c| c.status == s).count();
    (
        count(Status::Pass),
        count(Status::Fail),
        count(Status::Skip),
    )
}
