//! Summary records written as `summary.json`.

use std::path::Path;
use std::process::ExitCode;

use bregman_core::accel::{RunRecord, Termination};
use serde::{Deserialize, Serialize};

use crate::error::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skip,
    /// Reported measurement with no pass/fail meaning.
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    /// Acceptance criterion number, when the check is one.
    pub criterion: Option<u32>,
    pub status: Status,
    /// Worst observed value of the checked quantity.
    pub measured: Option<f64>,
    /// Bound or tolerance it is compared against.
    pub bound: Option<f64>,
    pub runtime_s: f64,
    pub detail: String,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, ok: bool, measured: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            criterion: None,
            status: if ok { Status::Pass } else { Status::Fail },
            measured: finite(measured),
            bound: finite(bound),
            runtime_s: 0.0,
            detail: String::new(),
        }
    }

    pub fn info(name: impl Into<String>, measured: f64, detail: impl Into<String>) -> Self {
        Self {
            status: Status::Info,
            ..Self::new(name, true, measured, f64::NAN)
        }
        .with_detail(detail)
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }

    /// One line: `[PASS] name  measured=… bound=…  detail`.
    pub fn line(&self) -> String {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
            Status::Info => "INFO",
        };
        let num = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.3e}"));
        format!(
            "[{tag}] {}  measured={} bound={}  ({:.2}s)  {}",
            self.name,
            num(self.measured),
            num(self.bound),
            self.runtime_s,
            self.detail
        )
    }
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Digest of a discrete run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub method: String,
    pub problem: String,
    pub mirror: String,
    pub p: u32,
    pub epsilon: Option<f64>,
    pub n: Option<f64>,
    pub c: Option<f64>,
    pub iterations: usize,
    pub termination: String,
    pub diverged: bool,
    /// Whether the recorded gap stayed under the recorded bound; absent when the method has no bound.
    pub bound_ok: Option<bool>,
    pub final_gap_x: Option<f64>,
    pub final_gap_y: Option<f64>,
    pub invariants: Vec<InvariantResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantResult {
    pub name: String,
    pub pass: bool,
    pub violations: usize,
}

impl RunSummary {
    pub fn from_record(rec: &RunRecord, invariants: Vec<InvariantResult>) -> Self {
        let c = &rec.config;
        let termination = match rec.termination {
            Termination::Completed => "completed".to_string(),
            Termination::Diverged(k) => format!("diverged({k})"),
            Termination::SolverError(k) => format!("solver_error({k})"),
        };
        Self {
            method: c.method.clone(),
            problem: c.problem.clone(),
            mirror: c.mirror.clone(),
            p: c.p,
            epsilon: finite(c.epsilon),
            n: finite(c.n),
            c: finite(c.c),
            iterations: c.iterations,
            termination,
            diverged: matches!(rec.termination, Termination::Diverged(_)),
            bound_ok: bound_ok(rec),
            final_gap_x: rec.f_gap_x.last().copied().and_then(finite),
            final_gap_y: rec.f_gap_y.last().copied().and_then(finite),
            invariants,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub experiment: String,
    pub seed: u64,
    pub scale: Option<String>,
    pub config: serde_json::Value,
    pub checks: Vec<CheckResult>,
    pub runs: Vec<RunSummary>,
    pub all_pass: bool,
}

impl ReportSummary {
    pub fn new(experiment: &str, seed: u64, config: serde_json::Value) -> Self {
        Self {
            experiment: experiment.into(),
            seed,
            scale: None,
            config,
            checks: Vec::new(),
            runs: Vec::new(),
            all_pass: true,
        }
    }

    pub fn push(&mut self, check: CheckResult) {
        self.all_pass &= check.passed();
        self.checks.push(check);
    }

    pub fn exit_code(&self) -> ExitCode {
        if self.all_pass {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(1)
        }
    }

    pub fn write(&self, dir: &Path) -> Result<(), LabError> {
        std::fs::create_dir_all(dir)?;
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(dir.join("summary.json"), text + "\n")?;
        Ok(())
    }
}

fn bound_ok(rec: &RunRecord) -> Option<bool> {
    if !rec.bound.iter().skip(1).any(|b| b.is_finite()) {
        return None;
    }
    let gaps = if rec.f_gap_y.iter().skip(1).any(|g| g.is_finite()) {
        &rec.f_gap_y
    } else {
        &rec.f_gap_x
    };
    Some(
        rec.termination == Termination::Completed
            && (1..rec.len()).all(|i| rec.bound[i].is_nan() || gaps[i] <= rec.bound[i] + 1e-9),
    )
}

/// Counts `false` entries.
pub fn invariant(name: &str, oks: impl IntoIterator<Item = bool>) -> InvariantResult {
    let violations = oks.into_iter().filter(|ok| !ok).count();
    InvariantResult {
        name: name.into(),
        pass: violations == 0,
        violations,
    }
}
