//! Experiment configuration: one JSON document per experiment.

use std::path::{Path, PathBuf};

use bregman_core::flows::{Controls, ForceScaling};
use bregman_core::mirror::mirror_by_name;
use bregman_core::problems::{problem_by_name, DiagonalQuadratic, PowerNorm};
use bregman_core::scaling::ScalingTriple;
use bregman_core::{MirrorMap, ObjectiveOracle, Point};
use serde::{Deserialize, Serialize};

use crate::error::{config, LabError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Flow,
    Optimize,
    Compare,
    DilationCheck,
    Restart,
    NaiveDemo,
    Acceptance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    #[default]
    Quick,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub id: String,
    /// Eigenvalues for `quadratic`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    /// Order for `powernorm`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
}

impl Default for ProblemSpec {
    fn default() -> Self {
        Self {
            id: "quadratic".into(),
            lambda: Some(vec![1.0, 10.0]),
            p: None,
            dim: None,
        }
    }
}

impl ProblemSpec {
    pub fn build(&self, seed: u64) -> Result<Box<dyn ObjectiveOracle>, LabError> {
        match self.id.as_str() {
            "quadratic" => {
                let lambda = self.lambda.clone().unwrap_or_else(|| vec![1.0, 10.0]);
                Ok(Box::new(DiagonalQuadratic::new(lambda).map_err(config)?))
            }
            "powernorm" => {
                let p = self.p.unwrap_or(3.0);
                Ok(Box::new(
                    PowerNorm::new(p, self.dim.unwrap_or(3)).map_err(config)?,
                ))
            }
            id => problem_by_name(id, seed).map_err(config),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowChoice {
    #[default]
    Lagrangian,
    Hamiltonian,
    Rescaled,
    Natural,
    Massless,
    EuclideanR,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyChoice {
    #[default]
    Polynomial,
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    #[default]
    Accelerated,
    Descent,
    Naive,
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Force {
    #[default]
    Unit,
    Matched,
}

/// Method parameters; fields not used by the chosen experiment are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MethodParams {
    pub flow: FlowChoice,
    pub family: FamilyChoice,
    pub algorithm: Algorithm,
    pub p: u32,
    /// Polynomial constant `C`.
    pub c: Option<f64>,
    /// Exponential rate `c`.
    pub rate: f64,
    /// Defaults to `(p−1)!/L_{p−1}`, capped at 1.
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub n: Option<f64>,
    /// Mass of the massless-limit flow.
    pub m: f64,
    pub r: f64,
    pub force: Force,
    pub mirror: String,
    pub iterations: usize,
    pub epochs: usize,
    /// Rate-fit window.
    pub window: Option<(f64, f64)>,
}

impl Default for MethodParams {
    fn default() -> Self {
        Self {
            flow: FlowChoice::Lagrangian,
            family: FamilyChoice::Polynomial,
            algorithm: Algorithm::Accelerated,
            p: 2,
            c: None,
            rate: 1.0,
            epsilon: None,
            delta: None,
            n: None,
            m: 0.01,
            r: 3.0,
            force: Force::Unit,
            mirror: "euclidean".into(),
            iterations: 500,
            epochs: 3,
            window: None,
        }
    }
}

impl MethodParams {
    pub fn triple(&self) -> Result<ScalingTriple, LabError> {
        match self.family {
            FamilyChoice::Polynomial => {
                ScalingTriple::polynomial(f64::from(self.p), self.c.unwrap_or(1.0)).map_err(config)
            }
            FamilyChoice::Exponential => ScalingTriple::exponential(self.rate).map_err(config),
        }
    }

    pub fn force(&self) -> ForceScaling {
        match self.force {
            Force::Unit => ForceScaling::Unit,
            Force::Matched => ForceScaling::Matched(self.c.unwrap_or(1.0)),
        }
    }

    pub fn mirror(&self, anchor: &Point) -> Result<Box<dyn MirrorMap>, LabError> {
        mirror_by_name(&self.mirror, anchor).map_err(config)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    #[default]
    Adaptive,
    Rk4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegrationParams {
    pub t0: Option<f64>,
    pub t_end: f64,
    pub method: Integrator,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub steps: usize,
}

impl Default for IntegrationParams {
    fn default() -> Self {
        Self {
            t0: None,
            t_end: 10.0,
            method: Integrator::Adaptive,
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            steps: 10_000,
        }
    }
}

impl IntegrationParams {
    pub fn controls(&self) -> Controls {
        match self.method {
            Integrator::Adaptive => Controls::adaptive(self.rel_tol, self.abs_tol),
            Integrator::Rk4 => Controls::rk4(self.steps),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub problem: ProblemSpec,
    /// Starting point; all ones when absent.
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default)]
    pub method: MethodParams,
    #[serde(default)]
    pub integration: IntegrationParams,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub scale: Scale,
    /// Acceptance only: run with a deliberately overstated step size.
    #[serde(default)]
    pub negative_control: bool,
}

impl ExperimentConfig {
    /// Defaults per kind: `dilation_check` uses p = 4, `naive_demo` p = 3
    /// with ε = 0.01, the setting where the naive scheme blows up.
    pub fn new(kind: ExperimentKind) -> Self {
        let mut method = MethodParams::default();
        match kind {
            ExperimentKind::DilationCheck => method.p = 4,
            ExperimentKind::NaiveDemo => {
                method.p = 3;
                method.epsilon = Some(0.01);
                method.iterations = 2000;
            }
            _ => {}
        }
        Self {
            kind,
            problem: ProblemSpec::default(),
            x0: None,
            method,
            integration: IntegrationParams::default(),
            out: None,
            seed: 0,
            scale: Scale::Quick,
            negative_control: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, LabError> {
        serde_json::from_str(text).map_err(config)
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn start(&self, dim: usize) -> Result<Point, LabError> {
        let x = self.x0.clone().unwrap_or_else(|| vec![1.0; dim]);
        if x.len() != dim {
            return Err(LabError::Config(format!(
                "x0 has dimension {}, problem has {dim}",
                x.len()
            )));
        }
        Point::new(x).map_err(config)
    }

    /// Checks identifiers and parameter ranges before any work is done.
    pub fn validate(&self) -> Result<(), LabError> {
        let f = self.problem.build(self.seed)?;
        let x0 = self.start(f.dim())?;
        self.method.mirror(&x0)?;
        let m = &self.method;
        if !(2..=4).contains(&m.p) && self.kind != ExperimentKind::Flow {
            return Err(LabError::Config(format!("p = {} not in 2..=4", m.p)));
        }
        if m.epsilon.is_some_and(|e| !(e > 0.0 && e.is_finite())) {
            return Err(LabError::Config("epsilon must be positive".into()));
        }
        if m.delta.is_some_and(|d| !(d > 0.0 && d.is_finite())) {
            return Err(LabError::Config("delta must be positive".into()));
        }
        if self.kind == ExperimentKind::DilationCheck && m.p < 3 {
            return Err(LabError::Config("dilation_check needs p >= 3".into()));
        }
        if self.kind == ExperimentKind::Flow {
            m.triple()?;
            let t_end = self.integration.t_end;
            if t_end.is_nan() || t_end <= self.integration.t0.unwrap_or(0.0) {
                return Err(LabError::Config("t_end must exceed t0".into()));
            }
        }
        Ok(())
    }
}
