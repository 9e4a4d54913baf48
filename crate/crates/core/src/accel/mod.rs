//! Discrete-time methods.
//!
//! All methods return a [`RunRecord`] whose per-row series are aligned on the
//! iteration index `k` stored in [`RunRecord::k`]. Quantities a method does
//! not produce are NaN (scalars) or absent (points).

mod accelerated;
mod descent;
mod naive;
mod restart;

pub use accelerated::{
    accelerated, estimate_sequence_gradient, estimate_sequence_value, AccelConfig,
};
pub use descent::{higher_order_descent, uniformly_convex_descent_rate_check, UniformRateReport};
pub use naive::{exponential_discretization, naive_discretization};
pub use restart::{restart_accelerated, restart_epoch_length, EpochSummary, RestartSummary};

use alloc::string::String;
use alloc::vec::Vec;

use crate::point::Point;
use crate::taylorstep::StepCertificate;

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Completed,
    /// State norm exceeded the divergence threshold at iteration `k`.
    Diverged(usize),
    /// The Taylor-step solver failed at iteration `k`.
    SolverError(usize),
}

/// Parameters a run was produced with.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigSnapshot {
    pub method: String,
    pub problem: String,
    pub mirror: String,
    pub p: u32,
    pub epsilon: f64,
    pub n: f64,
    pub c: f64,
    pub iterations: usize,
    /// Method-specific extras, e.g. `delta` or the epoch length.
    pub extra: Vec<(String, f64)>,
}

/// Iterate history and per-iteration certificates.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub k: Vec<usize>,
    pub x: Vec<Point>,
    /// Empty for methods without a `y` sequence.
    pub y: Vec<Point>,
    /// Empty for methods without a `z` sequence.
    pub z: Vec<Point>,
    pub f_gap_x: Vec<f64>,
    pub f_gap_y: Vec<f64>,
    /// Raw `f(y_k)`.
    pub f_y: Vec<f64>,
    pub grad_y: Vec<Vec<f64>>,
    /// Certificate of the Taylor step recorded on this row.
    pub certificates: Vec<Option<StepCertificate>>,
    /// `ψ_k(z_k)`, with `f` shifted by `f*` when known.
    pub psi: Vec<f64>,
    /// `C k^{(p)} (f(y_k) − f*)`.
    pub ckp_fy: Vec<f64>,
    /// `||∇ψ_k(z_k)||`.
    pub psi_grad_norm: Vec<f64>,
    /// Method-specific upper bound on the tracked gap.
    pub bound: Vec<f64>,
    /// Plain method: the right-hand side of the one-step residual recursion.
    pub recursion: Vec<f64>,
    /// Exponential scheme: `⟨∇f(x_k), x_k − x_{k+1}⟩ / ||∇f(x_k)||`.
    pub progress_ratio: Vec<f64>,
    /// Level-set radius used by the bounds.
    pub radius: f64,
    pub f_star: Option<f64>,
    pub restart: Option<RestartSummary>,
    pub config: ConfigSnapshot,
    pub termination: Termination,
}

impl RunRecord {
    pub(crate) fn new(config: ConfigSnapshot, f_star: Option<f64>) -> Self {
        Self {
            k: Vec::new(),
            x: Vec::new(),
            y: Vec::new(),
            z: Vec::new(),
            f_gap_x: Vec::new(),
            f_gap_y: Vec::new(),
            f_y: Vec::new(),
            grad_y: Vec::new(),
            certificates: Vec::new(),
            psi: Vec::new(),
            ckp_fy: Vec::new(),
            psi_grad_norm: Vec::new(),
            bound: Vec::new(),
            recursion: Vec::new(),
            progress_ratio: Vec::new(),
            radius: f64::NAN,
            f_star,
            restart: None,
            config,
            termination: Termination::Completed,
        }
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    /// Pushes a row with every scalar set to NaN.
    pub(crate) fn push_row(&mut self, k: usize, x: Point, gap_x: f64) {
        self.k.push(k);
        self.x.push(x);
        self.f_gap_x.push(gap_x);
        self.f_gap_y.push(f64::NAN);
        self.f_y.push(f64::NAN);
        self.certificates.push(None);
        self.psi.push(f64::NAN);
        self.ckp_fy.push(f64::NAN);
        self.psi_grad_norm.push(f64::NAN);
        self.bound.push(f64::NAN);
        self.recursion.push(f64::NAN);
        self.progress_ratio.push(f64::NAN);
    }

    pub(crate) fn last_mut<T>(v: &mut [T]) -> &mut T {
        v.last_mut().expect("row pushed before update")
    }
}

pub(crate) fn gap(f: &dyn crate::objective::ObjectiveOracle, x: &[f64]) -> f64 {
    crate::objective::f_gap(f, x)
}
