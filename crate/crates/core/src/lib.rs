//! Accelerated optimization dynamics generated by the Bregman Lagrangian.
//!
//! The crate is `no_std` (with `alloc`) and purely computational. It covers
//! three layers:
//!
//! * **Foundations** ([`point`], [`objective`], [`mirror`], [`scaling`],
//!   [`taylor`], [`problems`]): vectors, objective oracles with derivatives up
//!   to third order, distance-generating functions and their Bregman
//!   divergences, and the `(alpha, beta, gamma)` scaling triples.
//! * **Continuous time** ([`flows`]): Euler-Lagrange, Hamiltonian, rescaled
//!   gradient, natural gradient, and damped Euclidean flows, an RK4 integrator,
//!   energy monitors and time dilation.
//! * **Discrete time** ([`taylorstep`], [`accel`]): the regularized Taylor
//!   step `G_{p,eps,N}` with its certificates, the higher-order gradient method,
//!   the naive and rate-matching discretizations, and the restart scheme.
//!
//! File formats, the experiment runner and the CLI live in the `bregman-lab`
//! companion crate.

#![no_std]
#![warn(missing_debug_implementations)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod accel;
pub mod error;
pub mod flows;
pub mod linalg;
pub mod mirror;
pub mod objective;
pub mod point;
pub mod problems;
pub mod scaling;
pub mod taylor;
pub mod taylorstep;

pub use error::Error;
pub use mirror::{bregman_divergence, MirrorMap};
pub use objective::{ObjectiveOracle, UniformConvexity};
pub use point::Point;
pub use scaling::{ScalingTriple, TimeMap};

/// State norm above which integrations and discrete runs are declared divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1e8;
