//! Simulation and verification of the diffusion flow
//!
//! ```text
//! ∂t u = Δu / (|Du|² + 2 det Du) = Δu / (λ1 + λ2)²
//! ```
//!
//! for maps between flat 2-tori, alongside the harmonic map heat flow
//! `∂t u = Δu` for comparison.
//!
//! The crate is organised bottom-up:
//!
//! - [`lattice`]: flat tori as quotients of the plane and the homotopy class
//!   of a map between them.
//! - [`field`]: discrete maps (linear part plus periodic displacement) and
//!   their finite-difference operators.
//! - [`kinematics`]: pointwise singular values, the polar quantities `(r, θ)`,
//!   the diffusion coefficient and the induced metric.
//! - [`initial_maps`]: initial diffeomorphisms and named presets.
//! - [`flow`]: explicit time stepping.
//! - [`diagnostics`]: energies, bound tracking, PDE residuals, Hölder
//!   seminorms, affine fits and decay-rate fits.
//! - [`oracle`]: exact-jet certification of the maximum-principle algebra and
//!   of the closed `(r, θ)` system.
//! - [`config`] and [`cli`]: the `run`, `verify` and `study` entry points.

// Tensor code indexes components explicitly, and `!(x > 0.0)` is used on
// purpose so that NaN is rejected.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod flow;
pub mod initial_maps;
pub mod kinematics;
pub mod lattice;
pub mod oracle;

pub use error::{Error, Result};

/// Column vector in the plane.
pub type Vec2 = nalgebra::Vector2<f64>;
/// Real 2×2 matrix. For Jacobians, rows index components and columns index
/// derivative directions: `du[(i, j)] = ∂u^i/∂x^j`.
pub type Mat2 = nalgebra::Matrix2<f64>;

/// Configures the global rayon pool from `DIFFLOW_THREADS` if set.
///
/// Results never depend on the worker count; every reduction is sequential.
pub fn init_threads_from_env() {
    if let Some(n) = std::env::var("DIFFLOW_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        // Fails only if the pool was already built, which is fine.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}
