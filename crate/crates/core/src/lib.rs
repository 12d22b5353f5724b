//! Ruin probabilities for two firms that share drift through bounded transfer
//! payments, with endowments driven by correlated Brownian motions.
//!
//! The crate has four parts:
//!
//! - [`model`]: parameter set, admissibility checks, states and transfer policies;
//! - [`closed_forms`]: explicit survival/value formulas available for the
//!   perfectly-correlated and independent cases;
//! - [`simulator`]: Monte Carlo engine for the controlled two-dimensional SDE,
//!   the sign-drift difference SDE, and the reflected reformulation for
//!   perfectly negative correlation;
//! - [`hjb`]: finite-difference residual checks that the closed forms solve
//!   their dynamic-programming PDE with the stated boundary behavior.
//!
//! Simulation is data-parallel over paths (rayon) when the `parallel` feature
//! is enabled (default); results are bit-identical to the sequential fallback
//! because every path derives its own counter-based RNG stream.

pub mod closed_forms;
pub mod hjb;
pub mod model;
pub mod normal;
pub mod rng;
pub mod simulator;

pub use closed_forms::{
    boundary_asymptote, gain_of_collaboration, survival_no_collab, value_grandits,
    value_mckean_shepp, value_rho1_extended, value_rho1_unit, BoundaryAxis, ClosedFormError,
};
pub use hjb::{boundary_check, derivative_gap, hjb_residual, HjbError, ResidualReport};
pub use model::{ModelKind, ModelParams, ParamError, Policy, State, StateError};
pub use normal::norm_cdf;
pub use simulator::{
    estimate_ruin, estimate_ruin_reflected, estimate_ruin_serial, simulate_sign_sde, step_xy,
    Estimate, PathState, SimConfig, SimError,
};
