//! Semi-fractional calculus: admissible log-periodic functions, semistable
//! log-characteristic functions, Grünwald-Letnikov and Caputo-type
//! semi-fractional derivatives, and an explicit finite-difference solver for
//! semi-fractional diffusion.

// `!(x > 0.0)` is used deliberately so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod admissible;
pub mod cli;
pub mod derivatives;
pub mod diffusion;
pub mod error;
pub mod log_char;
pub mod output;
pub mod presets;
pub mod quadrature;
pub mod special;
pub mod stable;

pub use admissible::{classical_theta, validate_theta, AdmissibleTheta, Regime};
pub use derivatives::{
    caputo_eval, fourier_oracle, gl_difference, gl_zolotarev, GLParams, SampledFunction, Side,
};
pub use diffusion::{
    compute_drift, density_oracle, initial_condition, solve, tail_diagnostics, validate_problem,
    DensitySolution, DiffusionProblem,
};
pub use error::{Error, Result};
pub use log_char::{char_function, omega_weights, psi_eval, OmegaWeights};
