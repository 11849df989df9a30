//! Named admissible functions and diffusion problems used in tests, the CLI
//! and the Python bindings.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::admissible::{validate_nonnegative, AdmissibleTheta};
use crate::diffusion::{DiffusionProblem, ProblemFields};
use crate::error::Result;
use crate::special::gamma;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `θ(x) = α sin(x) / (6Γ(1-α)) ± 1/Γ(1-α)` with `c = e^{2πα}` (so c̃ = 1);
/// the constant takes the minus sign for α ∈ (1, 2).
pub fn sine_perturbed(alpha: f64) -> Result<AdmissibleTheta> {
    let g = gamma(1.0 - alpha)?;
    let s = if alpha > 1.0 { -1.0 } else { 1.0 };
    let coeffs = [(0, c(s / g, 0.0)), (1, c(0.0, -alpha / (12.0 * g)))];
    Ok(validate_nonnegative(alpha, (2.0 * PI * alpha).exp(), &coeffs)?.theta)
}

/// `θ(x) = 2 sin(x) / (3π) + 2/π` with α = 1, `c = e^{2π}`.
pub fn sine_perturbed_zolotarev() -> Result<AdmissibleTheta> {
    let coeffs = [(0, c(2.0 / PI, 0.0)), (1, c(0.0, -1.0 / (3.0 * PI)))];
    Ok(validate_nonnegative(1.0, (2.0 * PI).exp(), &coeffs)?.theta)
}

/// `θ(x) = 0.5 sin(x) + Γ(0.5)` with α = 0.5, `c = e^π`.
pub fn one_sided_diffusion_theta() -> Result<AdmissibleTheta> {
    let coeffs = [(0, c(gamma(0.5)?, 0.0)), (1, c(0.0, -0.25))];
    Ok(validate_nonnegative(0.5, PI.exp(), &coeffs)?.theta)
}

/// `θ(x) = 0.5 cos(x) + Γ(0.5)` with α = 0.5, `c = e^π`.
pub fn symmetric_diffusion_theta() -> Result<AdmissibleTheta> {
    let coeffs = [(0, c(gamma(0.5)?, 0.0)), (1, c(0.25, 0.0))];
    Ok(validate_nonnegative(0.5, PI.exp(), &coeffs)?.theta)
}

/// Constant θ with the same α, c and mean as `theta`: the stable control.
pub fn stable_control(theta: &AdmissibleTheta) -> Result<AdmissibleTheta> {
    Ok(validate_nonnegative(theta.alpha(), theta.c(), &[(0, theta.coeffs()[0])])?.theta)
}

/// One-sided problem: D1 = -1, D2 = 0 on [-5, 5] over t ∈ [0.01, 1].
pub fn one_sided_problem() -> Result<DiffusionProblem> {
    let th = one_sided_diffusion_theta()?;
    ProblemFields {
        d1: -1.0,
        d2: 0.0,
        theta1: Some(th.clone()),
        theta2: Some(th),
        t2: 1.0,
        ..ProblemFields::default()
    }
    .validate()
}

/// Symmetric problem: D1 = D2 = -0.5 on [-5, 5] over t ∈ [0.01, 0.45].
pub fn symmetric_problem() -> Result<DiffusionProblem> {
    let th = symmetric_diffusion_theta()?;
    ProblemFields {
        d1: -0.5,
        d2: -0.5,
        theta1: Some(th.clone()),
        theta2: Some(th),
        t2: 0.45,
        ..ProblemFields::default()
    }
    .validate()
}
