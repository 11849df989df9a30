//! Distribution function of classical stable laws (α ≠ 1) by Nolan's
//! single-integral representation.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::adaptive;

/// `F(x; α, β)` in the S0 parametrization with unit scale.
fn cdf_s0(x: f64, a: f64, b: f64) -> f64 {
    let t = (PI * a / 2.0).tan();
    let zeta = -b * t;
    let theta0 = (b * t).atan() / a;
    if (x - zeta).abs() < 1e-14 {
        return (PI / 2.0 - theta0) / PI;
    }
    if x < zeta {
        return 1.0 - cdf_s0(-x, a, -b);
    }
    let e = a / (a - 1.0);
    let scale = (x - zeta).powf(e);
    let lead = (a * theta0).cos().powf(1.0 / (a - 1.0));
    let v = |s: f64| {
        let r = s.cos() / (a * (theta0 + s)).sin();
        lead * r.powf(e) * (a * theta0 + (a - 1.0) * s).cos() / s.cos()
    };
    let g = |s: f64| {
        let val = (-scale * v(s)).exp();
        if val.is_finite() {
            val
        } else {
            0.0
        }
    };
    let lo = -theta0;
    let hi = PI / 2.0;
    let integral = if hi > lo {
        adaptive(&g, lo, hi, 1e-15, 1e-13, 2000).value
    } else {
        0.0
    };
    let c1 = if a < 1.0 {
        (PI / 2.0 - theta0) / PI
    } else {
        1.0
    };
    c1 + (1.0 - a).signum() / PI * integral
}

/// CDF of the stable law `S_α(β, σ, 0)` (S1 parametrization, characteristic
/// function `exp(-σ^α |k|^α (1 - iβ sgn(k) tan(πα/2)))`).
pub fn stable_cdf(x: f64, alpha: f64, beta: f64, sigma: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) || alpha == 1.0 {
        return Err(Error::Domain(format!(
            "stable CDF needs alpha in (0,1) or (1,2), got {alpha}"
        )));
    }
    if !(-1.0..=1.0).contains(&beta) || !(sigma > 0.0) {
        return Err(Error::Domain(format!(
            "stable CDF needs |beta| <= 1 and sigma > 0 (beta={beta}, sigma={sigma})"
        )));
    }
    let zeta = -beta * (PI * alpha / 2.0).tan();
    Ok(cdf_s0(x / sigma + zeta, alpha, beta).clamp(0.0, 1.0))
}
