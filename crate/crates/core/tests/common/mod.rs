#![allow(dead_code)]

use num_complex::Complex64;
use proptest::prelude::*;
use semifrac::admissible::{validate_nonnegative, AdmissibleTheta};

/// A θ that passes the cheap sufficient test: c0 − Σ2|c_k| > 0 and
/// Σ2k c̃|c_k| ≤ α(c0 − Σ2|c_k|).
pub fn safe_theta() -> impl Strategy<Value = AdmissibleTheta> {
    theta_in(0.1..1.9)
}

pub fn zolotarev_theta() -> impl Strategy<Value = AdmissibleTheta> {
    theta_in(Just(1.0))
}

pub fn theta_in(alpha: impl Strategy<Value = f64>) -> impl Strategy<Value = AdmissibleTheta> {
    (
        alpha,
        1.5f64..40.0,
        0.5f64..3.0,
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..4),
    )
        .prop_filter_map("sufficient bound", |(alpha, c, c0, raw)| {
            let ct = 2.0 * std::f64::consts::PI * alpha / c.ln();
            let mut pairs = vec![(0i64, Complex64::new(c0, 0.0))];
            let weight: f64 = raw
                .iter()
                .enumerate()
                .map(|(i, (a, b))| 2.0 * (1.0 + (i + 1) as f64 * ct / alpha) * a.hypot(*b))
                .sum();
            let s = 0.5 * c0 / weight.max(1e-12);
            for (i, (a, b)) in raw.iter().enumerate() {
                pairs.push((i as i64 + 1, Complex64::new(a * s, b * s)));
            }
            validate_nonnegative(alpha, c, &pairs).ok().map(|v| v.theta)
        })
}
