//! Complex special functions: the gamma function, principal-branch powers of
//! `∓ix`, and generalized binomial coefficients.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Distance below which an argument is treated as a pole of Γ.
pub const POLE_TOLERANCE: f64 = 1e-12;

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Which of the two imaginary half-axes the base `∓ix` lies on for `x > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Base `-ix`.
    Negative,
    /// Base `+ix`.
    Positive,
}

fn near_pole(z: Complex64) -> bool {
    let n = z.re.round();
    n <= 0.0 && (z - Complex64::new(n, 0.0)).norm() < POLE_TOLERANCE
}

/// `sin(πx)` with exact argument reduction.
fn sin_pi(x: f64) -> f64 {
    let mut r = x - 2.0 * (x * 0.5).round();
    // r in [-1, 1]
    if r > 0.5 {
        r = 1.0 - r;
    } else if r < -0.5 {
        r = -1.0 - r;
    }
    (PI * r).sin()
}

/// `cos(πx)` with exact argument reduction.
fn cos_pi(x: f64) -> f64 {
    sin_pi(x + 0.5)
}

/// `sin(πz)` for complex `z`.
fn sin_pi_complex(z: Complex64) -> Complex64 {
    let py = PI * z.im;
    Complex64::new(sin_pi(z.re) * py.cosh(), cos_pi(z.re) * py.sinh())
}

/// Lanczos sum for Γ(z) with Re z ≥ 1/2.
fn lanczos_ln_gamma(z: Complex64) -> Complex64 {
    let zm1 = z - 1.0;
    let mut acc = Complex64::new(LANCZOS_COEFFS[0], 0.0);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (zm1 + i as f64);
    }
    let t = zm1 + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (zm1 + 0.5) * t.ln() - t + acc.ln()
}

/// Γ(z) on the complex plane.
///
/// Lanczos approximation (g = 7, nine coefficients) for Re z ≥ 1/2 and the
/// reflection formula Γ(z)Γ(1-z) = π / sin(πz) otherwise.
pub fn complex_gamma(z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain(format!("non-finite gamma argument {z}")));
    }
    if near_pole(z) {
        return Err(Error::Pole(format!("{z}")));
    }
    if z.re < 0.5 {
        let s = sin_pi_complex(z);
        let g = lanczos_ln_gamma(Complex64::new(1.0, 0.0) - z).exp();
        Ok(PI / (s * g))
    } else {
        Ok(lanczos_ln_gamma(z).exp())
    }
}

/// log Γ(z) (some branch; only meant to be exponentiated).
///
/// Arguments left of Re z = 1/2 are shifted right with the recurrence
/// Γ(z) = Γ(z+n) / (z(z+1)…(z+n-1)), which stays finite for large |Im z|.
pub fn complex_ln_gamma(z: Complex64) -> Result<Complex64> {
    if near_pole(z) {
        return Err(Error::Pole(format!("{z}")));
    }
    let mut w = z;
    let mut log_prod = Complex64::new(0.0, 0.0);
    while w.re < 0.5 {
        log_prod += w.ln();
        w += 1.0;
    }
    Ok(lanczos_ln_gamma(w) - log_prod)
}

/// Real Γ(x) for x off the poles.
pub fn gamma(x: f64) -> Result<f64> {
    complex_gamma(Complex64::new(x, 0.0)).map(|g| g.re)
}

/// Principal branch of log(∓ix) for real x ≠ 0.
pub fn log_signed_ix(x: f64, axis: Axis) -> Complex64 {
    let s = match axis {
        Axis::Negative => -x.signum(),
        Axis::Positive => x.signum(),
    };
    Complex64::new(x.abs().ln(), s * PI / 2.0)
}

/// `(∓ix)^z = exp(z Log(∓ix))` on the principal branch; `0^z = 0` for Re z > 0.
pub fn signed_ix_pow(x: f64, z: Complex64, axis: Axis) -> Result<Complex64> {
    if x == 0.0 {
        if z.re > 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        return Err(Error::Branch(z.re));
    }
    Ok((z * log_signed_ix(x, axis)).exp())
}

/// Generalized binomial coefficient `binom(z, j)` by the product recurrence.
pub fn gen_binomial(z: Complex64, j: usize) -> Complex64 {
    let mut b = Complex64::new(1.0, 0.0);
    for i in 1..=j {
        b = b * (z - (i - 1) as f64) / i as f64;
    }
    b
}

/// `(-1)^j binom(z, j)` for `j = 0..=n`, the Grünwald-Letnikov weights of order z.
pub fn signed_binomials(z: Complex64, n: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut b = Complex64::new(1.0, 0.0);
    out.push(b);
    for j in 1..=n {
        b = b * ((j - 1) as f64 - z) / j as f64;
        out.push(b);
    }
    out
}

/// Real Grünwald-Letnikov weights `(-1)^j binom(a, j)` via
/// `w_j = (1 - (a + 1)/j) w_{j-1}`.
pub fn real_gl_weights(a: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut w = 1.0;
    out.push(w);
    for j in 1..=n {
        w *= 1.0 - (a + 1.0) / j as f64;
        out.push(w);
    }
    out
}
