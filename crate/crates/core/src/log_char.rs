//! Series evaluation of semistable log-characteristic functions.
//!
//! For α ≠ 1 the positive-side semi-fractional derivative has the Fourier
//! multiplier `Σ_k ω_k (-ix)^{α-ik c̃}` with `ω_k = ±c_k Γ(ik c̃ - α + 1)`;
//! for α = 1 the multiplier carries the extra weights `ω_{k,1}`, `ω_{k,2}`
//! and the `c_0 (-ix) log(-ix)` term. Fourier transforms use the convention
//! `f̂(k) = ∫ e^{iky} f(y) dy`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::admissible::{AdmissibleTheta, Regime};
use crate::error::{Error, Result};
use crate::quadrature::{adaptive_pieces, oscillatory_tail, periodic_laplace, Estimate};
use crate::special::{complex_gamma, complex_ln_gamma, log_signed_ix, Axis};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Spectral weights derived from an admissible θ.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaWeights {
    regime: Regime,
    alpha: f64,
    c_tilde: f64,
    c0: f64,
    /// `ω_k`, k ≥ 0 (α ≠ 1).
    omega: Vec<Complex64>,
    /// `ω_{k,1}`, `ω_{k,2}`, k ≥ 0, zero at k = 0 (α = 1).
    omega1: Vec<Complex64>,
    omega2: Vec<Complex64>,
}

/// `log cos(w)` without overflow for large |Im w|.
fn ln_cos(w: Complex64) -> Complex64 {
    if w.im.abs() < 20.0 {
        return w.cos().ln();
    }
    // the dominant exponential is e^{∓iw} when Im w ≷ 0
    let s = if w.im > 0.0 { -1.0 } else { 1.0 };
    let i = Complex64::new(0.0, 1.0);
    s * i * w - 2f64.ln() + (1.0 + (-2.0 * s * i * w).exp()).ln()
}

/// `Γ(z) cos(πz/2)` evaluated in log space.
fn gamma_cos(z: Complex64) -> Result<Complex64> {
    Ok((complex_ln_gamma(z)? + ln_cos(z * (PI / 2.0))).exp())
}

impl OmegaWeights {
    pub fn new(theta: &AdmissibleTheta) -> Result<OmegaWeights> {
        let regime = theta.regime();
        let alpha = theta.alpha();
        let ct = theta.c_tilde();
        let coeffs = theta.coeffs();
        let mut omega = Vec::new();
        let mut omega1 = Vec::new();
        let mut omega2 = Vec::new();
        match regime {
            Regime::Sub | Regime::Super => {
                let sign = if regime == Regime::Sub { 1.0 } else { -1.0 };
                for (k, ck) in coeffs.iter().enumerate() {
                    let g = complex_gamma(Complex64::new(1.0 - alpha, k as f64 * ct))?;
                    omega.push(sign * ck * g);
                }
            }
            Regime::Zolotarev => {
                omega1.push(ZERO);
                omega2.push(ZERO);
                for (k, ck) in coeffs.iter().enumerate().skip(1) {
                    let z = Complex64::new(0.0, k as f64 * ct);
                    omega1.push(-ck * complex_gamma(z)?);
                    omega2.push(ck * gamma_cos(z)?);
                }
            }
        }
        Ok(OmegaWeights {
            regime,
            alpha,
            c_tilde: ct,
            c0: coeffs[0].re,
            omega,
            omega1,
            omega2,
        })
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c_tilde(&self) -> f64 {
        self.c_tilde
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn k_max(&self) -> usize {
        self.omega.len().max(self.omega1.len()).saturating_sub(1)
    }

    fn pick(v: &[Complex64], k: i64) -> Complex64 {
        match v.get(k.unsigned_abs() as usize) {
            Some(w) if k >= 0 => *w,
            Some(w) => w.conj(),
            None => ZERO,
        }
    }

    /// `ω_k` for any integer k (α ≠ 1).
    pub fn omega(&self, k: i64) -> Complex64 {
        Self::pick(&self.omega, k)
    }

    /// `ω_{k,1}` (α = 1).
    pub fn omega1(&self, k: i64) -> Complex64 {
        Self::pick(&self.omega1, k)
    }

    /// `ω_{k,2}` (α = 1).
    pub fn omega2(&self, k: i64) -> Complex64 {
        Self::pick(&self.omega2, k)
    }

    /// Order of mode k: `α - ik c̃`.
    pub fn mode_order(&self, k: i64) -> Complex64 {
        Complex64::new(self.alpha, -(k as f64) * self.c_tilde)
    }

    /// Magnitude of the last retained weight, a heuristic truncation proxy.
    pub fn last_term_magnitude(&self) -> f64 {
        let v = if self.regime == Regime::Zolotarev {
            &self.omega1
        } else {
            &self.omega
        };
        v.last().map(|w| w.norm()).unwrap_or(0.0)
    }

    /// Fourier multiplier of the positive-side derivative at frequency x.
    /// The negative side is `symbol(-x)`.
    pub fn symbol(&self, x: f64) -> Complex64 {
        if x == 0.0 {
            return ZERO;
        }
        let log = log_signed_ix(x, Axis::Negative);
        let k_max = self.k_max() as i64;
        match self.regime {
            Regime::Sub | Regime::Super => {
                let mut s = ZERO;
                for k in -k_max..=k_max {
                    let w = self.omega(k);
                    if w != ZERO {
                        s += w * (self.mode_order(k) * log).exp();
                    }
                }
                s
            }
            Regime::Zolotarev => {
                let mix = Complex64::new(0.0, -x);
                let mut s = ZERO;
                let mut drift = ZERO;
                for k in (-k_max..=k_max).filter(|&k| k != 0) {
                    let w1 = self.omega1(k);
                    if w1 != ZERO {
                        s += w1 * (self.mode_order(k) * log).exp();
                    }
                    drift += self.omega2(k);
                }
                s + drift * mix + self.c0 * mix * log
            }
        }
    }
}

/// Convenience constructor.
pub fn omega_weights(theta: &AdmissibleTheta) -> Result<OmegaWeights> {
    OmegaWeights::new(theta)
}

/// Log-characteristic function ψ(x) of the positive-side operator.
pub fn psi_eval(weights: &OmegaWeights, x: f64) -> Complex64 {
    if x == 0.0 {
        return ZERO;
    }
    let s = weights.symbol(x);
    match weights.regime {
        Regime::Sub => -s,
        Regime::Super | Regime::Zolotarev => s,
    }
}

/// `h(x) = -ψ(x) / |x|^α`.
pub fn h_factor(weights: &OmegaWeights, x: f64) -> Result<Complex64> {
    if weights.regime == Regime::Zolotarev {
        return Err(Error::Regime(
            "h factor is defined for alpha != 1 only".into(),
        ));
    }
    if x == 0.0 {
        return Err(Error::Domain("h factor undefined at x = 0".into()));
    }
    Ok(-psi_eval(weights, x) / x.abs().powf(weights.alpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftMethod {
    Series,
    Quadrature,
}

/// Full complex series `Σ_k c_k Γ(z_k) cos(π z_k / 2)`, `z_k = ik c̃_n - α_n + 1`.
/// Its imaginary part cancels in conjugate pairs.
pub fn shift_series_complex(theta_n: &AdmissibleTheta) -> Result<Complex64> {
    let alpha = theta_n.alpha();
    if alpha == 1.0 {
        return Err(Error::Regime("shift d_n needs alpha != 1".into()));
    }
    let ct = theta_n.c_tilde();
    let k_max = theta_n.k_max() as i64;
    let mut s = ZERO;
    for k in -k_max..=k_max {
        let ck = theta_n.coeff(k);
        if ck == ZERO {
            continue;
        }
        s += ck * gamma_cos(Complex64::new(1.0 - alpha, k as f64 * ct))?;
    }
    Ok(s)
}

/// Centering shift `d_n` by the series formula or by oscillatory quadrature.
pub fn shift_dn(theta_n: &AdmissibleTheta, method: ShiftMethod) -> Result<f64> {
    match method {
        ShiftMethod::Series => Ok(shift_series_complex(theta_n)?.re),
        ShiftMethod::Quadrature => {
            let e = shift_quadrature(theta_n)?;
            if e.error > 1e-7 {
                return Err(Error::Quadrature(format!(
                    "shift integral error estimate {:.2e} exceeds 1e-7",
                    e.error
                )));
            }
            Ok(e.value)
        }
    }
}

/// `∫ cos(x) x^{-α} θ(log x) dx` (α < 1) or `∫ (cos x - 1) x^{-α} θ(log x) dx`
/// (α > 1) over (0, ∞).
pub fn shift_quadrature(theta_n: &AdmissibleTheta) -> Result<Estimate> {
    let alpha = theta_n.alpha();
    if alpha == 1.0 {
        return Err(Error::Regime("shift d_n needs alpha != 1".into()));
    }
    let p = theta_n.period();
    let th = |u: f64| theta_n.eval(u);
    let mut total = Estimate::default();

    // (0,1]: (cos y - 1) y^{-α} θ(log y), y = e^{-u}
    let u_end = 40.0 / (3.0 - alpha);
    let n = (u_end / p).ceil().max(1.0) as usize;
    let breaks: Vec<f64> = (0..=n).map(|i| i as f64 * p).collect();
    let near = |u: f64| {
        let y = (-u).exp();
        let s = (0.5 * y).sin();
        -2.0 * s * s * (-(1.0 - alpha) * u).exp() * th(-u)
    };
    total += adaptive_pieces(&near, &breaks, 1e-13);

    if alpha < 1.0 {
        // ∫_0^1 y^{-α} θ(log y) dy
        total += periodic_laplace(&|u: f64| th(-u), 1.0 - alpha, p, 1e-13)?;
    } else {
        // -∫_1^∞ y^{-α} θ(log y) dy
        total += periodic_laplace(&th, alpha - 1.0, p, 1e-13)?.scale(-1.0);
    }
    // ∫_1^∞ cos(y) y^{-α} θ(log y) dy
    let osc = |y: f64| y.cos() * y.powf(-alpha) * th(y.ln());
    total += oscillatory_tail(&osc, 1.0, PI / 2.0, 60);
    if !total.value.is_finite() {
        return Err(Error::Quadrature("non-finite shift integral".into()));
    }
    Ok(total)
}

/// One row of the α → 1 continuity study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuityRow {
    pub alpha_n: f64,
    pub shift: f64,
    pub sup_error: f64,
}

/// `sup_x |ψ_n(x) - ix d_n - ψ_Z(x)|` for each α_n, where θ_n keeps the
/// coefficients of the α = 1 function `theta`.
pub fn zolotarev_continuity_error(
    theta: &AdmissibleTheta,
    alpha_seq: &[f64],
    x_grid: &[f64],
) -> Result<Vec<ContinuityRow>> {
    if theta.regime() != Regime::Zolotarev {
        return Err(Error::Regime(
            "continuity target must have alpha = 1".into(),
        ));
    }
    let wz = OmegaWeights::new(theta)?;
    let mut rows = Vec::with_capacity(alpha_seq.len());
    for &a in alpha_seq {
        let theta_n = theta.with_alpha(a)?;
        let wn = OmegaWeights::new(&theta_n)?;
        let d = shift_dn(&theta_n, ShiftMethod::Series)?;
        let sup = x_grid
            .iter()
            .map(|&x| {
                let shifted = psi_eval(&wn, x) - Complex64::new(0.0, x * d);
                (shifted - psi_eval(&wz, x)).norm()
            })
            .fold(0.0, f64::max);
        rows.push(ContinuityRow {
            alpha_n: a,
            shift: d,
            sup_error: sup,
        });
    }
    Ok(rows)
}

/// Total exponent `ivk + D1·(positive multiplier)(k) + D2·(negative multiplier)(k)`.
pub fn psi_total(
    weights_pos: Option<&OmegaWeights>,
    weights_neg: Option<&OmegaWeights>,
    d1: f64,
    d2: f64,
    v: f64,
    k: f64,
) -> Complex64 {
    let mut s = Complex64::new(0.0, v * k);
    if let Some(w) = weights_pos {
        if d1 != 0.0 {
            s += d1 * w.symbol(k);
        }
    }
    if let Some(w) = weights_neg {
        if d2 != 0.0 {
            s += d2 * w.symbol(-k);
        }
    }
    s
}

/// `exp(t ψ_total(k))`, the characteristic function of the solution at time t.
pub fn char_function(
    weights_pos: Option<&OmegaWeights>,
    weights_neg: Option<&OmegaWeights>,
    d1: f64,
    d2: f64,
    v: f64,
    k: f64,
    t: f64,
) -> Complex64 {
    if t == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    (t * psi_total(weights_pos, weights_neg, d1, d2, v, k)).exp()
}

/// The 49 positive points `10^{j/8}`, `j = -24..=24`, used with both signs
/// in property checks.
pub fn log_grid() -> Vec<f64> {
    (-24..=24).map(|j| 10f64.powf(j as f64 / 8.0)).collect()
}
