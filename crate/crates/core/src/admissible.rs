//! Admissible log-periodic functions θ, represented by a truncated Fourier
//! series `θ(x) = Σ_{|k|≤K} c_k e^{ik c̃ x}` with `c̃ = 2πα / log c`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ThetaViolation};
use crate::special::gamma;

/// Samples per period for the dense positivity/growth scan.
pub const SAMPLES_PER_PERIOD: usize = 4096;

const SYMMETRY_TOL: f64 = 1e-12;

/// Which semi-fractional operator family an order α belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// α ∈ (0, 1)
    Sub,
    /// α ∈ (1, 2)
    Super,
    /// α = 1
    Zolotarev,
}

impl Regime {
    pub fn of(alpha: f64) -> Result<Regime> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(Regime::Sub)
        } else if alpha == 1.0 {
            Ok(Regime::Zolotarev)
        } else if alpha > 1.0 && alpha < 2.0 {
            Ok(Regime::Super)
        } else {
            Err(Error::Regime(format!("alpha = {alpha} outside (0, 2)")))
        }
    }
}

/// A log-periodic function entering a Lévy tail `r^{-α} θ(log r)`.
pub trait LogPeriodic {
    fn alpha(&self) -> f64;
    fn period(&self) -> f64;
    fn value(&self, x: f64) -> f64;
}

/// Validated admissible function. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibleTheta {
    alpha: f64,
    c: f64,
    /// `c_k` for `k = 0..=K`; negative modes are conjugates.
    coeffs: Vec<Complex64>,
}

/// Outcome of a successful validation.
#[derive(Debug, Clone)]
pub struct Validated {
    pub theta: AdmissibleTheta,
    /// Non-fatal findings (slow coefficient decay).
    pub warnings: Vec<String>,
}

impl AdmissibleTheta {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Highest retained Fourier mode.
    pub fn k_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Angular frequency `c̃ = 2πα / log c`.
    pub fn c_tilde(&self) -> f64 {
        2.0 * PI * self.alpha / self.c.ln()
    }

    /// Period `log c^{1/α}`.
    pub fn period(&self) -> f64 {
        self.c.ln() / self.alpha
    }

    pub fn regime(&self) -> Regime {
        Regime::of(self.alpha).expect("validated alpha")
    }

    /// `c_k` for any integer k (zero beyond the truncation).
    pub fn coeff(&self, k: i64) -> Complex64 {
        let idx = k.unsigned_abs() as usize;
        match self.coeffs.get(idx) {
            Some(c) if k >= 0 => *c,
            Some(c) => c.conj(),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Coefficients for `k = 0..=K`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Unvalidated series with the given non-negative modes, for derived
    /// functions such as γ.
    pub(crate) fn from_parts(alpha: f64, c: f64, coeffs: Vec<Complex64>) -> AdmissibleTheta {
        AdmissibleTheta { alpha, c, coeffs }
    }

    /// Copy with `extra` zero modes appended.
    pub fn zero_padded(&self, extra: usize) -> AdmissibleTheta {
        let mut coeffs = self.coeffs.clone();
        coeffs.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), extra));
        AdmissibleTheta { coeffs, ..*self }
    }

    fn series(&self, coeffs: impl Iterator<Item = (usize, Complex64)>, x: f64) -> f64 {
        let ct = self.c_tilde();
        let mut s = 0.0;
        for (k, ck) in coeffs {
            if k == 0 {
                s += ck.re;
            } else {
                let e = Complex64::from_polar(1.0, k as f64 * ct * x);
                s += 2.0 * (ck * e).re;
            }
        }
        s
    }

    /// θ(x). Conjugate pairs are combined, so the result is real by construction.
    pub fn eval(&self, x: f64) -> f64 {
        self.series(self.coeffs.iter().copied().enumerate(), x)
    }

    /// θ'(x).
    pub fn derivative(&self, x: f64) -> f64 {
        let ct = self.c_tilde();
        self.series(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| (k, c * Complex64::new(0.0, k as f64 * ct))),
            x,
        )
    }

    /// Fourier coefficients `c_k / (α - 1 - ik c̃)` of the companion function γ.
    pub fn gamma_fn_coeffs(&self) -> Result<Vec<Complex64>> {
        if self.regime() != Regime::Super {
            return Err(Error::Regime(format!(
                "gamma function needs alpha in (1,2), got {}",
                self.alpha
            )));
        }
        let ct = self.c_tilde();
        Ok(self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, ck)| ck / Complex64::new(self.alpha - 1.0, -(k as f64) * ct))
            .collect())
    }

    /// γ(x) for α ∈ (1, 2), with `∫_y^∞ x^{-α} θ(log x) dx = y^{1-α} γ(log y)`.
    pub fn eval_gamma_fn(&self, x: f64) -> Result<f64> {
        let d = self.gamma_fn_coeffs()?;
        Ok(self.series(d.into_iter().enumerate(), x))
    }

    /// Lévy tail `r^{-α} θ(log r)`.
    pub fn levy_tail(&self, r: f64) -> Result<f64> {
        levy_tail(self, r)
    }

    /// Same coefficients and `c` with a new order; revalidated.
    pub fn with_alpha(&self, alpha_n: f64) -> Result<AdmissibleTheta> {
        if alpha_n == self.alpha {
            return Ok(self.clone());
        }
        let pairs: Vec<(i64, Complex64)> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| (k as i64, *c))
            .collect();
        Ok(validate_nonnegative(alpha_n, self.c, &pairs)?.theta)
    }

    /// Serializable form (non-negative modes only).
    pub fn to_json(&self) -> ThetaJson {
        ThetaJson {
            alpha: self.alpha,
            c: self.c,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| (k as i64, c.re, c.im))
                .collect(),
        }
    }

    pub fn from_json(j: &ThetaJson) -> Result<Validated> {
        if let Some((k, _, _)) = j.coeffs.iter().find(|(k, _, _)| *k < 0) {
            return Err(Error::Parse(format!(
                "theta coefficients must be listed for k >= 0 only (found k = {k})"
            )));
        }
        let pairs: Vec<(i64, Complex64)> = j
            .coeffs
            .iter()
            .map(|&(k, re, im)| (k, Complex64::new(re, im)))
            .collect();
        validate_nonnegative(j.alpha, j.c, &pairs)
    }
}

impl LogPeriodic for AdmissibleTheta {
    fn alpha(&self) -> f64 {
        self.alpha
    }
    fn period(&self) -> f64 {
        AdmissibleTheta::period(self)
    }
    fn value(&self, x: f64) -> f64 {
        self.eval(x)
    }
}

/// Plain-text JSON form `{"alpha": …, "c": …, "coeffs": [[k, re, im], …]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaJson {
    pub alpha: f64,
    pub c: f64,
    pub coeffs: Vec<(i64, f64, f64)>,
}

/// Lévy tail `φ(r, ∞) = r^{-α} θ(log r)` for any log-periodic θ.
pub fn levy_tail<T: LogPeriodic + ?Sized>(theta: &T, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("levy tail needs r > 0, got {r}")));
    }
    Ok(r.powf(-theta.alpha()) * theta.value(r.ln()))
}

/// The St. Petersburg game's log-periodic function (c = 2, α = 1):
/// `θ(x) = exp(x - ⌊x / log 2⌋ log 2)`. Discontinuous, so it has no place in
/// the Fourier-series pipeline; it only feeds tail and drift computations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StPetersburgTheta;

impl LogPeriodic for StPetersburgTheta {
    fn alpha(&self) -> f64 {
        1.0
    }
    fn period(&self) -> f64 {
        std::f64::consts::LN_2
    }
    fn value(&self, x: f64) -> f64 {
        let l2 = std::f64::consts::LN_2;
        (x - (x / l2).floor() * l2).exp()
    }
}

/// Validate a full coefficient map `k ∈ [-K, K]`.
pub fn validate_theta(alpha: f64, c: f64, coeffs: &[(i64, Complex64)]) -> Result<Validated> {
    let mut violations = Vec::new();
    check_domain(alpha, c, coeffs, &mut violations);
    let k_max = coeffs
        .iter()
        .map(|(k, _)| k.unsigned_abs())
        .max()
        .unwrap_or(0) as usize;
    let mut pos = vec![Complex64::new(0.0, 0.0); k_max + 1];
    let mut neg = vec![Complex64::new(0.0, 0.0); k_max + 1];
    let mut seen = std::collections::BTreeSet::new();
    for &(k, v) in coeffs {
        if !seen.insert(k) {
            violations.push(ThetaViolation::Domain {
                detail: format!("coefficient k = {k} listed twice"),
            });
        }
        if k >= 0 {
            pos[k as usize] = v;
        } else {
            neg[(-k) as usize] = v;
        }
    }
    let scale = pos
        .iter()
        .chain(&neg)
        .map(|c| c.norm())
        .fold(1e-300, f64::max);
    for k in 1..=k_max {
        let d = (neg[k] - pos[k].conj()).norm();
        if d > SYMMETRY_TOL * scale {
            violations.push(ThetaViolation::Symmetry {
                k: k as i64,
                detail: format!("c_-{k} = {} but conj(c_{k}) = {}", neg[k], pos[k].conj()),
            });
        }
    }
    finish(alpha, c, pos, violations)
}

/// Validate coefficients given for `k ≥ 0` only (negatives by symmetry).
pub fn validate_nonnegative(alpha: f64, c: f64, coeffs: &[(i64, Complex64)]) -> Result<Validated> {
    let mut violations = Vec::new();
    check_domain(alpha, c, coeffs, &mut violations);
    let k_max = coeffs
        .iter()
        .map(|(k, _)| k.unsigned_abs())
        .max()
        .unwrap_or(0) as usize;
    let mut pos = vec![Complex64::new(0.0, 0.0); k_max + 1];
    for &(k, v) in coeffs {
        if k < 0 {
            violations.push(ThetaViolation::Domain {
                detail: format!("negative mode k = {k} in a k >= 0 listing"),
            });
        } else {
            pos[k as usize] = v;
        }
    }
    finish(alpha, c, pos, violations)
}

fn check_domain(alpha: f64, c: f64, coeffs: &[(i64, Complex64)], out: &mut Vec<ThetaViolation>) {
    if !(alpha > 0.0 && alpha < 2.0) {
        out.push(ThetaViolation::Domain {
            detail: format!("alpha = {alpha} outside (0, 2)"),
        });
    }
    if !(c > 1.0) || !c.is_finite() {
        out.push(ThetaViolation::Domain {
            detail: format!("c = {c} must exceed 1"),
        });
    }
    for (k, v) in coeffs {
        if !v.re.is_finite() || !v.im.is_finite() {
            out.push(ThetaViolation::Domain {
                detail: format!("coefficient c_{k} = {v} is not finite"),
            });
        }
    }
}

fn finish(
    alpha: f64,
    c: f64,
    mut pos: Vec<Complex64>,
    mut violations: Vec<ThetaViolation>,
) -> Result<Validated> {
    if pos.is_empty() {
        pos.push(Complex64::new(0.0, 0.0));
    }
    let scale = pos.iter().map(|c| c.norm()).fold(1e-300, f64::max);
    if pos[0].im.abs() > SYMMETRY_TOL * scale {
        violations.push(ThetaViolation::Symmetry {
            k: 0,
            detail: format!("c_0 = {} must be real", pos[0]),
        });
    }
    if violations
        .iter()
        .any(|v| matches!(v, ThetaViolation::Domain { .. }))
    {
        return Err(Error::Rejected(violations));
    }
    pos[0].im = 0.0;
    let theta = AdmissibleTheta {
        alpha,
        c,
        coeffs: pos,
    };
    violations.extend(shape_violations(&theta));
    if !violations.is_empty() {
        return Err(Error::Rejected(violations));
    }
    let warnings = decay_warnings(&theta);
    Ok(Validated { theta, warnings })
}

/// Positivity and growth (θ' ≤ αθ) over one period.
fn shape_violations(theta: &AdmissibleTheta) -> Vec<ThetaViolation> {
    let c0 = theta.coeffs[0].re;
    let ct = theta.c_tilde();
    let amp: f64 = theta.coeffs.iter().skip(1).map(|c| 2.0 * c.norm()).sum();
    let slope: f64 = theta
        .coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| 2.0 * k as f64 * ct * c.norm())
        .sum();
    let positive_fast = c0 - amp > 0.0;
    let growth_fast = slope <= theta.alpha * (c0 - amp);
    if positive_fast && growth_fast {
        return Vec::new();
    }
    let mut out = Vec::new();
    let p = theta.period();
    let tol = 1e-12 * (c0.abs() + amp);
    let mut pos_done = positive_fast;
    let mut growth_done = growth_fast;
    for i in 0..SAMPLES_PER_PERIOD {
        let x = p * i as f64 / SAMPLES_PER_PERIOD as f64;
        let v = theta.eval(x);
        if !pos_done && v <= 0.0 {
            out.push(ThetaViolation::Positivity { x, value: v });
            pos_done = true;
        }
        if !growth_done {
            let d = theta.derivative(x);
            let bound = theta.alpha * v;
            if d > bound + tol {
                out.push(ThetaViolation::Growth {
                    x,
                    derivative: d,
                    bound,
                });
                growth_done = true;
            }
        }
        if pos_done && growth_done {
            break;
        }
    }
    out
}

/// Flags coefficient tails decaying slower than C/k².
fn decay_warnings(theta: &AdmissibleTheta) -> Vec<String> {
    let scaled: Vec<(usize, f64)> = theta
        .coeffs
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(k, c)| (k, c.norm() * (k * k) as f64))
        .collect();
    if scaled.len() < 4 {
        return Vec::new();
    }
    let half = scaled.len() / 2;
    let head = scaled[..half].iter().map(|x| x.1).fold(0.0, f64::max);
    match scaled[half..].iter().find(|x| x.1 > 4.0 * head) {
        Some((k, v)) => vec![format!(
            "DecayWarning: |c_{k}| k^2 = {v:.3e} exceeds 4x the leading-mode bound {head:.3e}"
        )],
        None => Vec::new(),
    }
}

/// Constant θ reproducing the classical fractional (or Zolotarev) derivative.
///
/// `c = e^{2πα}` is used so that `c̃ = 1`; with a single mode the choice of c
/// does not affect any operator.
pub fn classical_theta(alpha: f64, regime: Regime) -> Result<AdmissibleTheta> {
    let actual = Regime::of(alpha)?;
    if actual != regime {
        return Err(Error::Regime(format!(
            "alpha = {alpha} belongs to {actual:?}, not {regime:?}"
        )));
    }
    let c0 = match regime {
        Regime::Sub => 1.0 / gamma(1.0 - alpha)?,
        Regime::Super => -1.0 / gamma(1.0 - alpha)?,
        Regime::Zolotarev => 2.0 / PI,
    };
    let c = (2.0 * PI * alpha).exp();
    Ok(validate_nonnegative(alpha, c, &[(0, Complex64::new(c0, 0.0))])?.theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sine_theta(alpha: f64) -> Vec<(i64, Complex64)> {
        let g = gamma(1.0 - alpha).unwrap();
        vec![
            (0, c(1.0 / g, 0.0)),
            (1, c(0.0, -alpha / (12.0 * g))),
            (-1, c(0.0, alpha / (12.0 * g))),
        ]
    }

    #[test]
    fn sine_perturbed_accepted() {
        let v = validate_theta(0.5, (PI).exp(), &sine_theta(0.5)).unwrap();
        assert!(v.warnings.is_empty());
        let th = v.theta;
        assert_relative_eq!(th.c_tilde(), 1.0, epsilon = 1e-15);
        let g = gamma(0.5).unwrap();
        for x in [0.0, 0.7, 2.0] {
            assert_relative_eq!(
                th.eval(x),
                0.5 * x.sin() / (6.0 * g) + 1.0 / g,
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn asymmetric_coefficients_rejected() {
        let mut co = sine_theta(0.5);
        co[2].1 = c(0.0, 0.1);
        match validate_theta(0.5, PI.exp(), &co) {
            Err(Error::Rejected(v)) => {
                assert!(v
                    .iter()
                    .any(|x| matches!(x, ThetaViolation::Symmetry { k: 1, .. })))
            }
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn growth_violation_reports_first_point() {
        let co = [(0, c(1.0, 0.0)), (1, c(0.0, -0.45)), (-1, c(0.0, 0.45))];
        // oracle: direct evaluation of θ' - αθ for θ = 1 + 0.9 sin x
        let x0 = 0.0_f64;
        assert!(0.9 * x0.cos() > 0.5 * (1.0 + 0.9 * x0.sin()));
        match validate_theta(0.5, PI.exp(), &co) {
            Err(Error::Rejected(v)) => {
                assert_eq!(v.len(), 1);
                match v[0] {
                    ThetaViolation::Growth {
                        x,
                        derivative,
                        bound,
                    } => {
                        assert_eq!(x, 0.0);
                        assert_relative_eq!(derivative, 0.9, epsilon = 1e-14);
                        assert_relative_eq!(bound, 0.5, epsilon = 1e-14);
                    }
                    ref other => panic!("unexpected {other:?}"),
                }
            }
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn positivity_violation() {
        let co = [(0, c(0.1, 0.0)), (1, c(0.0, -0.01)), (-1, c(0.0, 0.01))];
        assert!(validate_theta(0.5, PI.exp(), &co).is_ok());
        let co = [(0, c(-0.1, 0.0))];
        assert!(matches!(
            validate_theta(0.5, PI.exp(), &co),
            Err(Error::Rejected(v)) if matches!(v[0], ThetaViolation::Positivity { .. })
        ));
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            validate_theta(2.0, 3.0, &[(0, c(1.0, 0.0))]),
            Err(Error::Rejected(_))
        ));
        assert!(matches!(
            validate_theta(0.5, 1.0, &[(0, c(1.0, 0.0))]),
            Err(Error::Rejected(_))
        ));
        assert!(matches!(
            validate_theta(0.5, 3.0, &[(0, c(f64::NAN, 0.0))]),
            Err(Error::Rejected(_))
        ));
    }

    #[test]
    fn slow_decay_warns_but_accepts() {
        let mut co = vec![(0, c(10.0, 0.0))];
        for k in 1..=8i64 {
            let a = if k > 4 { 1e-3 } else { 1e-3 / (k * k) as f64 };
            co.push((k, c(a, 0.0)));
        }
        let v = validate_nonnegative(0.5, (20.0f64).exp(), &co).unwrap();
        assert_eq!(v.warnings.len(), 1);
        assert!(v.warnings[0].starts_with("DecayWarning"));
    }

    #[test]
    fn eval_examples() {
        let th = validate_nonnegative(
            0.5,
            PI.exp(),
            &[(0, c(gamma(0.5).unwrap(), 0.0)), (1, c(0.0, -0.25))],
        )
        .unwrap()
        .theta;
        assert_relative_eq!(th.eval(0.0), 1.772_453_850_9, epsilon = 1e-10);
        let p = th.period();
        assert_relative_eq!(p, 2.0 * PI, epsilon = 1e-14);
        for x in [-3.0, 0.1, 5.0] {
            assert_relative_eq!(th.eval(x + p), th.eval(x), epsilon = 1e-12);
        }
        let k = classical_theta(0.3, Regime::Sub).unwrap();
        assert_eq!(k.eval(1.234), k.coeffs()[0].re);
    }

    #[test]
    fn classical_constants() {
        assert_relative_eq!(
            classical_theta(0.5, Regime::Sub).unwrap().coeffs()[0].re,
            0.564_189_583_5,
            epsilon = 1e-10
        );
        assert_relative_eq!(
            classical_theta(1.5, Regime::Super).unwrap().coeffs()[0].re,
            0.282_094_791_8,
            epsilon = 1e-10
        );
        assert_relative_eq!(
            classical_theta(1.0, Regime::Zolotarev).unwrap().coeffs()[0].re,
            2.0 / PI
        );
        assert!(matches!(
            classical_theta(0.5, Regime::Super),
            Err(Error::Regime(_))
        ));
    }

    #[test]
    fn gamma_fn_constant_and_regime() {
        let th = classical_theta(1.5, Regime::Super).unwrap();
        assert_relative_eq!(
            th.eval_gamma_fn(0.3).unwrap(),
            1.0 / gamma(0.5).unwrap(),
            epsilon = 1e-14
        );
        let sub = classical_theta(0.5, Regime::Sub).unwrap();
        assert!(matches!(sub.eval_gamma_fn(0.0), Err(Error::Regime(_))));
    }

    #[test]
    fn st_petersburg_tail() {
        let sp = StPetersburgTheta;
        let oracle: f64 = (2..60).map(|k| 0.5f64.powi(k)).sum();
        assert_relative_eq!(levy_tail(&sp, 2.0).unwrap(), oracle, epsilon = 1e-15);
        assert!(matches!(levy_tail(&sp, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn with_alpha_recomputes_frequency() {
        let th = validate_theta(0.5, PI.exp(), &sine_theta(0.5))
            .unwrap()
            .theta;
        assert_eq!(th.with_alpha(0.5).unwrap(), th);
        let moved = th.with_alpha(0.9).unwrap();
        assert_relative_eq!(moved.c_tilde(), 2.0 * PI * 0.9 / PI, epsilon = 1e-14);
        assert_eq!(moved.coeffs(), th.coeffs());
    }

    #[test]
    fn json_roundtrip_and_negative_modes() {
        let th = validate_theta(0.5, PI.exp(), &sine_theta(0.5))
            .unwrap()
            .theta;
        let j = serde_json::to_string(&th.to_json()).unwrap();
        let back: ThetaJson = serde_json::from_str(&j).unwrap();
        assert_eq!(AdmissibleTheta::from_json(&back).unwrap().theta, th);
        let bad = ThetaJson {
            alpha: 0.5,
            c: 3.0,
            coeffs: vec![(-1, 0.0, 0.1)],
        };
        assert!(matches!(
            AdmissibleTheta::from_json(&bad),
            Err(Error::Parse(_))
        ));
    }
}
