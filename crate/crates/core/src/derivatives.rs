//! Semi-fractional derivatives by Grünwald-Letnikov differences, Caputo-form
//! quadrature and the spectral formula.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::admissible::{AdmissibleTheta, Regime};
use crate::error::{Error, Result};
use crate::log_char::OmegaWeights;
use crate::quadrature::{
    adaptive, adaptive_pieces, oscillatory_tail, periodic_laplace, Estimate, KahanSum,
};
use crate::special::{real_gl_weights, signed_binomials, EULER_GAMMA};

/// Caputo quadratures fail above this error estimate.
pub const CAPUTO_TOLERANCE: f64 = 1e-7;

/// Relative size of the last inner GL term above which a truncation warning is raised.
pub const TRUNCATION_RATIO: f64 = 1e-8;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Positive,
    Negative,
}

/// Discretization for Grünwald-Letnikov sums: step `h` and inner truncation `j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GLParams {
    pub h: f64,
    #[serde(rename = "J")]
    pub j: usize,
}

impl Default for GLParams {
    fn default() -> Self {
        GLParams { h: 0.01, j: 200 }
    }
}

impl GLParams {
    pub fn new(h: f64, j: usize) -> Result<GLParams> {
        let p = GLParams { h, j };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h < 1.0) {
            return Err(Error::Range(format!("h must lie in (0,1), got {}", self.h)));
        }
        if self.j < 1 {
            return Err(Error::Range("J must be at least 1".into()));
        }
        Ok(())
    }

    /// Warning text when the sum covers less than two units of length.
    pub fn coupling_warning(&self) -> Option<String> {
        let reach = self.h * self.j as f64;
        (reach < 2.0 - 1e-12).then(|| format!("TruncationWarning: J*h = {reach} < 2"))
    }
}

/// A real function with optional first and second derivatives.
#[derive(Clone)]
pub struct SampledFunction {
    f: RealFn,
    df: Option<RealFn>,
    d2f: Option<RealFn>,
    /// `f'(y) = O(|y|^{-β})`.
    decay: Option<f64>,
    /// f, f' and f'' are negligible for |y| beyond this radius.
    support: Option<f64>,
}

impl std::fmt::Debug for SampledFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SampledFunction")
            .field("has_df", &self.df.is_some())
            .field("has_d2f", &self.d2f.is_some())
            .field("decay", &self.decay)
            .field("support", &self.support)
            .finish()
    }
}

impl SampledFunction {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        SampledFunction {
            f: Arc::new(f),
            df: None,
            d2f: None,
            decay: None,
            support: None,
        }
    }

    pub fn with_derivative(mut self, df: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.df = Some(Arc::new(df));
        self
    }

    pub fn with_second_derivative(
        mut self,
        d2f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.d2f = Some(Arc::new(d2f));
        self
    }

    pub fn with_decay(mut self, beta: f64) -> Self {
        self.decay = Some(beta);
        self
    }

    pub fn with_support(mut self, radius: f64) -> Self {
        self.support = Some(radius);
        self
    }

    /// `e^{-x²}` with derivatives; `f̂(k) = √π e^{-k²/4}`.
    pub fn gaussian() -> Self {
        SampledFunction::new(|x| (-x * x).exp())
            .with_derivative(|x| -2.0 * x * (-x * x).exp())
            .with_second_derivative(|x| (4.0 * x * x - 2.0) * (-x * x).exp())
            .with_decay(2.0)
            .with_support(9.0)
    }

    pub fn gaussian_hat(k: f64) -> Complex64 {
        Complex64::new(PI.sqrt() * (-k * k / 4.0).exp(), 0.0)
    }

    pub fn constant(v: f64) -> Self {
        SampledFunction::new(move |_| v)
            .with_derivative(|_| 0.0)
            .with_second_derivative(|_| 0.0)
            .with_decay(f64::INFINITY)
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn df(&self) -> Option<&RealFn> {
        self.df.as_ref()
    }

    pub fn d2f(&self) -> Option<&RealFn> {
        self.d2f.as_ref()
    }

    pub fn decay(&self) -> Option<f64> {
        self.decay
    }

    pub fn support(&self) -> Option<f64> {
        self.support
    }

    /// `y ↦ f(-y)`.
    pub fn reflect(&self) -> SampledFunction {
        let f = self.f.clone();
        SampledFunction {
            f: Arc::new(move |y| f(-y)),
            df: self
                .df
                .clone()
                .map(|d| Arc::new(move |y: f64| -d(-y)) as RealFn),
            d2f: self
                .d2f
                .clone()
                .map(|d| Arc::new(move |y: f64| d(-y)) as RealFn),
            decay: self.decay,
            support: self.support,
        }
    }

    /// `y ↦ f(y - s)`.
    pub fn shift(&self, s: f64) -> SampledFunction {
        let f = self.f.clone();
        SampledFunction {
            f: Arc::new(move |y| f(y - s)),
            df: self
                .df
                .clone()
                .map(|d| Arc::new(move |y: f64| d(y - s)) as RealFn),
            d2f: self
                .d2f
                .clone()
                .map(|d| Arc::new(move |y: f64| d(y - s)) as RealFn),
            decay: self.decay,
            support: self.support.map(|r| r + s.abs()),
        }
    }

    fn require_df(&self) -> Result<&RealFn> {
        self.df
            .as_ref()
            .ok_or_else(|| Error::Domain("this form needs f'".into()))
    }

    fn require_d2f(&self) -> Result<&RealFn> {
        self.d2f
            .as_ref()
            .ok_or_else(|| Error::Domain("this form needs f''".into()))
    }
}

/// One GL evaluation with its truncation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlEvaluation {
    pub value: f64,
    /// `|last inner term| / |sum|`.
    pub last_term_ratio: f64,
    pub truncation_warning: bool,
}

/// Grünwald-Letnikov operator with precomputed real weights.
///
/// Conjugate modes k and -k are combined into
/// `g_j = ω_0 h^{-α} w_j + 2 Σ_{k≥1} Re(ω_k h^{ik c̃ - α} (-1)^j binom(α - ik c̃, j))`,
/// so the inner sum is real by construction. For α = 1 the weights carry the
/// `ω_{k,1}` part of Δ¹ and `drift` collects `Σ_{k≠0} ω_{k,2}`.
#[derive(Debug, Clone)]
pub struct GlOperator {
    params: GLParams,
    weights: Vec<f64>,
    regime: Regime,
    c0: f64,
    drift: f64,
    omega: OmegaWeights,
}

impl GlOperator {
    pub fn new(theta: &AdmissibleTheta, params: GLParams) -> Result<GlOperator> {
        params.check()?;
        let omega = OmegaWeights::new(theta)?;
        let h = params.h;
        let n = params.j;
        let alpha = omega.alpha();
        let k_max = omega.k_max() as i64;
        let mut weights = vec![0.0; n + 1];
        let mut drift = 0.0;
        match omega.regime() {
            Regime::Sub | Regime::Super => {
                let scale = omega.omega(0).re * h.powf(-alpha);
                for (g, w) in weights.iter_mut().zip(real_gl_weights(alpha, n)) {
                    *g = scale * w;
                }
            }
            Regime::Zolotarev => {
                for k in 1..=k_max {
                    drift += 2.0 * omega.omega2(k).re;
                }
            }
        }
        for k in 1..=k_max {
            let w = match omega.regime() {
                Regime::Zolotarev => omega.omega1(k),
                _ => omega.omega(k),
            };
            if w == Complex64::new(0.0, 0.0) {
                continue;
            }
            let order = omega.mode_order(k);
            let pre = w * (-order * h.ln()).exp();
            for (g, b) in weights.iter_mut().zip(signed_binomials(order, n)) {
                *g += 2.0 * (pre * b).re;
            }
        }
        Ok(GlOperator {
            params,
            weights,
            regime: omega.regime(),
            c0: omega.c0(),
            drift,
            omega,
        })
    }

    pub fn params(&self) -> GLParams {
        self.params
    }

    /// Real weights `g_0..g_J`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    fn inner(&self, f: &SampledFunction, x: f64) -> GlEvaluation {
        let h = self.params.h;
        let mut acc = KahanSum::new();
        let mut last = 0.0;
        for (j, g) in self.weights.iter().enumerate() {
            last = g * f.eval(x - j as f64 * h);
            acc.add(last);
        }
        let value = acc.value();
        let ratio = if value != 0.0 {
            (last / value).abs()
        } else if last == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        GlEvaluation {
            value,
            last_term_ratio: ratio,
            truncation_warning: ratio > TRUNCATION_RATIO,
        }
    }

    /// Truncated GL difference at x (α ≠ 1).
    pub fn apply(&self, f: &SampledFunction, x: f64, side: Side) -> Result<GlEvaluation> {
        if self.regime == Regime::Zolotarev {
            return Err(Error::Regime(
                "use the Zolotarev difference for alpha = 1".into(),
            ));
        }
        Ok(match side {
            Side::Positive => self.inner(f, x),
            Side::Negative => self.inner(&f.reflect(), -x),
        })
    }

    /// Same sum over all modes -K..K without conjugate pairing, complex-valued.
    /// Its imaginary part measures the realness of the scheme.
    pub fn apply_unpaired(&self, f: &SampledFunction, x: f64) -> Complex64 {
        let h = self.params.h;
        let n = self.params.j;
        let k_max = self.omega.k_max() as i64;
        let samples: Vec<f64> = (0..=n).map(|j| f.eval(x - j as f64 * h)).collect();
        let mut total = Complex64::new(0.0, 0.0);
        for k in -k_max..=k_max {
            let w = match self.regime {
                Regime::Zolotarev if k == 0 => continue,
                Regime::Zolotarev => self.omega.omega1(k),
                _ => self.omega.omega(k),
            };
            let order = self.omega.mode_order(k);
            let pre = w * (-order * h.ln()).exp();
            let mut s = Complex64::new(0.0, 0.0);
            for (b, v) in signed_binomials(order, n).iter().zip(&samples) {
                s += b * v;
            }
            total += pre * s;
        }
        total
    }

    /// `Δ¹ + Δ²` at x for α = 1.
    pub fn apply_zolotarev(&self, f: &SampledFunction, x: f64, side: Side) -> Result<f64> {
        if self.regime != Regime::Zolotarev {
            return Err(Error::Regime("Zolotarev difference needs alpha = 1".into()));
        }
        match side {
            Side::Positive => self.zolotarev_positive(f, x),
            Side::Negative => self.zolotarev_positive(&f.reflect(), -x),
        }
    }

    fn zolotarev_positive(&self, f: &SampledFunction, x: f64) -> Result<f64> {
        let df = f.require_df()?;
        let d1 = self.inner(f, x).value + self.drift * df(x);
        Ok(d1 + delta2(f, x, self.params.h, self.c0)?)
    }
}

/// Largest admissible number of Δ² tail terms.
const DELTA2_MAX_TERMS: usize = 10_000_000;

/// `Δ² = -c_0 γ_E f'(x) + c_0 Σ_{j≥1} (f'(x) 1[j ≤ 1/h] - f'(x - jh)) / j`.
pub fn delta2(f: &SampledFunction, x: f64, h: f64, c0: f64) -> Result<f64> {
    let df = f.require_df()?;
    match f.decay() {
        Some(b) if b > 0.0 => {}
        _ => {
            return Err(Error::Decay(
                "Zolotarev difference needs a positive decay exponent for f'".into(),
            ))
        }
    }
    let d0 = df(x);
    let n_ind = (1.0 / h + 1e-9).floor() as usize;
    let mut acc = KahanSum::new();
    for j in 1..=n_ind {
        acc.add((d0 - df(x - j as f64 * h)) / j as f64);
    }
    let mut quiet = 0;
    let mut j = n_ind;
    loop {
        j += 1;
        if j > DELTA2_MAX_TERMS {
            return Err(Error::Decay(format!(
                "f' samples do not decay over {DELTA2_MAX_TERMS} steps of size {h}"
            )));
        }
        let term = df(x - j as f64 * h) / j as f64;
        acc.add(-term);
        if term.abs() < 1e-12 * acc.value().abs() || term == 0.0 && acc.value() == 0.0 {
            quiet += 1;
            // a sustained quiet run, not a single zero crossing of f'
            if quiet >= 64 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    Ok(c0 * (acc.value() - EULER_GAMMA * d0))
}

/// Truncated GL difference of f at x (α ≠ 1).
pub fn gl_difference(
    theta: &AdmissibleTheta,
    f: &SampledFunction,
    x: f64,
    params: GLParams,
    side: Side,
) -> Result<f64> {
    Ok(GlOperator::new(theta, params)?.apply(f, x, side)?.value)
}

/// Zolotarev GL difference `Δ¹ + Δ²` of f at x (α = 1).
pub fn gl_zolotarev(
    theta: &AdmissibleTheta,
    f: &SampledFunction,
    x: f64,
    params: GLParams,
    side: Side,
) -> Result<f64> {
    GlOperator::new(theta, params)?.apply_zolotarev(f, x, side)
}

/// Which Caputo representation to use for α ∈ (1, 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuperForm {
    /// `∫ (f'(x) - f'(x-y)) y^{-α} θ(log y) dy`
    Theta,
    /// `∫ f''(x-y) y^{1-α} γ(log y) dy`
    Gamma,
}

/// Precomputed x-independent pieces of the Caputo quadratures.
#[derive(Debug, Clone)]
pub struct CaputoEvaluator {
    theta: AdmissibleTheta,
    gamma_fn: Option<AdmissibleTheta>,
    form: SuperForm,
    /// Integral of the kernel's leading term over (0, 1].
    near: Estimate,
    /// Integral of the kernel against f'(x) over [1, ∞) (super: θ-form only;
    /// α = 1: the cosine tail).
    far: Estimate,
}

const NEAR_CUT: f64 = 1e-4;
const PIECE_TOL: f64 = 1e-12;

impl CaputoEvaluator {
    pub fn new(theta: &AdmissibleTheta) -> Result<CaputoEvaluator> {
        Self::with_form(theta, SuperForm::Gamma)
    }

    pub fn with_form(theta: &AdmissibleTheta, form: SuperForm) -> Result<CaputoEvaluator> {
        let a = theta.alpha();
        let p = theta.period();
        let th = |u: f64| theta.eval(u);
        let back = |u: f64| theta.eval(-u);
        let mut gamma_fn = None;
        let (near, far) = match theta.regime() {
            Regime::Sub => (
                periodic_laplace(&back, 1.0 - a, p, 1e-14)?,
                Estimate::default(),
            ),
            Regime::Super => match form {
                SuperForm::Theta => (
                    periodic_laplace(&back, 2.0 - a, p, 1e-14)?,
                    periodic_laplace(&th, a - 1.0, p, 1e-14)?,
                ),
                SuperForm::Gamma => {
                    let g = gamma_theta(theta)?;
                    let gb = |u: f64| g.eval(-u);
                    let near = periodic_laplace(&gb, 2.0 - a, p, 1e-14)?;
                    gamma_fn = Some(g);
                    (near, Estimate::default())
                }
            },
            Regime::Zolotarev => {
                let u_end = 40.0;
                let cosm1 = |u: f64| {
                    let s = (0.5 * (-u).exp()).sin();
                    -2.0 * s * s * back(u)
                };
                let near = adaptive_pieces(&cosm1, &period_breaks(0.0, u_end, p), 1e-14);
                let osc = |y: f64| y.cos() / y * th(y.ln());
                (near, oscillatory_tail(&osc, 1.0, PI / 2.0, 60))
            }
        };
        Ok(CaputoEvaluator {
            theta: theta.clone(),
            gamma_fn,
            form,
            near,
            far,
        })
    }

    /// `∫_1^∞ g(x - y) y^{-p} w(log y) dy`.
    fn far_part<G: Fn(f64) -> f64, W: Fn(f64) -> f64>(
        &self,
        g: &G,
        x: f64,
        p: f64,
        w: &W,
        support: Option<f64>,
    ) -> Estimate {
        let integrand = |y: f64| g(x - y) * y.powf(-p) * w(y.ln());
        match support {
            Some(r) => {
                let lo = (x - r).max(1.0);
                let hi = x + r;
                if hi <= lo {
                    return Estimate::default();
                }
                let n = ((hi - lo) / 0.5).ceil().max(1.0) as usize;
                let breaks: Vec<f64> = (0..=n)
                    .map(|i| lo + (hi - lo) * i as f64 / n as f64)
                    .collect();
                adaptive_pieces(&integrand, &breaks, PIECE_TOL)
            }
            None => {
                let per = self.theta.period();
                let mapped = |u: f64| {
                    let y = u.exp();
                    g(x - y) * y.powf(1.0 - p) * w(u)
                };
                let breaks = period_breaks(0.0, 60.0, per.min(1.0));
                adaptive_pieces(&mapped, &breaks, PIECE_TOL)
            }
        }
    }

    /// Caputo-form derivative of f at x with an error estimate.
    pub fn eval(&self, f: &SampledFunction, x: f64, side: Side) -> Result<Estimate> {
        let est = match side {
            Side::Positive => self.eval_positive(f, x)?,
            Side::Negative => self.eval_positive(&f.reflect(), -x)?,
        };
        if !est.value.is_finite() || est.error > CAPUTO_TOLERANCE {
            return Err(Error::Quadrature(format!(
                "Caputo quadrature at x={x}: value {} with error estimate {:.2e}",
                est.value, est.error
            )));
        }
        Ok(est)
    }

    fn eval_positive(&self, f: &SampledFunction, x: f64) -> Result<Estimate> {
        let a = self.theta.alpha();
        let p = self.theta.period();
        let th = |u: f64| self.theta.eval(u);
        let sup = f.support();
        let breaks = |u_end: f64| period_breaks(0.0, u_end, p);
        match self.theta.regime() {
            Regime::Sub => {
                let df = f.require_df()?;
                let d0 = df(x);
                let near = |u: f64| {
                    let y = (-u).exp();
                    (df(x - y) - d0) * (-(1.0 - a) * u).exp() * th(-u)
                };
                let mut e = self.near.scale(d0);
                e += adaptive_pieces(&near, &breaks(40.0 / (2.0 - a)), PIECE_TOL);
                e += self.far_part(&|z| df(z), x, a, &th, sup);
                Ok(e)
            }
            Regime::Super => match self.form {
                SuperForm::Theta => {
                    let df = f.require_df()?;
                    let d2f = f.require_d2f()?;
                    let (d0, dd0) = (df(x), d2f(x));
                    // remainder f'(x) - f'(x-y) - y f''(x), trapezoidal below NEAR_CUT
                    let rem = |y: f64| {
                        if y < NEAR_CUT {
                            0.5 * y * (d2f(x - y) - dd0)
                        } else {
                            d0 - df(x - y) - y * dd0
                        }
                    };
                    let near = |u: f64| rem((-u).exp()) * ((a - 1.0) * u).exp() * th(-u);
                    let mut b = breaks(40.0 / (3.0 - a));
                    b.push(-NEAR_CUT.ln());
                    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
                    let mut e = self.near.scale(dd0);
                    e += adaptive_pieces(&near, &b, PIECE_TOL);
                    e += self.far.scale(d0);
                    e += self.far_part(&|z| df(z), x, a, &th, sup).scale(-1.0);
                    Ok(e)
                }
                SuperForm::Gamma => {
                    let d2f = f.require_d2f()?;
                    let g = self.gamma_fn.as_ref().expect("gamma form precomputed");
                    let gm = |u: f64| g.eval(u);
                    let dd0 = d2f(x);
                    let near = |u: f64| {
                        let y = (-u).exp();
                        (d2f(x - y) - dd0) * (-(2.0 - a) * u).exp() * gm(-u)
                    };
                    let mut e = self.near.scale(dd0);
                    e += adaptive_pieces(&near, &breaks(40.0 / (3.0 - a)), PIECE_TOL);
                    e += self.far_part(&|z| d2f(z), x, a - 1.0, &gm, sup);
                    Ok(e)
                }
            },
            Regime::Zolotarev => {
                let df = f.require_df()?;
                let d0 = df(x);
                let near = |u: f64| (d0 - df(x - (-u).exp())) * th(-u);
                let mut e = self.near.scale(d0);
                e += adaptive_pieces(&near, &breaks(40.0), PIECE_TOL);
                e += self.far.scale(d0);
                e += self.far_part(&|z| df(z), x, 1.0, &th, sup).scale(-1.0);
                Ok(e)
            }
        }
    }
}

/// γ as an (unvalidated) log-periodic series sharing θ's α and c.
fn gamma_theta(theta: &AdmissibleTheta) -> Result<AdmissibleTheta> {
    let d = theta.gamma_fn_coeffs()?;
    Ok(AdmissibleTheta::from_parts(theta.alpha(), theta.c(), d))
}

fn period_breaks(a: f64, b: f64, period: f64) -> Vec<f64> {
    let n = ((b - a) / period).ceil().max(1.0) as usize;
    let mut v: Vec<f64> = (0..n).map(|i| a + i as f64 * period).collect();
    v.push(b);
    v
}

/// Caputo-form semi-fractional derivative of f at x, with error estimate.
pub fn caputo_eval(
    theta: &AdmissibleTheta,
    f: &SampledFunction,
    x: f64,
    side: Side,
) -> Result<Estimate> {
    CaputoEvaluator::new(theta)?.eval(f, x, side)
}

/// `(1/2π) ∫ e^{-ikx} m(k) f̂(k) dk` where m is the positive-side multiplier
/// (or its reflection `m(-k)` for the negative side).
pub fn fourier_oracle(
    weights: &OmegaWeights,
    f_hat: &dyn Fn(f64) -> Complex64,
    x: f64,
    side: Side,
) -> Result<Estimate> {
    let cutoff = spectral_cutoff(f_hat)?;
    let s = match side {
        Side::Positive => 1.0,
        Side::Negative => -1.0,
    };
    let integrand = |k: f64| {
        let phase = Complex64::from_polar(1.0, -k * x);
        (phase * weights.symbol(s * k) * f_hat(k)).re
    };
    let mut breaks: Vec<f64> = (1..=40).map(|m| 2f64.powi(-m)).collect();
    let steps = cutoff.ceil() as usize;
    breaks.extend((1..=steps).map(|i| i as f64));
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut pos = vec![0.0];
    pos.extend(breaks.iter().copied());
    let neg: Vec<f64> = pos.iter().rev().map(|b| -b).collect();
    let mut e = adaptive_pieces(&integrand, &neg, 1e-13);
    e += adaptive_pieces(&integrand, &pos, 1e-13);
    let e = e.scale(1.0 / (2.0 * PI));
    if !e.value.is_finite() || e.error > CAPUTO_TOLERANCE {
        return Err(Error::Quadrature(format!(
            "Fourier inversion at x={x}: error estimate {:.2e}",
            e.error
        )));
    }
    Ok(e)
}

/// Smallest power of two beyond which `|f̂(k)| (1 + |k|)²` is negligible.
fn spectral_cutoff(f_hat: &dyn Fn(f64) -> Complex64) -> Result<f64> {
    let scale = f_hat(0.0).norm().max(f_hat(1.0).norm()).max(1e-300);
    let small = |k: f64| {
        [k, -k, 1.5 * k, -1.5 * k]
            .iter()
            .all(|&q| f_hat(q).norm() * (1.0 + q.abs()).powi(2) < 1e-17 * scale)
    };
    let mut l = 1.0;
    while l <= 4096.0 {
        if small(l) {
            return Ok(l);
        }
        l *= 2.0;
    }
    Err(Error::Quadrature(
        "f-hat does not decay fast enough for spectral inversion".into(),
    ))
}

/// Which evaluators to run on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Methods {
    pub gl: bool,
    pub caputo: bool,
    pub fourier: bool,
}

impl Methods {
    pub const ALL: Methods = Methods {
        gl: true,
        caputo: true,
        fourier: true,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeRow {
    pub x: f64,
    pub gl: Option<f64>,
    pub caputo: Option<f64>,
    pub fourier: Option<f64>,
}

/// Evaluates the selected methods at every x in parallel. Each point is
/// computed independently, so results do not depend on the worker count.
pub fn evaluate_grid(
    theta: &AdmissibleTheta,
    f: &SampledFunction,
    f_hat: Option<&(dyn Fn(f64) -> Complex64 + Sync)>,
    xs: &[f64],
    params: GLParams,
    side: Side,
    methods: Methods,
) -> Result<Vec<DerivativeRow>> {
    use rayon::prelude::*;
    let op = if methods.gl {
        Some(GlOperator::new(theta, params)?)
    } else {
        None
    };
    let cap = if methods.caputo {
        Some(CaputoEvaluator::new(theta)?)
    } else {
        None
    };
    let weights = OmegaWeights::new(theta)?;
    if methods.fourier && f_hat.is_none() {
        return Err(Error::Domain("the Fourier oracle needs f-hat".into()));
    }
    xs.par_iter()
        .map(|&x| {
            let gl = match &op {
                Some(o) if o.regime() == Regime::Zolotarev => Some(o.apply_zolotarev(f, x, side)?),
                Some(o) => Some(o.apply(f, x, side)?.value),
                None => None,
            };
            let caputo = match &cap {
                Some(c) => Some(c.eval(f, x, side)?.value),
                None => None,
            };
            let fourier = match f_hat {
                Some(fh) if methods.fourier => Some(fourier_oracle(&weights, fh, x, side)?.value),
                _ => None,
            };
            Ok(DerivativeRow {
                x,
                gl,
                caputo,
                fourier,
            })
        })
        .collect()
}

/// Reference implementation of the classical Grünwald-Letnikov derivative
/// `h^{-α} Σ_j w_j f(x - jh)` with `w_j = (1 - (α+1)/j) w_{j-1}`.
pub fn textbook_gl(alpha: f64, f: &dyn Fn(f64) -> f64, x: f64, h: f64, j: usize) -> f64 {
    let scale = h.powf(-alpha);
    let mut acc = KahanSum::new();
    for (i, w) in real_gl_weights(alpha, j).into_iter().enumerate() {
        acc.add(scale * w * f(x - i as f64 * h));
    }
    acc.value()
}

/// Independent check of the Δ² limit: `c_0 [ Γ(1-h)^{-1} ∫_0^∞ (f'(x) - f'(x-y)) y^{-h-1} dy - f'(x)/h ]`.
pub fn delta2_limit(f: &SampledFunction, x: f64, h: f64, c0: f64) -> Result<f64> {
    let df = f.require_df()?;
    let d0 = df(x);
    // (0,1] in y = e^{-u}: integrand (f'(x) - f'(x-y)) y^{-h}
    let near = |u: f64| (d0 - df(x - (-u).exp())) * (h * u).exp();
    let near_est = adaptive(&near, 0.0, 40.0, 1e-13, 1e-13, 2000);
    // [1,∞): f'(x) y^{-h-1} integrates to f'(x)/h
    let far_f = |y: f64| df(x - y) * y.powf(-h - 1.0);
    let r = f.support().unwrap_or(60.0);
    let far = if x + r > 1.0 {
        adaptive(&far_f, 1.0, (x + r).max(1.0), 1e-13, 1e-13, 2000).value
    } else {
        0.0
    };
    let integral = near_est.value + d0 / h - far;
    let g = crate::special::gamma(1.0 - h)?;
    Ok(c0 * (integral / g - d0 / h))
}
