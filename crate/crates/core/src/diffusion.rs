//! Explicit finite-difference solver for semi-fractional diffusion, with the
//! Fourier-inversion density oracle, drift constants and tail diagnostics.

use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::admissible::{AdmissibleTheta, Regime, StPetersburgTheta};
use crate::derivatives::{GLParams, GlOperator};
use crate::error::{Error, Result};
use crate::log_char::{char_function, OmegaWeights};
use crate::quadrature::{adaptive, gauss_legendre, oscillatory_tail, Estimate};
use crate::stable::stable_cdf;

/// Raw problem fields before validation; `Default` holds the usual numerics
/// (b = 5, T1 = 0.01, dt = h = 0.01, 50 ghost points, v = 0).
#[derive(Debug, Clone)]
pub struct ProblemFields {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
    pub theta1: Option<AdmissibleTheta>,
    pub theta2: Option<AdmissibleTheta>,
    pub b: f64,
    pub t1: f64,
    pub t2: f64,
    pub dt: f64,
    pub h: f64,
    pub ghost: usize,
}

impl Default for ProblemFields {
    fn default() -> Self {
        ProblemFields {
            v: 0.0,
            d1: 0.0,
            d2: 0.0,
            theta1: None,
            theta2: None,
            b: 5.0,
            t1: 0.01,
            t2: 1.0,
            dt: 0.01,
            h: 0.01,
            ghost: 50,
        }
    }
}

impl ProblemFields {
    pub fn validate(self) -> Result<DiffusionProblem> {
        validate_problem(self)
    }
}

/// A validated semi-fractional diffusion problem.
#[derive(Debug, Clone)]
pub struct DiffusionProblem {
    fields: ProblemFields,
    alpha: f64,
    c: f64,
}

/// Checks the sign rule, shared (α, c) and the numeric ranges.
pub fn validate_problem(fields: ProblemFields) -> Result<DiffusionProblem> {
    let f = &fields;
    for (name, v) in [("v", f.v), ("D1", f.d1), ("D2", f.d2)] {
        if !v.is_finite() {
            return Err(Error::Domain(format!("{name} must be finite")));
        }
    }
    if f.d1 != 0.0 && f.theta1.is_none() {
        return Err(Error::Domain("D1 != 0 needs theta1".into()));
    }
    if f.d2 != 0.0 && f.theta2.is_none() {
        return Err(Error::Domain("D2 != 0 needs theta2".into()));
    }
    let (alpha, c) = match (&f.theta1, &f.theta2) {
        (Some(a), Some(b)) => {
            if a.alpha() != b.alpha() || a.c() != b.c() {
                return Err(Error::Domain(format!(
                    "theta1 (alpha={}, c={}) and theta2 (alpha={}, c={}) must share alpha and c",
                    a.alpha(),
                    a.c(),
                    b.alpha(),
                    b.c()
                )));
            }
            (a.alpha(), a.c())
        }
        (Some(a), None) | (None, Some(a)) => (a.alpha(), a.c()),
        (None, None) => return Err(Error::Domain("at least one theta is required".into())),
    };
    if f.d1 + f.d2 == 0.0 {
        return Err(Error::Sign("D1 + D2 must be nonzero".into()));
    }
    if alpha < 1.0 && (f.d1 > 0.0 || f.d2 > 0.0) {
        return Err(Error::Sign(format!(
            "alpha = {alpha} < 1 needs D1, D2 <= 0 (got D1={}, D2={})",
            f.d1, f.d2
        )));
    }
    if alpha >= 1.0 && (f.d1 < 0.0 || f.d2 < 0.0) {
        return Err(Error::Sign(format!(
            "alpha = {alpha} >= 1 needs D1, D2 >= 0 (got D1={}, D2={})",
            f.d1, f.d2
        )));
    }
    if !(f.b > 0.0 && f.b.is_finite()) {
        return Err(Error::Domain(format!("b must be positive, got {}", f.b)));
    }
    if !(f.t1 > 0.0 && f.t2 > f.t1 && f.t2.is_finite()) {
        return Err(Error::Domain(format!(
            "need 0 < T1 < T2 (T1={}, T2={})",
            f.t1, f.t2
        )));
    }
    if !(f.dt > 0.0 && f.dt.is_finite()) {
        return Err(Error::Domain(format!("dt must be positive, got {}", f.dt)));
    }
    if !(f.h > 0.0 && f.h < 1.0) {
        return Err(Error::Domain(format!("h must lie in (0,1), got {}", f.h)));
    }
    if f.ghost < 1 {
        return Err(Error::Domain("ghost must be at least 1".into()));
    }
    Ok(DiffusionProblem { fields, alpha, c })
}

impl DiffusionProblem {
    pub fn fields(&self) -> &ProblemFields {
        &self.fields
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn regime(&self) -> Regime {
        Regime::of(self.alpha).expect("validated alpha")
    }

    /// Copy with different step sizes.
    pub fn with_steps(&self, dt: f64, h: f64) -> Result<DiffusionProblem> {
        ProblemFields {
            dt,
            h,
            ..self.fields.clone()
        }
        .validate()
    }

    /// Copy with both θ replaced by their constant parts.
    pub fn stable_control(&self) -> Result<DiffusionProblem> {
        let f = &self.fields;
        let strip = |t: &Option<AdmissibleTheta>| -> Result<Option<AdmissibleTheta>> {
            t.as_ref().map(crate::presets::stable_control).transpose()
        };
        ProblemFields {
            theta1: strip(&f.theta1)?,
            theta2: strip(&f.theta2)?,
            ..f.clone()
        }
        .validate()
    }

    /// D1 = D2, θ1 = θ2 and v = 0: the solution is even in x.
    pub fn is_symmetric(&self) -> bool {
        let f = &self.fields;
        f.v == 0.0 && f.d1 == f.d2 && f.theta1 == f.theta2
    }

    /// Half-width of the reporting grid in steps.
    fn m(&self) -> usize {
        (self.fields.b / self.fields.h).round() as usize
    }

    /// Extended grid `x_i = i h`, `|i| ≤ m + ghost`.
    pub fn extended_grid(&self) -> Vec<f64> {
        let n = (self.m() + self.fields.ghost) as i64;
        (-n..=n).map(|i| i as f64 * self.fields.h).collect()
    }

    /// Reporting grid `x_i = i h`, `|i| ≤ m`.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.m() as i64;
        (-n..=n).map(|i| i as f64 * self.fields.h).collect()
    }

    /// Stable parameters `(β, σ)` of the classical-derivative solution at T1.
    pub fn stable_start(&self) -> Result<(f64, f64)> {
        let f = &self.fields;
        let a = self.alpha;
        if a == 1.0 {
            return Err(Error::Regime("grid solver supports alpha != 1 only".into()));
        }
        let s = f.d1 + f.d2;
        let sigma_a = -s * (PI * a / 2.0).cos() * f.t1;
        Ok(((f.d1 - f.d2) / s, sigma_a.powf(1.0 / a)))
    }

    fn weights(&self) -> Result<(Option<OmegaWeights>, Option<OmegaWeights>)> {
        let f = &self.fields;
        let w1 = match &f.theta1 {
            Some(t) if f.d1 != 0.0 => Some(OmegaWeights::new(t)?),
            _ => None,
        };
        let w2 = match &f.theta2 {
            Some(t) if f.d2 != 0.0 => Some(OmegaWeights::new(t)?),
            _ => None,
        };
        Ok((w1, w2))
    }
}

/// Cell averages `(F(x + h/2) - F(x - h/2)) / h` of the stable law at T1 on
/// the extended grid. Symmetric problems are mirrored exactly.
pub fn initial_condition(problem: &DiffusionProblem) -> Result<Vec<f64>> {
    let (beta, sigma) = problem.stable_start()?;
    let a = problem.alpha();
    let h = problem.fields.h;
    let x = problem.extended_grid();
    let cdf = |y: f64| stable_cdf(y, a, beta, sigma);
    let cell = |y: f64| -> Result<f64> { Ok((cdf(y + 0.5 * h)? - cdf(y - 0.5 * h)?) / h) };
    if problem.is_symmetric() {
        let mid = x.len() / 2;
        let right: Vec<f64> = x[mid..].iter().map(|&y| cell(y)).collect::<Result<_>>()?;
        let mut out: Vec<f64> = right[1..].iter().rev().copied().collect();
        out.extend(right);
        Ok(out)
    } else {
        x.iter().map(|&y| cell(y)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepDiagnostics {
    pub step: usize,
    pub t: f64,
    /// Trapezoid mass over the reporting grid.
    pub mass: f64,
    /// Trapezoid mass over the extended grid.
    pub mass_extended: f64,
    /// Minimum over the reporting grid.
    pub min: f64,
    pub max_abs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DensitySolution {
    pub x: Vec<f64>,
    pub times: Vec<f64>,
    /// `p[i][j]` is the density at `times[i]`, `x[j]`.
    pub p: Vec<Vec<f64>>,
    pub diagnostics: Vec<StepDiagnostics>,
    pub warnings: Vec<String>,
}

impl DensitySolution {
    pub fn slice(&self, t: f64) -> Option<&[f64]> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() < 1e-9)
            .map(|i| self.p[i].as_slice())
    }
}

fn trapezoid(p: &[f64], h: f64) -> f64 {
    if p.len() < 2 {
        return 0.0;
    }
    let inner: f64 = p[1..p.len() - 1].iter().sum();
    h * (inner + 0.5 * (p[0] + p[p.len() - 1]))
}

/// Pre-run heuristic `dt (|D1|+|D2|) h^{-α} Σ|ω_k| S_J ≤ 1`; returns a warning if violated.
pub fn cfl_warning(problem: &DiffusionProblem) -> Result<Option<String>> {
    let f = &problem.fields;
    let (w1, w2) = problem.weights()?;
    let omega_sum = |w: &Option<OmegaWeights>| -> f64 {
        w.as_ref()
            .map(|w| {
                let k = w.k_max() as i64;
                (-k..=k).map(|k| w.omega(k).norm()).sum::<f64>()
            })
            .unwrap_or(0.0)
    };
    let j = problem.extended_grid().len() - 1;
    let s_j: f64 = crate::special::real_gl_weights(problem.alpha, j)
        .iter()
        .map(|w| w.abs())
        .sum();
    let omega = omega_sum(&w1).max(omega_sum(&w2));
    let q = f.dt * (f.d1.abs() + f.d2.abs()) * f.h.powf(-problem.alpha) * omega * s_j;
    Ok((q > 1.0).then(|| format!("stability heuristic exceeds 1: {q:.3}")))
}

/// Explicit Euler with GL spatial operators; snapshots at `times` (each must
/// lie on the time grid `T1 + n dt` within [T1, T2]).
pub fn solve(problem: &DiffusionProblem, times: &[f64]) -> Result<DensitySolution> {
    if problem.regime() == Regime::Zolotarev {
        return Err(Error::Regime("grid solver supports alpha != 1 only".into()));
    }
    let f = &problem.fields;
    let n_steps = ((f.t2 - f.t1) / f.dt).round() as usize;
    let mut wanted = Vec::with_capacity(times.len());
    for &t in times {
        let s = (t - f.t1) / f.dt;
        let n = s.round();
        if (s - n).abs() > 1e-6 || n < 0.0 || n as usize > n_steps {
            return Err(Error::Domain(format!(
                "output time {t} is not on the time grid T1 + n*dt within [T1, T2]"
            )));
        }
        wanted.push((n as usize, t));
    }
    let mut warnings = Vec::new();
    if let Some(w) = cfl_warning(problem)? {
        warn!("{w}");
        warnings.push(w);
    }

    let x_ext = problem.extended_grid();
    let len = x_ext.len();
    let params = GLParams::new(f.h, len - 1)?;
    let op1 = match &f.theta1 {
        Some(t) if f.d1 != 0.0 => Some(GlOperator::new(t, params)?),
        _ => None,
    };
    let op2 = match &f.theta2 {
        Some(t) if f.d2 != 0.0 => Some(GlOperator::new(t, params)?),
        _ => None,
    };
    let g1 = op1.as_ref().map(|o| o.weights().to_vec());
    let g2 = op2.as_ref().map(|o| o.weights().to_vec());

    let m = problem.m();
    let ghost = f.ghost;
    let report = ghost..ghost + 2 * m + 1;
    let mut p = initial_condition(problem)?;
    let mut out_p = Vec::new();
    let mut out_t = Vec::new();
    let mut diagnostics = Vec::with_capacity(n_steps + 1);
    let mut history: Vec<f64> = Vec::new();

    let record = |p: &[f64], step: usize| StepDiagnostics {
        step,
        t: f.t1 + step as f64 * f.dt,
        mass: trapezoid(&p[report.clone()], f.h),
        mass_extended: trapezoid(p, f.h),
        min: p[report.clone()]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min),
        max_abs: p.iter().fold(0.0, |a: f64, v| a.max(v.abs())),
    };

    for step in 0..=n_steps {
        let d = record(&p, step);
        if !d.max_abs.is_finite() || p.iter().any(|v| v.is_nan()) {
            return Err(Error::Instability {
                step,
                detail: "non-finite density".into(),
            });
        }
        let start = history.len().saturating_sub(10);
        if let Some(low) = history[start..].iter().copied().reduce(f64::min) {
            if d.max_abs > 2.0 * low {
                return Err(Error::Instability {
                    step,
                    detail: format!(
                        "sup norm grew from {low:.6e} to {:.6e} within 10 steps",
                        d.max_abs
                    ),
                });
            }
        }
        history.push(d.max_abs);
        diagnostics.push(d);
        for &(n, t) in &wanted {
            if n == step {
                out_p.push(p[report.clone()].to_vec());
                out_t.push(t);
            }
        }
        if step == n_steps {
            break;
        }
        let (d1, d2, v, h, dt) = (f.d1, f.d2, f.v, f.h, f.dt);
        let cur = &p;
        let next: Vec<f64> = (0..len)
            .into_par_iter()
            .map(|i| {
                let mut rate = 0.0;
                if let Some(g) = &g1 {
                    let mut s = 0.0;
                    for j in 0..=i {
                        s += g[j] * cur[i - j];
                    }
                    rate += d1 * s;
                }
                if let Some(g) = &g2 {
                    let mut s = 0.0;
                    for j in 0..len - i {
                        s += g[j] * cur[i + j];
                    }
                    rate += d2 * s;
                }
                if v != 0.0 {
                    let up = if v > 0.0 {
                        let left = if i > 0 { cur[i - 1] } else { 0.0 };
                        (cur[i] - left) / h
                    } else {
                        let right = if i + 1 < len { cur[i + 1] } else { 0.0 };
                        (right - cur[i]) / h
                    };
                    rate -= v * up;
                }
                cur[i] + dt * rate
            })
            .collect();
        p = next;
    }
    Ok(DensitySolution {
        x: problem.grid(),
        times: out_t,
        p: out_p,
        diagnostics,
        warnings,
    })
}

/// Panel layout for the density oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Subdivision factor applied to every panel.
    pub refine: usize,
    /// Stop where `|φ(k)|` falls below this.
    pub cutoff: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            refine: 1,
            cutoff: 1e-18,
        }
    }
}

/// `p(x, t) = (1/π) ∫_0^∞ Re(e^{-ikx} φ(k)) dk` with `φ = exp(t ψ_total)`.
pub fn density_oracle(problem: &DiffusionProblem, t: f64, x: &[f64]) -> Result<Vec<f64>> {
    density_oracle_with(problem, t, x, OracleOptions::default())
}

pub fn density_oracle_with(
    problem: &DiffusionProblem,
    t: f64,
    x: &[f64],
    opts: OracleOptions,
) -> Result<Vec<f64>> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("oracle needs t > 0, got {t}")));
    }
    let f = &problem.fields;
    let (w1, w2) = problem.weights()?;
    let phi = |k: f64| char_function(w1.as_ref(), w2.as_ref(), f.d1, f.d2, f.v, k, t);

    let mut k_max = 1.0;
    while phi(k_max).norm() >= opts.cutoff || phi(1.5 * k_max).norm() >= opts.cutoff {
        k_max *= 2.0;
        if k_max > 1e9 {
            return Err(Error::Quadrature(
                "characteristic function does not decay".into(),
            ));
        }
    }
    let x_abs = x.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let width = (8.0 / x_abs).min(1.0) / opts.refine as f64;
    let mut edges: Vec<f64> = (0..=40).rev().map(|m| 2f64.powi(-m)).collect();
    edges.insert(0, 0.0);
    let mut k = 1.0;
    while k < k_max {
        k = (k + width).min(k_max);
        edges.push(k);
    }
    if opts.refine > 1 {
        let r = opts.refine;
        let coarse = edges.clone();
        edges = vec![coarse[0]];
        for w in coarse.windows(2) {
            for s in 1..=r {
                edges.push(w[0] + (w[1] - w[0]) * s as f64 / r as f64);
            }
        }
    }

    // Gauss-Legendre nodes on each panel; φ is cached once per node
    let (gx, gw) = gauss_legendre(20);
    let mut nodes = Vec::with_capacity(edges.len() * gx.len());
    for e in edges.windows(2) {
        let (a, b) = (e[0], e[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (xi, wi) in gx.iter().zip(&gw) {
            let kk = mid + half * xi;
            nodes.push((kk, half * wi, phi(kk)));
        }
    }
    let vals: Vec<f64> = x
        .par_iter()
        .map(|&xv| {
            let mut s = 0.0;
            for &(kk, w, ph) in &nodes {
                s += w * (Complex64::from_polar(1.0, -kk * xv) * ph).re;
            }
            s / PI
        })
        .collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Quadrature("non-finite oracle density".into()));
    }
    Ok(vals)
}

/// Regime-dependent compensator in the drift integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Compensator {
    /// `y / (1 + y²)`
    Sub,
    /// `y / (1 + y²) - y`
    Super,
    /// `y / (1 + y²) - sin y`
    Zolotarev,
}

impl Compensator {
    pub fn for_regime(r: Regime) -> Compensator {
        match r {
            Regime::Sub => Compensator::Sub,
            Regime::Super => Compensator::Super,
            Regime::Zolotarev => Compensator::Zolotarev,
        }
    }
}

/// A one-sided Lévy measure on (0, ∞), log-periodic in the sense of its tail.
pub trait LevyMeasure {
    fn log_period(&self) -> f64;
    /// `∫ g(y) dφ(y)` over `e^a ≤ y < e^b`.
    fn integrate_log_window(&self, g: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Estimate;
    /// `∫ sin(y) dφ(y)` over `y ≥ y0`.
    fn sin_tail(&self, y0: f64) -> Estimate;
}

/// `dφ(y) = w y^{-α-1} (αθ - θ')(log y) dy`, the measure with tail `w r^{-α} θ(log r)`.
#[derive(Debug, Clone)]
pub struct DensityMeasure {
    pub theta: AdmissibleTheta,
    pub weight: f64,
}

impl DensityMeasure {
    fn log_density(&self, u: f64) -> f64 {
        let a = self.theta.alpha();
        self.weight * (-a * u).exp() * (a * self.theta.eval(u) - self.theta.derivative(u))
    }
}

impl LevyMeasure for DensityMeasure {
    fn log_period(&self) -> f64 {
        self.theta.period()
    }

    fn integrate_log_window(&self, g: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Estimate {
        let f = |u: f64| g(u.exp()) * self.log_density(u);
        adaptive(&f, a, b, 1e-15, 1e-13, 400)
    }

    fn sin_tail(&self, y0: f64) -> Estimate {
        let f = |y: f64| y.sin() * self.log_density(y.ln()) / y;
        oscillatory_tail(&f, y0, 0.0, 60)
    }
}

/// The discrete measure with atoms `φ({2^k}) = 2^{-k}`, `k ∈ ℤ`.
#[derive(Debug, Clone, Copy, Default)]
pub struct StPetersburgMeasure;

impl StPetersburgMeasure {
    pub fn theta(&self) -> StPetersburgTheta {
        StPetersburgTheta
    }
}

impl LevyMeasure for StPetersburgMeasure {
    fn log_period(&self) -> f64 {
        2f64.ln()
    }

    fn integrate_log_window(&self, g: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Estimate {
        let l2 = 2f64.ln();
        let lo = (a / l2 - 1e-9).ceil() as i32;
        let hi = (b / l2 - 1e-9).ceil() as i32;
        let value = (lo..hi).map(|k| g(2f64.powi(k)) * 2f64.powi(-k)).sum();
        Estimate { value, error: 0.0 }
    }

    fn sin_tail(&self, y0: f64) -> Estimate {
        let k0 = y0.log2().ceil() as i32;
        let value = (k0..k0 + 80)
            .map(|k| 2f64.powi(k).sin() * 2f64.powi(-k))
            .sum();
        Estimate {
            value,
            error: 2f64.powi(-(k0 + 79)),
        }
    }
}

/// Partial sums of a drift integral at doubled cutoffs `e^{±nP}`.
#[derive(Debug, Clone, Serialize)]
pub struct DriftReport {
    pub value: f64,
    /// `(n, S_n)`: integral over `e^{-nP} ≤ y < e^{nP}` (plus the sine tail).
    pub partial: Vec<(usize, f64)>,
}

const DRIFT_TOL: f64 = 1e-10;

/// `∫ g dφ` for the compensator g, with divergence detection by doubling the
/// number of log-periods on both ends.
pub fn compensated_integral(m: &dyn LevyMeasure, comp: Compensator) -> Result<DriftReport> {
    let p = m.log_period();
    let n_max = (700.0 / p).floor() as usize;
    let full = move |y: f64| match comp {
        Compensator::Sub => y / (1.0 + y * y),
        Compensator::Super => -y * y * y / (1.0 + y * y),
        Compensator::Zolotarev => y / (1.0 + y * y) - y.sin(),
    };
    // the sine is integrated separately above y = 1
    let upper = move |y: f64| match comp {
        Compensator::Zolotarev => y / (1.0 + y * y),
        _ => full(y),
    };
    let constant = match comp {
        Compensator::Zolotarev => -m.sin_tail(1.0).value,
        _ => 0.0,
    };
    let mut acc = 0.0;
    let mut done = 0usize;
    let mut partial: Vec<(usize, f64)> = Vec::new();
    let mut n = 1usize;
    while n <= n_max {
        for i in done..n {
            let lo = -((i + 1) as f64) * p;
            acc += m.integrate_log_window(&full, lo, lo + p).value;
            let a = i as f64 * p;
            acc += m.integrate_log_window(&upper, a, a + p).value;
        }
        done = n;
        let s = acc + constant;
        if !s.is_finite() {
            break;
        }
        if let Some(&(_, prev)) = partial.last() {
            if (s - prev).abs() <= DRIFT_TOL * s.abs().max(1.0) {
                partial.push((n, s));
                return Ok(DriftReport { value: s, partial });
            }
        }
        partial.push((n, s));
        n *= 2;
    }
    let last = partial.last().map(|p| p.1).unwrap_or(f64::NAN);
    Err(Error::Divergence(format!(
        "{comp:?} compensator: partial integrals fail to settle under cutoff doubling (last {last:.6e} at {} periods)",
        partial.last().map(|p| p.0).unwrap_or(0)
    )))
}

/// One-sided Lévy specification for the drift: θ per side and the weights |D1|, |D2|.
#[derive(Debug, Clone)]
pub struct LevySpec {
    pub theta_pos: Option<AdmissibleTheta>,
    pub theta_neg: Option<AdmissibleTheta>,
    pub weight_pos: f64,
    pub weight_neg: f64,
}

impl LevySpec {
    pub fn from_problem(p: &DiffusionProblem) -> LevySpec {
        let f = p.fields();
        LevySpec {
            theta_pos: f.theta1.clone(),
            theta_neg: f.theta2.clone(),
            weight_pos: f.d1.abs(),
            weight_neg: f.d2.abs(),
        }
    }
}

/// Drift constant `a = v + ∫ g dφ_1 - ∫ g dφ_2(-·)` aggregated over both sides.
pub fn compute_drift(spec: &LevySpec, v: f64, regime: Regime) -> Result<f64> {
    let has_pos = spec.theta_pos.is_some() && spec.weight_pos > 0.0;
    let has_neg = spec.theta_neg.is_some() && spec.weight_neg > 0.0;
    if !has_pos && !has_neg {
        return Err(Error::Domain(
            "Levy spec has no side with positive weight".into(),
        ));
    }
    let comp = Compensator::for_regime(regime);
    let mut a = v;
    if has_pos {
        let m = DensityMeasure {
            theta: spec.theta_pos.clone().unwrap(),
            weight: spec.weight_pos,
        };
        a += compensated_integral(&m, comp)?.value;
    }
    if has_neg {
        let m = DensityMeasure {
            theta: spec.theta_neg.clone().unwrap(),
            weight: spec.weight_neg,
        };
        a -= compensated_integral(&m, comp)?.value;
    }
    Ok(a)
}

/// Least-squares summary of one tail in log-log coordinates.
#[derive(Debug, Clone, Serialize)]
pub struct TailFit {
    pub points: usize,
    pub slope: f64,
    pub intercept: f64,
    /// Amplitude of the best-fitting sinusoid in the residual.
    pub amplitude: f64,
    /// Its period in log x.
    pub period: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TailSide {
    pub fit: Option<TailFit>,
    /// Why no fit was possible (too few positive values).
    pub note: Option<String>,
    /// Sign changes of the discrete second difference in the window.
    pub convexity_changes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct TailReport {
    pub t: f64,
    pub right: TailSide,
    pub left: TailSide,
}

const MIN_TAIL_POINTS: usize = 16;

/// Tail statistics on `x ∈ [1, b]` and `x ∈ [-b, -1]` at time t.
pub fn tail_diagnostics(solution: &DensitySolution, t: f64) -> Result<TailReport> {
    let p = solution
        .slice(t)
        .ok_or_else(|| Error::Window(format!("no slice at t = {t}")))?;
    let x = &solution.x;
    let right: Vec<usize> = (0..x.len()).filter(|&i| x[i] >= 1.0 - 1e-12).collect();
    let mut left: Vec<usize> = (0..x.len()).filter(|&i| x[i] <= -1.0 + 1e-12).collect();
    left.reverse();
    if right.len() < MIN_TAIL_POINTS || left.len() < MIN_TAIL_POINTS {
        return Err(Error::Window(format!(
            "tail windows hold {} and {} points, need {MIN_TAIL_POINTS}",
            right.len(),
            left.len()
        )));
    }
    Ok(TailReport {
        t,
        right: tail_side(x, p, &right),
        left: tail_side(x, p, &left),
    })
}

fn tail_side(x: &[f64], p: &[f64], idx: &[usize]) -> TailSide {
    let vals: Vec<f64> = idx.iter().map(|&i| p[i]).collect();
    let convexity_changes = convexity_changes(&vals);
    let pts: Vec<(f64, f64)> = idx
        .iter()
        .filter(|&&i| p[i] > 0.0)
        .map(|&i| (x[i].abs().ln(), p[i].ln()))
        .collect();
    if pts.len() < MIN_TAIL_POINTS {
        return TailSide {
            fit: None,
            note: Some(format!("only {} positive samples in the window", pts.len())),
            convexity_changes,
        };
    }
    TailSide {
        fit: Some(fit_tail(&pts)),
        note: None,
        convexity_changes,
    }
}

/// Sign changes of `p_{i+1} - 2p_i + p_{i-1}`, ignoring values at rounding level.
pub fn convexity_changes(p: &[f64]) -> usize {
    if p.len() < 3 {
        return 0;
    }
    let d2: Vec<f64> = p.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).collect();
    let scale = p.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let floor = 1e-13 * scale;
    let mut last = 0.0f64;
    let mut n = 0;
    for v in d2 {
        if v.abs() <= floor {
            continue;
        }
        if last != 0.0 && v.signum() != last.signum() {
            n += 1;
        }
        last = v;
    }
    n
}

fn solve4(mut a: [[f64; 5]; 4]) -> Option<[f64; 4]> {
    for c in 0..4 {
        let piv = (c..4).max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap())?;
        if a[piv][c].abs() < 1e-300 {
            return None;
        }
        a.swap(c, piv);
        for r in 0..4 {
            if r != c {
                let f = a[r][c] / a[c][c];
                let pivot_row = a[c];
                for (x, p) in a[r][c..].iter_mut().zip(&pivot_row[c..]) {
                    *x -= f * p;
                }
            }
        }
    }
    Some([
        a[0][4] / a[0][0],
        a[1][4] / a[1][1],
        a[2][4] / a[2][2],
        a[3][4] / a[3][3],
    ])
}

/// Line fit plus a joint line-and-sinusoid fit. Periods are scanned from
/// 0.2 up to the log-width of the window; longer ones are not identifiable
/// against the line.
fn fit_tail(pts: &[(f64, f64)]) -> TailFit {
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / n, sy / n);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;

    let span = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max)
        - pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let ratio = (span / 0.2).max(1.0);
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..=600 {
        let per = 0.2 * ratio.powf(i as f64 / 600.0);
        let w = 2.0 * PI / per;
        let mut m = [[0.0; 5]; 4];
        for &(u, y) in pts {
            let b = [1.0, u - mx, (w * u).cos(), (w * u).sin()];
            for r in 0..4 {
                for c in 0..4 {
                    m[r][c] += b[r] * b[c];
                }
                m[r][4] += b[r] * y;
            }
        }
        let Some(coef) = solve4(m) else { continue };
        let ssr: f64 = pts
            .iter()
            .map(|&(u, y)| {
                let f = coef[0]
                    + coef[1] * (u - mx)
                    + coef[2] * (w * u).cos()
                    + coef[3] * (w * u).sin();
                (y - f).powi(2)
            })
            .sum();
        if ssr < best.0 {
            best = (ssr, per, coef[2].hypot(coef[3]));
        }
    }
    TailFit {
        points: pts.len(),
        slope,
        intercept,
        amplitude: best.2,
        period: best.1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::admissible::classical_theta;
    use crate::presets;
    use crate::special::gamma;
    use approx::assert_relative_eq;

    #[test]
    fn sign_rules() {
        let th = presets::one_sided_diffusion_theta().unwrap();
        let base = ProblemFields {
            d1: -1.0,
            theta1: Some(th.clone()),
            ..ProblemFields::default()
        };
        assert!(base.clone().validate().is_ok());
        let bad = ProblemFields {
            d1: 1.0,
            ..base.clone()
        };
        assert!(matches!(bad.validate(), Err(Error::Sign(_))));
        let zero = ProblemFields {
            d1: 0.0,
            d2: 0.0,
            ..base.clone()
        };
        assert!(matches!(zero.validate(), Err(Error::Sign(_))));
        let t = ProblemFields {
            t1: 1.0,
            t2: 0.5,
            ..base
        };
        assert!(matches!(t.validate(), Err(Error::Domain(_))));
    }

    #[test]
    fn stable_start_scale() {
        let p = presets::one_sided_problem().unwrap();
        let (beta, sigma) = p.stable_start().unwrap();
        assert_eq!(beta, 1.0);
        assert_relative_eq!(
            sigma,
            (0.01 * (PI / 4.0).cos()).powi(2),
            max_relative = 1e-12
        );
        assert_relative_eq!(sigma, 5.0e-5, max_relative = 1e-12);
        let s = presets::symmetric_problem().unwrap();
        assert_eq!(s.stable_start().unwrap().0, 0.0);
    }

    #[test]
    fn initial_condition_mass_and_symmetry() {
        let p = presets::one_sided_problem().unwrap();
        let ic = initial_condition(&p).unwrap();
        let mass = trapezoid(&ic, p.fields().h);
        assert!((0.99..=1.01).contains(&mass), "mass {mass}");
        let s = presets::symmetric_problem().unwrap();
        let ic = initial_condition(&s).unwrap();
        let n = ic.len();
        for i in 0..n {
            assert_eq!(ic[i], ic[n - 1 - i]);
        }
    }

    #[test]
    fn constant_theta_drift_closed_form() {
        let th = classical_theta(0.5, Regime::Sub).unwrap();
        let m = DensityMeasure {
            theta: th,
            weight: 1.0,
        };
        let r = compensated_integral(&m, Compensator::Sub).unwrap();
        let c0 = 1.0 / gamma(0.5).unwrap();
        let expect = c0 * 0.5 * PI / (2.0 * (PI / 4.0).cos());
        assert_relative_eq!(r.value, expect, max_relative = 1e-9);
    }

    #[test]
    fn st_petersburg_drifts() {
        let sp = StPetersburgMeasure;
        assert!(matches!(
            compensated_integral(&sp, Compensator::Sub),
            Err(Error::Divergence(_))
        ));
        assert!(matches!(
            compensated_integral(&sp, Compensator::Super),
            Err(Error::Divergence(_))
        ));
        let r = compensated_integral(&sp, Compensator::Zolotarev).unwrap();
        assert!(r.value.is_finite());
    }

    #[test]
    fn convexity_counts() {
        let convex: Vec<f64> = (0..50).map(|i| (i as f64 * 0.1).powi(2)).collect();
        assert_eq!(convexity_changes(&convex), 0);
        let wave: Vec<f64> = (0..200).map(|i| (i as f64 * 0.1).sin()).collect();
        assert!(convexity_changes(&wave) >= 5);
    }

    #[test]
    fn tail_fit_recovers_line_and_period() {
        let pts: Vec<(f64, f64)> = (0..400)
            .map(|i| {
                let u = i as f64 * 0.01;
                (u, 0.3 - 1.5 * u + 0.05 * (2.0 * PI * u / 1.7).sin())
            })
            .collect();
        let f = fit_tail(&pts);
        assert_relative_eq!(f.period, 1.7, max_relative = 0.02);
        assert_relative_eq!(f.amplitude, 0.05, max_relative = 0.05);
        assert!(fit_tail(&pts[..100]).period <= 0.99 + 1e-12);
    }
}
