//! Python bindings for the `semifrac` crate.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use semifrac::admissible::{validate_nonnegative, AdmissibleTheta};
use semifrac::cli::{problem_preset, theta_preset};
use semifrac::derivatives::{evaluate_grid, GLParams, Methods, SampledFunction, Side};
use semifrac::diffusion::{density_oracle, solve, DiffusionProblem, ProblemFields};
use semifrac::log_char::{
    psi_eval, shift_dn, zolotarev_continuity_error, OmegaWeights, ShiftMethod,
};
use semifrac::Error;

fn to_py(e: Error) -> PyErr {
    if e.is_numerical() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn side(name: &str) -> PyResult<Side> {
    match name {
        "positive" => Ok(Side::Positive),
        "negative" => Ok(Side::Negative),
        _ => Err(PyValueError::new_err(format!(
            "side must be 'positive' or 'negative', got {name:?}"
        ))),
    }
}

/// Admissible log-periodic function θ.
#[pyclass(name = "Theta", frozen)]
struct PyTheta {
    inner: AdmissibleTheta,
    #[pyo3(get)]
    warnings: Vec<String>,
}

#[pymethods]
impl PyTheta {
    /// Validates coefficients `[(k, re, im), ...]` for `k >= 0`.
    #[new]
    fn new(alpha: f64, c: f64, coeffs: Vec<(i64, f64, f64)>) -> PyResult<Self> {
        let pairs: Vec<(i64, Complex64)> = coeffs
            .into_iter()
            .map(|(k, re, im)| (k, Complex64::new(re, im)))
            .collect();
        let v = validate_nonnegative(alpha, c, &pairs).map_err(to_py)?;
        Ok(PyTheta {
            inner: v.theta,
            warnings: v.warnings,
        })
    }

    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        Ok(PyTheta {
            inner: theta_preset(name).map_err(to_py)?,
            warnings: Vec::new(),
        })
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha()
    }

    #[getter]
    fn c(&self) -> f64 {
        self.inner.c()
    }

    #[getter]
    fn period(&self) -> f64 {
        self.inner.period()
    }

    #[getter]
    fn regime(&self) -> String {
        format!("{:?}", self.inner.regime()).to_lowercase()
    }

    fn __call__(&self, x: f64) -> f64 {
        self.inner.eval(x)
    }

    fn derivative(&self, x: f64) -> f64 {
        self.inner.derivative(x)
    }

    fn levy_tail(&self, r: f64) -> PyResult<f64> {
        self.inner.levy_tail(r).map_err(to_py)
    }

    fn coeffs(&self) -> Vec<(i64, f64, f64)> {
        self.inner.to_json().coeffs
    }

    fn __repr__(&self) -> String {
        format!(
            "Theta(alpha={}, c={}, k_max={})",
            self.inner.alpha(),
            self.inner.c(),
            self.inner.k_max()
        )
    }
}

/// ψ(x) at each x.
#[pyfunction]
fn psi(theta: &PyTheta, xs: Vec<f64>) -> PyResult<Vec<Complex64>> {
    let w = OmegaWeights::new(&theta.inner).map_err(to_py)?;
    Ok(xs.iter().map(|&x| psi_eval(&w, x)).collect())
}

/// Semi-fractional derivative of `exp(-x^2)`; returns `{method: values}`.
#[pyfunction]
#[pyo3(signature = (theta, xs, method = "all", h = 0.01, j = 200, side_name = "positive"))]
fn derivative_gaussian(
    py: Python<'_>,
    theta: &PyTheta,
    xs: Vec<f64>,
    method: &str,
    h: f64,
    j: usize,
    side_name: &str,
) -> PyResult<std::collections::BTreeMap<String, Vec<f64>>> {
    let methods = match method {
        "gl" => Methods {
            gl: true,
            caputo: false,
            fourier: false,
        },
        "caputo" => Methods {
            gl: false,
            caputo: true,
            fourier: false,
        },
        "fourier" => Methods {
            gl: false,
            caputo: false,
            fourier: true,
        },
        "all" => Methods::ALL,
        _ => return Err(PyValueError::new_err(format!("unknown method {method:?}"))),
    };
    let params = GLParams::new(h, j).map_err(to_py)?;
    let s = side(side_name)?;
    let th = theta.inner.clone();
    let rows = py
        .detach(move || {
            let f_hat = SampledFunction::gaussian_hat;
            evaluate_grid(
                &th,
                &SampledFunction::gaussian(),
                Some(&f_hat),
                &xs,
                params,
                s,
                methods,
            )
        })
        .map_err(to_py)?;
    let mut out = std::collections::BTreeMap::new();
    out.insert("x".to_string(), rows.iter().map(|r| r.x).collect());
    for (name, pick) in [
        (
            "gl",
            (|r: &semifrac::derivatives::DerivativeRow| r.gl) as fn(&_) -> Option<f64>,
        ),
        ("caputo", |r| r.caputo),
        ("fourier", |r| r.fourier),
    ] {
        let col: Option<Vec<f64>> = rows.iter().map(pick).collect();
        if let Some(c) = col {
            out.insert(name.to_string(), c);
        }
    }
    Ok(out)
}

/// Semi-fractional diffusion problem.
#[pyclass(name = "Problem", frozen)]
struct PyProblem {
    inner: DiffusionProblem,
}

#[pymethods]
impl PyProblem {
    #[new]
    #[pyo3(signature = (d1, d2, t2, theta1 = None, theta2 = None, v = 0.0, b = 5.0, t1 = 0.01, dt = 0.01, h = 0.01, ghost = 50))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        d1: f64,
        d2: f64,
        t2: f64,
        theta1: Option<PyRef<'_, PyTheta>>,
        theta2: Option<PyRef<'_, PyTheta>>,
        v: f64,
        b: f64,
        t1: f64,
        dt: f64,
        h: f64,
        ghost: usize,
    ) -> PyResult<Self> {
        let inner = ProblemFields {
            v,
            d1,
            d2,
            theta1: theta1.map(|t| t.inner.clone()),
            theta2: theta2.map(|t| t.inner.clone()),
            b,
            t1,
            t2,
            dt,
            h,
            ghost,
        }
        .validate()
        .map_err(to_py)?;
        Ok(PyProblem { inner })
    }

    /// Named problem: `one-sided`, `symmetric` or their `-control` variants.
    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        let (fields, _) = problem_preset(name).map_err(to_py)?;
        Ok(PyProblem {
            inner: fields.validate().map_err(to_py)?,
        })
    }

    fn grid(&self) -> Vec<f64> {
        self.inner.grid()
    }

    /// Explicit Euler solution; returns `(x, times, p, mass)`.
    #[allow(clippy::type_complexity)]
    fn solve(
        &self,
        py: Python<'_>,
        times: Vec<f64>,
    ) -> PyResult<(Vec<f64>, Vec<f64>, Vec<Vec<f64>>, Vec<f64>)> {
        let p = self.inner.clone();
        let sol = py.detach(move || solve(&p, &times)).map_err(to_py)?;
        let mass = sol.diagnostics.iter().map(|d| d.mass).collect();
        Ok((sol.x, sol.times, sol.p, mass))
    }

    /// Density at time t by Fourier inversion.
    fn density(&self, py: Python<'_>, t: f64, xs: Vec<f64>) -> PyResult<Vec<f64>> {
        let p = self.inner.clone();
        py.detach(move || density_oracle(&p, t, &xs)).map_err(to_py)
    }
}

/// `[(alpha_n, shift, sup_error)]` for the α → 1 approach to an α = 1 θ.
#[pyfunction]
fn continuity(
    theta: &PyTheta,
    alpha_seq: Vec<f64>,
    xs: Vec<f64>,
) -> PyResult<Vec<(f64, f64, f64)>> {
    let rows = zolotarev_continuity_error(&theta.inner, &alpha_seq, &xs).map_err(to_py)?;
    Ok(rows
        .iter()
        .map(|r| (r.alpha_n, r.shift, r.sup_error))
        .collect())
}

/// Shift constant d_n by `"series"` or `"quadrature"`.
#[pyfunction]
#[pyo3(signature = (theta, method = "series"))]
fn shift(theta: &PyTheta, method: &str) -> PyResult<f64> {
    let m = match method {
        "series" => ShiftMethod::Series,
        "quadrature" => ShiftMethod::Quadrature,
        _ => return Err(PyValueError::new_err(format!("unknown method {method:?}"))),
    };
    shift_dn(&theta.inner, m).map_err(to_py)
}

#[pyfunction]
fn gamma(z: Complex64) -> PyResult<Complex64> {
    semifrac::special::complex_gamma(z).map_err(to_py)
}

#[pymodule]
#[pyo3(name = "semifrac")]
fn semifrac_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTheta>()?;
    m.add_class::<PyProblem>()?;
    m.add_function(wrap_pyfunction!(psi, m)?)?;
    m.add_function(wrap_pyfunction!(derivative_gaussian, m)?)?;
    m.add_function(wrap_pyfunction!(continuity, m)?)?;
    m.add_function(wrap_pyfunction!(shift, m)?)?;
    m.add_function(wrap_pyfunction!(gamma, m)?)?;
    Ok(())
}
