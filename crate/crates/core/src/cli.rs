//! Command-line front end: JSON run configs, dispatch, CSV and manifest output.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use log::warn;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::admissible::{classical_theta, AdmissibleTheta, Regime, ThetaJson};
use crate::derivatives::{evaluate_grid, GLParams, Methods, SampledFunction, Side};
use crate::diffusion::{
    compute_drift, density_oracle, solve, tail_diagnostics, DiffusionProblem, LevySpec,
    ProblemFields,
};
use crate::error::{Error, Result};
use crate::log_char::{
    h_factor, log_grid, psi_eval, shift_dn, zolotarev_continuity_error, OmegaWeights, ShiftMethod,
};
use crate::output::{content_hash, csv_string, fmt_e12, theta_hash};
use crate::presets;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    /// Check a θ for admissibility and write a JSON report.
    ValidateTheta,
    /// Tabulate ψ (and h for α ≠ 1) on the log grid.
    EvalPsi,
    /// Semi-fractional derivative of the Gaussian by GL, Caputo and Fourier.
    EvalDerivative,
    /// Finite-difference solution of the diffusion problem.
    SolveDiffusion,
    /// Density by Fourier inversion of the characteristic function.
    Density,
    /// α → 1 shift consistency and continuity errors.
    ContinuityCheck,
    /// Tail fits, convexity counts and the drift constant.
    Diagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    Gl,
    Caputo,
    Fourier,
    #[default]
    All,
}

impl MethodChoice {
    fn methods(self) -> Methods {
        match self {
            MethodChoice::Gl => Methods {
                gl: true,
                caputo: false,
                fourier: false,
            },
            MethodChoice::Caputo => Methods {
                gl: false,
                caputo: true,
                fourier: false,
            },
            MethodChoice::Fourier => Methods {
                gl: false,
                caputo: false,
                fourier: true,
            },
            MethodChoice::All => Methods::ALL,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "semifrac",
    version,
    about = "Semi-fractional derivatives and diffusion"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandKind,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true)]
    pub h: Option<f64>,
    #[arg(long = "J", global = true)]
    pub j: Option<usize>,
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    #[arg(long = "grid-b", global = true)]
    pub grid_b: Option<f64>,
    /// Comma-separated output times.
    #[arg(long, global = true, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    #[arg(long, global = true, value_enum)]
    pub method: Option<MethodChoice>,
}

/// Explicit diffusion problem. Step sizes and the domain come from the
/// top-level `h`, `dt` and `grid_b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemJson {
    #[serde(default)]
    pub v: f64,
    #[serde(rename = "D1", default)]
    pub d1: f64,
    #[serde(rename = "D2", default)]
    pub d2: f64,
    #[serde(default)]
    pub theta1: Option<ThetaJson>,
    #[serde(default)]
    pub theta2: Option<ThetaJson>,
    #[serde(rename = "T1", default = "default_t1")]
    pub t1: f64,
    #[serde(rename = "T2")]
    pub t2: f64,
    #[serde(default = "default_ghost")]
    pub ghost: usize,
}

fn default_t1() -> f64 {
    0.01
}
fn default_ghost() -> usize {
    50
}
fn default_h() -> f64 {
    0.01
}
fn default_j() -> usize {
    200
}
fn default_dt() -> f64 {
    0.01
}
fn default_b() -> f64 {
    5.0
}
fn default_points() -> usize {
    1001
}
fn default_side() -> Side {
    Side::Positive
}
fn default_alpha_seq() -> Vec<f64> {
    vec![0.8, 0.9, 0.99, 0.999]
}

/// Fully resolved run configuration; also the on-disk config format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub command: Option<CommandKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<ThetaJson>,
    /// Named θ, see [`theta_preset`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemJson>,
    /// Named problem, see [`problem_preset`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem_preset: Option<String>,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(rename = "J", default = "default_j")]
    pub j: usize,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_b")]
    pub grid_b: f64,
    /// Points of the evaluation grid on [-grid_b, grid_b].
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default)]
    pub times: Option<Vec<f64>>,
    #[serde(default)]
    pub method: MethodChoice,
    #[serde(default = "default_side")]
    pub side: Side,
    #[serde(default = "default_alpha_seq")]
    pub alpha_seq: Vec<f64>,
}

/// Named θ: `sine-perturbed:<α>`, `classical:<α>`, `sine-perturbed-zolotarev`,
/// `one-sided-diffusion`, `symmetric-diffusion`.
pub fn theta_preset(name: &str) -> Result<AdmissibleTheta> {
    let param = |s: &str| -> Result<f64> {
        s.parse()
            .map_err(|_| Error::Parse(format!("theta_preset `{name}`: bad order `{s}`")))
    };
    if let Some(a) = name.strip_prefix("sine-perturbed:") {
        return presets::sine_perturbed(param(a)?);
    }
    if let Some(a) = name.strip_prefix("classical:") {
        let a = param(a)?;
        return classical_theta(a, Regime::of(a)?);
    }
    match name {
        "sine-perturbed-zolotarev" => presets::sine_perturbed_zolotarev(),
        "one-sided-diffusion" => presets::one_sided_diffusion_theta(),
        "symmetric-diffusion" => presets::symmetric_diffusion_theta(),
        _ => Err(Error::Parse(format!("unknown theta_preset `{name}`"))),
    }
}

/// Named problem and its usual output times: `one-sided`, `symmetric`, and
/// their constant-θ `-control` variants.
pub fn problem_preset(name: &str) -> Result<(ProblemFields, Vec<f64>)> {
    let (base, control) = match name.strip_suffix("-control") {
        Some(b) => (b, true),
        None => (name, false),
    };
    let (p, times) = match base {
        "one-sided" => (presets::one_sided_problem()?, vec![0.01, 0.5, 0.7, 1.0]),
        "symmetric" => (
            presets::symmetric_problem()?,
            vec![0.01, 0.3, 0.35, 0.4, 0.45],
        ),
        _ => return Err(Error::Parse(format!("unknown problem_preset `{name}`"))),
    };
    let p = if control { p.stable_control()? } else { p };
    Ok((p.fields().clone(), times))
}

fn check_range(config: &RunConfig) -> Result<()> {
    let bad = |what: String| Err(Error::Range(what));
    if !(config.h > 0.0 && config.h < 1.0) {
        return bad(format!("h must lie in (0,1), got {}", config.h));
    }
    if config.j < 1 {
        return bad("J must be at least 1".into());
    }
    if !(config.dt > 0.0 && config.dt.is_finite()) {
        return bad(format!("dt must be positive, got {}", config.dt));
    }
    if !(config.grid_b > 0.0 && config.grid_b.is_finite()) {
        return bad(format!("grid_b must be positive, got {}", config.grid_b));
    }
    if !(2..=1_000_000).contains(&config.points) {
        return bad(format!(
            "points must lie in [2, 1e6], got {}",
            config.points
        ));
    }
    if let Some(t) = &config.times {
        if t.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return bad(format!("times must be positive, got {t:?}"));
        }
    }
    if let Some(a) = config
        .alpha_seq
        .iter()
        .find(|a| !(**a > 0.0 && **a < 2.0) || **a == 1.0)
    {
        return bad(format!(
            "alpha_seq entries must lie in (0,1) or (1,2), got {a}"
        ));
    }
    if config.theta.is_some() && config.theta_preset.is_some() {
        return Err(Error::Parse(
            "give either theta or theta_preset, not both".into(),
        ));
    }
    if config.problem.is_some() && config.problem_preset.is_some() {
        return Err(Error::Parse(
            "give either problem or problem_preset, not both".into(),
        ));
    }
    Ok(())
}

fn parse_json(text: &str, origin: &str) -> Result<RunConfig> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{origin}: {e}")))
}

/// Reads the config file (if any), applies flag overrides and fills defaults.
pub fn parse_config(cli: &Cli) -> Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            parse_json(&text, &path.display().to_string())?
        }
        None => parse_json("{}", "defaults")?,
    };
    match config.command {
        Some(c) if c != cli.command => {
            return Err(Error::Parse(format!(
                "config command {c:?} conflicts with subcommand {:?}",
                cli.command
            )))
        }
        _ => config.command = Some(cli.command),
    }
    if let Some(h) = cli.h {
        config.h = h;
    }
    if let Some(j) = cli.j {
        config.j = j;
    }
    if let Some(dt) = cli.dt {
        config.dt = dt;
    }
    if let Some(b) = cli.grid_b {
        config.grid_b = b;
    }
    if let Some(t) = &cli.times {
        config.times = Some(t.clone());
    }
    if let Some(m) = cli.method {
        config.method = m;
    }
    check_range(&config)?;
    if config.times.is_none() {
        if let Some(name) = &config.problem_preset {
            config.times = Some(problem_preset(name)?.1);
        } else if let Some(p) = &config.problem {
            config.times = Some(vec![p.t1, p.t2]);
        }
    }
    Ok(config)
}

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<RunConfig> {
        let c = parse_json(text, "config")?;
        check_range(&c)?;
        Ok(c)
    }

    fn theta(&self) -> Result<AdmissibleTheta> {
        if let Some(name) = &self.theta_preset {
            return theta_preset(name);
        }
        match &self.theta {
            Some(j) => Ok(AdmissibleTheta::from_json(j)?.theta),
            None => Err(Error::Parse(
                "this command needs `theta` or `theta_preset`".into(),
            )),
        }
    }

    fn problem(&self) -> Result<DiffusionProblem> {
        let mut fields = if let Some(name) = &self.problem_preset {
            problem_preset(name)?.0
        } else if let Some(p) = &self.problem {
            let th = |t: &Option<ThetaJson>| -> Result<Option<AdmissibleTheta>> {
                t.as_ref()
                    .map(|j| AdmissibleTheta::from_json(j).map(|v| v.theta))
                    .transpose()
            };
            ProblemFields {
                v: p.v,
                d1: p.d1,
                d2: p.d2,
                theta1: th(&p.theta1)?,
                theta2: th(&p.theta2)?,
                t1: p.t1,
                t2: p.t2,
                ghost: p.ghost,
                ..ProblemFields::default()
            }
        } else {
            return Err(Error::Parse(
                "this command needs `problem` or `problem_preset`".into(),
            ));
        };
        fields.h = self.h;
        fields.dt = self.dt;
        fields.b = self.grid_b;
        fields.validate()
    }

    fn grid(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| -self.grid_b + 2.0 * self.grid_b * i as f64 / (n - 1) as f64)
            .collect()
    }
}

/// Collects written files and their hashes for the manifest.
struct Writer {
    dir: PathBuf,
    files: BTreeMap<String, String>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Writer> {
        std::fs::create_dir_all(dir)?;
        Ok(Writer {
            dir: dir.to_path_buf(),
            files: BTreeMap::new(),
        })
    }

    fn bytes(&mut self, name: &str, data: &[u8]) -> Result<()> {
        std::fs::write(self.dir.join(name), data)?;
        self.files.insert(name.to_string(), content_hash(data));
        Ok(())
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
        self.bytes(name, csv_string(header, rows).as_bytes())
    }

    fn json(&mut self, name: &str, v: &impl Serialize) -> Result<()> {
        let mut s = serde_json::to_string_pretty(v)?;
        s.push('\n');
        self.bytes(name, s.as_bytes())
    }
}

/// Result of a run: process exit status plus the files written.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub files: BTreeMap<String, String>,
}

/// Exit status for an error: 3 for numerical failures, 2 for rejected input.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        3
    } else {
        2
    }
}

fn time_tag(t: f64) -> String {
    format!("{t:.4}")
}

/// Executes a resolved config, writing the config echo, CSVs and a manifest
/// into `out`. Errors are also recorded in `error.json`.
pub fn run(config: &RunConfig, out: &Path) -> Result<RunOutcome> {
    let mut w = Writer::new(out)?;
    w.json("config.resolved.json", config)?;
    let mut manifest = json!({ "version": env!("CARGO_PKG_VERSION") });
    let result = dispatch(config, &mut w, &mut manifest);
    let exit_code = match &result {
        Ok(code) => *code,
        Err(e) => {
            w.json(
                "error.json",
                &json!({ "error": e.kind(), "message": e.to_string() }),
            )?;
            exit_code(e)
        }
    };
    manifest["command"] = serde_json::to_value(config.command)?;
    manifest["exit_code"] = json!(exit_code);
    manifest["files"] = serde_json::to_value(&w.files)?;
    w.json("manifest.json", &manifest)?;
    match result {
        Ok(_) => Ok(RunOutcome {
            exit_code,
            files: w.files,
        }),
        Err(e) => Err(e),
    }
}

fn dispatch(config: &RunConfig, w: &mut Writer, manifest: &mut Value) -> Result<i32> {
    let command = config
        .command
        .ok_or_else(|| Error::Parse("no command given".into()))?;
    match command {
        CommandKind::ValidateTheta => validate_theta_cmd(config, w, manifest),
        CommandKind::EvalPsi => eval_psi_cmd(config, w, manifest),
        CommandKind::EvalDerivative => eval_derivative_cmd(config, w, manifest),
        CommandKind::SolveDiffusion => solve_cmd(config, w, manifest),
        CommandKind::Density => density_cmd(config, w, manifest),
        CommandKind::ContinuityCheck => continuity_cmd(config, w, manifest),
        CommandKind::Diagnostics => diagnostics_cmd(config, w, manifest),
    }
}

fn validate_theta_cmd(config: &RunConfig, w: &mut Writer, manifest: &mut Value) -> Result<i32> {
    let outcome = match (&config.theta, &config.theta_preset) {
        (Some(j), _) => AdmissibleTheta::from_json(j).map(|v| (v.theta, v.warnings)),
        (None, Some(name)) => theta_preset(name).map(|t| (t, Vec::new())),
        (None, None) => {
            return Err(Error::Parse(
                "validate-theta needs `theta` or `theta_preset`".into(),
            ))
        }
    };
    let (report, code) = match outcome {
        Ok((theta, warnings)) => {
            manifest["theta_hashes"] = json!({ "theta": theta_hash(&theta)? });
            (
                json!({ "status": "accepted", "violations": [], "warnings": warnings, "theta": theta.to_json() }),
                0,
            )
        }
        Err(Error::Rejected(v)) => (
            json!({
                "status": "rejected",
                "violations": v,
                "messages": v.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            }),
            2,
        ),
        Err(e) => return Err(e),
    };
    w.json("theta_report.json", &report)?;
    Ok(code)
}

fn eval_psi_cmd(config: &RunConfig, w: &mut Writer, manifest: &mut Value) -> Result<i32> {
    let theta = config.theta()?;
    manifest["theta_hashes"] = json!({ "theta": theta_hash(&theta)? });
    let weights = OmegaWeights::new(&theta)?;
    let pos = log_grid();
    let xs: Vec<f64> = pos
        .iter()
        .rev()
        .map(|x| -x)
        .chain([0.0])
        .chain(pos.iter().copied())
        .collect();
    let with_h = theta.regime() != Regime::Zolotarev;
    let mut rows = Vec::with_capacity(xs.len());
    for &x in &xs {
        let p = psi_eval(&weights, x);
        let mut row = vec![x, p.re, p.im];
        if with_h {
            let h = if x == 0.0 {
                num_complex::Complex64::new(f64::NAN, f64::NAN)
            } else {
                h_factor(&weights, x)?
            };
            row.extend([h.re, h.im]);
        }
        rows.push(row);
    }
    let header: &[&str] = if with_h {
        &["x", "psi_re", "psi_im", "h_re", "h_im"]
    } else {
        &["x", "psi_re", "psi_im"]
    };
    w.csv("psi.csv", header, &rows)?;
    Ok(0)
}

fn eval_derivative_cmd(config: &RunConfig, w: &mut Writer, manifest: &mut Value) -> Result<i32> {
    let theta = config.theta()?;
    manifest["theta_hashes"] = json!({ "theta": theta_hash(&theta)? });
    let params = GLParams::new(config.h, config.j)?;
    let mut warnings = Vec::new();
    if let Some(m) = params.coupling_warning() {
        warn!("{m}");
        warnings.push(m);
    }
    let methods = config.method.methods();
    let f = SampledFunction::gaussian();
    let f_hat = SampledFunction::gaussian_hat;
    let rows = evaluate_grid(
        &theta,
        &f,
        Some(&f_hat),
        &config.grid(),
        params,
        config.side,
        methods,
    )?;
    let mut header = vec!["x"];
    for (on, name) in [
        (methods.gl, "gl"),
        (methods.caputo, "caputo"),
        (methods.fourier, "fourier"),
    ] {
        if on {
            header.push(name);
        }
    }
    let table: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            std::iter::once(r.x)
                .chain(r.gl)
                .chain(r.caputo)
                .chain(r.fourier)
                .collect()
        })
        .collect();
    w.csv("derivative.csv", &header, &table)?;
    manifest["warnings"] = json!(warnings);
    Ok(0)
}

fn problem_hashes(p: &DiffusionProblem) -> Result<Value> {
    let f = p.fields();
    let h = |t: &Option<AdmissibleTheta>| -> Result<Value> {
        Ok(match t {
            Some(t) => json!(theta_hash(t)?),
            None => Value::Null,
        })
    };
    Ok(json!({ "theta1": h(&f.theta1)?, "theta2": h(&f.theta2)? }))
}

fn times(config: &RunConfig) -> Result<Vec<f64>> {
    config
        .times
        .clone()
        .ok_or_else(|| Error::Parse("no output times".into()))
}

fn solve_cmd(config: &RunConfig, w: &mut Writer, manifest: &mut Value) -> Result<i32> {
    let problem = config.problem()?;
    manifest["theta_hashes"] = problem_hashes(&problem)?;
    let sol = solve(&problem, &times(config)?)?;
    for (t, p) in sol.times.iter().zip(&sol.p) {
        let rows: Vec<Vec<f64>> = sol.x.iter().zip(p).map(|(x, v)| vec![*x, *v]).collect();
        w.csv(
            &format!("density_t{}.csv", time_tag(*t)),
            &["x", "p"],
            &rows,
        )?;
    }
    let diag: Vec<Vec<f64>> = sol
        .diagnostics
        .iter()
        .map(|d| {
            vec![
                d.step as f64,
                d.t,
                d.mass,
                d.mass_extended,
                d.min,
                d.max_abs,
            ]
        })
        .collect();
    w.csv(
        "diagnostics.csv",
        &["step", "t", "mass", "mass_extended", "min", "max_abs"],
        &diag,
    )?;
    let last = sol.diagnostics.last();
    manifest["warnings"] = json!(sol.warnings);
    manifest["final_mass"] = json!(last.map(|d| fmt_e12(d.mass)));
    manifest["min_density"] = json!(fmt_e12(
        sol.diagnostics
            .iter()
            .map(|d| d.min)
            .fold(f64::INFINITY, f64::min)
    ));
    Ok(0)
}

fn density_cmd(config: &RunConfig, w: &mut Writer, manifest: &mut Value) -> Result<i32> {
    let problem = config.problem()?;
    manifest["theta_hashes"] = problem_hashes(&problem)?;
    let xs = problem.grid();
    for t in times(config)? {
        let p = density_oracle(&problem, t, &xs)?;
        let rows: Vec<Vec<f64>> = xs.iter().zip(&p).map(|(x, v)| vec![*x, *v]).collect();
        w.csv(&format!("oracle_t{}.csv", time_tag(t)), &["x", "p"], &rows)?;
    }
    Ok(0)
}

fn continuity_cmd(config: &RunConfig, w: &mut Writer, manifest: &mut Value) -> Result<i32> {
    let theta = config.theta()?;
    manifest["theta_hashes"] = json!({ "theta": theta_hash(&theta)? });
    let rows = zolotarev_continuity_error(&theta, &config.alpha_seq, &config.grid())?;
    let mut table = Vec::with_capacity(rows.len());
    for r in &rows {
        let q = shift_dn(&theta.with_alpha(r.alpha_n)?, ShiftMethod::Quadrature)?;
        table.push(vec![r.alpha_n, r.shift, q, r.sup_error]);
    }
    w.csv(
        "continuity.csv",
        &["alpha_n", "shift_series", "shift_quadrature", "sup_error"],
        &table,
    )?;
    let decreasing = rows.windows(2).all(|p| p[1].sup_error < p[0].sup_error);
    manifest["continuity_decreasing"] = json!(decreasing);
    Ok(0)
}

fn diagnostics_cmd(config: &RunConfig, w: &mut Writer, manifest: &mut Value) -> Result<i32> {
    let problem = config.problem()?;
    manifest["theta_hashes"] = problem_hashes(&problem)?;
    let ts = times(config)?;
    let sol = solve(&problem, &ts)?;
    let mut tails = Vec::new();
    for &t in &sol.times {
        match tail_diagnostics(&sol, t) {
            Ok(r) => tails.push(serde_json::to_value(r)?),
            Err(Error::Window(m)) => tails.push(json!({ "t": t, "error": m })),
            Err(e) => return Err(e),
        }
    }
    let drift = match compute_drift(
        &LevySpec::from_problem(&problem),
        problem.fields().v,
        problem.regime(),
    ) {
        Ok(a) => json!({ "value": a }),
        Err(e) if e.is_numerical() => json!({ "error": e.to_string() }),
        Err(e) => return Err(e),
    };
    w.json(
        "diagnostics.json",
        &json!({ "tails": tails, "drift": drift, "warnings": sol.warnings }),
    )?;
    Ok(0)
}

/// Entry point shared by the binary and the tests; returns the exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let config = match parse_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            if let Ok(mut w) = Writer::new(&cli.out) {
                let _ = w.json(
                    "error.json",
                    &json!({ "error": e.kind(), "message": e.to_string() }),
                );
            }
            return exit_code(&e);
        }
    };
    match run(&config, &cli.out) {
        Ok(o) => o.exit_code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
