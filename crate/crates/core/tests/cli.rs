use std::path::Path;

use semifrac::cli::{main_with, RunConfig};
use semifrac::output::fmt_e12;

fn run(args: &[&str], out: &Path) -> i32 {
    let mut v = vec!["semifrac".to_string()];
    v.extend(args.iter().map(|s| s.to_string()));
    v.push("--out".into());
    v.push(out.display().to_string());
    main_with(v)
}

fn read_json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn read_csv(p: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(p).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn growth_violation_exits_2_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("theta.json");
    std::fs::write(
        &cfg,
        r#"{"theta": {"alpha": 0.5, "c": 23.140692632779267, "coeffs": [[0, 1, 0], [1, 0, -0.45]]}}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    assert_eq!(
        run(&["validate-theta", "--config", cfg.to_str().unwrap()], &out),
        2
    );
    let report = read_json(&out.join("theta_report.json"));
    assert_eq!(report["status"], "rejected");
    assert_eq!(report["violations"][0]["kind"], "Growth");
    assert!(out.join("manifest.json").exists());
}

#[test]
fn rejected_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    assert_eq!(run(&["eval-derivative", "--h", "0"], &out), 2);
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"alpha_max": 1}"#).unwrap();
    assert_eq!(
        run(&["eval-psi", "--config", cfg.to_str().unwrap()], &out),
        2
    );
    let err = read_json(&out.join("error.json"));
    assert_eq!(err["error"], "ParseError");
    assert!(err["message"].as_str().unwrap().contains("alpha_max"));
}

#[test]
fn derivative_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("d.json");
    std::fs::write(
        &cfg,
        r#"{"theta_preset": "sine-perturbed:1.5", "points": 21}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    assert_eq!(
        run(
            &["eval-derivative", "--config", cfg.to_str().unwrap()],
            &out
        ),
        0
    );
    let (header, rows) = read_csv(&out.join("derivative.csv"));
    assert_eq!(header, ["x", "gl", "caputo", "fourier"]);
    assert_eq!(rows.len(), 21);
    for row in &rows {
        for cell in row {
            let v: f64 = cell.parse().unwrap();
            assert_eq!(&fmt_e12(v), cell);
        }
        let gl: f64 = row[1].parse().unwrap();
        let caputo: f64 = row[2].parse().unwrap();
        assert!((gl - caputo).abs() < 5e-2);
    }
    let bytes = std::fs::read(out.join("derivative.csv")).unwrap();
    assert!(bytes.windows(2).any(|w| w == b"\r\n"));
}

#[test]
fn echoed_config_reparses_identically() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"theta_preset": "sine-perturbed:0.5"}"#).unwrap();
    assert_eq!(
        run(
            &["eval-psi", "--config", cfg.to_str().unwrap(), "--J", "300"],
            &out
        ),
        0
    );
    let echo = std::fs::read_to_string(out.join("config.resolved.json")).unwrap();
    let a = RunConfig::from_json_str(&echo).unwrap();
    assert_eq!(a.j, 300);
    let again = serde_json::to_string_pretty(&a).unwrap() + "\n";
    assert_eq!(again, echo);
    let (header, rows) = read_csv(&out.join("psi.csv"));
    assert_eq!(header, ["x", "psi_re", "psi_im", "h_re", "h_im"]);
    assert_eq!(rows.len(), 99);
}

#[test]
fn minimal_problem_gets_defaults() {
    let c = RunConfig::from_json_str(
        r#"{"command": "solve-diffusion", "problem": {"D1": -1, "theta1": {"alpha": 0.5, "c": 23.140692632779267, "coeffs": [[0, 1.7724538509055159, 0], [1, 0, -0.25]]}, "T2": 1}}"#,
    )
    .unwrap();
    assert_eq!(c.h, 0.01);
    assert_eq!(c.dt, 0.01);
    assert_eq!(c.problem.as_ref().unwrap().ghost, 50);
}

#[test]
fn solve_diffusion_writes_snapshots_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("p.json");
    std::fs::write(&cfg, r#"{"problem_preset": "one-sided"}"#).unwrap();
    let out = dir.path().join("out");
    assert_eq!(
        run(
            &["solve-diffusion", "--config", cfg.to_str().unwrap()],
            &out
        ),
        0
    );
    for t in ["0.0100", "0.5000", "0.7000", "1.0000"] {
        let (header, rows) = read_csv(&out.join(format!("density_t{t}.csv")));
        assert_eq!(header, ["x", "p"]);
        assert_eq!(rows.len(), 1001);
    }
    let m = read_json(&out.join("manifest.json"));
    assert_eq!(m["exit_code"], 0);
    assert_eq!(m["files"].as_object().unwrap().len(), 6);
    assert!(m["theta_hashes"]["theta1"].as_str().unwrap().len() == 64);
}
