//! CSV and manifest helpers shared by the CLI and the tests.

use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::admissible::AdmissibleTheta;
use crate::error::Result;

/// C-style `%.12e`: twelve fractional digits, signed exponent of at least two digits.
pub fn fmt_e12(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let s = format!("{v:.12e}");
    let (mant, exp) = s.split_once('e').expect("exponent present");
    let e: i32 = exp.parse().expect("integer exponent");
    let sign = if e < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", e.abs())
}

/// RFC-4180 CSV with a header row and `%.12e` numerics.
pub fn csv_string(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push_str("\r\n");
    for r in rows {
        let cells: Vec<String> = r.iter().map(|&v| fmt_e12(v)).collect();
        out.push_str(&cells.join(","));
        out.push_str("\r\n");
    }
    out
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(csv_string(header, rows).as_bytes())?;
    Ok(())
}

/// SHA-256 over git blob framing: `"blob <len>\0" + bytes`.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}

/// Content hash of a θ's canonical JSON serialization.
pub fn theta_hash(theta: &AdmissibleTheta) -> Result<String> {
    Ok(content_hash(
        serde_json::to_string(&theta.to_json())?.as_bytes(),
    ))
}
