//! File formats: sweep tables (CSV out), measurements (CSV in), recovery results (JSON out).
//!
//! Every number is written with 15 significant digits in the style of C's
//! `%.15g`, independent of locale.

use std::io::{Read, Write};

use serde::Deserialize;
use thiserror::Error;

use crate::experiment::SweepTable;
use crate::solver::{DirectionalMeasurement, RecoveryResult};

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("row {row}: {message}")]
    Invalid { row: usize, message: String },
}

pub const SIGNIFICANT_DIGITS: usize = 15;

/// Formats `x` like `%.{digits}g`.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_fraction(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `format_sig` at the crate-wide precision.
pub fn num(x: f64) -> String {
    format_sig(x, SIGNIFICANT_DIGITS)
}

pub const SWEEP_COLUMNS: [&str; 8] =
    ["delta_left", "delta_right", "order_class", "correlated", "s2", "t1_S", "t2_S", "tF_S"];

/// Writes a sweep table as CSV. `tF_S` is empty when the front never reaches the partner.
pub fn write_sweep_csv<W: Write>(table: &SweepTable<f64>, out: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_COLUMNS)?;
    for r in &table.rows {
        w.write_record([
            num(r.delta_left),
            num(r.delta_right),
            r.order_class.as_str().to_string(),
            r.correlated.to_string(),
            num(r.s2),
            num(r.t1_s),
            num(r.t2_s),
            r.tf_s.map(num).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct MeasurementRow {
    phi: f64,
    u_prime: f64,
    #[serde(default)]
    sigma: Option<f64>,
}

/// Reads measurements from CSV with header `phi,u_prime,sigma` (`sigma` optional or empty).
pub fn read_measurements_csv<R: Read>(input: R) -> Result<Vec<DirectionalMeasurement<f64>>, IoError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<MeasurementRow>().enumerate() {
        let row = row?;
        let line = i + 2;
        if !row.phi.is_finite() || !row.u_prime.is_finite() {
            return Err(IoError::Invalid { row: line, message: "phi and u_prime must be finite".into() });
        }
        if let Some(s) = row.sigma {
            if !(s.is_finite() && s >= 0.0) {
                return Err(IoError::Invalid { row: line, message: "sigma must be finite and non-negative".into() });
            }
        }
        out.push(DirectionalMeasurement { phi: row.phi, u_prime: row.u_prime, sigma: row.sigma });
    }
    Ok(out)
}

/// Writes measurements in the format read by [`read_measurements_csv`].
pub fn write_measurements_csv<W: Write>(ms: &[DirectionalMeasurement<f64>], out: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["phi", "u_prime", "sigma"])?;
    for m in ms {
        w.write_record([num(m.phi), num(m.u_prime), m.sigma.map(num).unwrap_or_default()])?;
    }
    w.flush()?;
    Ok(())
}

/// Single-line JSON object with keys `speed, orientation, ubar, residual, identifiable`.
pub fn recovery_json(r: &RecoveryResult<f64>) -> String {
    let json_num = |x: f64| if x.is_finite() { num(x) } else { "null".into() };
    format!(
        "{{\"speed\":{},\"orientation\":{},\"ubar\":{},\"residual\":{},\"identifiable\":{}}}",
        json_num(r.speed),
        json_num(r.orientation),
        json_num(r.ubar),
        json_num(r.residual),
        r.identifiable
    )
}
