//! Telemetry CSV with a fixed header and nine significant digits.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mission::{TelemetryLog, TelemetryRecord};

pub const HEADER: &str =
    "t,theta,theta_dot,phi,phi_dot,theta_t_dot,x,y,vx,vy,theta_r,theta_des,psi_hat,tau,waypoint_index";

/// Formats like C's `%.9g`.
pub fn format_g9(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if v.is_nan() {
        return "nan".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let m = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (8 - exp).max(0) as usize;
    trim_fraction(&format!("{v:.decimals$}")).to_string()
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn write_record(out: &mut impl Write, r: &TelemetryRecord) -> std::io::Result<()> {
    let fields = [
        r.t,
        r.theta,
        r.theta_dot,
        r.phi,
        r.phi_dot,
        r.theta_t_dot,
        r.x,
        r.y,
        r.vx,
        r.vy,
        r.theta_r,
        r.theta_des,
        r.psi_hat,
        r.tau,
    ];
    for v in fields {
        write!(out, "{},", format_g9(v))?;
    }
    writeln!(out, "{}", r.waypoint_index)
}

pub fn write_telemetry(out: &mut impl Write, log: &TelemetryLog) -> Result<()> {
    writeln!(out, "{HEADER}")?;
    for r in &log.records {
        write_record(out, r)?;
    }
    Ok(())
}

pub fn write_telemetry_file(path: &Path, log: &TelemetryLog) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut out = std::io::BufWriter::new(file);
    write_telemetry(&mut out, log)?;
    out.flush()?;
    Ok(())
}

/// Parses the output of [`write_telemetry`].
pub fn parse_telemetry(text: &str) -> Result<Vec<TelemetryRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == HEADER => {}
        _ => return Err(Error::config("telemetry header mismatch")),
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let bad = || Error::config(format!("telemetry row {}: malformed `{line}`", i + 1));
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 15 {
                return Err(bad());
            }
            let f = |k: usize| cols[k].parse::<f64>().map_err(|_| bad());
            Ok(TelemetryRecord {
                t: f(0)?,
                theta: f(1)?,
                theta_dot: f(2)?,
                phi: f(3)?,
                phi_dot: f(4)?,
                theta_t_dot: f(5)?,
                x: f(6)?,
                y: f(7)?,
                vx: f(8)?,
                vy: f(9)?,
                theta_r: f(10)?,
                theta_des: f(11)?,
                psi_hat: f(12)?,
                tau: f(13)?,
                waypoint_index: cols[14].parse::<usize>().map_err(|_| bad())?,
            })
        })
        .collect()
}
