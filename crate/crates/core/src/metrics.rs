//! Maneuvering metrics computed from telemetry.

use crate::control::unwrap_near;
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::mission::{TelemetryLog, TelemetryRecord};

/// Default rise-time threshold as a fraction of the commanded change.
pub const RISE_FRACTION: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurnEvent {
    pub command_time: f64,
    pub delta: f64,
    pub rise_time: f64,
    pub travel_distance: f64,
    /// Travel in body lengths.
    pub travel_bl: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentError {
    pub p0: Vec2,
    pub p1: Vec2,
    pub rms_perp: f64,
    pub max_perp: f64,
    pub samples: usize,
}

/// Removes 2π jumps from a sequence of wrapped angles.
pub fn unwrap_series(angles: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for a in angles {
        let v = match out.last() {
            Some(&p) => unwrap_near(a, p),
            None => a,
        };
        out.push(v);
    }
    out
}

/// Time from `command_time` until the change in travel direction reaches
/// `fraction * delta` and then stays within `(1 - fraction) * |delta|` of
/// `delta` for one full period.
pub fn rise_time(log: &TelemetryLog, command_time: f64, delta: f64, fraction: f64) -> Result<f64> {
    let not_settled = Error::NotSettled { command_time };
    let start = log.records.partition_point(|r| r.t < command_time);
    if start >= log.records.len() {
        return Err(not_settled);
    }
    let psi = unwrap_series(log.records[start..].iter().map(|r| r.psi_hat));
    let times: Vec<f64> = log.records[start..].iter().map(|r| r.t).collect();
    let base = psi[0];
    let band = (1.0 - fraction) * delta.abs();
    let reached = |i: usize| {
        let change = psi[i] - base;
        change * delta.signum() >= fraction * delta.abs() && (change - delta).abs() <= band
    };

    let mut i = 1;
    while i < psi.len() {
        if !reached(i) {
            i += 1;
            continue;
        }
        let crossing = times[i];
        let mut j = i;
        while j < psi.len() && times[j] - crossing < log.period && reached(j) {
            j += 1;
        }
        if j == psi.len() {
            // hold window runs past the end of the log
            return Err(not_settled);
        }
        if times[j] - crossing >= log.period {
            return Ok(crossing - command_time);
        }
        i = j + 1;
    }
    Err(not_settled)
}

fn position_at(records: &[TelemetryRecord], t: f64) -> Option<Vec2> {
    let i = records.partition_point(|r| r.t < t);
    if i == records.len() {
        return None;
    }
    let hi = records[i];
    if hi.t == t || i == 0 {
        return Some(hi.pos());
    }
    let lo = records[i - 1];
    Some(lo.pos().lerp(hi.pos(), (t - lo.t) / (hi.t - lo.t)))
}

/// Arc length of the position trace between two times, with the end points
/// interpolated so adjacent windows add up exactly.
pub fn travel_during_turn(log: &TelemetryLog, command_time: f64, settle_time: f64) -> f64 {
    let recs = &log.records;
    let (Some(first), Some(last)) = (recs.first(), recs.last()) else {
        return 0.0;
    };
    let from = command_time.max(first.t);
    let to = settle_time.min(last.t);
    if from >= to {
        return 0.0;
    }
    let mut prev = position_at(recs, from).expect("inside log");
    let mut length = 0.0;
    for r in log.window(from, to) {
        if r.t <= from {
            continue;
        }
        length += r.pos().distance(prev);
        prev = r.pos();
    }
    let end = position_at(recs, to).expect("inside log");
    length + end.distance(prev)
}

/// RMS and maximum distance from the positions in `[from, to]` to the
/// infinite line through `p0` and `p1`.
pub fn rms_perpendicular_error(
    log: &TelemetryLog,
    p0: Vec2,
    p1: Vec2,
    from: f64,
    to: f64,
) -> Result<SegmentError> {
    let dir = p1 - p0;
    let len = dir.norm();
    if len < 1e-9 {
        return Err(Error::DegenerateSegment);
    }
    let mut sum_sq = 0.0;
    let mut max_perp: f64 = 0.0;
    let window = log.window(from, to);
    for r in window {
        let d = (dir.cross(r.pos() - p0) / len).abs();
        sum_sq += d * d;
        max_perp = max_perp.max(d);
    }
    let rms_perp = if window.is_empty() {
        0.0
    } else {
        (sum_sq / window.len() as f64).sqrt()
    };
    Ok(SegmentError {
        p0,
        p1,
        rms_perp: rms_perp.min(max_perp),
        max_perp,
        samples: window.len(),
    })
}

/// Mean distance from `center` over `[from, to]`.
pub fn orbit_radius(log: &TelemetryLog, center: Vec2, from: f64, to: f64) -> f64 {
    let window = log.window(from, to);
    if window.is_empty() {
        return f64::NAN;
    }
    window.iter().map(|r| r.pos().distance(center)).sum::<f64>() / window.len() as f64
}

/// Rise time and travel for one commanded turn.
pub fn analyze_turn(
    log: &TelemetryLog,
    command_time: f64,
    delta: f64,
    fraction: f64,
    body_length: f64,
) -> Result<TurnEvent> {
    let rise = rise_time(log, command_time, delta, fraction)?;
    let travel = travel_during_turn(log, command_time, command_time + rise);
    Ok(TurnEvent {
        command_time,
        delta,
        rise_time: rise,
        travel_distance: travel,
        travel_bl: travel / body_length,
    })
}

/// One-period trailing mean of θ̇_t at every record from the first full
/// period on, as `(t, mean)` pairs.
pub fn period_mean_top_velocity(log: &TelemetryLog) -> Vec<(f64, f64)> {
    let p = log.period_ticks();
    if p == 0 || log.len() <= p {
        return Vec::new();
    }
    let top: Vec<f64> = log.records.iter().map(|r| r.theta + r.phi).collect();
    (p..log.len())
        .map(|i| (log.records[i].t, (top[i] - top[i - p]) / log.period))
        .collect()
}

/// One-period trailing mean of θ at every record from the first full period on.
pub fn period_mean_theta(log: &TelemetryLog) -> Vec<(f64, f64)> {
    let p = log.period_ticks();
    if p == 0 || log.len() <= p {
        return Vec::new();
    }
    let th: Vec<f64> = log.records.iter().map(|r| r.theta).collect();
    let mut out = Vec::with_capacity(log.len() - p);
    for i in p..log.len() {
        let w = &th[i - p..=i];
        let s: f64 = w.iter().sum::<f64>() - 0.5 * (w[0] + w[p]);
        out.push((log.records[i].t, s / p as f64));
    }
    out
}

/// Median and interquartile bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
}

/// Quantile by linear interpolation between order statistics of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn summarize(values: &[f64]) -> Option<Summary> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some(Summary {
        n: v.len(),
        median: quantile(&v, 0.5),
        q1: quantile(&v, 0.25),
        q3: quantile(&v, 0.75),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn log_from(dt: f64, n: usize, f: impl Fn(f64) -> (Vec2, f64)) -> TelemetryLog {
        let records = (0..n)
            .map(|i| {
                let t = i as f64 * dt;
                let (p, psi) = f(t);
                TelemetryRecord {
                    t,
                    x: p.x,
                    y: p.y,
                    psi_hat: psi,
                    ..TelemetryRecord::default()
                }
            })
            .collect();
        TelemetryLog {
            dt,
            period: 1.0,
            records,
        }
    }

    #[test]
    fn rise_time_of_instant_step() {
        let dt = 0.004;
        let log = log_from(dt, 2000, |t| (Vec2::ZERO, if t > 2.0 { 1.0 } else { 0.0 }));
        let r = rise_time(&log, 2.0, 1.0, RISE_FRACTION).unwrap();
        assert!((r - dt).abs() < 1e-9, "{r}");
    }

    #[test]
    fn rise_time_of_first_order_response() {
        let dt = 0.004;
        let tau_c = 0.8;
        let delta = FRAC_PI_2;
        let log = log_from(dt, 5000, |t| {
            let psi = if t < 1.0 {
                0.0
            } else {
                delta * (1.0 - (-(t - 1.0) / tau_c).exp())
            };
            (Vec2::ZERO, psi)
        });
        let r = rise_time(&log, 1.0, delta, 0.9).unwrap();
        assert!((r - tau_c * 10f64.ln()).abs() <= dt, "{r}");
    }

    #[test]
    fn rise_time_of_ramp() {
        let dt = 0.004;
        // reaches 0.9 at t* = 1.8 s after command
        let log = log_from(dt, 3000, |t| (Vec2::ZERO, (0.5 * t).min(1.0)));
        let r = rise_time(&log, 0.0, 1.0, 0.9).unwrap();
        assert!((r - 1.8).abs() <= dt + 1e-9, "{r}");
    }

    #[test]
    fn rise_time_requires_hold() {
        let dt = 0.004;
        // overshoots briefly at 3 s, then sits at 50%
        let log = log_from(dt, 2500, |t| {
            (
                Vec2::ZERO,
                if (3.0..3.5).contains(&t) {
                    1.0
                } else if t > 3.0 {
                    0.5
                } else {
                    0.0
                },
            )
        });
        assert!(matches!(
            rise_time(&log, 0.0, 1.0, 0.9),
            Err(Error::NotSettled { .. })
        ));
    }

    #[test]
    fn rise_time_across_branch_cut() {
        let dt = 0.004;
        // from 3π/4 turning +π/2 crosses the wrap at π
        let log = log_from(dt, 2000, |t| {
            let raw: f64 = 3.0 * PI / 4.0 + if t > 1.0 { FRAC_PI_2 } else { 0.0 };
            (Vec2::ZERO, crate::control::wrap_to_pi(raw))
        });
        assert!((rise_time(&log, 1.0, FRAC_PI_2, 0.9).unwrap() - dt).abs() < 1e-9);
    }

    #[test]
    fn travel_examples() {
        let still = log_from(0.004, 500, |_| (Vec2::new(1.0, 1.0), 0.0));
        assert_eq!(travel_during_turn(&still, 0.0, 1.5), 0.0);
        let straight = log_from(0.004, 1000, |t| (Vec2::new(0.2 * t, 0.0), 0.0));
        assert!((travel_during_turn(&straight, 0.5, 2.5) - 0.4).abs() < 1e-12);
        // quarter of the unit circle traversed in 2 s at 250 Hz
        let dt = 0.004;
        let arc = log_from(dt, 1000, |t| (Vec2::from_angle(FRAC_PI_2 * t / 2.0), 0.0));
        let l = travel_during_turn(&arc, 0.0, 2.0);
        assert!((l - FRAC_PI_2).abs() < 1e-3 && l < FRAC_PI_2, "{l}");
    }

    #[test]
    fn travel_is_additive() {
        let log = log_from(0.004, 1000, |t| (Vec2::new(t.sin(), (2.0 * t).cos()), 0.0));
        let whole = travel_during_turn(&log, 0.3, 3.1);
        let parts = travel_during_turn(&log, 0.3, 1.2345) + travel_during_turn(&log, 1.2345, 3.1);
        assert!((whole - parts).abs() < 1e-12);
    }

    #[test]
    fn perpendicular_error_examples() {
        let on_line = log_from(0.01, 100, |t| (Vec2::new(t, t), 0.0));
        let e =
            rms_perpendicular_error(&on_line, Vec2::ZERO, Vec2::new(1.0, 1.0), 0.0, 1.0).unwrap();
        assert!(e.rms_perp < 1e-15);
        let offset = log_from(0.01, 100, |t| (Vec2::new(t, 0.25), 0.0));
        let e =
            rms_perpendicular_error(&offset, Vec2::ZERO, Vec2::new(1.0, 0.0), 0.0, 1.0).unwrap();
        assert!((e.rms_perp - 0.25).abs() < 1e-15 && (e.max_perp - 0.25).abs() < 1e-15);
        assert!(matches!(
            rms_perpendicular_error(&offset, Vec2::ZERO, Vec2::new(0.0, 1e-12), 0.0, 1.0),
            Err(Error::DegenerateSegment)
        ));
    }

    #[test]
    fn orbit_examples() {
        let c = Vec2::new(0.0, 1.5);
        let ring = log_from(0.004, 1000, |t| (c + Vec2::from_angle(t) * 0.11, 0.0));
        assert!((orbit_radius(&ring, c, 0.0, 4.0) - 0.11).abs() < 1e-12);
        let alt = log_from(0.004, 1000, |t| {
            let r = if ((t / 0.004f64).round() as usize).is_multiple_of(2) {
                0.3
            } else {
                0.5
            };
            (c + Vec2::from_angle(3.0 * t) * r, 0.0)
        });
        assert!((orbit_radius(&alt, c, 0.0, 3.996) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn quartile_convention() {
        let s = summarize(&[4.0, 2.0, 1.0, 3.0]).unwrap();
        assert_eq!((s.median, s.q1, s.q3), (2.5, 1.75, 3.25));
        let one = summarize(&[7.0]).unwrap();
        assert_eq!((one.median, one.q1, one.q3), (7.0, 7.0, 7.0));
        assert!(summarize(&[]).is_none());
    }
}
