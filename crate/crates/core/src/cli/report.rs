//! Per-scenario summary statistics pooled over all runs of a batch.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use super::config::ScenarioConfig;
use super::csv::format_g9;
use crate::control::wrap_to_pi;
use crate::error::Error;
use crate::geometry::Vec2;
use crate::metrics::{self, Summary};
use crate::mission::{settled_change, MissionKind, TelemetryLog};

const TURN_BUCKET_TOLERANCE: f64 = 0.15;
const STATION_WINDOW: f64 = 30.0;

#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub name: String,
    pub unit: &'static str,
    pub summary: Summary,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub name: String,
    pub runs: usize,
    pub rows: Vec<MetricRow>,
    /// Command times of turns that never settled.
    pub unsettled: Vec<f64>,
}

#[derive(Default)]
struct Pool {
    order: Vec<(String, &'static str)>,
    values: Vec<Vec<f64>>,
}

impl Pool {
    fn push(&mut self, name: impl Into<String>, unit: &'static str, v: f64) {
        if !v.is_finite() {
            return;
        }
        let name = name.into();
        match self.order.iter().position(|(n, _)| *n == name) {
            Some(i) => self.values[i].push(v),
            None => {
                self.order.push((name, unit));
                self.values.push(vec![v]);
            }
        }
    }
}

fn bucket(delta: f64) -> &'static str {
    let m = delta.abs();
    if (m - FRAC_PI_2).abs() < TURN_BUCKET_TOLERANCE {
        "_90"
    } else if (m - PI).abs() < TURN_BUCKET_TOLERANCE {
        "_180"
    } else {
        ""
    }
}

fn truncated(log: &TelemetryLog, end: f64) -> TelemetryLog {
    let hi = log.records.partition_point(|r| r.t <= end);
    TelemetryLog {
        dt: log.dt,
        period: log.period,
        records: log.records[..hi].to_vec(),
    }
}

fn turn(
    pool: &mut Pool,
    unsettled: &mut Vec<f64>,
    log: &TelemetryLog,
    t: f64,
    delta: f64,
    end: f64,
    cfg: &ScenarioConfig,
) {
    if delta.abs() < 1e-9 {
        return;
    }
    let sub = truncated(log, end);
    match metrics::analyze_turn(&sub, t, delta, cfg.rise_fraction, cfg.boat.body_length) {
        Ok(ev) => {
            let b = bucket(delta);
            pool.push(format!("rise_time{b}"), "s", ev.rise_time);
            pool.push(format!("turn_travel{b}"), "BL", ev.travel_bl);
        }
        Err(Error::NotSettled { command_time }) => unsettled.push(command_time),
        Err(_) => {}
    }
}

fn common(pool: &mut Pool, log: &TelemetryLog) {
    let end = log.end_time();
    let tail = log.window(0.75 * end, end);
    if !tail.is_empty() {
        let speed = tail.iter().map(|r| r.vel().norm()).sum::<f64>() / tail.len() as f64;
        pool.push("steady_speed", "m/s", speed);
    }
    let peak = metrics::period_mean_top_velocity(log)
        .into_iter()
        .map(|(_, v)| v.abs())
        .fold(f64::NAN, f64::max);
    pool.push("peak_mean_top_velocity", "rad/s", peak);
}

fn step_metrics(
    pool: &mut Pool,
    unsettled: &mut Vec<f64>,
    log: &TelemetryLog,
    cfg: &ScenarioConfig,
) {
    let mut steps = cfg.mission.step_schedule.clone();
    steps.sort_by(|a, b| a.time.total_cmp(&b.time));
    let end = log.end_time();
    for (k, s) in steps.iter().enumerate() {
        let prev = if k == 0 { 0.0 } else { steps[k - 1].time };
        let next = steps.get(k + 1).map_or(end, |n| n.time);
        if s.time <= prev || s.time >= next {
            continue;
        }
        let observed = settled_change(log, prev, s.time, next);
        // headings differing by whole turns are the same travel direction
        let target = observed - wrap_to_pi(observed - s.delta);
        pool.push("step_change", "rad", observed);
        pool.push("step_error", "rad", observed - target);
        turn(pool, unsettled, log, s.time, target, next, cfg);
    }
}

fn waypoint_metrics(
    pool: &mut Pool,
    unsettled: &mut Vec<f64>,
    log: &TelemetryLog,
    cfg: &ScenarioConfig,
) {
    let recs = &log.records;
    let wps = &cfg.mission.waypoints;
    if recs.is_empty() || wps.is_empty() {
        return;
    }
    // (index, entry time, heading command before entry)
    let mut legs: Vec<(usize, f64, f64)> =
        vec![(recs[0].waypoint_index, recs[0].t, recs[0].theta_des)];
    for w in recs.windows(2) {
        if w[1].waypoint_index != w[0].waypoint_index {
            legs.push((w[1].waypoint_index, w[1].t, w[0].theta_des));
        }
    }
    let end = log.end_time();
    for (k, &(idx, enter, before)) in legs.iter().enumerate() {
        let leave = legs.get(k + 1).map_or(end, |l| l.1);
        let target = wps[idx.min(wps.len() - 1)];
        let window = log.window(enter, leave);

        let closest = window
            .iter()
            .map(|r| r.pos().distance(target))
            .fold(f64::NAN, f64::min);
        pool.push("closest_approach", "m", closest);

        let origin: Vec2 = if idx == 0 {
            cfg.mission.start
        } else {
            wps[idx - 1]
        };
        if let Ok(seg) =
            metrics::rms_perpendicular_error(log, origin, target, enter + 2.0 * log.period, leave)
        {
            if seg.samples > 0 {
                pool.push("segment_rms_error", "m", seg.rms_perp);
            }
        }

        if k > 0 {
            let after = window.first().map_or(before, |r| r.theta_des);
            turn(
                pool,
                unsettled,
                log,
                enter,
                wrap_to_pi(after - before),
                leave,
                cfg,
            );
        }
    }
}

fn station_metrics(pool: &mut Pool, log: &TelemetryLog, cfg: &ScenarioConfig) {
    let Some(&center) = cfg.mission.waypoints.last() else {
        return;
    };
    let end = log.end_time();
    let from = (end - STATION_WINDOW).max(0.0);
    pool.push(
        "orbit_radius",
        "m",
        metrics::orbit_radius(log, center, from, end),
    );
    let window = log.window(from, end);
    if !window.is_empty() {
        let sum = window.iter().fold(Vec2::ZERO, |acc, r| acc + r.pos());
        let mean = sum * (1.0 / window.len() as f64);
        pool.push("orbit_center_offset", "m", mean.distance(center));
    }
}

fn converge_metrics(pool: &mut Pool, log: &TelemetryLog) {
    let (Some(&(_, mean)), Some(last)) =
        (metrics::period_mean_theta(log).last(), log.records.last())
    else {
        return;
    };
    pool.push(
        "final_heading_error",
        "rad",
        wrap_to_pi(mean - last.theta_r).abs(),
    );
}

/// Pools every metric of every log; rows appear in first-seen order.
pub fn report_metrics(logs: &[TelemetryLog], cfg: &ScenarioConfig) -> Report {
    let mut pool = Pool::default();
    let mut unsettled = Vec::new();
    for log in logs.iter().filter(|l| !l.is_empty()) {
        match cfg.mission.kind {
            MissionKind::Converge => converge_metrics(&mut pool, log),
            MissionKind::StepTest => step_metrics(&mut pool, &mut unsettled, log, cfg),
            MissionKind::Waypoints => waypoint_metrics(&mut pool, &mut unsettled, log, cfg),
            MissionKind::StationKeep => station_metrics(&mut pool, log, cfg),
        }
        common(&mut pool, log);
    }
    let rows = pool
        .order
        .into_iter()
        .zip(pool.values)
        .filter_map(|((name, unit), v)| {
            metrics::summarize(&v).map(|summary| MetricRow {
                name,
                unit,
                summary,
            })
        })
        .collect();
    Report {
        name: cfg.name.clone(),
        runs: logs.iter().filter(|l| !l.is_empty()).count(),
        rows,
        unsettled,
    }
}

impl Report {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Summary> {
        self.rows
            .iter()
            .find(|r| r.name == name)
            .map(|r| &r.summary)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "scenario {}: {} run(s), {} unsettled turn(s)",
            self.name,
            self.runs,
            self.unsettled.len()
        );
        let _ = writeln!(
            s,
            "{:<24} {:<6} {:>5} {:>15} {:>15} {:>15}",
            "metric", "unit", "n", "median", "q1", "q3"
        );
        for r in &self.rows {
            let m = &r.summary;
            let _ = writeln!(
                s,
                "{:<24} {:<6} {:>5} {:>15} {:>15} {:>15}",
                r.name,
                r.unit,
                m.n,
                format_g9(m.median),
                format_g9(m.q1),
                format_g9(m.q3)
            );
        }
        s
    }

    pub fn to_dat(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "runs={}", self.runs);
        let _ = writeln!(s, "unsettled={}", self.unsettled.len());
        for r in &self.rows {
            let m = &r.summary;
            let _ = writeln!(s, "{}.n={}", r.name, m.n);
            let _ = writeln!(s, "{}.median={}", r.name, format_g9(m.median));
            let _ = writeln!(s, "{}.q1={}", r.name, format_g9(m.q1));
            let _ = writeln!(s, "{}.q3={}", r.name, format_g9(m.q3));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mission::TelemetryRecord;

    fn line_log(n: usize) -> TelemetryLog {
        let records = (0..n)
            .map(|i| {
                let t = i as f64 * 0.004;
                TelemetryRecord {
                    t,
                    x: 0.1 * t,
                    vx: 0.1,
                    ..TelemetryRecord::default()
                }
            })
            .collect();
        TelemetryLog {
            dt: 0.004,
            period: 1.0,
            records,
        }
    }

    #[test]
    fn empty_logs_give_empty_report() {
        let cfg = ScenarioConfig::default();
        assert!(report_metrics(&[], &cfg).is_empty());
        assert!(report_metrics(&[line_log(0)], &cfg).is_empty());
    }

    #[test]
    fn pools_across_logs() {
        let cfg = ScenarioConfig::parse("mission.kind = converge").unwrap();
        let rep = report_metrics(&[line_log(1000), line_log(2000)], &cfg);
        assert_eq!(rep.runs, 2);
        let speed = rep.get("steady_speed").unwrap();
        assert_eq!(speed.n, 2);
        assert!((speed.median - 0.1).abs() < 1e-12);
        assert!(rep.to_dat().contains("steady_speed.median=0.1\n"));
        assert!(rep
            .to_text()
            .lines()
            .any(|l| l.starts_with("steady_speed ")));
    }

    #[test]
    fn buckets_by_turn_size() {
        assert_eq!(bucket(FRAC_PI_2), "_90");
        assert_eq!(bucket(-PI), "_180");
        assert_eq!(bucket(1.0), "");
    }
}
