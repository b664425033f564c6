//! Batch execution: sweep points times repeats, run in parallel, written in
//! configuration order.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{ScenarioConfig, SweepPoint};
use super::csv::write_telemetry_file;
use super::report::{report_metrics, Report};
use crate::error::{Error, Result};
use crate::mission::{run_mission, TelemetryLog};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub repeats: Option<usize>,
    pub strict_settle: bool,
    pub dry_run: bool,
}

#[derive(Debug, Clone)]
pub struct PointResult {
    pub label: String,
    pub description: String,
    pub report: Report,
    pub logs: Vec<TelemetryLog>,
}

#[derive(Debug, Clone, Default)]
pub struct BatchResult {
    pub points: Vec<PointResult>,
    pub files: Vec<PathBuf>,
}

fn stem(name: &str, label: &str) -> String {
    if label.is_empty() {
        name.to_string()
    } else {
        format!("{name}_{label}")
    }
}

/// Validates every sweep point without simulating.
pub fn validate_all(cfg: &ScenarioConfig) -> Result<Vec<SweepPoint>> {
    let points = cfg.points()?;
    for p in &points {
        p.scenario.validate()?;
    }
    Ok(points)
}

pub fn run_batch(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<BatchResult> {
    let points = validate_all(cfg)?;
    if opts.repeats == Some(0) {
        return Err(Error::config("repeats must be at least 1"));
    }
    let repeats = opts.repeats.unwrap_or(cfg.repeats);
    if opts.dry_run {
        return Ok(BatchResult::default());
    }

    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..repeats).map(move |r| (p, r)))
        .collect();
    let logs: Vec<TelemetryLog> = jobs
        .par_iter()
        .map(|&(p, _)| {
            let s = &points[p].scenario;
            run_mission(&s.boat, &s.controller, &s.mission)
        })
        .collect::<Result<_>>()?;

    let out_dir = opts.out_dir.clone().unwrap_or_else(|| cfg.out_dir.clone());
    std::fs::create_dir_all(&out_dir)?;
    let mut result = BatchResult::default();
    let mut logs = logs.into_iter();
    for (pi, point) in points.iter().enumerate() {
        let point_logs: Vec<TelemetryLog> = logs.by_ref().take(repeats).collect();
        let base = stem(&cfg.name, &point.label);
        for (r, log) in point_logs.iter().enumerate() {
            let file = out_dir.join(format!("{base}_r{r:02}.csv"));
            write_telemetry_file(&file, log)?;
            result.files.push(file);
        }
        let report = report_metrics(&point_logs, &point.scenario);
        result.files.extend(write_report(&out_dir, &base, &report)?);
        result.points.push(PointResult {
            label: point.label.clone(),
            description: cfg.sweep_description(pi),
            report,
            logs: point_logs,
        });
    }

    if opts.strict_settle {
        if let Some(&command_time) = result
            .points
            .iter()
            .flat_map(|p| &p.report.unsettled)
            .next()
        {
            return Err(Error::NotSettled { command_time });
        }
    }
    Ok(result)
}

fn write_report(dir: &Path, base: &str, report: &Report) -> Result<Vec<PathBuf>> {
    let txt = dir.join(format!("{base}_report.txt"));
    let dat = dir.join(format!("{base}_report.dat"));
    std::fs::write(&txt, report.to_text())?;
    std::fs::write(&dat, report.to_dat())?;
    Ok(vec![txt, dat])
}
