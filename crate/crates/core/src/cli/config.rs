//! Line-oriented scenario configuration.
//!
//! ```text
//! # comment
//! boat.C_f = 1.0e-4
//! controller.mode = thrust-direction
//! mission.kind = waypoints
//! mission.waypoints = 1, 0; 1, 1; 0, 1
//! sweep.controller.K = 5, 10, 15
//! ```
//!
//! Scalars accept plain numbers or multiples of `pi` (`-3*pi/2`). Lists of
//! tuples separate tuples with `;` and components with `,`. Sweep values
//! are separated by `|` when present, otherwise by `,`.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use crate::control::{ControlMode, ControllerConfig};
use crate::dynamics::{BoatParams, ThrustAlignment};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::metrics::RISE_FRACTION;
use crate::mission::{Disturbance, MissionKind, MissionSpec, StepCommand};

pub const KEYS: &[&str] = &[
    "name",
    "boat.I_b",
    "boat.I_t",
    "boat.C_f",
    "boat.C_r",
    "boat.mass",
    "boat.C_v",
    "boat.k_thrust",
    "boat.body_length",
    "boat.body_radius",
    "boat.thrust_alignment",
    "controller.omega",
    "controller.K",
    "controller.beta",
    "controller.K_p",
    "controller.mode",
    "controller.desat_interval",
    "controller.desat_threshold",
    "controller.desat_while_turning",
    "mission.kind",
    "mission.heading",
    "mission.initial_theta",
    "mission.start",
    "mission.waypoints",
    "mission.tolerance_radius",
    "mission.steps",
    "mission.disturbances",
    "mission.duration",
    "mission.warm_start",
    "metrics.rise_fraction",
    "output.dir",
    "batch.repeats",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub key: String,
    pub values: Vec<String>,
}

/// A fully resolved scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub boat: BoatParams,
    pub controller: ControllerConfig,
    pub mission: MissionSpec,
    pub rise_fraction: f64,
    pub out_dir: PathBuf,
    pub repeats: usize,
    pub sweeps: Vec<Sweep>,
    assignments: Vec<(String, String)>,
}

/// One point of a sweep: the label suffix and the resolved scenario.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub label: String,
    pub scenario: ScenarioConfig,
}

fn err_at(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::config(format!("line {line}: {msg}"))
}

/// Number or product of numbers and `pi`, optionally divided by another.
pub fn parse_scalar(raw: &str) -> Result<f64> {
    let s = raw.trim();
    let bad = || Error::config(format!("cannot parse `{raw}` as a number"));
    if s.is_empty() {
        return Err(bad());
    }
    let product = |part: &str| -> Result<f64> {
        let mut acc = 1.0;
        for factor in part.split('*') {
            let f = factor.trim();
            let (sign, body) = match f.strip_prefix('-') {
                Some(rest) => (-1.0, rest.trim()),
                None => (1.0, f),
            };
            let v = match body {
                "pi" => PI,
                other => other.parse::<f64>().map_err(|_| bad())?,
            };
            acc *= sign * v;
        }
        Ok(acc)
    };
    match s.split_once('/') {
        Some((num, den)) => Ok(product(num)? / product(den)?),
        None => product(s),
    }
}

fn parse_bool(raw: &str) -> Result<bool> {
    match raw.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(Error::config(format!("expected a boolean, got `{other}`"))),
    }
}

fn parse_tuples(raw: &str, arity: usize) -> Result<Vec<Vec<f64>>> {
    let raw = raw.trim();
    if raw.is_empty() || raw == "none" {
        return Ok(Vec::new());
    }
    raw.split(';')
        .map(|tuple| {
            let parts = tuple
                .split(',')
                .map(parse_scalar)
                .collect::<Result<Vec<f64>>>()?;
            if parts.len() != arity {
                return Err(Error::config(format!(
                    "expected {arity} components in `{}`, got {}",
                    tuple.trim(),
                    parts.len()
                )));
            }
            Ok(parts)
        })
        .collect()
}

fn parse_vec2(raw: &str) -> Result<Vec2> {
    let t = parse_tuples(raw, 2)?;
    match t.as_slice() {
        [p] => Ok(Vec2::new(p[0], p[1])),
        _ => Err(Error::config(format!(
            "expected a single `x, y` pair, got `{raw}`"
        ))),
    }
}

fn split_sweep_values(raw: &str) -> Vec<String> {
    let sep = if raw.contains('|') { '|' } else { ',' };
    raw.split(sep)
        .map(|v| v.trim().to_string())
        .filter(|v| !v.is_empty())
        .collect()
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            name: "scenario".to_string(),
            boat: BoatParams::default(),
            controller: ControllerConfig::default(),
            mission: MissionSpec::default(),
            rise_fraction: RISE_FRACTION,
            out_dir: PathBuf::from("out"),
            repeats: 1,
            sweeps: Vec::new(),
            assignments: Vec::new(),
        }
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut assignments: Vec<(String, String)> = Vec::new();
        let mut sweeps: Vec<Sweep> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err_at(n, format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if let Some(target) = key.strip_prefix("sweep.") {
                if !KEYS.contains(&target)
                    || matches!(target, "name" | "output.dir" | "batch.repeats")
                {
                    return Err(err_at(n, format!("cannot sweep `{target}`")));
                }
                if sweeps.iter().any(|s| s.key == target) {
                    return Err(err_at(n, format!("duplicate sweep `{target}`")));
                }
                let values = split_sweep_values(value);
                if values.is_empty() {
                    return Err(err_at(n, format!("sweep `{target}` has no values")));
                }
                sweeps.push(Sweep {
                    key: target.to_string(),
                    values,
                });
                continue;
            }
            if !KEYS.contains(&key) {
                return Err(err_at(n, format!("unknown key `{key}`")));
            }
            if assignments.iter().any(|(k, _)| k == key) {
                return Err(err_at(n, format!("duplicate key `{key}`")));
            }
            assignments.push((key.to_string(), value.to_string()));
        }
        let mut cfg = Self::resolve(&assignments)?;
        cfg.sweeps = sweeps;
        // surface sweep value errors at load time
        cfg.points()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Io(std::io::Error::new(
                e.kind(),
                format!("{}: {e}", path.display()),
            ))
        })?;
        Self::parse(&text)
    }

    fn resolve(assignments: &[(String, String)]) -> Result<Self> {
        let mut cfg = Self::default();
        let mut desat_interval = None;
        for (key, value) in assignments {
            cfg.apply(key, value, &mut desat_interval)
                .map_err(|e| Error::config(format!("`{key}`: {}", e.message())))?;
        }
        cfg.controller.desat_interval = desat_interval.unwrap_or(2.0 * cfg.controller.period());
        cfg.assignments = assignments.to_vec();
        Ok(cfg)
    }

    fn apply(&mut self, key: &str, value: &str, desat_interval: &mut Option<f64>) -> Result<()> {
        let num = || parse_scalar(value);
        let b = &mut self.boat;
        let c = &mut self.controller;
        let m = &mut self.mission;
        match key {
            "name" => {
                if value.is_empty() || value.contains(['/', '\\']) {
                    return Err(Error::config("name must be a non-empty file stem"));
                }
                self.name = value.to_string();
            }
            "boat.I_b" => b.i_bottom = num()?,
            "boat.I_t" => b.i_top = num()?,
            "boat.C_f" => b.flipper_drag = num()?,
            "boat.C_r" => b.hull_drag = num()?,
            "boat.mass" => b.mass = num()?,
            "boat.C_v" => b.translational_drag = num()?,
            "boat.k_thrust" => b.k_thrust = num()?,
            "boat.body_length" => b.body_length = num()?,
            "boat.body_radius" => b.body_radius = num()?,
            "boat.thrust_alignment" => {
                b.thrust_alignment = match value {
                    "reference" => ThrustAlignment::Reference,
                    "body" => ThrustAlignment::Body,
                    other => return Err(Error::config(format!("unknown alignment `{other}`"))),
                }
            }
            "controller.omega" => c.omega = num()?,
            "controller.K" => c.forcing_gain = num()?,
            "controller.beta" => c.convergence_gain = num()?,
            "controller.K_p" => c.direction_gain = num()?,
            "controller.mode" => c.mode = value.parse::<ControlMode>()?,
            "controller.desat_interval" => *desat_interval = Some(num()?),
            "controller.desat_threshold" => c.desat_threshold = num()?,
            "controller.desat_while_turning" => c.desat_while_turning = parse_bool(value)?,
            "mission.kind" => m.kind = value.parse::<MissionKind>()?,
            "mission.heading" => m.heading = num()?,
            "mission.initial_theta" => m.initial_theta = Some(num()?),
            "mission.start" => m.start = parse_vec2(value)?,
            "mission.waypoints" => {
                m.waypoints = parse_tuples(value, 2)?
                    .into_iter()
                    .map(|p| Vec2::new(p[0], p[1]))
                    .collect()
            }
            "mission.tolerance_radius" => m.tolerance_radius = num()?,
            "mission.steps" => {
                m.step_schedule = parse_tuples(value, 2)?
                    .into_iter()
                    .map(|p| StepCommand {
                        time: p[0],
                        delta: p[1],
                    })
                    .collect()
            }
            "mission.disturbances" => {
                m.disturbances = parse_tuples(value, 3)?
                    .into_iter()
                    .map(|p| Disturbance {
                        time: p[0],
                        impulse: Vec2::new(p[1], p[2]),
                    })
                    .collect()
            }
            "mission.duration" => m.duration = num()?,
            "mission.warm_start" => m.warm_start = parse_bool(value)?,
            "metrics.rise_fraction" => self.rise_fraction = num()?,
            "output.dir" => self.out_dir = PathBuf::from(value),
            "batch.repeats" => {
                self.repeats = value
                    .parse::<usize>()
                    .map_err(|_| Error::config(format!("expected a count, got `{value}`")))?
            }
            other => return Err(Error::config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Checks every physical value against its invariants.
    pub fn validate(&self) -> Result<()> {
        self.boat.validate()?;
        self.controller.validate()?;
        self.mission.validate()?;
        if !(self.rise_fraction > 0.0 && self.rise_fraction <= 1.0) {
            return Err(Error::config(format!(
                "metrics.rise_fraction must lie in (0, 1], got {}",
                self.rise_fraction
            )));
        }
        if self.repeats == 0 {
            return Err(Error::config("batch.repeats must be at least 1"));
        }
        Ok(())
    }

    /// Cartesian product of all sweeps in declaration order; a single point
    /// without a label when no sweep is configured.
    pub fn points(&self) -> Result<Vec<SweepPoint>> {
        let mut combos: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
        for (si, sweep) in self.sweeps.iter().enumerate() {
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    (0..sweep.values.len()).map(move |vi| {
                        let mut next = c.clone();
                        next.push((si, vi));
                        next
                    })
                })
                .collect();
        }
        combos
            .into_iter()
            .enumerate()
            .map(|(index, combo)| {
                let mut assignments: Vec<(String, String)> = self
                    .assignments
                    .iter()
                    .filter(|(k, _)| !combo.iter().any(|&(si, _)| self.sweeps[si].key == *k))
                    .cloned()
                    .collect();
                for &(si, vi) in &combo {
                    assignments.push((
                        self.sweeps[si].key.clone(),
                        self.sweeps[si].values[vi].clone(),
                    ));
                }
                let mut scenario = Self::resolve(&assignments)?;
                scenario.sweeps.clear();
                let label = if self.sweeps.is_empty() {
                    String::new()
                } else {
                    format!("s{index:02}")
                };
                Ok(SweepPoint { label, scenario })
            })
            .collect()
    }

    /// Describes the assignment that distinguishes a sweep point.
    pub fn sweep_description(&self, point: usize) -> String {
        let mut idx = point;
        let mut parts = Vec::new();
        for sweep in self.sweeps.iter().rev() {
            let n = sweep.values.len();
            parts.push(format!("{}={}", sweep.key, sweep.values[idx % n]));
            idx /= n;
        }
        parts.reverse();
        parts.join(" ")
    }
}

impl Error {
    fn message(&self) -> String {
        match self {
            Error::Config(m) => m.clone(),
            other => other.to_string(),
        }
    }
}
