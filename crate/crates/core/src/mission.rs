//! Scenario execution on a two-rate schedule.
//!
//! The plant and inner torque law run at 250 Hz. Pose sampling, the travel
//! direction estimate, waypoint logic, the outer loop and reference
//! desaturation run at 120 Hz, on inner ticks `floor(25 k / 12)`, which
//! repeats the gap pattern 2,2,2,2,2,2,2,2,2,2,2,3.

use std::collections::VecDeque;
use std::f64::consts::TAU;

use crate::control::{
    desaturate_reference, inner_torque, outer_loop_reference, unwrap_near, wrap_to_pi, ControlMode,
    ControllerConfig, ReferenceState,
};
use crate::dynamics::{rk4_step, BoatParams, SimState};
use crate::error::{Error, Result};
use crate::estimation::TravelEstimator;
use crate::geometry::Vec2;

pub const INNER_RATE_HZ: f64 = 250.0;
pub const OUTER_RATE_HZ: f64 = 120.0;
/// Inner ticks per group of outer ticks: 12 outer ticks every 25 inner ticks.
const INNER_PER_GROUP: usize = 25;
const OUTER_PER_GROUP: usize = 12;

/// Length of each leg of a step test, s.
pub const STEP_TEST_LEG: f64 = 15.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MissionKind {
    Converge,
    StepTest,
    Waypoints,
    StationKeep,
}

impl MissionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MissionKind::Converge => "converge",
            MissionKind::StepTest => "step-test",
            MissionKind::Waypoints => "waypoints",
            MissionKind::StationKeep => "station-keep",
        }
    }

    fn uses_waypoints(self) -> bool {
        matches!(self, MissionKind::Waypoints | MissionKind::StationKeep)
    }
}

impl std::str::FromStr for MissionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "converge" => Ok(MissionKind::Converge),
            "step-test" => Ok(MissionKind::StepTest),
            "waypoints" => Ok(MissionKind::Waypoints),
            "station-keep" => Ok(MissionKind::StationKeep),
            other => Err(Error::config(format!("unknown mission kind `{other}`"))),
        }
    }
}

/// A change of the desired heading at a given time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepCommand {
    pub time: f64,
    pub delta: f64,
}

/// An instantaneous velocity impulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disturbance {
    pub time: f64,
    pub impulse: Vec2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissionSpec {
    pub kind: MissionKind,
    /// Initial desired heading for converge and step-test missions.
    pub heading: f64,
    /// Initial bottom-body orientation; defaults to the initial reference.
    pub initial_theta: Option<f64>,
    pub start: Vec2,
    pub waypoints: Vec<Vec2>,
    /// Radius within which the active waypoint counts as reached, m.
    pub tolerance_radius: f64,
    pub step_schedule: Vec<StepCommand>,
    pub disturbances: Vec<Disturbance>,
    pub duration: f64,
    pub warm_start: bool,
}

impl Default for MissionSpec {
    fn default() -> Self {
        Self {
            kind: MissionKind::Converge,
            heading: 0.0,
            initial_theta: None,
            start: Vec2::ZERO,
            waypoints: Vec::new(),
            tolerance_radius: 0.1,
            step_schedule: Vec::new(),
            disturbances: Vec::new(),
            duration: 30.0,
            warm_start: true,
        }
    }
}

impl MissionSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance_radius.is_finite() && self.tolerance_radius > 0.0) {
            return Err(Error::config(format!(
                "mission.tolerance_radius must be > 0, got {}",
                self.tolerance_radius
            )));
        }
        if !(self.duration.is_finite() && self.duration >= 0.0) {
            return Err(Error::config(format!(
                "mission.duration must be >= 0, got {}",
                self.duration
            )));
        }
        if !self.heading.is_finite() || !self.start.is_finite() {
            return Err(Error::config("mission heading and start must be finite"));
        }
        if self.initial_theta.is_some_and(|v| !v.is_finite()) {
            return Err(Error::config("mission.initial_theta must be finite"));
        }
        match self.kind {
            MissionKind::Waypoints if self.waypoints.is_empty() => {
                return Err(Error::config(
                    "waypoints mission needs at least one waypoint",
                ));
            }
            MissionKind::StationKeep if self.waypoints.len() != 1 => {
                return Err(Error::config(
                    "station-keep mission needs exactly one waypoint",
                ));
            }
            MissionKind::StepTest if self.step_schedule.is_empty() => {
                return Err(Error::config("step-test mission needs a step schedule"));
            }
            _ => {}
        }
        if self.waypoints.iter().any(|w| !w.is_finite()) {
            return Err(Error::config("waypoints must be finite"));
        }
        let mut last = f64::NEG_INFINITY;
        for s in &self.step_schedule {
            if !(s.time.is_finite() && s.delta.is_finite() && s.time >= 0.0) {
                return Err(Error::config(format!("invalid step command {s:?}")));
            }
            if s.time < last {
                return Err(Error::config("step schedule must be sorted by time"));
            }
            last = s.time;
        }
        let mut last = f64::NEG_INFINITY;
        for d in &self.disturbances {
            if !(d.time.is_finite() && d.time >= 0.0 && d.impulse.is_finite()) {
                return Err(Error::config(format!("invalid disturbance {d:?}")));
            }
            if d.time < last {
                return Err(Error::config("disturbances must be sorted by time"));
            }
            last = d.time;
        }
        Ok(())
    }
}

/// One inner-loop tick of telemetry.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TelemetryRecord {
    pub t: f64,
    pub theta: f64,
    pub theta_dot: f64,
    pub phi: f64,
    pub phi_dot: f64,
    pub theta_t_dot: f64,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub theta_r: f64,
    pub theta_des: f64,
    pub psi_hat: f64,
    pub tau: f64,
    pub waypoint_index: usize,
}

impl TelemetryRecord {
    pub fn pos(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn vel(&self) -> Vec2 {
        Vec2::new(self.vx, self.vy)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TelemetryLog {
    /// Inner-loop step, s.
    pub dt: f64,
    /// Oscillation period of the controller that produced the log, s.
    pub period: f64,
    pub records: Vec<TelemetryRecord>,
}

impl TelemetryLog {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn end_time(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.t)
    }

    /// Records with `from <= t <= to`.
    pub fn window(&self, from: f64, to: f64) -> &[TelemetryRecord] {
        let lo = self.records.partition_point(|r| r.t < from);
        let hi = self.records.partition_point(|r| r.t <= to);
        &self.records[lo..hi.max(lo)]
    }

    /// Number of records spanning one period.
    pub fn period_ticks(&self) -> usize {
        (self.period / self.dt).round() as usize
    }
}

/// Instantaneous velocity change; every other field is untouched.
pub fn apply_disturbance(state: &SimState, impulse: Vec2) -> SimState {
    SimState {
        vel: state.vel + impulse,
        ..*state
    }
}

/// Heading toward the active waypoint, advancing the index when it is reached.
/// The last waypoint is held indefinitely.
pub fn waypoint_heading(state: &SimState, spec: &MissionSpec, active_index: usize) -> (f64, usize) {
    let mut index = active_index.min(spec.waypoints.len().saturating_sub(1));
    let Some(&target) = spec.waypoints.get(index) else {
        return (spec.heading, 0);
    };
    if state.pos.distance(target) <= spec.tolerance_radius && index + 1 < spec.waypoints.len() {
        index += 1;
    }
    let to = spec.waypoints[index] - state.pos;
    (to.angle(), index)
}

fn is_outer_tick(n: usize, next_outer: &mut usize) -> bool {
    if INNER_PER_GROUP * *next_outer / OUTER_PER_GROUP == n {
        *next_outer += 1;
        true
    } else {
        false
    }
}

/// Trailing one-period history of bottom-body and top-body angles.
struct AngleHistory {
    capacity: usize,
    samples: VecDeque<(f64, f64)>,
}

impl AngleHistory {
    fn new(period_ticks: usize) -> Self {
        Self {
            capacity: period_ticks + 1,
            samples: VecDeque::with_capacity(period_ticks + 1),
        }
    }

    fn push(&mut self, state: &SimState) {
        if self.samples.len() == self.capacity {
            self.samples.pop_front();
        }
        self.samples.push_back((state.theta, state.top_angle()));
    }

    fn full(&self) -> bool {
        self.samples.len() == self.capacity
    }

    /// One-period mean of the top-body velocity.
    fn mean_top_velocity(&self, period: f64) -> f64 {
        let first = self.samples.front().map_or(0.0, |s| s.1);
        let last = self.samples.back().map_or(0.0, |s| s.1);
        (last - first) / period
    }

    /// Trapezoidal one-period mean of θ.
    fn mean_theta(&self) -> f64 {
        let n = self.samples.len();
        if n < 2 {
            return self.samples.front().map_or(0.0, |s| s.0);
        }
        let inner: f64 = self.samples.iter().map(|s| s.0).sum();
        let ends = 0.5 * (self.samples[0].0 + self.samples[n - 1].0);
        (inner - ends) / (n - 1) as f64
    }
}

fn initial_heading(spec: &MissionSpec) -> f64 {
    if spec.kind.uses_waypoints() {
        let (h, _) = waypoint_heading(
            &SimState {
                pos: spec.start,
                ..SimState::default()
            },
            spec,
            0,
        );
        h
    } else {
        spec.heading
    }
}

/// Runs a mission to completion. Identical inputs give bit-identical logs.
pub fn run_mission(
    params: &BoatParams,
    cfg: &ControllerConfig,
    spec: &MissionSpec,
) -> Result<TelemetryLog> {
    params.validate()?;
    cfg.validate()?;
    spec.validate()?;

    let dt = 1.0 / INNER_RATE_HZ;
    let period = cfg.period();
    let total_ticks = (spec.duration * INNER_RATE_HZ).round() as usize;
    let thrust_mag = params.k_thrust * cfg.forcing_gain;

    let mut theta_des = initial_heading(spec);
    let mut reference = ReferenceState::new(theta_des);
    let mut state = SimState {
        pos: spec.start,
        ..SimState::at_rest(spec.initial_theta.unwrap_or(theta_des))
    };
    let mut estimator = TravelEstimator::new(period, theta_des, spec.warm_start)?;
    let mut history = AngleHistory::new((period / dt).round() as usize);
    // full turns added to the reference by desaturation
    let mut desat_turns = 0.0;
    let mut waypoint_index = 0;
    let mut psi_hat = wrap_to_pi(theta_des);
    let mut next_outer = 0;
    let mut steps = spec.step_schedule.iter().peekable();
    let mut disturbances = spec.disturbances.iter().peekable();

    let mut records = Vec::with_capacity(total_ticks + 1);
    for n in 0..=total_ticks {
        let t = n as f64 / INNER_RATE_HZ;
        state.t = t;
        while let Some(d) = disturbances.next_if(|d| d.time <= t) {
            state = apply_disturbance(&state, d.impulse);
        }
        history.push(&state);

        if is_outer_tick(n, &mut next_outer) {
            while let Some(s) = steps.next_if(|s| s.time <= t) {
                theta_des += s.delta;
            }
            if spec.kind.uses_waypoints() {
                let (heading, index) = waypoint_heading(&state, spec, waypoint_index);
                waypoint_index = index;
                theta_des = unwrap_near(heading, theta_des);
            }
            estimator.set_fallback(theta_des);
            estimator.push_pose(t, state.pos)?;
            let estimate = estimator.travel_direction(t);
            psi_hat = estimate.as_ref().copied().unwrap_or(wrap_to_pi(theta_des));

            reference.theta_des = theta_des;
            reference.theta_r = match (cfg.mode.uses_outer_loop(), estimate) {
                (true, Ok(psi)) => {
                    let r = outer_loop_reference(cfg, theta_des, psi);
                    theta_des + wrap_to_pi(r - theta_des) + TAU * desat_turns
                }
                _ => theta_des + TAU * desat_turns,
            };
            if cfg.mode == ControlMode::DesaturatedThrustDirection && history.full() {
                let pending = reference.theta_r - history.mean_theta();
                let adjusted = desaturate_reference(
                    reference,
                    history.mean_top_velocity(period),
                    pending,
                    t,
                    cfg,
                );
                if adjusted.last_desat_time != reference.last_desat_time {
                    desat_turns += ((adjusted.theta_r - reference.theta_r) / TAU).round();
                }
                reference = adjusted;
            }
        }

        let tau = inner_torque(cfg, t, state.theta, reference.theta_r);
        records.push(TelemetryRecord {
            t,
            theta: state.theta,
            theta_dot: state.theta_dot,
            phi: state.phi,
            phi_dot: state.phi_dot,
            theta_t_dot: state.top_velocity(),
            x: state.pos.x,
            y: state.pos.y,
            vx: state.vel.x,
            vy: state.vel.y,
            theta_r: reference.theta_r,
            theta_des,
            psi_hat,
            tau,
            waypoint_index,
        });
        if n < total_ticks {
            state = rk4_step(params, &state, tau, reference.theta_r, thrust_mag, dt);
            if !state.is_finite() {
                return Err(Error::config(format!(
                    "simulation diverged at t = {t:.3} s"
                )));
            }
        }
    }
    Ok(TelemetryLog {
        dt,
        period,
        records,
    })
}

/// Outcome of a two-leg step test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub commanded: f64,
    pub observed: f64,
}

impl StepOutcome {
    pub fn error(&self) -> f64 {
        self.observed - self.commanded
    }
}

/// Mean of the unwrapped travel direction over `[from, to]`.
pub fn mean_travel_direction(log: &TelemetryLog, from: f64, to: f64) -> f64 {
    let psi = crate::metrics::unwrap_series(log.records.iter().map(|r| r.psi_hat));
    let lo = log.records.partition_point(|r| r.t < from);
    let hi = log.records.partition_point(|r| r.t <= to);
    let window = &psi[lo..hi];
    window.iter().sum::<f64>() / window.len() as f64
}

/// Settled change in travel direction across a step at `step_time`: mean
/// over the final quarter of the second leg minus the mean over the final
/// quarter of the first leg.
pub fn settled_change(log: &TelemetryLog, start: f64, step_time: f64, end: f64) -> f64 {
    let first = step_time - start;
    let second = end - step_time;
    mean_travel_direction(log, end - 0.25 * second, end)
        - mean_travel_direction(log, step_time - 0.25 * first, step_time)
}

/// The step-test mission used by [`run_step_test`].
pub fn step_test_spec(delta: f64) -> MissionSpec {
    MissionSpec {
        kind: MissionKind::StepTest,
        step_schedule: vec![StepCommand {
            time: STEP_TEST_LEG,
            delta,
        }],
        duration: 2.0 * STEP_TEST_LEG,
        ..MissionSpec::default()
    }
}

/// A 15 s leg at heading 0, a step of `delta`, and a 15 s second leg.
pub fn run_step_test(
    params: &BoatParams,
    cfg: &ControllerConfig,
    delta: f64,
) -> Result<StepOutcome> {
    let spec = step_test_spec(delta);
    let log = run_mission(params, cfg, &spec)?;
    Ok(StepOutcome {
        commanded: delta,
        observed: settled_change(&log, 0.0, STEP_TEST_LEG, spec.duration),
    })
}
