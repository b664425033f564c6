//! Limit-cycle torque laws and the travel-direction outer loop.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Tolerance of the wrap test inside [`wrap_override`].
pub const WRAP_EPS: f64 = 1e-9;

/// Rotation still outstanding below which the boat is treated as holding
/// its reference when deciding whether a desaturation is needed.
pub const PENDING_TURN_DEADBAND: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlMode {
    /// Inner limit-cycle law only; the reference follows the desired heading.
    LimitCycleOnly,
    /// Limit-cycle law plus the travel-direction outer loop.
    ThrustDirection,
    /// Wrap-override inner law, outer loop and reference desaturation.
    DesaturatedThrustDirection,
}

impl ControlMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ControlMode::LimitCycleOnly => "limit-cycle",
            ControlMode::ThrustDirection => "thrust-direction",
            ControlMode::DesaturatedThrustDirection => "desaturated-thrust-direction",
        }
    }

    pub fn uses_outer_loop(self) -> bool {
        !matches!(self, ControlMode::LimitCycleOnly)
    }
}

impl std::str::FromStr for ControlMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "limit-cycle" => Ok(ControlMode::LimitCycleOnly),
            "thrust-direction" => Ok(ControlMode::ThrustDirection),
            "desaturated-thrust-direction" => Ok(ControlMode::DesaturatedThrustDirection),
            other => Err(Error::config(format!(
                "unknown controller mode `{other}` (expected limit-cycle, thrust-direction or desaturated-thrust-direction)"
            ))),
        }
    }
}

/// Gains and switches for the three controller variants.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerConfig {
    /// Forcing frequency ω, rad/s.
    pub omega: f64,
    /// Forcing amplitude K.
    pub forcing_gain: f64,
    /// Convergence gain β.
    pub convergence_gain: f64,
    /// Outer-loop proportional gain K_p.
    pub direction_gain: f64,
    pub mode: ControlMode,
    /// Minimum spacing between reference desaturations, s.
    pub desat_interval: f64,
    /// |one-period mean top-body velocity| that arms a desaturation, rad/s.
    pub desat_threshold: f64,
    /// Allow desaturation while a heading change is still being executed.
    pub desat_while_turning: bool,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        let omega = TAU;
        Self {
            omega,
            forcing_gain: 15.0,
            convergence_gain: 40.0,
            direction_gain: 1.5,
            mode: ControlMode::DesaturatedThrustDirection,
            desat_interval: 2.0 * TAU / omega,
            desat_threshold: 3.0,
            desat_while_turning: true,
        }
    }
}

impl ControllerConfig {
    /// Oscillation period T = 2π/ω.
    pub fn period(&self) -> f64 {
        TAU / self.omega
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("controller.omega", self.omega, self.omega > 0.0),
            ("controller.K", self.forcing_gain, self.forcing_gain > 0.0),
            (
                "controller.beta",
                self.convergence_gain,
                self.convergence_gain > 0.0,
            ),
            (
                "controller.K_p",
                self.direction_gain,
                self.direction_gain >= 0.0,
            ),
        ];
        for (name, v, ok) in checks {
            if !(v.is_finite() && ok) {
                return Err(Error::config(format!("{name} out of range: {v}")));
            }
        }
        if self.desat_interval.is_nan() || self.desat_interval < self.period() {
            return Err(Error::config(format!(
                "controller.desat_interval must be at least one period ({:.4} s), got {}",
                self.period(),
                self.desat_interval
            )));
        }
        // an infinite threshold disables desaturation
        if self.desat_threshold.is_nan() || self.desat_threshold <= 0.0 {
            return Err(Error::config(format!(
                "controller.desat_threshold must be > 0, got {}",
                self.desat_threshold
            )));
        }
        Ok(())
    }
}

/// Reference heading owned by the mission executor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceState {
    /// Unwrapped reference heading θ_r.
    pub theta_r: f64,
    /// Desired travel direction.
    pub theta_des: f64,
    pub last_desat_time: f64,
}

impl ReferenceState {
    pub fn new(heading: f64) -> Self {
        Self {
            theta_r: heading,
            theta_des: heading,
            last_desat_time: 0.0,
        }
    }
}

/// Wraps an angle into (−π, π].
pub fn wrap_to_pi(angle: f64) -> f64 {
    if angle > -PI && angle <= PI {
        return angle;
    }
    let r = (angle + PI).rem_euclid(TAU) - PI;
    if r <= -PI {
        r + TAU
    } else {
        r
    }
}

/// Value congruent to `angle` closest to `near`.
pub fn unwrap_near(angle: f64, near: f64) -> f64 {
    near + wrap_to_pi(angle - near)
}

/// Limit-cycle torque law: −K sin(ωt) − β sin(θ_r − θ).
pub fn limit_cycle_torque(cfg: &ControllerConfig, t: f64, theta: f64, theta_r: f64) -> f64 {
    -cfg.forcing_gain * (cfg.omega * t).sin() - cfg.convergence_gain * (theta_r - theta).sin()
}

/// Convergence gain that puts the pendulum natural frequency at ω.
pub fn resonant_beta(omega: f64, i_bottom: f64, i_top: f64) -> f64 {
    omega * omega * (i_top + i_bottom) / i_top
}

/// ±1 while the unwrapped separation θ_r − θ lies outside (−π, π], else 0.
pub fn wrap_override(theta: f64, theta_r: f64) -> f64 {
    let diff = theta_r - theta;
    if (wrap_to_pi(diff) - diff).abs() < WRAP_EPS {
        0.0
    } else {
        diff.signum()
    }
}

/// Limit-cycle law that distinguishes congruent references.
pub fn desaturated_torque(cfg: &ControllerConfig, t: f64, theta: f64, theta_r: f64) -> f64 {
    -cfg.forcing_gain * (cfg.omega * t).sin()
        - cfg.convergence_gain * ((theta_r - theta).sin() + wrap_override(theta, theta_r))
}

/// Inner-loop torque for the configured mode.
pub fn inner_torque(cfg: &ControllerConfig, t: f64, theta: f64, theta_r: f64) -> f64 {
    match cfg.mode {
        ControlMode::DesaturatedThrustDirection => desaturated_torque(cfg, t, theta, theta_r),
        _ => limit_cycle_torque(cfg, t, theta, theta_r),
    }
}

/// Shifts θ_r by a full turn against the accumulated top-body velocity.
///
/// `pending_rotation` is the part of the commanded heading change not yet
/// executed (θ_r minus the period-mean of θ). A positive rotation drives
/// the top body negative, so a pending turn with the same sign as
/// `mean_top_velocity` already desaturates and suppresses the shift.
pub fn desaturate_reference(
    reference: ReferenceState,
    mean_top_velocity: f64,
    pending_rotation: f64,
    t: f64,
    cfg: &ControllerConfig,
) -> ReferenceState {
    if mean_top_velocity.is_nan() || mean_top_velocity.abs() <= cfg.desat_threshold {
        return reference;
    }
    if t - reference.last_desat_time < cfg.desat_interval {
        return reference;
    }
    let turning = pending_rotation.abs() > PENDING_TURN_DEADBAND;
    if turning
        && (!cfg.desat_while_turning || pending_rotation.signum() == mean_top_velocity.signum())
    {
        return reference;
    }
    ReferenceState {
        theta_r: reference.theta_r + TAU * mean_top_velocity.signum(),
        last_desat_time: t,
        ..reference
    }
}

/// Outer travel-direction loop: angle of û(θ_des) + K_p (û(θ_des) − û(ψ̂)).
pub fn outer_loop_reference(cfg: &ControllerConfig, theta_des: f64, psi_hat: f64) -> f64 {
    let desired = Vec2::from_angle(theta_des);
    let observed = Vec2::from_angle(psi_hat);
    let w = desired + (desired - observed) * cfg.direction_gain;
    if w.norm() < 1e-9 {
        return theta_des;
    }
    w.angle()
}
