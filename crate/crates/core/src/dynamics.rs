//! Orientation and translational dynamics.
//!
//! The bottom body obeys
//!
//! ```text
//! (I_b + I_t) θ̈ = −C_f·sign(θ̇)·θ̇² − C_r·θ̇ − I_t·φ̈
//! ```
//!
//! with the motor acceleration φ̈ as the control input. Translation is a
//! point mass pushed by a constant-magnitude thrust along a commanded
//! heading and slowed by isotropic quadratic drag.

use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Which heading the thrust vector follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThrustAlignment {
    /// Thrust along the reference heading supplied by the controller.
    Reference,
    /// Thrust along the instantaneous bottom-body orientation θ.
    Body,
}

/// Physical constants of the plant.
#[derive(Debug, Clone, PartialEq)]
pub struct BoatParams {
    /// Bottom-body moment of inertia, kg·m².
    pub i_bottom: f64,
    /// Top-body moment of inertia, kg·m².
    pub i_top: f64,
    /// Quadratic rotational (flipper) drag, N·m·s².
    pub flipper_drag: f64,
    /// Linear rotational (hull) drag, N·m·s.
    pub hull_drag: f64,
    /// Boat mass, kg.
    pub mass: f64,
    /// Quadratic translational drag, kg/m.
    pub translational_drag: f64,
    /// Thrust per unit forcing amplitude, N per command unit.
    pub k_thrust: f64,
    /// Reference length for body-length normalised metrics, m.
    pub body_length: f64,
    /// Hull radius, m.
    pub body_radius: f64,
    pub thrust_alignment: ThrustAlignment,
}

impl Default for BoatParams {
    fn default() -> Self {
        Self {
            i_bottom: 5.2e-6,
            i_top: 1.0e-3,
            flipper_drag: 1.0e-4,
            hull_drag: 0.0,
            mass: 1.0,
            translational_drag: 1.5,
            // 0.1 m/s steady speed at K = 15: sqrt(15 * 1e-3 / 1.5).
            k_thrust: 1.0e-3,
            body_length: 0.15,
            body_radius: 0.075,
            thrust_alignment: ThrustAlignment::Reference,
        }
    }
}

impl BoatParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("boat.I_b", self.i_bottom),
            ("boat.I_t", self.i_top),
            ("boat.mass", self.mass),
            ("boat.body_length", self.body_length),
            ("boat.body_radius", self.body_radius),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        let non_negative = [
            ("boat.C_f", self.flipper_drag),
            ("boat.C_r", self.hull_drag),
            ("boat.C_v", self.translational_drag),
            ("boat.k_thrust", self.k_thrust),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn total_inertia(&self) -> f64 {
        self.i_bottom + self.i_top
    }

    /// Speed at which drag balances `thrust_mag`. Infinite without drag.
    pub fn steady_speed(&self, thrust_mag: f64) -> f64 {
        (thrust_mag / self.translational_drag).sqrt()
    }
}

/// Continuous state of the boat.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimState {
    pub t: f64,
    /// Bottom-body orientation, unwrapped.
    pub theta: f64,
    pub theta_dot: f64,
    /// Motor angle, measured from bottom body to top body.
    pub phi: f64,
    pub phi_dot: f64,
    pub pos: Vec2,
    pub vel: Vec2,
}

impl SimState {
    pub fn at_rest(theta: f64) -> Self {
        Self {
            theta,
            ..Self::default()
        }
    }

    /// Top-body angular velocity θ̇ + φ̇.
    pub fn top_velocity(&self) -> f64 {
        self.theta_dot + self.phi_dot
    }

    /// Top-body absolute angle θ + φ.
    pub fn top_angle(&self) -> f64 {
        self.theta + self.phi
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.theta.is_finite()
            && self.theta_dot.is_finite()
            && self.phi.is_finite()
            && self.phi_dot.is_finite()
            && self.pos.is_finite()
            && self.vel.is_finite()
    }

    fn to_array(self) -> [f64; 8] {
        [
            self.theta,
            self.theta_dot,
            self.phi,
            self.phi_dot,
            self.pos.x,
            self.pos.y,
            self.vel.x,
            self.vel.y,
        ]
    }

    fn from_array(t: f64, y: [f64; 8]) -> Self {
        Self {
            t,
            theta: y[0],
            theta_dot: y[1],
            phi: y[2],
            phi_dot: y[3],
            pos: Vec2::new(y[4], y[5]),
            vel: Vec2::new(y[6], y[7]),
        }
    }
}

/// Bottom-body angular acceleration for motor acceleration `phi_ddot`.
/// `θ̇·|θ̇|` gives sign(0) = 0.
pub fn orientation_accel(params: &BoatParams, theta_dot: f64, phi_ddot: f64) -> f64 {
    let drag = params.flipper_drag * theta_dot * theta_dot.abs() + params.hull_drag * theta_dot;
    -(drag + params.i_top * phi_ddot) / params.total_inertia()
}

/// Planar acceleration of the point-mass thrust model.
pub fn translational_accel(
    params: &BoatParams,
    state: &SimState,
    thrust_heading: f64,
    thrust_mag: f64,
) -> Vec2 {
    let thrust = Vec2::from_angle(thrust_heading) * thrust_mag;
    let drag = state.vel * (params.translational_drag * state.vel.norm());
    (thrust - drag) * (1.0 / params.mass)
}

/// Acceleration of the pendulum form obtained by substituting the
/// limit-cycle torque law into the orientation equation with ψ = θ − θ_r
/// and θ_r constant.
pub fn pendulum_accel(
    params: &BoatParams,
    omega: f64,
    forcing_gain: f64,
    convergence_gain: f64,
    t: f64,
    psi: f64,
    psi_dot: f64,
) -> f64 {
    let inertia = params.total_inertia();
    let damping =
        (params.flipper_drag * psi_dot * psi_dot.abs() + params.hull_drag * psi_dot) / inertia;
    let ratio = params.i_top / inertia;
    -damping - convergence_gain * ratio * psi.sin() + forcing_gain * ratio * (omega * t).sin()
}

/// One classical fourth-order Runge-Kutta step of `dy/dt = f(t, y)`.
pub fn rk4<const N: usize, F>(t: f64, y: &[f64; N], h: f64, f: F) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let axpy = |a: &[f64; N], s: f64, b: &[f64; N]| -> [f64; N] {
        let mut out = *a;
        for (o, bi) in out.iter_mut().zip(b) {
            *o += s * bi;
        }
        out
    };
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k1));
    let k3 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k2));
    let k4 = f(t + h, &axpy(y, h, &k3));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn state_derivative(
    params: &BoatParams,
    s: &SimState,
    phi_ddot: f64,
    thrust_heading: f64,
    thrust_mag: f64,
) -> [f64; 8] {
    let heading = match params.thrust_alignment {
        ThrustAlignment::Reference => thrust_heading,
        ThrustAlignment::Body => s.theta,
    };
    let acc = translational_accel(params, s, heading, thrust_mag);
    [
        s.theta_dot,
        orientation_accel(params, s.theta_dot, phi_ddot),
        s.phi_dot,
        phi_ddot,
        s.vel.x,
        s.vel.y,
        acc.x,
        acc.y,
    ]
}

/// Advances the state by `dt` holding the motor acceleration constant.
pub fn rk4_step(
    params: &BoatParams,
    state: &SimState,
    control_torque: f64,
    thrust_heading: f64,
    thrust_mag: f64,
    dt: f64,
) -> SimState {
    rk4_step_with(
        params,
        state,
        |_| control_torque,
        thrust_heading,
        thrust_mag,
        dt,
    )
}

/// Like [`rk4_step`], but evaluates `torque_law` at every RK stage so the
/// closed loop is integrated as a continuous-time system.
pub fn rk4_step_with<L>(
    params: &BoatParams,
    state: &SimState,
    torque_law: L,
    thrust_heading: f64,
    thrust_mag: f64,
    dt: f64,
) -> SimState
where
    L: Fn(&SimState) -> f64,
{
    let y = rk4(state.t, &state.to_array(), dt, |t, y| {
        let s = SimState::from_array(t, *y);
        state_derivative(params, &s, torque_law(&s), thrust_heading, thrust_mag)
    });
    SimState::from_array(state.t + dt, y)
}
