//! Deterministic planar simulator for a single-motor oscillating surface
//! swimmer (two stacked bodies joined by one motor, passive flippers on the
//! bottom body).
//!
//! The crate is organised bottom-up:
//!
//! * [`dynamics`]: orientation ODE, point-mass thrust model, fixed-step RK4.
//! * [`control`]: limit-cycle torque law, wrap-override variant, reference
//!   desaturation, resonance tuning and the outer travel-direction loop.
//! * [`estimation`]: period-wise velocity and smoothed travel direction.
//! * [`mission`]: two-rate scenario executor producing telemetry.
//! * [`metrics`]: turn, cross-track and orbit metrics over telemetry.
//! * [`cli`]: scenario config files, CSV telemetry, reports and presets.

pub mod cli;
pub mod control;
pub mod dynamics;
pub mod error;
pub mod estimation;
pub mod geometry;
pub mod metrics;
pub mod mission;

pub use control::{ControlMode, ControllerConfig, ReferenceState};
pub use dynamics::{BoatParams, SimState, ThrustAlignment};
pub use error::{Error, Result};
pub use estimation::TravelEstimator;
pub use geometry::Vec2;
pub use mission::{MissionKind, MissionSpec, TelemetryLog, TelemetryRecord};
