//! Tracking controllers and the route-to-setpoint layer.
//!
//! Each vessel regulates surge speed and heading. [`PidController`] acts on the two
//! errors directly. [`FblController`] cancels drag, Coriolis and tow-load terms so
//! that surge and yaw reduce to integrator chains, then closes each with a lead loop.
//! [`path_to_setpoints`] and [`supervisor_step`] turn a reference path into
//! synchronized waypoints that keep the two sterns within one boom length.

mod fbl;
mod filter;
mod lead;
mod pid;
mod setpoints;
mod stability;

pub use fbl::{fbl_disturbance_terms, fbl_step, reconstruct_thrust, saturate_thrust, FblController, FblGains};
pub use lead::{beta_from_phase_margin, lead_step, LeadGains, LeadLoop, LeadTopology};
pub use pid::{pid_step, PidChannel, PidController, PidGains, PidLoop};
pub use setpoints::{
    has_arrived, los_heading, path_to_setpoints, supervisor_step, Setpoint, SetpointConfig, SetpointPlan, SupervisorMode,
    SupervisorOutput, SupervisorState, TrackReference,
};
pub use stability::{characteristic_polynomials, routh_first_column, routh_verdict, stability_check, LoopVerdict, StabilityReport};

use crate::dynamics::{VesselParams, VesselState};
use crate::geometry::{wrap_angle, Vec2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ControlError {
    #[error("invalid controller configuration: {0}")]
    Config(String),
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("lateral offset {offset} m must be shorter than the boom ({boom_length} m)")]
    BoomViolation { offset: f64, boom_length: f64 },
    #[error("JSON failure: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = ControlError> = std::result::Result<T, E>;

/// Controller selection as read from JSON: `{"type": "pid", ...}` or `{"type": "fbl", ...}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ControllerConfig {
    Pid(PidGains),
    Fbl(FblGains),
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self::Fbl(FblGains::default())
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Pid(g) => g.validate(),
            Self::Fbl(g) => g.validate(),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Pid(_) => "pid",
            Self::Fbl(_) => "fbl",
        }
    }
}

/// A stateful controller for one vessel.
#[derive(Debug, Clone, PartialEq)]
pub enum VesselController {
    Pid(PidController),
    Fbl(FblController),
}

impl VesselController {
    pub fn new(config: &ControllerConfig, params: &VesselParams) -> Self {
        match config {
            ControllerConfig::Pid(g) => Self::Pid(PidController::new(g, params.f_max, params.eta_max)),
            ControllerConfig::Fbl(g) => Self::Fbl(FblController::new(g, params)),
        }
    }

    /// `(F, eta)` for one control period; `f_l` is the measured tow load in the body frame.
    pub fn step(&mut self, u_ref: f64, theta_ref: f64, s: &VesselState, f_l: Vec2, dt: f64) -> (f64, f64) {
        match self {
            Self::Pid(c) => c.step(u_ref - s.u, wrap_angle(theta_ref - s.theta), dt),
            Self::Fbl(c) => c.step(u_ref, theta_ref, s, f_l, dt),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_tag_round_trip() {
        for c in [ControllerConfig::Pid(PidGains::default()), ControllerConfig::Fbl(FblGains::default())] {
            let s = serde_json::to_string(&c).unwrap();
            assert!(s.starts_with(&format!("{{\"type\":\"{}\"", c.name())));
            assert_eq!(ControllerConfig::from_json_str(&s).unwrap(), c);
        }
    }

    #[test]
    fn rejects_unit_yaw_ratio() {
        let c = ControllerConfig::Fbl(FblGains { beta_w: 1.0, ..Default::default() });
        assert!(c.validate().is_err());
    }
}
