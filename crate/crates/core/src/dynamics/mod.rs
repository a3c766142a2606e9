//! Coupled dynamics of two 3-DoF vessels towing an articulated boom.
//!
//! Each vessel is a planar rigid body with quadratic drag, driven by a thrust `F`
//! applied at the stern with steering angle `eta`. The boom is a chain of rigid
//! links whose endpoints are joined to each other, and to the two sterns, by
//! zero-rest-length spring-dampers. All forces are expressed in the world frame
//! except the vessel tow loads, which are reported in each vessel's body frame.

mod boom;
mod duo;
mod log;
mod vessel;

pub use boom::{boom_derivative, boom_joint_forces, BoomParams, BoomState, JointForces, LinkState, SternPoint};
pub use duo::{dt_cap, step, Controls, DuoParams, DuoSim, DuoState};
pub use log::{TrajectoryLogger, TrajectorySink, TRAJECTORY_HEADER};
pub use vessel::{vessel_derivative, vessel_step, VesselDerivative, VesselParams, VesselState};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("non-finite value in {0}")]
    Numeric(&'static str),
    #[error("invalid simulation configuration: {0}")]
    Config(String),
    #[error("I/O failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV failure: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON failure: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = DynamicsError> = std::result::Result<T, E>;

/// Quadratic drag `kappa * |x| * x`.
#[inline]
pub(crate) fn quad(kappa: f64, x: f64) -> f64 {
    kappa * x.abs() * x
}
