mod bench;
mod dubins;
mod mission;
mod plot;
mod sweep;
mod tracking;

pub use bench::*;
pub use dubins::*;
pub use mission::*;
pub use plot::*;
pub use sweep::*;
pub use tracking::*;

use crate::{control::ControlError, dynamics::DynamicsError, routing::RoutingError, scenario::ScenarioError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Routing(#[from] RoutingError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
