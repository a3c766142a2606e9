//! Planning and simulation for multi-spill cleanup by boom-towing vessel duos.
//!
//! - [`scenario`]: workspaces, occupancy grids, grid shortest paths, motion graphs.
//! - [`routing`]: damage-minimizing multi-agent routing, heuristics and exact search.
//! - [`dynamics`]: coupled vessel and boom simulation.
//! - [`control`]: PID and feedback-linearizing trackers, setpoints and supervision.
//! - [`harness`]: reference paths, tracking experiments, benchmarks and missions.

pub mod control;
pub mod dynamics;
pub mod geometry;
pub mod harness;
pub mod routing;
pub mod scenario;

mod par;
