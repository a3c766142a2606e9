use super::tracking::{run_tracking_experiment, TrackingExperiment, TrackingOptions};
use super::{HarnessError, Result};
use crate::control::ControllerConfig;
use crate::geometry::Pose;
use serde::{Deserialize, Serialize};
use std::io::Write;

pub const SWEEP_HEADER: [&str; 9] =
    ["rho", "v_ref", "completed", "sim_time", "rmse_cross_track_1", "rmse_cross_track_2", "rmse_heading_deg_1", "rmse_heading_deg_2", "max_stern_separation"];

/// Grid of turning radii and reference speeds on a fixed start and goal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepGrid {
    pub start: Pose,
    pub goal: Pose,
    pub rho: Vec<f64>,
    pub v_ref: Vec<f64>,
    #[serde(default)]
    pub duration_cap: Option<f64>,
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self::standard(6, 6)
    }
}

impl SweepGrid {
    /// `n_rho x n_v` grid over `rho in [10, 20]`, `v_ref in [5, 15]` from (0, 0, 0) to (100, 65, pi).
    pub fn standard(n_rho: usize, n_v: usize) -> Self {
        Self {
            start: Pose { x: 0.0, y: 0.0, theta: 0.0 },
            goal: Pose { x: 100.0, y: 65.0, theta: std::f64::consts::PI },
            rho: linspace(10.0, 20.0, n_rho),
            v_ref: linspace(5.0, 15.0, n_v),
            duration_cap: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rho.is_empty() || self.v_ref.is_empty() {
            return Err(HarnessError::Config("sweep grid must be non-empty".into()));
        }
        Ok(())
    }

    pub fn experiment(&self, i_rho: usize, i_v: usize, controller: &ControllerConfig) -> TrackingExperiment {
        TrackingExperiment {
            start: self.start,
            goal: self.goal,
            rho: self.rho[i_rho],
            v_ref: self.v_ref[i_v],
            controller: *controller,
            duration_cap: self.duration_cap,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmseCell {
    pub rho: f64,
    pub v_ref: f64,
    pub completed: bool,
    pub sim_time: f64,
    pub rmse_cross_track: [f64; 2],
    pub rmse_heading_deg: [f64; 2],
    pub max_stern_separation: f64,
}

impl RmseCell {
    /// Larger of the two vessels' cross-track RMSE.
    pub fn cross_track(&self) -> f64 {
        self.rmse_cross_track[0].max(self.rmse_cross_track[1])
    }

    pub fn heading_deg(&self) -> f64 {
        self.rmse_heading_deg[0].max(self.rmse_heading_deg[1])
    }
}

/// Row-major over `rho` then `v_ref`: `cells[i_rho * v_ref.len() + i_v]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmseMap {
    pub controller: String,
    pub rho: Vec<f64>,
    pub v_ref: Vec<f64>,
    pub cells: Vec<RmseCell>,
}

impl RmseMap {
    pub fn cell(&self, i_rho: usize, i_v: usize) -> &RmseCell {
        &self.cells[i_rho * self.v_ref.len() + i_v]
    }

    pub fn incomplete(&self) -> usize {
        self.cells.iter().filter(|c| !c.completed).count()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(SWEEP_HEADER)?;
        for c in &self.cells {
            w.write_record([
                c.rho.to_string(),
                c.v_ref.to_string(),
                (c.completed as u8).to_string(),
                c.sim_time.to_string(),
                c.rmse_cross_track[0].to_string(),
                c.rmse_cross_track[1].to_string(),
                c.rmse_heading_deg[0].to_string(),
                c.rmse_heading_deg[1].to_string(),
                c.max_stern_separation.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// One tracking experiment per grid cell and controller; cells run in parallel and
/// are collected in grid order.
pub fn run_rmse_sweep(grid: &SweepGrid, controllers: &[ControllerConfig], options: &TrackingOptions) -> Result<Vec<RmseMap>> {
    grid.validate()?;
    let nv = grid.v_ref.len();
    let per = grid.rho.len() * nv;
    let cells = crate::par::map_indices(per * controllers.len(), |k| {
        let (c, cell) = (k / per, k % per);
        let exp = grid.experiment(cell / nv, cell % nv, &controllers[c]);
        run_tracking_experiment(&exp, options).map(|r| RmseCell {
            rho: exp.rho,
            v_ref: exp.v_ref,
            completed: r.completed,
            sim_time: r.sim_time,
            rmse_cross_track: r.rmse_cross_track,
            rmse_heading_deg: r.rmse_heading_deg,
            max_stern_separation: r.max_stern_separation,
        })
    });
    let cells = cells.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(controllers
        .iter()
        .zip(cells.chunks(per))
        .map(|(c, chunk)| RmseMap { controller: c.name().to_string(), rho: grid.rho.clone(), v_ref: grid.v_ref.clone(), cells: chunk.to_vec() })
        .collect())
}
