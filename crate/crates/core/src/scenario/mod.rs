//! Workspaces, spills and the motion graph the router plans over.
//!
//! A [`Scenario`] is rasterized into an [`OccupancyGrid`]; obstacle-avoiding
//! transit lengths between spill centroids come from 8-connected A* on that grid
//! and are folded together with the encircle and cleaning times into the edge
//! costs of a [`MotionGraph`].

mod astar;
mod generate;
mod graph;
mod grid;

pub use astar::{shortest_path, shortest_path_length, GridPath};
pub use generate::{generate_random_scenario, GeneratorParams};
pub use graph::{build_motion_graph, build_motion_graph_with_transit, MotionGraph, TransitTable};
pub use grid::{rasterize, OccupancyGrid};

use crate::geometry::{cross, Vec2};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid workspace: {0}")]
    InvalidWorkspace(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("point ({x}, {y}) lies outside the workspace bounds")]
    OutsideWorkspace { x: f64, y: f64 },
    #[error("point ({x}, {y}) lies inside an obstacle")]
    PointInObstacle { x: f64, y: f64 },
    #[error("no obstacle-free path between ({ax}, {ay}) and ({bx}, {by})")]
    Unreachable { ax: f64, ay: f64, bx: f64, by: f64 },
    #[error("spill {spill} is unreachable from vertex {from}")]
    UnreachableSpill { spill: usize, from: usize },
    #[error("placed only {placed} of {requested} spills after {attempts} attempts")]
    PlacementFailure {
        placed: usize,
        requested: usize,
        attempts: usize,
    },
    #[error("invalid motion graph: {0}")]
    InvalidGraph(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = ScenarioError> = std::result::Result<T, E>;

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: Vec2,
    pub max: Vec2,
}

impl Bounds {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Self {
        Self {
            min: Vec2::new(min_x, min_y),
            max: Vec2::new(max_x, max_y),
        }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width().max(0.0) * self.height().max(0.0)
    }

    pub fn contains(&self, p: &Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    pub vertices: Vec<Vec2>,
}

impl Polygon {
    pub fn new(vertices: Vec<Vec2>) -> Self {
        Self { vertices }
    }

    pub fn rectangle(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Self {
        Self::new(vec![
            Vec2::new(min_x, min_y),
            Vec2::new(max_x, min_y),
            Vec2::new(max_x, max_y),
            Vec2::new(min_x, max_y),
        ])
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Even-odd point-in-polygon test. Points on the boundary may land on either side.
    pub fn contains(&self, p: &Vec2) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x_cross {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn bounding_box(&self) -> Bounds {
        let mut b = Bounds::new(f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            b.min.x = b.min.x.min(v.x);
            b.min.y = b.min.y.min(v.y);
            b.max.x = b.max.x.max(v.x);
            b.max.y = b.max.y.max(v.y);
        }
        b
    }

    /// True when no two non-adjacent edges touch and the polygon has at least three vertices.
    pub fn is_simple(&self) -> bool {
        let n = self.vertices.len();
        if n < 3 {
            return false;
        }
        let edges: Vec<_> = self.edges().collect();
        for i in 0..n {
            if (edges[i].1 - edges[i].0).norm() == 0.0 {
                return false;
            }
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                if segments_intersect(edges[i].0, edges[i].1, edges[j].0, edges[j].1) {
                    return false;
                }
            }
        }
        true
    }
}

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    cross(&(b - a), &(c - a))
}

fn on_segment(a: Vec2, b: Vec2, p: Vec2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection, including touching and collinear overlap.
fn segments_intersect(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Workspace {
    pub bounds: Bounds,
    #[serde(default)]
    pub obstacles: Vec<Polygon>,
    pub grid_resolution: f64,
}

impl Workspace {
    pub fn new(bounds: Bounds, obstacles: Vec<Polygon>, grid_resolution: f64) -> Self {
        Self {
            bounds,
            obstacles,
            grid_resolution,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bounds.area() > 0.0) {
            return Err(ScenarioError::InvalidWorkspace("bounds must have positive area".into()));
        }
        if !(self.grid_resolution > 0.0) || !self.grid_resolution.is_finite() {
            return Err(ScenarioError::InvalidWorkspace("grid_resolution must be positive".into()));
        }
        for (i, poly) in self.obstacles.iter().enumerate() {
            if !poly.is_simple() {
                return Err(ScenarioError::InvalidWorkspace(format!("obstacle {i} is not a simple polygon")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spill {
    pub id: usize,
    pub centroid: Vec2,
    /// Oil volume in cubic meters.
    pub volume: f64,
    /// Slick perimeter in meters.
    pub perimeter: f64,
    /// Damage rate weight, strictly positive.
    pub risk: f64,
}

impl Spill {
    pub fn clean_time(&self, alpha_clean: f64) -> f64 {
        alpha_clean * self.volume
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub workspace: Workspace,
    pub depot: Vec2,
    pub spills: Vec<Spill>,
    pub fleet_size: usize,
    /// Transit speed between spills (m/s).
    pub v_transit: f64,
    /// Speed along the spill perimeter during containment (m/s).
    pub v_encircle: f64,
    /// Cleaning time per cubic meter of oil (s/m^3).
    pub alpha_clean: f64,
    pub boom_length: f64,
    #[serde(default)]
    pub rng_seed: u64,
}

impl Scenario {
    pub fn spill_count(&self) -> usize {
        self.spills.len()
    }

    /// Checks the scalar invariants. Free-space membership of the depot and the
    /// centroids is checked against the rasterized grid by the graph builder.
    pub fn validate(&self) -> Result<()> {
        self.workspace.validate()?;
        let bad = |m: &str| Err(ScenarioError::InvalidScenario(m.to_string()));
        if self.fleet_size < 1 {
            return bad("fleet_size must be at least 1");
        }
        if !(self.v_transit > 0.0) || !(self.v_encircle > 0.0) {
            return bad("v_transit and v_encircle must be positive");
        }
        if !(self.alpha_clean >= 0.0) {
            return bad("alpha_clean must be non-negative");
        }
        if !self.workspace.bounds.contains(&self.depot) {
            return bad("depot lies outside the workspace");
        }
        for (i, s) in self.spills.iter().enumerate() {
            if s.id != i + 1 {
                return bad("spill ids must be unique and contiguous from 1, in order");
            }
            if !(s.volume >= 0.0) || !(s.perimeter >= 0.0) {
                return bad("spill volume and perimeter must be non-negative");
            }
            if !(s.risk > 0.0) || !s.risk.is_finite() {
                return bad("spill risk must be positive and finite");
            }
        }
        Ok(())
    }

    /// Location of graph vertex `v` (0 is the depot, `i` is spill `i`).
    pub fn vertex_position(&self, v: usize) -> Vec2 {
        if v == 0 {
            self.depot
        } else {
            self.spills[v - 1].centroid
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let sc: Scenario = serde_json::from_str(s)?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string()?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bowtie_is_not_simple() {
        let bowtie = Polygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 2.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(0.0, 2.0),
        ]);
        assert!(!bowtie.is_simple());
        assert!(Polygon::rectangle(0.0, 0.0, 1.0, 1.0).is_simple());
    }

    #[test]
    fn workspace_rejects_degenerate_inputs() {
        let ws = Workspace::new(Bounds::new(0.0, 0.0, 0.0, 10.0), vec![], 1.0);
        assert!(matches!(ws.validate(), Err(ScenarioError::InvalidWorkspace(_))));
        let ws = Workspace::new(Bounds::new(0.0, 0.0, 10.0, 10.0), vec![], 0.0);
        assert!(matches!(ws.validate(), Err(ScenarioError::InvalidWorkspace(_))));
    }

    #[test]
    fn point_in_polygon() {
        let sq = Polygon::rectangle(0.0, 0.0, 2.0, 2.0);
        assert!(sq.contains(&Vec2::new(1.0, 1.0)));
        assert!(!sq.contains(&Vec2::new(3.0, 1.0)));
    }
}
