use super::astar::reachable_from;
use super::{Bounds, OccupancyGrid, Polygon, Result, Scenario, ScenarioError, Spill, Workspace};
use crate::geometry::Vec2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Knobs for synthetic scenario generation. Ranges are inclusive-exclusive `[lo, hi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorParams {
    pub bounds: Bounds,
    pub grid_resolution: f64,
    pub depot: Vec2,
    /// Target fraction of grid cells covered by obstacles.
    pub obstacle_coverage: f64,
    /// Side-length range of the rectangular obstacles (m).
    pub obstacle_size: (f64, f64),
    /// Obstacles keep at least this distance from the depot (m).
    pub depot_clearance: f64,
    pub risk_range: (f64, f64),
    pub volume_range: (f64, f64),
    /// Slick thickness used to turn volume into area; perimeter is that of the
    /// circle of equal area.
    pub slick_thickness: f64,
    pub v_transit: f64,
    pub v_encircle: f64,
    pub alpha_clean: f64,
    pub boom_length: f64,
    /// Placement attempts allowed per requested spill.
    pub attempts_per_spill: usize,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self {
            bounds: Bounds::new(0.0, 0.0, 1000.0, 1000.0),
            grid_resolution: 5.0,
            depot: Vec2::new(50.0, 50.0),
            obstacle_coverage: 0.1,
            obstacle_size: (40.0, 160.0),
            depot_clearance: 30.0,
            risk_range: (1.0, 10.0),
            volume_range: (1.0, 50.0),
            slick_thickness: 1.0,
            v_transit: 2.0,
            v_encircle: 1.0,
            alpha_clean: 10.0,
            boom_length: 40.0,
            attempts_per_spill: 1000,
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

fn generate_obstacles(rng: &mut ChaCha8Rng, params: &GeneratorParams, grid: &mut OccupancyGrid) -> Vec<Polygon> {
    let mut obstacles = Vec::new();
    let total = (grid.width * grid.height) as f64;
    let b = params.bounds;
    let max_tries = 10_000;
    let mut tries = 0;
    while (grid.occupied_count() as f64) < params.obstacle_coverage * total && tries < max_tries {
        tries += 1;
        let w = uniform(rng, params.obstacle_size);
        let h = uniform(rng, params.obstacle_size);
        let x0 = uniform(rng, (b.min.x, (b.max.x - w).max(b.min.x)));
        let y0 = uniform(rng, (b.min.y, (b.max.y - h).max(b.min.y)));
        let c = params.depot_clearance;
        let clear = params.depot.x < x0 - c || params.depot.x > x0 + w + c || params.depot.y < y0 - c || params.depot.y > y0 + h + c;
        if !clear {
            continue;
        }
        let poly = Polygon::rectangle(x0, y0, x0 + w, y0 + h);
        grid.stamp_polygon(&poly);
        obstacles.push(poly);
    }
    obstacles
}

/// Seeded random scenario: rectangular obstacles up to the coverage target, then
/// spills rejection-sampled uniformly over free cells reachable from the depot.
pub fn generate_random_scenario(seed: u64, p: usize, k: usize, params: &GeneratorParams) -> Result<Scenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let empty = Workspace::new(params.bounds, vec![], params.grid_resolution);
    let mut grid = super::rasterize(&empty)?;
    if !params.bounds.contains(&params.depot) {
        return Err(ScenarioError::InvalidScenario("depot lies outside the workspace".into()));
    }
    let obstacles = generate_obstacles(&mut rng, params, &mut grid);
    let depot_cell = grid
        .cell_of(&params.depot)
        .ok_or(ScenarioError::OutsideWorkspace { x: params.depot.x, y: params.depot.y })?;
    let reachable = reachable_from(&grid, depot_cell);
    if !reachable.iter().any(|&r| r) {
        return Err(ScenarioError::PlacementFailure {
            placed: 0,
            requested: p,
            attempts: 0,
        });
    }

    let mut spills = Vec::with_capacity(p);
    let max_attempts = params.attempts_per_spill.max(1) * p.max(1);
    let mut attempts = 0;
    let b = params.bounds;
    while spills.len() < p {
        if attempts >= max_attempts {
            return Err(ScenarioError::PlacementFailure {
                placed: spills.len(),
                requested: p,
                attempts,
            });
        }
        attempts += 1;
        let c = Vec2::new(uniform(&mut rng, (b.min.x, b.max.x)), uniform(&mut rng, (b.min.y, b.max.y)));
        let Some((ix, iy)) = grid.cell_of(&c) else { continue };
        if !reachable[grid.index(ix, iy)] {
            continue;
        }
        let volume = uniform(&mut rng, params.volume_range);
        let risk = uniform(&mut rng, params.risk_range);
        let area = volume / params.slick_thickness;
        spills.push(Spill {
            id: spills.len() + 1,
            centroid: c,
            volume,
            perimeter: 2.0 * (PI * area).sqrt(),
            risk,
        });
    }

    let scenario = Scenario {
        workspace: Workspace::new(params.bounds, obstacles, params.grid_resolution),
        depot: params.depot,
        spills,
        fleet_size: k.max(1),
        v_transit: params.v_transit,
        v_encircle: params.v_encircle,
        alpha_clean: params.alpha_clean,
        boom_length: params.boom_length,
        rng_seed: seed,
    };
    scenario.validate()?;
    Ok(scenario)
}
