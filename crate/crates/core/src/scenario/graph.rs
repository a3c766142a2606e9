use super::{rasterize, shortest_path_length, OccupancyGrid, Result, Scenario, ScenarioError};

/// Directed complete graph over the depot (vertex 0) and spills (vertices `1..=p`).
///
/// `cost(i, j)` is the time for a duo at `i` to transit to spill `j`, encircle it
/// and clean it. Edges into the depot do not exist: routes never return.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionGraph {
    n: usize,
    cost: Vec<f64>,
    risk: Vec<f64>,
}

impl MotionGraph {
    /// Builds a graph from a dense `(p+1) x (p+1)` cost matrix and per-vertex risks.
    /// Column 0 and the diagonal are ignored; `risk[0]` is ignored.
    pub fn from_costs(cost: Vec<Vec<f64>>, risk: Vec<f64>) -> Result<Self> {
        let n = cost.len();
        if n == 0 {
            return Err(ScenarioError::InvalidGraph("graph needs at least the depot vertex".into()));
        }
        if risk.len() != n || cost.iter().any(|row| row.len() != n) {
            return Err(ScenarioError::InvalidGraph("cost matrix must be square and match risk length".into()));
        }
        let mut flat = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if j == 0 {
                    flat[i * n] = f64::INFINITY;
                } else if i != j {
                    let c = cost[i][j];
                    if !(c >= 0.0) || !c.is_finite() {
                        return Err(ScenarioError::InvalidGraph(format!("cost ({i},{j}) = {c} is not a finite non-negative value")));
                    }
                    flat[i * n + j] = c;
                }
            }
        }
        let mut risk = risk;
        risk[0] = 0.0;
        for (i, &r) in risk.iter().enumerate().skip(1) {
            if !(r > 0.0) || !r.is_finite() {
                return Err(ScenarioError::InvalidGraph(format!("risk of spill {i} must be positive")));
            }
        }
        Ok(Self { n, cost: flat, risk })
    }

    /// Number of vertices, `p + 1`.
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn spill_count(&self) -> usize {
        self.n - 1
    }

    #[inline]
    pub fn cost(&self, i: usize, j: usize) -> f64 {
        self.cost[i * self.n + j]
    }

    #[inline]
    pub fn risk(&self, v: usize) -> f64 {
        self.risk[v]
    }

    pub fn risks(&self) -> &[f64] {
        &self.risk
    }

    /// Same graph with every risk multiplied by `factor`.
    pub fn scale_risks(&self, factor: f64) -> Result<Self> {
        let mut g = self.clone();
        for r in g.risk.iter_mut().skip(1) {
            *r *= factor;
        }
        if g.risk.iter().skip(1).any(|r| !(*r > 0.0)) {
            return Err(ScenarioError::InvalidGraph("scaled risk must stay positive".into()));
        }
        Ok(g)
    }
}

/// Symmetric matrix of obstacle-avoiding transit lengths between graph vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitTable {
    n: usize,
    distance: Vec<f64>,
}

impl TransitTable {
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.distance[i * self.n + j]
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }
}

fn transit_table(scenario: &Scenario, grid: &OccupancyGrid) -> Result<TransitTable> {
    let n = scenario.spill_count() + 1;
    let positions: Vec<_> = (0..n).map(|v| scenario.vertex_position(v)).collect();
    for (v, p) in positions.iter().enumerate() {
        if !grid.is_free_point(p)? {
            return Err(if v == 0 {
                ScenarioError::InvalidScenario("depot lies inside an obstacle".into())
            } else {
                ScenarioError::PointInObstacle { x: p.x, y: p.y }
            });
        }
    }
    let row = |i: usize| -> Result<Vec<f64>> {
        ((i + 1)..n)
            .map(|j| {
                shortest_path_length(grid, positions[i], positions[j]).map_err(|e| match e {
                    ScenarioError::Unreachable { .. } => ScenarioError::UnreachableSpill {
                        spill: j,
                        from: i,
                    },
                    other => other,
                })
            })
            .collect()
    };
    let rows: Vec<Vec<f64>> = crate::par::map_indices(n, row).into_iter().collect::<Result<_>>()?;
    let mut distance = vec![0.0; n * n];
    for (i, r) in rows.iter().enumerate() {
        for (off, &d) in r.iter().enumerate() {
            let j = i + 1 + off;
            distance[i * n + j] = d;
            distance[j * n + i] = d;
        }
    }
    Ok(TransitTable { n, distance })
}

/// Edge costs `c_ij = d(i,j)/v_transit + C(j)/v_encircle + alpha_clean * V(j)`.
pub fn build_motion_graph(scenario: &Scenario) -> Result<MotionGraph> {
    build_motion_graph_with_transit(scenario).map(|(g, _, _)| g)
}

/// Like [`build_motion_graph`], also returning the grid and transit lengths it used.
pub fn build_motion_graph_with_transit(scenario: &Scenario) -> Result<(MotionGraph, TransitTable, OccupancyGrid)> {
    scenario.validate()?;
    let grid = rasterize(&scenario.workspace)?;
    let transit = transit_table(scenario, &grid)?;
    let n = transit.n;
    let mut cost = vec![vec![0.0; n]; n];
    for (i, row) in cost.iter_mut().enumerate() {
        for (j, c) in row.iter_mut().enumerate().skip(1) {
            if i == j {
                continue;
            }
            let s = &scenario.spills[j - 1];
            *c = transit.distance(i, j) / scenario.v_transit
                + s.perimeter / scenario.v_encircle
                + s.clean_time(scenario.alpha_clean);
        }
    }
    let mut risk = vec![0.0];
    risk.extend(scenario.spills.iter().map(|s| s.risk));
    Ok((MotionGraph::from_costs(cost, risk)?, transit, grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;
    use crate::scenario::{Bounds, Polygon, Spill, Workspace};

    fn scenario(spills: Vec<Spill>, obstacles: Vec<Polygon>) -> Scenario {
        Scenario {
            workspace: Workspace::new(Bounds::new(0.0, 0.0, 200.0, 200.0), obstacles, 1.0),
            depot: Vec2::new(0.5, 0.5),
            spills,
            fleet_size: 1,
            v_transit: 10.0,
            v_encircle: 5.0,
            alpha_clean: 10.0,
            boom_length: 40.0,
            rng_seed: 0,
        }
    }

    #[test]
    fn edge_cost_formula() {
        // d = 100 m straight along x between cell centers.
        let s = Spill {
            id: 1,
            centroid: Vec2::new(100.5, 0.5),
            volume: 2.0,
            perimeter: 50.0,
            risk: 1.0,
        };
        let g = build_motion_graph(&scenario(vec![s], vec![])).unwrap();
        assert_eq!(g.cost(0, 1), 40.0);
    }

    #[test]
    fn degenerate_spill_costs_zero() {
        let s = Spill {
            id: 1,
            centroid: Vec2::new(0.7, 0.7),
            volume: 0.0,
            perimeter: 0.0,
            risk: 1.0,
        };
        let g = build_motion_graph(&scenario(vec![s], vec![])).unwrap();
        assert_eq!(g.cost(0, 1), 0.0);
    }

    #[test]
    fn unreachable_spill_is_named() {
        let s = Spill {
            id: 1,
            centroid: Vec2::new(150.0, 150.0),
            volume: 1.0,
            perimeter: 1.0,
            risk: 1.0,
        };
        let wall = Polygon::rectangle(100.0, 0.0, 101.0, 200.0);
        let err = build_motion_graph(&scenario(vec![s], vec![wall])).unwrap_err();
        assert!(matches!(err, ScenarioError::UnreachableSpill { spill: 1, from: 0 }));
    }

    #[test]
    fn costs_are_destination_dependent() {
        let a = Spill { id: 1, centroid: Vec2::new(50.5, 0.5), volume: 1.0, perimeter: 0.0, risk: 1.0 };
        let b = Spill { id: 2, centroid: Vec2::new(50.5, 50.5), volume: 5.0, perimeter: 0.0, risk: 1.0 };
        let g = build_motion_graph(&scenario(vec![a, b], vec![])).unwrap();
        assert!((g.cost(1, 2) - g.cost(2, 1) - 40.0).abs() < 1e-12);
    }
}
