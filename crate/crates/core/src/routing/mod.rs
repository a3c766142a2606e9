//! Damage-minimizing routing: minimize the risk-weighted sum of spill completion
//! times over `k` depot-rooted routes that never return.
//!
//! The solver stack mirrors a warm-started exact method: a greedy
//! importance-to-travel-time assignment, an exact per-route subset DP, an
//! iterated local search over cross-route swaps, and a sequence-space
//! branch-and-bound that certifies optimality or reports a lower bound. The
//! edge-flow MILP can be exported as LP text for external solvers.

mod bnb;
mod brute;
mod dp;
mod greedy;
mod ils;
mod milp;

pub use bnb::{solve_exact_bnb, BnbConfig};
pub use brute::{brute_force_oracle, BRUTE_FORCE_MAX_SPILLS};
pub use dp::{dp_order, dp_order_with_cap, DEFAULT_DP_CAP};
pub use greedy::{greedy_assign, greedy_order};
pub use ils::{ils_refine, ils_refine_with_trace};
pub use milp::{export_milp, milp_variable_count, Constraint, LinearTerm, MilpModel, Sense, VarKind, Variable};

use crate::scenario::MotionGraph;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::time::Duration;
use web_time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RoutingError {
    #[error("invalid route set: {0}")]
    InvalidRouteSet(String),
    #[error("{what} has {size} spills, above the capacity limit of {cap}")]
    Capacity { what: &'static str, size: usize, cap: usize },
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("failed to write model: {0}")]
    Write(#[from] std::io::Error),
}

pub type Result<T, E = RoutingError> = std::result::Result<T, E>;

/// One ordered spill sequence per agent; every spill appears exactly once.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub struct RouteSet {
    pub routes: Vec<Vec<usize>>,
}

impl RouteSet {
    pub fn new(routes: Vec<Vec<usize>>) -> Self {
        Self { routes }
    }

    pub fn empty(k: usize) -> Self {
        Self { routes: vec![Vec::new(); k] }
    }

    pub fn agent_count(&self) -> usize {
        self.routes.len()
    }

    /// Checks the partition property against a graph with `p` spills.
    pub fn validate(&self, p: usize) -> Result<()> {
        let mut seen = vec![false; p + 1];
        for route in &self.routes {
            for &s in route {
                if s == 0 {
                    return Err(RoutingError::InvalidRouteSet("depot inside a route".into()));
                }
                if s > p {
                    return Err(RoutingError::InvalidRouteSet(format!("unknown spill {s}")));
                }
                if seen[s] {
                    return Err(RoutingError::InvalidRouteSet(format!("spill {s} appears twice")));
                }
                seen[s] = true;
            }
        }
        if let Some(missing) = (1..=p).find(|&s| !seen[s]) {
            return Err(RoutingError::InvalidRouteSet(format!("spill {missing} is not served")));
        }
        Ok(())
    }

    /// Agent index serving each spill (index 0 unused).
    pub fn assignment(&self, p: usize) -> Vec<usize> {
        let mut owner = vec![usize::MAX; p + 1];
        for (a, route) in self.routes.iter().enumerate() {
            for &s in route {
                owner[s] = a;
            }
        }
        owner
    }

    /// Routes as an order-independent canonical form (non-empty routes sorted).
    pub fn canonical(&self) -> Vec<Vec<usize>> {
        let mut r: Vec<Vec<usize>> = self.routes.iter().filter(|r| !r.is_empty()).cloned().collect();
        r.sort();
        r
    }
}

/// Completion time of every spill, indexed by spill id (index 0 unused).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionTimes {
    pub t: Vec<f64>,
}

impl CompletionTimes {
    pub fn of(&self, spill: usize) -> f64 {
        self.t[spill]
    }
}

/// Damage of a single route from the depot, accumulated in route order.
pub(crate) fn route_damage(graph: &MotionGraph, route: &[usize]) -> f64 {
    let mut t = 0.0;
    let mut prev = 0;
    let mut damage = 0.0;
    for &s in route {
        t += graph.cost(prev, s);
        damage += graph.risk(s) * t;
        prev = s;
    }
    damage
}

/// Total risk-weighted completion time and the per-spill completion times.
pub fn evaluate_damage(graph: &MotionGraph, routes: &RouteSet) -> Result<(f64, CompletionTimes)> {
    let p = graph.spill_count();
    routes.validate(p)?;
    let mut times = vec![0.0; p + 1];
    let mut damage = 0.0;
    for route in &routes.routes {
        let mut t = 0.0;
        let mut prev = 0;
        let mut route_sum = 0.0;
        for &s in route {
            t += graph.cost(prev, s);
            times[s] = t;
            route_sum += graph.risk(s) * t;
            prev = s;
        }
        damage += route_sum;
    }
    Ok((damage, CompletionTimes { t: times }))
}

/// Damage without partition validation, for solver inner loops.
pub(crate) fn total_damage(graph: &MotionGraph, routes: &RouteSet) -> f64 {
    routes.routes.iter().map(|r| route_damage(graph, r)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Greedy,
    Dp,
    Ils,
    Bnb,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Greedy => "greedy",
            Stage::Dp => "dp",
            Stage::Ils => "ils",
            Stage::Bnb => "bnb",
        })
    }
}

impl FromStr for Stage {
    type Err = RoutingError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "greedy" | "h1" => Ok(Stage::Greedy),
            "dp" | "h2" => Ok(Stage::Dp),
            "ils" | "h3" => Ok(Stage::Ils),
            "bnb" | "exact" => Ok(Stage::Bnb),
            other => Err(RoutingError::Config(format!("unknown stage '{other}'"))),
        }
    }
}

pub fn parse_stages(list: &str) -> Result<Vec<Stage>> {
    list.split(',').filter(|s| !s.trim().is_empty()).map(Stage::from_str).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub objective: f64,
    /// Excluded from CSV output; wall-clock time is not reproducible.
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub best: RouteSet,
    pub objective: f64,
    pub lower_bound: f64,
    /// `(objective - lower_bound) / objective`, zero when the objective is zero.
    pub gap: f64,
    pub nodes_explored: u64,
    pub wall_time: f64,
    /// True when the exact search stopped on its time or node budget.
    pub timed_out: bool,
    pub stage_log: Vec<StageRecord>,
}

pub(crate) fn relative_gap(objective: f64, lower_bound: f64) -> f64 {
    if objective <= 0.0 {
        0.0
    } else {
        ((objective - lower_bound) / objective).clamp(0.0, 1.0)
    }
}

/// Options for the staged pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub stages: Vec<Stage>,
    pub dp_cap: usize,
    pub ils_iterations: usize,
    pub seed: u64,
    /// Seconds allowed for branch-and-bound.
    pub time_limit: f64,
    /// Optional deterministic node budget for branch-and-bound.
    pub node_limit: Option<u64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            stages: vec![Stage::Greedy, Stage::Dp, Stage::Ils, Stage::Bnb],
            dp_cap: DEFAULT_DP_CAP,
            ils_iterations: 500,
            seed: 0,
            time_limit: 300.0,
            node_limit: None,
        }
    }
}

/// Reorders every route exactly, keeping the assignment; routes over the DP cap
/// keep their greedy order. A reordering is only kept when it does not worsen the route.
pub fn dp_refine(graph: &MotionGraph, routes: &RouteSet, dp_cap: usize) -> RouteSet {
    let mut out = routes.clone();
    for route in out.routes.iter_mut() {
        let candidate = if route.len() <= dp_cap {
            dp_order_with_cap(graph, route, dp_cap).expect("size checked against cap")
        } else {
            greedy_order(graph, route)
        };
        if route_damage(graph, &candidate) <= route_damage(graph, route) {
            *route = candidate;
        }
    }
    out
}

/// Runs the requested stages in order; each stage starts from the previous result.
/// Without a heuristic stage before `Bnb`, the exact search starts cold.
pub fn solve(graph: &MotionGraph, k: usize, config: &SolverConfig) -> Result<SolveReport> {
    if k == 0 {
        return Err(RoutingError::Config("fleet size must be at least 1".into()));
    }
    let start = Instant::now();
    let mut log = Vec::new();
    let mut current: Option<RouteSet> = None;
    let mut bnb_report: Option<SolveReport> = None;
    for &stage in &config.stages {
        let t0 = Instant::now();
        match stage {
            Stage::Greedy => current = Some(greedy_assign(graph, k)),
            Stage::Dp => {
                let base = current.take().unwrap_or_else(|| greedy_assign(graph, k));
                current = Some(dp_refine(graph, &base, config.dp_cap));
            }
            Stage::Ils => {
                let base = current.take().unwrap_or_else(|| greedy_assign(graph, k));
                current = Some(ils_refine(graph, &base, config.ils_iterations, config.seed, config.dp_cap));
            }
            Stage::Bnb => {
                let cfg = BnbConfig {
                    time_limit: Duration::from_secs_f64(config.time_limit.max(0.0)),
                    node_limit: config.node_limit,
                };
                if !(config.time_limit > 0.0) {
                    return Err(RoutingError::Config("time limit must be positive".into()));
                }
                let rep = solve_exact_bnb(graph, k, current.as_ref(), &cfg)?;
                current = Some(rep.best.clone());
                bnb_report = Some(rep);
            }
        }
        let routes = current.as_ref().expect("every stage produces routes");
        log.push(StageRecord {
            stage,
            objective: total_damage(graph, routes),
            wall_time: t0.elapsed().as_secs_f64(),
        });
    }
    let best = current.unwrap_or_else(|| greedy_assign(graph, k));
    let (objective, _) = evaluate_damage(graph, &best)?;
    let (lower_bound, nodes, timed_out) = match &bnb_report {
        Some(r) => (r.lower_bound.min(objective), r.nodes_explored, r.timed_out),
        None => (bnb::root_lower_bound(graph, k).min(objective), 0, false),
    };
    Ok(SolveReport {
        best,
        objective,
        lower_bound,
        gap: relative_gap(objective, lower_bound),
        nodes_explored: nodes,
        wall_time: start.elapsed().as_secs_f64(),
        timed_out,
        stage_log: log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn graph(cost: Vec<Vec<f64>>, risk: Vec<f64>) -> MotionGraph {
        MotionGraph::from_costs(cost, risk).unwrap()
    }

    #[test]
    fn single_spill_damage() {
        let g = graph(vec![vec![0.0, 40.0], vec![0.0, 0.0]], vec![0.0, 2.0]);
        let (d, t) = evaluate_damage(&g, &RouteSet::new(vec![vec![1]])).unwrap();
        assert_eq!(d, 80.0);
        assert_eq!(t.of(1), 40.0);
    }

    #[test]
    fn prefix_sums() {
        let g = graph(
            vec![vec![0.0, 10.0, 99.0], vec![0.0, 0.0, 5.0], vec![0.0, 99.0, 0.0]],
            vec![0.0, 1.0, 1.0],
        );
        let (d, t) = evaluate_damage(&g, &RouteSet::new(vec![vec![1, 2]])).unwrap();
        assert_eq!((t.of(1), t.of(2), d), (10.0, 15.0, 25.0));
    }

    #[test]
    fn partition_violations() {
        let g = graph(vec![vec![0.0, 1.0, 1.0], vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]], vec![0.0, 1.0, 1.0]);
        assert!(matches!(
            evaluate_damage(&g, &RouteSet::new(vec![vec![1]])),
            Err(RoutingError::InvalidRouteSet(_))
        ));
        assert!(matches!(
            evaluate_damage(&g, &RouteSet::new(vec![vec![1, 2], vec![2]])),
            Err(RoutingError::InvalidRouteSet(_))
        ));
        assert!(matches!(
            evaluate_damage(&g, &RouteSet::new(vec![vec![0, 1, 2]])),
            Err(RoutingError::InvalidRouteSet(_))
        ));
    }

    #[test]
    fn stage_parsing() {
        assert_eq!(
            parse_stages("greedy,dp,ils,bnb").unwrap(),
            vec![Stage::Greedy, Stage::Dp, Stage::Ils, Stage::Bnb]
        );
        assert!(parse_stages("greedy,magic").is_err());
    }
}
