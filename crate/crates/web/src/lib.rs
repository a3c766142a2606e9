//! Browser bindings for the static demo page. Each export returns a JSON string
//! that the page renders on a canvas.

use serde::Serialize;
use spillfleet::control::{ControllerConfig, FblGains, PidGains};
use spillfleet::dynamics::{Controls, DuoSim, TrajectorySink};
use spillfleet::geometry::{Pose, ReferencePath, Vec2};
use spillfleet::harness::{dubins_path, run_tracking_logged, TrackingExperiment, TrackingOptions};
use spillfleet::routing::{solve, SolverConfig};
use spillfleet::scenario::{build_motion_graph_with_transit, generate_random_scenario, shortest_path, GeneratorParams};
use wasm_bindgen::prelude::*;

/// Exact-search budget in the browser; keeps the page responsive.
const NODE_LIMIT: u64 = 50_000;
const TIME_LIMIT_S: f64 = 2.0;
const MAX_SPILLS: usize = 30;
const MAX_AGENTS: usize = 6;

fn to_js(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn json(v: &impl Serialize) -> Result<String, JsError> {
    serde_json::to_string(v).map_err(to_js)
}

#[derive(Serialize)]
struct SpillView {
    id: usize,
    centroid: Vec2,
    radius: f64,
    risk: f64,
}

#[derive(Serialize)]
struct StageView {
    stage: String,
    objective: f64,
}

#[derive(Serialize)]
struct PlanView {
    min: Vec2,
    max: Vec2,
    depot: Vec2,
    obstacles: Vec<Vec<Vec2>>,
    spills: Vec<SpillView>,
    routes: Vec<Vec<usize>>,
    /// Obstacle-free polyline per duo from the depot through its spills.
    paths: Vec<Vec<Vec2>>,
    stages: Vec<StageView>,
    objective: f64,
    lower_bound: f64,
    gap: f64,
}

/// Random scenario, staged routing (greedy, DP, ILS, branch-and-bound) and the
/// grid paths each duo would follow.
#[wasm_bindgen]
pub fn plan_routes(seed: u32, spills: usize, agents: usize) -> Result<String, JsError> {
    if spills > MAX_SPILLS || !(1..=MAX_AGENTS).contains(&agents) {
        return Err(JsError::new(&format!("spills must be at most {MAX_SPILLS} and duos between 1 and {MAX_AGENTS}")));
    }
    let params = GeneratorParams::default();
    let scenario = generate_random_scenario(u64::from(seed), spills, agents, &params).map_err(to_js)?;
    let (graph, _, grid) = build_motion_graph_with_transit(&scenario).map_err(to_js)?;
    let config = SolverConfig { seed: u64::from(seed), time_limit: TIME_LIMIT_S, node_limit: Some(NODE_LIMIT), ..SolverConfig::default() };
    let report = solve(&graph, agents, &config).map_err(to_js)?;
    let mut paths = Vec::new();
    for route in &report.best.routes {
        let mut pts = vec![scenario.depot];
        let mut from = scenario.depot;
        for &s in route {
            let to = scenario.vertex_position(s);
            let leg = shortest_path(&grid, from, to).map_err(to_js)?.polyline(&grid, from, to);
            pts.extend(leg.points.into_iter().skip(1));
            from = to;
        }
        paths.push(pts);
    }
    json(&PlanView {
        min: scenario.workspace.bounds.min,
        max: scenario.workspace.bounds.max,
        depot: scenario.depot,
        obstacles: scenario.workspace.obstacles.iter().map(|o| o.vertices.clone()).collect(),
        spills: scenario
            .spills
            .iter()
            .map(|s| SpillView { id: s.id, centroid: s.centroid, radius: s.perimeter / std::f64::consts::TAU, risk: s.risk })
            .collect(),
        routes: report.best.routes.clone(),
        paths,
        stages: report.stage_log.iter().map(|r| StageView { stage: r.stage.to_string(), objective: r.objective }).collect(),
        objective: report.objective,
        lower_bound: report.lower_bound,
        gap: report.gap,
    })
}

#[derive(Serialize)]
struct DubinsView {
    word: String,
    length: f64,
    points: Vec<Vec2>,
}

/// Shortest Dubins path between two poses (angles in radians).
#[wasm_bindgen]
pub fn dubins_preview(x0: f64, y0: f64, theta0: f64, x1: f64, y1: f64, theta1: f64, rho: f64) -> Result<String, JsError> {
    if !(rho > 0.0) {
        return Err(JsError::new("turning radius must be positive"));
    }
    let (line, word, path) =
        dubins_path(Pose::new(x0, y0, theta0), Pose::new(x1, y1, theta1), rho, 0.5).ok_or_else(|| JsError::new("no Dubins path between these poses"))?;
    json(&DubinsView { word: word.to_string(), length: path.length(), points: line.points })
}

/// Hull and boom positions at each logging tick.
#[derive(Default)]
struct FrameRecorder {
    hulls: Vec<[Vec2; 2]>,
    booms: Vec<Vec<Vec2>>,
}

impl TrajectorySink for FrameRecorder {
    fn log(&mut self, sim: &DuoSim, _controls: &Controls) -> spillfleet::dynamics::Result<()> {
        let st = sim.state();
        self.hulls.push([Vec2::new(st.vessel_1.x, st.vessel_1.y), Vec2::new(st.vessel_2.x, st.vessel_2.y)]);
        self.booms.push(st.boom.links.iter().map(|l| l.center()).collect());
        Ok(())
    }
}

#[derive(Serialize)]
struct TrackView {
    word: String,
    completed: bool,
    sim_time: f64,
    rmse_cross_track: [f64; 2],
    rmse_heading_deg: [f64; 2],
    max_stern_separation: f64,
    reference: Vec<Vec2>,
    hulls: Vec<[Vec2; 2]>,
    booms: Vec<Vec<Vec2>>,
}

/// Closed-loop duo run along the Dubins reference from (0, 0, 0) to (100, 65, pi).
#[wasm_bindgen]
pub fn track_duo(rho: f64, v_ref: f64, controller: &str) -> Result<String, JsError> {
    let controller = match controller {
        "pid" => ControllerConfig::Pid(PidGains::default()),
        "fbl" => ControllerConfig::Fbl(FblGains::default()),
        other => return Err(JsError::new(&format!("unknown controller {other:?}"))),
    };
    let exp = TrackingExperiment {
        start: Pose::new(0.0, 0.0, 0.0),
        goal: Pose::new(100.0, 65.0, std::f64::consts::PI),
        rho,
        v_ref,
        controller,
        duration_cap: None,
    };
    let reference = dubins_path(exp.start, exp.goal, rho, 0.5).map(|(l, _, _)| l.points).unwrap_or_default();
    let mut frames = FrameRecorder::default();
    let r = run_tracking_logged(&exp, &TrackingOptions::default(), Some(&mut frames)).map_err(to_js)?;
    json(&TrackView {
        word: r.word.to_string(),
        completed: r.completed,
        sim_time: r.sim_time,
        rmse_cross_track: r.rmse_cross_track,
        rmse_heading_deg: r.rmse_heading_deg,
        max_stern_separation: r.max_stern_separation,
        reference,
        hulls: frames.hulls,
        booms: frames.booms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> serde_json::Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn plan_covers_every_spill_once() {
        let v = parse(&plan_routes(3, 6, 2).unwrap());
        let mut ids: Vec<u64> = v["routes"].as_array().unwrap().iter().flat_map(|r| r.as_array().unwrap().iter().map(|x| x.as_u64().unwrap())).collect();
        ids.sort_unstable();
        assert_eq!(ids, (1..=6).collect::<Vec<u64>>());
        assert_eq!(v["paths"].as_array().unwrap().len(), 2);
        assert!(v["objective"].as_f64().unwrap() >= v["lower_bound"].as_f64().unwrap());
    }

    #[test]
    fn dubins_preview_reports_word_and_samples() {
        let v = parse(&dubins_preview(0.0, 0.0, 0.0, 100.0, 65.0, std::f64::consts::PI, 15.0).unwrap());
        assert!(v["length"].as_f64().unwrap() > 119.0);
        assert!(v["points"].as_array().unwrap().len() > 100);
    }

    #[test]
    fn tracking_frames_follow_the_log() {
        let v = parse(&track_duo(15.0, 5.0, "pid").unwrap());
        assert_eq!(v["completed"], true);
        let n = v["hulls"].as_array().unwrap().len();
        assert!(n > 100);
        assert_eq!(v["booms"].as_array().unwrap().len(), n);
    }
}
