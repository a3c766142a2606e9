use super::tracking::{DuoRunner, LegOutcome, PoseSample, TrackingOptions};
use super::{HarnessError, Result};
use crate::control::{path_to_setpoints, ControllerConfig, SetpointConfig, SetpointPlan};
use crate::geometry::{heading_vec, left_normal, Polyline, Pose, ReferencePath, Vec2};
use crate::routing::{evaluate_damage, solve, SolveReport, SolverConfig};
use crate::scenario::{build_motion_graph_with_transit, shortest_path, Scenario};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::io::Write;

pub const MISSION_HEADER: [&str; 8] = ["duo", "spill", "planned_completion", "realized_completion", "risk", "transit_length", "encircle_radius", "completed"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MissionConfig {
    pub solver: SolverConfig,
    pub controller: ControllerConfig,
    pub tracking: TrackingOptions,
    /// Polyline step of the encircle circle (m).
    pub circle_step: f64,
    /// Floor on the encircle radius (m); tighter circles are beyond the formation's turning ability.
    pub min_encircle_radius: f64,
    /// Straight run (m) over which the formation narrows before joining the circle.
    pub lead_in: f64,
    /// Per-leg time cap as a multiple of the planned leg time, plus a fixed margin.
    pub cap_factor: f64,
    pub cap_margin: f64,
}

impl Default for MissionConfig {
    fn default() -> Self {
        Self {
            // A node budget keeps the routing, and so the whole mission, reproducible.
            solver: SolverConfig { node_limit: Some(200_000), ..SolverConfig::default() },
            controller: ControllerConfig::default(),
            tracking: TrackingOptions::default(),
            circle_step: 0.25,
            lead_in: 40.0,
            min_encircle_radius: 15.0,
            cap_factor: 3.0,
            cap_margin: 60.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpillVisit {
    pub spill: usize,
    pub risk: f64,
    pub planned_completion: f64,
    /// Clock at the end of the clean dwell; `None` when the duo never got there.
    pub realized_completion: Option<f64>,
    pub transit_length: f64,
    pub encircle_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuoExecution {
    pub route: Vec<usize>,
    pub visits: Vec<SpillVisit>,
    pub completed: bool,
    pub max_stern_separation: f64,
    pub trajectory: Vec<PoseSample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionResult {
    pub scenario_seed: u64,
    pub report: SolveReport,
    pub duos: Vec<DuoExecution>,
    pub planned_damage: f64,
    /// Sum of risk times realized completion over visited spills.
    pub realized_damage: f64,
    pub completed: bool,
}

impl MissionResult {
    /// One row per visited spill; duos are numbered from 1.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(MISSION_HEADER)?;
        for (d, duo) in self.duos.iter().enumerate() {
            for v in &duo.visits {
                w.write_record([
                    (d + 1).to_string(),
                    v.spill.to_string(),
                    v.planned_completion.to_string(),
                    v.realized_completion.map_or_else(String::new, |t| t.to_string()),
                    v.risk.to_string(),
                    v.transit_length.to_string(),
                    v.encircle_radius.to_string(),
                    (v.realized_completion.is_some() as u8).to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Counter-clockwise circle about `center` starting at `entry`.
pub fn encircle_path(center: Vec2, entry: Vec2, step: f64) -> Polyline {
    let r = (entry - center).norm();
    let a0 = (entry.y - center.y).atan2(entry.x - center.x);
    let n = ((TAU * r / step).ceil() as usize).max(8);
    Polyline::new((0..=n).map(|i| center + heading_vec(a0 + TAU * i as f64 / n as f64) * r).collect())
}

/// Point of the circle `(center, r)` where a straight run from `from` joins it
/// tangentially in the counter-clockwise sense; the nearest circle point when
/// `from` is not outside the circle.
pub fn ccw_tangent_point(center: Vec2, r: f64, from: Vec2) -> Vec2 {
    let d = from - center;
    let dist = d.norm();
    if dist <= r * (1.0 + 1e-9) {
        let dir = if dist > 0.0 { d / dist } else { Vec2::new(-1.0, 0.0) };
        return center + dir * r;
    }
    let alpha = d.y.atan2(d.x);
    center + heading_vec(alpha + (r / dist).acos()) * r
}

/// Straight lead-in from `from` joining the counter-clockwise circle tangentially,
/// followed by one full turn.
pub fn encircle_with_lead_in(center: Vec2, r: f64, from: Vec2, step: f64) -> Polyline {
    let entry = ccw_tangent_point(center, r, from);
    let mut path = Polyline::new(if (entry - from).norm() > 1e-9 { vec![from] } else { vec![] });
    path.extend(&encircle_path(center, entry, step));
    path
}

/// Leaves the counter-clockwise circle `(center, r)` from lap-end angle `a_end`:
/// continues around it to the point whose tangent aims at the first vertex of
/// `route` clear of the circle, then follows `route` from that vertex.
fn depart_circle(center: Vec2, r: f64, a_end: f64, route: &Polyline, step: f64) -> Polyline {
    let lap_end = center + heading_vec(a_end) * r;
    let Some(i) = route.points.iter().position(|p| (p - center).norm() > r + 1.0) else {
        let mut pts = vec![lap_end];
        pts.extend(route.points.last().copied());
        return Polyline::new(pts);
    };
    let q = route.points[i] - center;
    let a_exit = q.y.atan2(q.x) - (r / q.norm()).acos();
    let sweep = (a_exit - a_end).rem_euclid(TAU);
    let n = (sweep * r / step).ceil() as usize;
    let mut pts: Vec<Vec2> = (0..=n).map(|j| center + heading_vec(a_end + sweep * j as f64 / n.max(1) as f64) * r).collect();
    pts.extend_from_slice(&route.points[i..]);
    Polyline::new(pts)
}

/// Truncates `path` at its last entry into the disc of radius `r` about `center`.
/// Returns the truncated path and the entry point.
fn truncate_at_disc(path: &Polyline, center: Vec2, r: f64) -> (Polyline, Vec2) {
    let pts = &path.points;
    let Some(&first) = pts.first() else {
        return (path.clone(), center);
    };
    if (first - center).norm() <= r {
        let dir = if (first - center).norm() > 0.0 { (first - center).normalize() } else { Vec2::new(-1.0, 0.0) };
        let entry = center + dir * r;
        return (Polyline::new(vec![first, entry]), entry);
    }
    // Last segment that starts outside and ends inside the disc.
    for i in (0..pts.len() - 1).rev() {
        let (a, b) = (pts[i], pts[i + 1]);
        if (a - center).norm() > r && (b - center).norm() <= r {
            let d = b - a;
            let f = a - center;
            let (qa, qb, qc) = (d.dot(&d), 2.0 * f.dot(&d), f.dot(&f) - r * r);
            let t = ((-qb - (qb * qb - 4.0 * qa * qc).max(0.0).sqrt()) / (2.0 * qa)).clamp(0.0, 1.0);
            let entry = a + d * t;
            let mut out = pts[..=i].to_vec();
            if (entry - a).norm() > 1e-9 {
                out.push(entry);
            }
            return (Polyline::new(out), entry);
        }
    }
    let last = *pts.last().expect("non-empty");
    (path.clone(), last)
}

/// Starting poses of the two vessels for a leg whose first heading is `heading` at `center`.
fn formation(center: Vec2, heading: f64, offset: f64) -> [Pose; 2] {
    let n = left_normal(heading) * (0.5 * offset);
    let a = center + n;
    let b = center - n;
    [Pose { x: a.x, y: a.y, theta: heading }, Pose { x: b.x, y: b.y, theta: heading }]
}

struct Leg {
    plan: SetpointPlan,
    cap: f64,
}

fn leg(path: &dyn ReferencePath, sp: &SetpointConfig, boom: f64, cap: f64) -> Result<Leg> {
    Ok(Leg { plan: path_to_setpoints(path, sp, boom)?, cap })
}

/// Solves the routing problem, then executes every duo's route with the duo
/// simulator: A* transit to each spill, a counter-clockwise encircle circle of
/// circumference `C` about the centroid, and a clean dwell of `alpha * V`.
pub fn run_mission(scenario: &Scenario, config: &MissionConfig) -> Result<MissionResult> {
    config.controller.validate()?;
    let (graph, _transit, grid) = build_motion_graph_with_transit(scenario)?;
    let k = scenario.fleet_size;
    let report = solve(&graph, k, &config.solver)?;
    let (planned_damage, planned) = evaluate_damage(&graph, &report.best)?;
    let mut opts = config.tracking;
    let scale = scenario.boom_length / opts.duo.boom.total_length;
    opts.duo.boom = crate::dynamics::BoomParams {
        total_length: scenario.boom_length,
        link_inertia: opts.duo.boom.link_inertia * scale * scale,
        ..opts.duo.boom
    };
    let boom = opts.duo.boom.total_length;
    let transit_offset = opts.setpoints.lateral_offset.unwrap_or(0.5 * boom);

    let run_duo = |d: usize| -> Result<DuoExecution> {
        let route = report.best.routes[d].clone();
        let mut visits = Vec::with_capacity(route.len());
        let mut trajectory = Vec::new();
        let mut runner: Option<DuoRunner> = None;
        let mut prev_vertex = 0usize;
        // Centre, radius and lap-end angle of the last circle flown.
        let mut prev_circle: Option<(Vec2, f64, f64)> = None;
        let mut completed = true;
        let mut max_sep: f64 = 0.0;
        let mut planned_clock = 0.0;
        for &s in &route {
            let spill = &scenario.spills[s - 1];
            let c = spill.centroid;
            let radius = (spill.perimeter / TAU).max(config.min_encircle_radius);
            let enc_offset = transit_offset.min(radius);
            let step = config.circle_step.min(radius / 4.0).max(1e-3);
            let from = scenario.vertex_position(prev_vertex);
            let route_path = shortest_path(&grid, from, c)?.polyline(&grid, from, c);
            let departure = match prev_circle {
                None => route_path,
                Some((pc, pr, a_end)) => depart_circle(pc, pr, a_end, &route_path, step),
            };
            let (transit, lead_start) = truncate_at_disc(&departure, c, radius + config.lead_in);
            let encircle = encircle_with_lead_in(c, radius, lead_start, step);
            let entry = ccw_tangent_point(c, radius, lead_start);
            let t_transit = transit.length() / scenario.v_transit;
            let t_enc = encircle.length() / scenario.v_encircle;
            let t_clean = spill.clean_time(scenario.alpha_clean);
            planned_clock += graph.cost(prev_vertex, s);
            let mut visit = SpillVisit {
                spill: s,
                risk: spill.risk,
                planned_completion: planned.of(s),
                realized_completion: None,
                transit_length: transit.length(),
                encircle_radius: radius,
            };
            debug_assert!((planned_clock - planned.of(s)).abs() <= 1e-6 * planned_clock.max(1.0));
            let cap = |planned: f64| config.cap_factor * planned + config.cap_margin;
            let mut legs = Vec::with_capacity(2);
            if transit.length() > 1e-6 {
                let mut sp = opts.setpoints;
                sp.u_cruise = scenario.v_transit;
                sp.lateral_offset = Some(transit_offset);
                sp.spacing = sp.spacing.min(transit.length() / 4.0).max(sp.resolution);
                legs.push(leg(&transit, &sp, boom, cap(t_transit))?);
            }
            let mut sp = opts.setpoints;
            sp.u_cruise = scenario.v_encircle;
            sp.lateral_offset = Some(enc_offset);
            sp.spacing = sp.spacing.min(TAU * radius / 8.0).max(sp.resolution);
            sp.arrival_radius = sp.arrival_radius.min(0.5 * sp.spacing);
            legs.push(leg(&encircle, &sp, boom, cap(t_enc))?);
            let mut ok = true;
            for l in &legs {
                let r = match runner.as_mut() {
                    Some(r) => r,
                    None => {
                        let h = l.plan.setpoints[0][0].heading;
                        runner = Some(DuoRunner::new(formation(scenario.depot, h, transit_offset), &config.controller, &opts, None)?);
                        runner.as_mut().expect("just set")
                    }
                };
                let until = r.time() + l.cap;
                let outcome = r.follow(&l.plan, until)?;
                trajectory.extend(r.take_poses());
                if outcome == LegOutcome::TimedOut {
                    ok = false;
                    break;
                }
            }
            let r = runner.as_mut().expect("at least one leg ran");
            if ok {
                let last = legs.last().expect("encircle leg");
                let hold = [0, 1].map(|w| last.plan.setpoints[w].last().map_or(0.0, |p| p.heading));
                r.dwell(&last.plan, hold, t_clean)?;
                trajectory.extend(r.take_poses());
                visit.realized_completion = Some(r.time());
            }
            max_sep = max_sep.max(r.max_stern_separation);
            visits.push(visit);
            if !ok {
                completed = false;
                break;
            }
            prev_circle = Some((c, radius, (entry.y - c.y).atan2(entry.x - c.x)));
            prev_vertex = s;
        }
        if let Some(r) = runner.as_mut() {
            max_sep = max_sep.max(r.max_stern_separation);
        }
        Ok(DuoExecution { route, visits, completed, max_stern_separation: max_sep, trajectory })
    };
    let duos = crate::par::map_indices(k, run_duo).into_iter().collect::<Result<Vec<_>>>()?;
    let mut realized_damage = 0.0;
    for duo in &duos {
        for v in &duo.visits {
            if let Some(t) = v.realized_completion {
                realized_damage += graph.risk(v.spill) * t;
            }
        }
    }
    if !(realized_damage >= 0.0) {
        return Err(HarnessError::Config("realized damage is not finite".into()));
    }
    let completed = duos.iter().all(|d| d.completed);
    Ok(MissionResult { scenario_seed: scenario.rng_seed, report, duos, planned_damage, realized_damage, completed })
}
