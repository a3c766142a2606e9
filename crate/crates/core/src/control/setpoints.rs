use super::{ControlError, Result};
use crate::geometry::{cross, heading_vec, left_normal, wrap_angle, Polyline, Pose, ReferencePath, Vec2, DEGENERATE_SEGMENT};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Setpoint {
    pub position: Vec2,
    /// Path tangent, unwrapped along the plan.
    pub heading: f64,
    /// Arc length of the station along the base path.
    pub station: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SetpointConfig {
    /// Arc-length spacing between consecutive setpoints (m).
    pub spacing: f64,
    /// Full separation between the two offset paths (m); `None` means half the boom length.
    pub lateral_offset: Option<f64>,
    pub arrival_radius: f64,
    pub u_cruise: f64,
    /// Sampling step of the dense offset reference polylines (m).
    pub resolution: f64,
}

impl Default for SetpointConfig {
    fn default() -> Self {
        Self { spacing: 10.0, lateral_offset: None, arrival_radius: 2.0, u_cruise: 5.0, resolution: 0.05 }
    }
}

/// Synchronized setpoint sequences for vessel 1 (left of the path) and vessel 2 (right).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetpointPlan {
    pub setpoints: [Vec<Setpoint>; 2],
    pub u_cruise: f64,
    pub arrival_radius: f64,
    pub lateral_offset: f64,
    /// Dense offset references used for cross-track error, vertex `j` at base arc
    /// length `j * resolution` (the last vertex at the path end).
    pub offset_paths: [Polyline; 2],
    /// Unwrapped base-path tangent at each dense vertex, shared by both vessels.
    pub dense_headings: Vec<f64>,
    pub resolution: f64,
}

/// Nearest-point reference of a vessel on its offset path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackReference {
    /// Signed distance, positive to the left of the path.
    pub cross_track: f64,
    /// Base-path tangent at the nearest point, unwrapped.
    pub heading: f64,
}

/// Candidates whose distances differ by less than this (m) are treated as equally near.
const TIE_DISTANCE: f64 = 1e-6;

impl SetpointPlan {
    pub fn len(&self) -> usize {
        self.setpoints[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.setpoints[0].is_empty()
    }

    /// Dense-vertex range of vessel `which`'s offset path between base arc lengths `lo` and `hi`.
    pub fn dense_range(&self, which: usize, lo: f64, hi: f64) -> std::ops::RangeInclusive<usize> {
        let last = self.offset_paths[which].points.len().saturating_sub(1);
        let a = ((lo / self.resolution).floor().max(0.0) as usize).min(last);
        let b = ((hi / self.resolution).ceil().max(0.0) as usize + 1).min(last);
        a..=b.max(a)
    }

    /// Nearest point of vessel `which`'s offset path within dense vertices `range`.
    /// A collapsed stretch (an inner offset of a turn with radius equal to the
    /// half offset) is a single point admitting every tangent of the stretch; ties
    /// in distance resolve to the tangent closest to `theta`.
    pub fn reference_at(&self, which: usize, range: std::ops::RangeInclusive<usize>, q: Vec2, theta: f64) -> Option<TrackReference> {
        let pts = &self.offset_paths[which].points;
        let (lo, hi) = (*range.start(), (*range.end()).min(pts.len().saturating_sub(1)));
        if pts.is_empty() || lo > hi {
            return None;
        }
        let mut best: Option<(f64, TrackReference)> = None;
        let mut offer = |dist: f64, r: TrackReference| {
            let better = match best {
                None => true,
                Some((bd, b)) => {
                    dist < bd - TIE_DISTANCE
                        || (dist < bd + TIE_DISTANCE && wrap_angle(theta - r.heading).abs() < wrap_angle(theta - b.heading).abs())
                }
            };
            if better {
                best = Some((dist, r));
            }
        };
        if lo == hi {
            let d = q - pts[lo];
            let h = self.dense_headings[lo];
            let signed = if cross(&heading_vec(h), &d) >= 0.0 { d.norm() } else { -d.norm() };
            offer(d.norm(), TrackReference { cross_track: signed, heading: h });
        }
        for i in lo..hi {
            let a = pts[i];
            let seg = pts[i + 1] - a;
            let len2 = seg.norm_squared();
            let (h0, h1) = (self.dense_headings[i], self.dense_headings[i + 1]);
            let (foot, t, dir) = if len2 < DEGENERATE_SEGMENT * DEGENERATE_SEGMENT {
                (a, 0.0, heading_vec(h0))
            } else {
                let t = ((q - a).dot(&seg) / len2).clamp(0.0, 1.0);
                (a + seg * t, t, seg)
            };
            let d = q - foot;
            let dist = d.norm();
            let signed = if cross(&dir, &d) >= 0.0 { dist } else { -dist };
            offer(dist, TrackReference { cross_track: signed, heading: h0 + t * (h1 - h0) });
            if t == 0.0 && len2 < DEGENERATE_SEGMENT * DEGENERATE_SEGMENT {
                offer(dist, TrackReference { cross_track: signed, heading: h1 });
            }
        }
        best.map(|(_, r)| r)
    }

    /// [`Self::reference_at`] over the whole offset path.
    pub fn reference(&self, which: usize, q: Vec2, theta: f64) -> Option<TrackReference> {
        self.reference_at(which, 0..=self.offset_paths[which].points.len().saturating_sub(1), q, theta)
    }

    /// Pose of vessel `which` at setpoint `index`.
    pub fn pose(&self, which: usize, index: usize) -> Pose {
        let s = self.setpoints[which][index];
        Pose::new(s.position.x, s.position.y, s.heading)
    }
}

/// Arc-length stations `0, spacing, 2 spacing, ..., length`.
fn stations(length: f64, spacing: f64) -> Vec<f64> {
    let n = (length / spacing - 1e-9).ceil().max(0.0) as usize;
    let mut s: Vec<f64> = (0..n).map(|i| i as f64 * spacing).collect();
    s.push(length);
    s
}

/// Unwrapped tangent headings at the requested stations, integrating through a
/// dense walk so that no jump between stations is mistaken for a wrap.
fn unwrapped_headings(path: &dyn ReferencePath, at: &[f64], step: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(at.len());
    let mut h = path.sample(0.0).1;
    let mut s = 0.0;
    for &target in at {
        while s + step < target {
            s += step;
            h += wrap_angle(path.sample(s).1 - h);
        }
        s = target;
        h += wrap_angle(path.sample(s).1 - h);
        out.push(h);
    }
    out
}

/// Resamples `path` into synchronized left and right setpoints at `+-offset/2`.
pub fn path_to_setpoints(path: &dyn ReferencePath, cfg: &SetpointConfig, boom_length: f64) -> Result<SetpointPlan> {
    let length = path.length();
    if !(length > 0.0) || !length.is_finite() {
        return Err(ControlError::Config("reference path must have positive length".into()));
    }
    if !(cfg.spacing > 0.0) || !(cfg.resolution > 0.0) || !(cfg.arrival_radius > 0.0) || !(cfg.u_cruise >= 0.0) {
        return Err(ControlError::Config("spacing, resolution and arrival radius must be positive".into()));
    }
    let offset = cfg.lateral_offset.unwrap_or(0.5 * boom_length);
    if !(offset >= 0.0) {
        return Err(ControlError::Config("lateral offset must be non-negative".into()));
    }
    if offset >= boom_length {
        return Err(ControlError::BoomViolation { offset, boom_length });
    }
    let half = 0.5 * offset;
    let place = |s: f64, sign: f64| {
        let (p, h) = path.sample(s);
        p + left_normal(h) * (sign * half)
    };
    let st = stations(length, cfg.spacing);
    let headings = unwrapped_headings(path, &st, cfg.resolution);
    let make = |sign: f64| -> Vec<Setpoint> {
        st.iter().zip(&headings).map(|(&s, &h)| Setpoint { position: place(s, sign), heading: h, station: s }).collect()
    };
    let dense = stations(length, cfg.resolution);
    let dense_headings = unwrapped_headings(path, &dense, cfg.resolution);
    let poly = |sign: f64| Polyline::new(dense.iter().map(|&s| place(s, sign)).collect());
    Ok(SetpointPlan {
        setpoints: [make(1.0), make(-1.0)],
        u_cruise: cfg.u_cruise,
        arrival_radius: cfg.arrival_radius,
        lateral_offset: offset,
        offset_paths: [poly(1.0), poly(-1.0)],
        dense_headings,
        resolution: cfg.resolution,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupervisorMode {
    /// Both vessels under way to the current index.
    #[default]
    Cruise,
    /// One vessel arrived and waits at zero surge reference.
    Hold,
    /// Both arrived; indices just advanced.
    AlignedAdvance,
    /// Both at the final setpoint.
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SupervisorState {
    pub index: [usize; 2],
    pub arrived: [bool; 2],
    pub mode: SupervisorMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupervisorOutput {
    pub u_ref: [f64; 2],
    pub theta_ref: [f64; 2],
}

/// A vessel has arrived when it is inside the arrival radius or already past the
/// setpoint along the setpoint heading.
pub fn has_arrived(sp: &Setpoint, position: Vec2, radius: f64) -> bool {
    let d = position - sp.position;
    d.norm() <= radius || d.dot(&heading_vec(sp.heading)) >= 0.0
}

/// Hold-and-align automaton; both indices always advance together.
pub fn supervisor_step(plan: &SetpointPlan, sup: &SupervisorState, positions: [Vec2; 2]) -> (SupervisorOutput, SupervisorState) {
    let mut next = *sup;
    let last = plan.len().saturating_sub(1);
    let heading = |st: &SupervisorState, w: usize| plan.setpoints[w].get(st.index[w]).map_or(0.0, |s| s.heading);
    if plan.is_empty() || sup.mode == SupervisorMode::Done {
        next.mode = SupervisorMode::Done;
        return (SupervisorOutput { u_ref: [0.0; 2], theta_ref: [heading(&next, 0), heading(&next, 1)] }, next);
    }
    for w in 0..2 {
        if !next.arrived[w] && has_arrived(&plan.setpoints[w][next.index[w]], positions[w], plan.arrival_radius) {
            next.arrived[w] = true;
        }
    }
    let u_ref = if next.arrived == [true, true] {
        if next.index[0] >= last {
            next.mode = SupervisorMode::Done;
            [0.0; 2]
        } else {
            next.index = [next.index[0] + 1, next.index[1] + 1];
            next.arrived = [false; 2];
            next.mode = SupervisorMode::AlignedAdvance;
            [plan.u_cruise; 2]
        }
    } else if next.arrived[0] || next.arrived[1] {
        next.mode = SupervisorMode::Hold;
        [0, 1].map(|w| if next.arrived[w] { 0.0 } else { plan.u_cruise })
    } else {
        next.mode = SupervisorMode::Cruise;
        [plan.u_cruise; 2]
    };
    (SupervisorOutput { u_ref, theta_ref: [heading(&next, 0), heading(&next, 1)] }, next)
}

/// Line-of-sight correction: steer toward a point `lookahead` ahead on the path.
/// `cross_track` is positive to the left of the path.
pub fn los_heading(path_heading: f64, cross_track: f64, lookahead: f64) -> f64 {
    if lookahead > 0.0 {
        path_heading - (cross_track / lookahead).atan()
    } else {
        path_heading
    }
}
