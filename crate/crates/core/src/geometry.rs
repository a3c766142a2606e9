//! Planar geometry shared by the planning and simulation layers.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub type Vec2 = nalgebra::Vector2<f64>;

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Unit vector along heading `theta`.
#[inline]
pub fn heading_vec(theta: f64) -> Vec2 {
    Vec2::new(theta.cos(), theta.sin())
}

/// Unit vector 90 degrees counter-clockwise of heading `theta`.
#[inline]
pub fn left_normal(theta: f64) -> Vec2 {
    Vec2::new(-theta.sin(), theta.cos())
}

#[inline]
pub fn cross(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

/// A path that can be sampled by arc length.
pub trait ReferencePath {
    fn length(&self) -> f64;

    /// Point and tangent heading at arc length `s`, clamped to `[0, length]`.
    fn sample(&self, s: f64) -> (Vec2, f64);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Polyline {
    pub points: Vec<Vec2>,
}

impl Polyline {
    pub fn new(points: Vec<Vec2>) -> Self {
        Self { points }
    }

    pub fn segment_count(&self) -> usize {
        self.points.len().saturating_sub(1)
    }

    /// Appends `other`, dropping its first point when it coincides with our last.
    pub fn extend(&mut self, other: &Polyline) {
        let mut it = other.points.iter().peekable();
        if let (Some(last), Some(first)) = (self.points.last(), it.peek()) {
            if (*last - **first).norm() < 1e-9 {
                it.next();
            }
        }
        self.points.extend(it.copied());
    }

    /// Cumulative arc length at each vertex.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut acc = Vec::with_capacity(self.points.len());
        let mut s = 0.0;
        for (i, p) in self.points.iter().enumerate() {
            if i > 0 {
                s += (p - self.points[i - 1]).norm();
            }
            acc.push(s);
        }
        acc
    }

    /// Closest point on the polyline to `q`: returns (signed distance, segment index,
    /// tangent heading of that segment). Distance is positive to the left of travel.
    pub fn project(&self, q: &Vec2) -> Option<(f64, usize, f64)> {
        project_points(&self.points, q)
    }
}

/// Segments shorter than this (m) carry no direction and are skipped by projection.
pub const DEGENERATE_SEGMENT: f64 = 1e-9;

/// [`Polyline::project`] over a borrowed vertex slice.
pub fn project_points(points: &[Vec2], q: &Vec2) -> Option<(f64, usize, f64)> {
    if points.len() < 2 {
        return points.first().map(|p| ((q - p).norm(), 0, 0.0));
    }
    let mut best: Option<(f64, usize, f64, f64)> = None;
    for i in 0..points.len() - 1 {
        let a = points[i];
        let d = points[i + 1] - a;
        let len2 = d.norm_squared();
        if len2 < DEGENERATE_SEGMENT * DEGENERATE_SEGMENT {
            continue;
        }
        let t = ((q - a).dot(&d) / len2).clamp(0.0, 1.0);
        let dist = (q - (a + d * t)).norm();
        if best.is_none_or(|(bd, ..)| dist < bd) {
            let signed = if cross(&d, &(q - a)) >= 0.0 { dist } else { -dist };
            best = Some((dist, i, signed, d.y.atan2(d.x)));
        }
    }
    best.map(|(_, i, signed, h)| (signed, i, h))
}

impl ReferencePath for Polyline {
    fn length(&self) -> f64 {
        self.points.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    fn sample(&self, s: f64) -> (Vec2, f64) {
        let n = self.points.len();
        if n == 0 {
            return (Vec2::zeros(), 0.0);
        }
        if n == 1 {
            return (self.points[0], 0.0);
        }
        let mut remaining = s.max(0.0);
        let mut last_heading = 0.0;
        for w in self.points.windows(2) {
            let d = w[1] - w[0];
            let len = d.norm();
            if len == 0.0 {
                continue;
            }
            last_heading = d.y.atan2(d.x);
            if remaining <= len {
                return (w[0] + d * (remaining / len), last_heading);
            }
            remaining -= len;
        }
        (self.points[n - 1], last_heading)
    }
}
