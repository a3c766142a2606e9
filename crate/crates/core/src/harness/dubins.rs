use crate::geometry::{Polyline, Pose, ReferencePath, Vec2};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum DubinsWord {
    Lsl,
    Rsr,
    Lsr,
    Rsl,
    Rlr,
    Lrl,
}

impl DubinsWord {
    pub const ALL: [DubinsWord; 6] = [Self::Lsl, Self::Rsr, Self::Lsr, Self::Rsl, Self::Rlr, Self::Lrl];

    /// Turn direction per segment: +1 left, -1 right, 0 straight.
    pub fn turns(self) -> [i8; 3] {
        match self {
            Self::Lsl => [1, 0, 1],
            Self::Rsr => [-1, 0, -1],
            Self::Lsr => [1, 0, -1],
            Self::Rsl => [-1, 0, 1],
            Self::Rlr => [-1, 1, -1],
            Self::Lrl => [1, -1, 1],
        }
    }
}

impl fmt::Display for DubinsWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Lsl => "LSL",
            Self::Rsr => "RSR",
            Self::Lsr => "LSR",
            Self::Rsl => "RSL",
            Self::Rlr => "RLR",
            Self::Lrl => "LRL",
        };
        f.write_str(s)
    }
}

/// Shortest bounded-curvature path; `segments` are lengths in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DubinsPath {
    pub start: Pose,
    pub rho: f64,
    pub word: DubinsWord,
    pub segments: [f64; 3],
}

fn mod2pi(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Normalized `(t, p, q)` of one word; angles for arcs, length over rho for straights.
fn word_params(word: DubinsWord, d: f64, alpha: f64, beta: f64) -> Option<[f64; 3]> {
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta.sin_cos();
    let c_ab = (alpha - beta).cos();
    match word {
        DubinsWord::Lsl => {
            let p2 = 2.0 + d * d - 2.0 * c_ab + 2.0 * d * (sa - sb);
            (p2 >= 0.0).then(|| {
                let tmp = (cb - ca).atan2(d + sa - sb);
                [mod2pi(tmp - alpha), p2.sqrt(), mod2pi(beta - tmp)]
            })
        }
        DubinsWord::Rsr => {
            let p2 = 2.0 + d * d - 2.0 * c_ab + 2.0 * d * (sb - sa);
            (p2 >= 0.0).then(|| {
                let tmp = (ca - cb).atan2(d - sa + sb);
                [mod2pi(alpha - tmp), p2.sqrt(), mod2pi(tmp - beta)]
            })
        }
        DubinsWord::Lsr => {
            let p2 = -2.0 + d * d + 2.0 * c_ab + 2.0 * d * (sa + sb);
            (p2 >= 0.0).then(|| {
                let p = p2.sqrt();
                let tmp = (-ca - cb).atan2(d + sa + sb) - (-2.0f64).atan2(p);
                [mod2pi(tmp - alpha), p, mod2pi(tmp - beta)]
            })
        }
        DubinsWord::Rsl => {
            let p2 = -2.0 + d * d + 2.0 * c_ab - 2.0 * d * (sa + sb);
            (p2 >= 0.0).then(|| {
                let p = p2.sqrt();
                let tmp = (ca + cb).atan2(d - sa - sb) - 2.0f64.atan2(p);
                [mod2pi(alpha - tmp), p, mod2pi(beta - tmp)]
            })
        }
        DubinsWord::Rlr => {
            let c = (6.0 - d * d + 2.0 * c_ab + 2.0 * d * (sa - sb)) / 8.0;
            (c.abs() <= 1.0).then(|| {
                let phi = (ca - cb).atan2(d - sa + sb);
                let p = mod2pi(TAU - c.acos());
                let t = mod2pi(alpha - phi + mod2pi(p / 2.0));
                [t, p, mod2pi(alpha - beta - t + p)]
            })
        }
        DubinsWord::Lrl => {
            let c = (6.0 - d * d + 2.0 * c_ab + 2.0 * d * (sb - sa)) / 8.0;
            (c.abs() <= 1.0).then(|| {
                let phi = (ca - cb).atan2(d + sa - sb);
                let p = mod2pi(TAU - c.acos());
                let t = mod2pi(-alpha - phi + p / 2.0);
                [t, p, mod2pi(beta - alpha - t + p)]
            })
        }
    }
}

/// Pose after driving `len` meters of one segment; heading stays unwrapped.
fn advance(p: Pose, turn: i8, len: f64, rho: f64) -> Pose {
    match turn {
        0 => Pose::new(p.x + len * p.theta.cos(), p.y + len * p.theta.sin(), p.theta),
        dir => {
            let k = dir as f64;
            let th = p.theta + k * len / rho;
            Pose::new(p.x + k * rho * (th.sin() - p.theta.sin()), p.y - k * rho * (th.cos() - p.theta.cos()), th)
        }
    }
}

impl DubinsPath {
    /// Candidate for one word, or `None` when the word has no solution.
    pub fn with_word(start: Pose, goal: Pose, rho: f64, word: DubinsWord) -> Option<Self> {
        let dx = goal.x - start.x;
        let dy = goal.y - start.y;
        let dist = dx.hypot(dy);
        let d = dist / rho;
        let theta = if dist > 1e-12 { dy.atan2(dx) } else { start.theta };
        let alpha = mod2pi(start.theta - theta);
        let beta = mod2pi(goal.theta - theta);
        let [t, p, q] = word_params(word, d, alpha, beta)?;
        Some(Self { start, rho, word, segments: [t * rho, p * rho, q * rho] })
    }

    /// Shortest path over the six words; ties resolve in [`DubinsWord::ALL`] order.
    pub fn shortest(start: Pose, goal: Pose, rho: f64) -> Option<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return None;
        }
        DubinsWord::ALL
            .iter()
            .filter_map(|&w| Self::with_word(start, goal, rho, w))
            .fold(None, |best: Option<Self>, c| match best {
                Some(b) if b.length() <= c.length() => Some(b),
                _ => Some(c),
            })
    }

    pub fn end_pose(&self) -> Pose {
        let turns = self.word.turns();
        (0..3).fold(self.start, |p, i| advance(p, turns[i], self.segments[i], self.rho))
    }

    /// Samples at a fixed arc step, always including both endpoints.
    pub fn polyline(&self, step: f64) -> Polyline {
        let len = self.length();
        let n = if len > 0.0 { (len / step).ceil().max(1.0) as usize } else { 0 };
        let mut pts: Vec<Vec2> = (0..n).map(|i| self.sample(i as f64 * step).0).collect();
        pts.push(self.sample(len).0);
        Polyline::new(pts)
    }
}

impl ReferencePath for DubinsPath {
    fn length(&self) -> f64 {
        self.segments.iter().sum()
    }

    fn sample(&self, s: f64) -> (Vec2, f64) {
        let turns = self.word.turns();
        let mut rest = s.clamp(0.0, self.length());
        let mut p = self.start;
        for i in 0..3 {
            let take = rest.min(self.segments[i]);
            p = advance(p, turns[i], take, self.rho);
            rest -= take;
            if rest <= 0.0 {
                break;
            }
        }
        (p.position(), p.theta)
    }
}

/// [`DubinsPath::shortest`] together with its dense polyline.
pub fn dubins_path(start: Pose, goal: Pose, rho: f64, step: f64) -> Option<(Polyline, DubinsWord, DubinsPath)> {
    let path = DubinsPath::shortest(start, goal, rho)?;
    Some((path.polyline(step), path.word, path))
}
