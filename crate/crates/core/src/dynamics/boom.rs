use super::{quad, DynamicsError, Result};
use crate::geometry::{heading_vec, left_normal, Vec2};
use serde::{Deserialize, Serialize};

/// Below this gap the joint direction is undefined and the joint carries no force.
pub(crate) const GAP_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoomParams {
    pub n_links: usize,
    pub total_length: f64,
    pub link_mass: f64,
    pub link_inertia: f64,
    pub k_spring: f64,
    pub c_damper: f64,
    /// Drag along the link axis.
    pub kappa_t_link: f64,
    /// Drag across the link axis.
    pub kappa_l_link: f64,
    pub kappa_w_link: f64,
}

impl Default for BoomParams {
    fn default() -> Self {
        Self::uniform(40, 40.0)
    }
}

impl BoomParams {
    /// Default joint and drag constants with the inertia of a uniform rod.
    pub fn uniform(n_links: usize, total_length: f64) -> Self {
        let link_mass = 25.0;
        let l = total_length / n_links.max(1) as f64;
        Self {
            n_links,
            total_length,
            link_mass,
            link_inertia: link_mass * l * l / 12.0,
            k_spring: 1.0e4,
            c_damper: 500.0,
            kappa_t_link: 5.0,
            kappa_l_link: 500.0,
            kappa_w_link: 50.0,
        }
    }

    pub fn link_length(&self) -> f64 {
        self.total_length / self.n_links as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_links == 0 || !(self.total_length > 0.0) {
            return Err(DynamicsError::Config("boom needs at least one link of positive length".into()));
        }
        if !(self.link_mass > 0.0) || !(self.link_inertia > 0.0) {
            return Err(DynamicsError::Config("link mass and inertia must be positive".into()));
        }
        let nonneg = [self.k_spring, self.c_damper, self.kappa_t_link, self.kappa_l_link, self.kappa_w_link];
        if nonneg.iter().any(|v| !(*v >= 0.0)) {
            return Err(DynamicsError::Config("joint and drag constants must be non-negative".into()));
        }
        Ok(())
    }
}

/// Link center, orientation, and body-frame velocities along `t` (axis) and `n` (left normal).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LinkState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub vt: f64,
    pub vn: f64,
    pub omega: f64,
}

impl LinkState {
    pub fn center(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn tangent(&self) -> Vec2 {
        heading_vec(self.theta)
    }

    pub fn normal(&self) -> Vec2 {
        left_normal(self.theta)
    }

    pub fn velocity(&self) -> Vec2 {
        self.tangent() * self.vt + self.normal() * self.vn
    }

    /// Trailing endpoint `N = c - (l/2) t`.
    pub fn n_end(&self, l: f64) -> Vec2 {
        self.center() - self.tangent() * (0.5 * l)
    }

    /// Leading endpoint `M = c + (l/2) t`.
    pub fn m_end(&self, l: f64) -> Vec2 {
        self.center() + self.tangent() * (0.5 * l)
    }

    pub fn n_end_velocity(&self, l: f64) -> Vec2 {
        self.velocity() - self.normal() * (0.5 * l * self.omega)
    }

    pub fn m_end_velocity(&self, l: f64) -> Vec2 {
        self.velocity() + self.normal() * (0.5 * l * self.omega)
    }
}

/// Links ordered from vessel 1's stern to vessel 2's stern: vessel 1 attaches to
/// the first link's `N` end, vessel 2 to the last link's `M` end.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BoomState {
    pub links: Vec<LinkState>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SternPoint {
    pub position: Vec2,
    pub velocity: Vec2,
}

/// `joints[j]` acts on the body on the `M` side of joint `j` (vessel 1 for `j = 0`,
/// else link `j - 1`); the body on the `N` side receives `-joints[j]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct JointForces {
    pub joints: Vec<Vec2>,
}

impl JointForces {
    pub fn on_link_n_end(&self, i: usize) -> Vec2 {
        -self.joints[i]
    }

    pub fn on_link_m_end(&self, i: usize) -> Vec2 {
        self.joints[i + 1]
    }

    /// World-frame force on vessel 1's stern.
    pub fn on_vessel_1(&self) -> Vec2 {
        self.joints[0]
    }

    /// World-frame force on vessel 2's stern.
    pub fn on_vessel_2(&self) -> Vec2 {
        -self.joints[self.joints.len() - 1]
    }
}

/// Spring-damper force pulling the `M`-side endpoint toward the `N`-side endpoint.
#[inline]
pub(crate) fn joint_force(m_pos: Vec2, m_vel: Vec2, n_pos: Vec2, n_vel: Vec2, k: f64, c: f64) -> Vec2 {
    let gap = n_pos - m_pos;
    let len = gap.norm();
    if len < GAP_EPS {
        return Vec2::zeros();
    }
    let e = gap / len;
    gap * k + e * (c * (n_vel - m_vel).dot(&e))
}

pub fn boom_joint_forces(boom: &BoomState, stern_1: &SternPoint, stern_2: &SternPoint, params: &BoomParams) -> JointForces {
    let l = params.link_length();
    let n = boom.links.len();
    let (k, c) = (params.k_spring, params.c_damper);
    let mut joints = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let (m_pos, m_vel) = if j == 0 {
            (stern_1.position, stern_1.velocity)
        } else {
            let lk = &boom.links[j - 1];
            (lk.m_end(l), lk.m_end_velocity(l))
        };
        let (n_pos, n_vel) = if j == n {
            (stern_2.position, stern_2.velocity)
        } else {
            let lk = &boom.links[j];
            (lk.n_end(l), lk.n_end_velocity(l))
        };
        joints.push(joint_force(m_pos, m_vel, n_pos, n_vel, k, c));
    }
    JointForces { joints }
}

/// `(dx, dy, dtheta, dvt, dvn, domega)` of one link under end forces `f_n`, `f_m`.
#[inline]
pub(crate) fn link_derivative(s: &LinkState, f_n: Vec2, f_m: Vec2, p: &BoomParams) -> [f64; 6] {
    let l = p.link_length();
    let (sin_t, cos_t) = s.theta.sin_cos();
    let t = Vec2::new(cos_t, sin_t);
    let nrm = Vec2::new(-sin_t, cos_t);
    let total = f_n + f_m;
    let ft = total.dot(&t) - quad(p.kappa_t_link, s.vt);
    let fn_ = total.dot(&nrm) - quad(p.kappa_l_link, s.vn);
    let torque = 0.5 * l * (f_m - f_n).dot(&nrm) - quad(p.kappa_w_link, s.omega);
    [
        cos_t * s.vt - sin_t * s.vn,
        sin_t * s.vt + cos_t * s.vn,
        s.omega,
        ft / p.link_mass + s.vn * s.omega,
        fn_ / p.link_mass - s.vt * s.omega,
        torque / p.link_inertia,
    ]
}

/// Newton-Euler derivatives for every link.
pub fn boom_derivative(boom: &BoomState, forces: &JointForces, params: &BoomParams) -> Result<Vec<[f64; 6]>> {
    if forces.joints.len() != boom.links.len() + 1 {
        return Err(DynamicsError::Config("joint force count must be links + 1".into()));
    }
    let out: Vec<[f64; 6]> = boom
        .links
        .iter()
        .enumerate()
        .map(|(i, s)| link_derivative(s, forces.on_link_n_end(i), forces.on_link_m_end(i), params))
        .collect();
    if out.iter().flatten().any(|v| !v.is_finite()) {
        return Err(DynamicsError::Numeric("boom derivative"));
    }
    Ok(out)
}

/// Links laid from `a` to `b`. When the gap is shorter than the boom the links form
/// a circular arc bulging toward `bulge`; otherwise a straight run starting at `a`.
pub(crate) fn lay_boom(a: Vec2, b: Vec2, bulge: Vec2, params: &BoomParams) -> BoomState {
    let n = params.n_links;
    let l = params.link_length();
    let chord = b - a;
    let d = chord.norm();
    let base = if d > GAP_EPS { chord.y.atan2(chord.x) } else { bulge.y.atan2(bulge.x) - std::f64::consts::FRAC_PI_2 };
    let total = params.total_length;
    // Per-link turn angle of an inscribed polygon arc with the requested chord.
    let alpha = if d >= total * (1.0 - 1e-12) || n == 1 {
        0.0
    } else {
        let chord_of = |a: f64| {
            if a == 0.0 {
                total
            } else {
                l / (a / 2.0).sin() * (n as f64 * a / 2.0).sin()
            }
        };
        let (mut lo, mut hi) = (0.0, 2.0 * std::f64::consts::PI / n as f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if chord_of(mid) > d {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let left = Vec2::new(-base.sin(), base.cos());
    let sigma = if left.dot(&bulge) >= 0.0 { 1.0 } else { -1.0 };
    let mut p = a;
    let mut links = Vec::with_capacity(n);
    for i in 0..n {
        let phi = base + sigma * ((n as f64 - 1.0) * alpha / 2.0 - i as f64 * alpha);
        let t = heading_vec(phi);
        let c = p + t * (0.5 * l);
        links.push(LinkState { x: c.x, y: c.y, theta: phi, ..Default::default() });
        p += t * l;
    }
    BoomState { links }
}
