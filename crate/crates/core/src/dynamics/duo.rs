use super::boom::{joint_force, lay_boom, link_derivative};
use super::vessel::vessel_derivative_unchecked;
use super::{BoomParams, BoomState, DynamicsError, LinkState, Result, VesselParams, VesselState};
use crate::geometry::{heading_vec, Pose, Vec2};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DuoParams {
    pub vessel: VesselParams,
    pub boom: BoomParams,
    /// Integrator step (s).
    pub dt: f64,
}

impl Default for DuoParams {
    fn default() -> Self {
        Self {
            vessel: VesselParams::default(),
            boom: BoomParams::default(),
            dt: 1e-3,
        }
    }
}

impl DuoParams {
    pub fn validate(&self) -> Result<()> {
        self.vessel.validate()?;
        self.boom.validate()?;
        check_dt(self.dt, &self.boom)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Largest stable step for the joint springs: `0.2 / sqrt(k / m_link)`.
pub fn dt_cap(boom: &BoomParams) -> f64 {
    if boom.k_spring > 0.0 {
        0.2 / (boom.k_spring / boom.link_mass).sqrt()
    } else {
        f64::INFINITY
    }
}

fn check_dt(dt: f64, boom: &BoomParams) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(DynamicsError::Config(format!("time step {dt} must be positive")));
    }
    let cap = dt_cap(boom);
    if dt > cap {
        return Err(DynamicsError::Config(format!("time step {dt} exceeds the stability cap {cap}")));
    }
    Ok(())
}

/// Thrust and steering for both vessels.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Controls {
    pub f1: f64,
    pub eta1: f64,
    pub f2: f64,
    pub eta2: f64,
}

impl Controls {
    pub fn clamped(&self, p: &VesselParams) -> Self {
        let f = |x: f64| x.clamp(-p.f_max, p.f_max);
        let e = |x: f64| x.clamp(-p.eta_max, p.eta_max);
        Self {
            f1: f(self.f1),
            eta1: e(self.eta1),
            f2: f(self.f2),
            eta2: e(self.eta2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuoState {
    pub vessel_1: VesselState,
    pub vessel_2: VesselState,
    pub boom: BoomState,
    /// Tow loads in each vessel's body frame.
    pub f_l_1: Vec2,
    pub f_l_2: Vec2,
    pub t: f64,
}

const V: usize = 6;

fn read_vessel(s: &[f64]) -> VesselState {
    VesselState { x: s[0], y: s[1], theta: s[2], u: s[3], v: s[4], omega: s[5] }
}

fn read_link(s: &[f64]) -> LinkState {
    LinkState { x: s[0], y: s[1], theta: s[2], vt: s[3], vn: s[4], omega: s[5] }
}

fn write_vessel(s: &VesselState, out: &mut [f64]) {
    out.copy_from_slice(&[s.x, s.y, s.theta, s.u, s.v, s.omega]);
}

fn write_link(s: &LinkState, out: &mut [f64]) {
    out.copy_from_slice(&[s.x, s.y, s.theta, s.vt, s.vn, s.omega]);
}

/// Fixed-step RK4 integrator over a flat state
/// `[vessel 1 | vessel 2 | link 0 | ... | link n-1]`, six entries each.
#[derive(Debug, Clone)]
pub struct DuoSim {
    params: DuoParams,
    x: Vec<f64>,
    t: f64,
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
    joints: Vec<Vec2>,
}

impl DuoSim {
    pub fn new(params: DuoParams, state: &DuoState) -> Result<Self> {
        params.validate()?;
        if state.boom.links.len() != params.boom.n_links {
            return Err(DynamicsError::Config("boom state does not match the link count".into()));
        }
        let n = 2 + params.boom.n_links;
        let mut x = vec![0.0; n * V];
        write_vessel(&state.vessel_1, &mut x[0..V]);
        write_vessel(&state.vessel_2, &mut x[V..2 * V]);
        for (i, l) in state.boom.links.iter().enumerate() {
            write_link(l, &mut x[(2 + i) * V..(3 + i) * V]);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(DynamicsError::Numeric("initial state"));
        }
        let mut sim = Self {
            params,
            x,
            t: state.t,
            k: std::array::from_fn(|_| vec![0.0; n * V]),
            tmp: vec![0.0; n * V],
            joints: vec![Vec2::zeros(); params.boom.n_links + 1],
        };
        sim.refresh_joints();
        Ok(sim)
    }

    /// Both vessels at rest at the given poses, the boom laid between their sterns
    /// and bulging away from their mean heading.
    pub fn from_poses(params: DuoParams, pose_1: Pose, pose_2: Pose) -> Result<Self> {
        params.validate()?;
        let v1 = VesselState { x: pose_1.x, y: pose_1.y, theta: pose_1.theta, ..Default::default() };
        let v2 = VesselState { x: pose_2.x, y: pose_2.y, theta: pose_2.theta, ..Default::default() };
        let r = params.vessel.r;
        let mean = heading_vec(pose_1.theta) + heading_vec(pose_2.theta);
        let boom = lay_boom(v1.stern(r), v2.stern(r), -mean, &params.boom);
        let state = DuoState {
            vessel_1: v1,
            vessel_2: v2,
            boom,
            f_l_1: Vec2::zeros(),
            f_l_2: Vec2::zeros(),
            t: 0.0,
        };
        Self::new(params, &state)
    }

    pub fn params(&self) -> &DuoParams {
        &self.params
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn vessel(&self, which: usize) -> VesselState {
        read_vessel(&self.x[which * V..(which + 1) * V])
    }

    pub fn link(&self, i: usize) -> LinkState {
        read_link(&self.x[(2 + i) * V..(3 + i) * V])
    }

    /// World-frame joint forces at the current state (see [`super::JointForces`]).
    pub fn joint_forces(&self) -> &[Vec2] {
        &self.joints
    }

    /// Tow load on vessel `which` (0 or 1) in its body frame.
    pub fn tow_force_body(&self, which: usize) -> Vec2 {
        let world = if which == 0 { self.joints[0] } else { -self.joints[self.joints.len() - 1] };
        self.vessel(which).to_body(world)
    }

    pub fn state(&self) -> DuoState {
        DuoState {
            vessel_1: self.vessel(0),
            vessel_2: self.vessel(1),
            boom: BoomState { links: (0..self.params.boom.n_links).map(|i| self.link(i)).collect() },
            f_l_1: self.tow_force_body(0),
            f_l_2: self.tow_force_body(1),
            t: self.t,
        }
    }

    pub fn flat_state(&self) -> &[f64] {
        &self.x
    }

    pub fn stern_separation(&self) -> f64 {
        let r = self.params.vessel.r;
        (self.vessel(0).stern(r) - self.vessel(1).stern(r)).norm()
    }

    pub fn kinetic_energy(&self) -> f64 {
        let vp = &self.params.vessel;
        let bp = &self.params.boom;
        let mut e = 0.0;
        for w in 0..2 {
            let s = self.vessel(w);
            e += 0.5 * vp.m * (s.u * s.u + s.v * s.v) + 0.5 * vp.inertia * s.omega * s.omega;
        }
        for i in 0..bp.n_links {
            let s = self.link(i);
            e += 0.5 * bp.link_mass * (s.vt * s.vt + s.vn * s.vn) + 0.5 * bp.link_inertia * s.omega * s.omega;
        }
        e
    }

    pub fn spring_energy(&self) -> f64 {
        let (m, n) = endpoints(&self.params, &self.x);
        m.iter().zip(&n).map(|(a, b)| 0.5 * self.params.boom.k_spring * (b - a).norm_squared()).sum()
    }

    pub fn mechanical_energy(&self) -> f64 {
        self.kinetic_energy() + self.spring_energy()
    }

    /// Endpoint gap at each joint, from the `M` side to the `N` side.
    pub fn joint_gaps(&self) -> Vec<Vec2> {
        let (m, n) = endpoints(&self.params, &self.x);
        m.iter().zip(&n).map(|(a, b)| b - a).collect()
    }

    fn refresh_joints(&mut self) {
        let mut j = std::mem::take(&mut self.joints);
        compute_joints(&self.params, &self.x, &mut j);
        self.joints = j;
    }

    /// Advances one step with controls held constant; controls are clamped to the
    /// actuator limits first.
    pub fn advance(&mut self, controls: &Controls, dt: f64) -> Result<()> {
        check_dt(dt, &self.params.boom)?;
        let c = controls.clamped(&self.params.vessel);
        if ![c.f1, c.eta1, c.f2, c.eta2].iter().all(|v| v.is_finite()) {
            return Err(DynamicsError::Numeric("controls"));
        }
        let p = self.params;
        let n = self.x.len();
        let [k1, k2, k3, k4] = &mut self.k;
        derivative(&p, &self.x, &c, k1, &mut self.joints);
        for i in 0..n {
            self.tmp[i] = self.x[i] + 0.5 * dt * k1[i];
        }
        derivative(&p, &self.tmp, &c, k2, &mut self.joints);
        for i in 0..n {
            self.tmp[i] = self.x[i] + 0.5 * dt * k2[i];
        }
        derivative(&p, &self.tmp, &c, k3, &mut self.joints);
        for i in 0..n {
            self.tmp[i] = self.x[i] + dt * k3[i];
        }
        derivative(&p, &self.tmp, &c, k4, &mut self.joints);
        for i in 0..n {
            self.x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        self.t += dt;
        if self.x.iter().any(|v| !v.is_finite()) {
            return Err(DynamicsError::Numeric("integrated state"));
        }
        self.refresh_joints();
        Ok(())
    }
}

/// `M`-side and `N`-side endpoint positions for every joint.
fn endpoints(p: &DuoParams, x: &[f64]) -> (Vec<Vec2>, Vec<Vec2>) {
    let nl = p.boom.n_links;
    let l = p.boom.link_length();
    let r = p.vessel.r;
    let mut m = Vec::with_capacity(nl + 1);
    let mut n = Vec::with_capacity(nl + 1);
    m.push(read_vessel(&x[0..V]).stern(r));
    for i in 0..nl {
        let lk = read_link(&x[(2 + i) * V..(3 + i) * V]);
        n.push(lk.n_end(l));
        m.push(lk.m_end(l));
    }
    n.push(read_vessel(&x[V..2 * V]).stern(r));
    (m, n)
}

fn compute_joints(p: &DuoParams, x: &[f64], joints: &mut [Vec2]) {
    let nl = p.boom.n_links;
    let l = p.boom.link_length();
    let r = p.vessel.r;
    let (k, c) = (p.boom.k_spring, p.boom.c_damper);
    let v1 = read_vessel(&x[0..V]);
    let v2 = read_vessel(&x[V..2 * V]);
    let mut m_pos = v1.stern(r);
    let mut m_vel = v1.stern_velocity(r);
    for (i, joint) in joints.iter_mut().enumerate().take(nl) {
        let lk = read_link(&x[(2 + i) * V..(3 + i) * V]);
        *joint = joint_force(m_pos, m_vel, lk.n_end(l), lk.n_end_velocity(l), k, c);
        m_pos = lk.m_end(l);
        m_vel = lk.m_end_velocity(l);
    }
    joints[nl] = joint_force(m_pos, m_vel, v2.stern(r), v2.stern_velocity(r), k, c);
}

fn derivative(p: &DuoParams, x: &[f64], c: &Controls, out: &mut [f64], joints: &mut [Vec2]) {
    compute_joints(p, x, joints);
    let nl = p.boom.n_links;
    let v1 = read_vessel(&x[0..V]);
    let v2 = read_vessel(&x[V..2 * V]);
    let f1 = v1.to_body(joints[0]);
    let f2 = v2.to_body(-joints[nl]);
    for (w, s, f, (thrust, eta)) in [(0, v1, f1, (c.f1, c.eta1)), (1, v2, f2, (c.f2, c.eta2))] {
        let d = vessel_derivative_unchecked(&s, thrust, eta, f, &p.vessel);
        out[w * V..(w + 1) * V].copy_from_slice(&[d.dx, d.dy, d.dtheta, d.du, d.dv, d.domega]);
    }
    for i in 0..nl {
        let lk = read_link(&x[(2 + i) * V..(3 + i) * V]);
        let d = link_derivative(&lk, -joints[i], joints[i + 1], &p.boom);
        out[(2 + i) * V..(3 + i) * V].copy_from_slice(&d);
    }
}

/// Pure single-step form of [`DuoSim::advance`].
pub fn step(duo: &DuoState, controls: &Controls, dt: f64, params: &DuoParams) -> Result<DuoState> {
    check_dt(dt, &params.boom)?;
    let mut p = *params;
    p.dt = dt;
    let mut sim = DuoSim::new(p, duo)?;
    sim.advance(controls, dt)?;
    Ok(sim.state())
}
