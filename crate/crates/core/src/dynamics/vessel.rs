use super::{quad, DynamicsError, Result};
use crate::geometry::{heading_vec, left_normal, Vec2};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VesselParams {
    pub m: f64,
    /// Yaw inertia.
    pub inertia: f64,
    /// Distance from the center of mass to the stern, where thrust and tow act.
    pub r: f64,
    pub kappa_l: f64,
    pub kappa_t: f64,
    pub kappa_w: f64,
    pub f_max: f64,
    pub eta_max: f64,
}

impl Default for VesselParams {
    fn default() -> Self {
        Self {
            m: 600.0,
            inertia: 500.0,
            r: 2.0,
            kappa_l: 100.0,
            kappa_t: 10_000.0,
            kappa_w: 1000.0,
            f_max: 5000.0,
            eta_max: FRAC_PI_2,
        }
    }
}

impl VesselParams {
    pub fn validate(&self) -> Result<()> {
        let pos = [self.m, self.inertia, self.r, self.f_max, self.eta_max];
        if pos.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(DynamicsError::Config("vessel mass, inertia, arm and limits must be positive".into()));
        }
        if [self.kappa_l, self.kappa_t, self.kappa_w].iter().any(|k| !(*k >= 0.0)) {
            return Err(DynamicsError::Config("drag coefficients must be non-negative".into()));
        }
        if self.eta_max > FRAC_PI_2 {
            return Err(DynamicsError::Config("steering limit must not exceed pi/2".into()));
        }
        Ok(())
    }
}

/// Pose in the world frame, velocities in the body frame. `theta` is unwrapped.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VesselState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub u: f64,
    pub v: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VesselDerivative {
    pub dx: f64,
    pub dy: f64,
    pub dtheta: f64,
    pub du: f64,
    pub dv: f64,
    pub domega: f64,
}

impl VesselState {
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    /// World-frame velocity of the center of mass.
    pub fn world_velocity(&self) -> Vec2 {
        heading_vec(self.theta) * self.u + left_normal(self.theta) * self.v
    }

    /// Tow point, a distance `r` behind the center of mass.
    pub fn stern(&self, r: f64) -> Vec2 {
        self.position() - heading_vec(self.theta) * r
    }

    pub fn stern_velocity(&self, r: f64) -> Vec2 {
        self.world_velocity() - left_normal(self.theta) * (r * self.omega)
    }

    /// World-frame vector expressed in this vessel's body frame `(e_u, e_v)`.
    pub fn to_body(&self, w: Vec2) -> Vec2 {
        Vec2::new(w.dot(&heading_vec(self.theta)), w.dot(&left_normal(self.theta)))
    }

    pub fn is_finite(&self) -> bool {
        [self.x, self.y, self.theta, self.u, self.v, self.omega].iter().all(|v| v.is_finite())
    }
}

/// Rigid-body equations with the tow load `f_l` given in the body frame.
pub fn vessel_derivative(s: &VesselState, f: f64, eta: f64, f_l: Vec2, p: &VesselParams) -> Result<VesselDerivative> {
    if !s.is_finite() || !f.is_finite() || !eta.is_finite() || !f_l.x.is_finite() || !f_l.y.is_finite() {
        return Err(DynamicsError::Numeric("vessel derivative inputs"));
    }
    Ok(vessel_derivative_unchecked(s, f, eta, f_l, p))
}

#[inline]
pub(crate) fn vessel_derivative_unchecked(s: &VesselState, f: f64, eta: f64, f_l: Vec2, p: &VesselParams) -> VesselDerivative {
    let (sin_t, cos_t) = s.theta.sin_cos();
    let (sin_e, cos_e) = eta.sin_cos();
    VesselDerivative {
        dx: cos_t * s.u - sin_t * s.v,
        dy: sin_t * s.u + cos_t * s.v,
        dtheta: s.omega,
        du: (f * cos_e - quad(p.kappa_l, s.u) + f_l.x) / p.m + s.omega * s.v,
        dv: (-f * sin_e - quad(p.kappa_t, s.v) + f_l.y) / p.m - s.omega * s.u,
        domega: (p.r * f * sin_e - quad(p.kappa_w, s.omega) - p.r * f_l.y) / p.inertia,
    }
}

/// One RK4 step of a free vessel with thrust, steering and tow load held constant.
pub fn vessel_step(s: &VesselState, f: f64, eta: f64, f_l: Vec2, p: &VesselParams, dt: f64) -> Result<VesselState> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(DynamicsError::Config(format!("time step {dt} must be positive")));
    }
    let d = |x: &VesselState| vessel_derivative_unchecked(x, f, eta, f_l, p);
    let add = |x: &VesselState, k: &VesselDerivative, h: f64| VesselState {
        x: x.x + h * k.dx,
        y: x.y + h * k.dy,
        theta: x.theta + h * k.dtheta,
        u: x.u + h * k.du,
        v: x.v + h * k.dv,
        omega: x.omega + h * k.domega,
    };
    vessel_derivative(s, f, eta, f_l, p)?;
    let k1 = d(s);
    let k2 = d(&add(s, &k1, 0.5 * dt));
    let k3 = d(&add(s, &k2, 0.5 * dt));
    let k4 = d(&add(s, &k3, dt));
    let avg = VesselDerivative {
        dx: (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx) / 6.0,
        dy: (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy) / 6.0,
        dtheta: (k1.dtheta + 2.0 * k2.dtheta + 2.0 * k3.dtheta + k4.dtheta) / 6.0,
        du: (k1.du + 2.0 * k2.du + 2.0 * k3.du + k4.du) / 6.0,
        dv: (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv) / 6.0,
        domega: (k1.domega + 2.0 * k2.domega + 2.0 * k3.domega + k4.domega) / 6.0,
    };
    let next = add(s, &avg, dt);
    if !next.is_finite() {
        return Err(DynamicsError::Numeric("vessel step"));
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rest_is_equilibrium() {
        let d = vessel_derivative(&VesselState::default(), 0.0, 0.0, Vec2::zeros(), &VesselParams::default()).unwrap();
        assert_eq!(d, VesselDerivative::default());
    }

    #[test]
    fn surge_drag() {
        let s = VesselState { u: 1.0, ..Default::default() };
        let d = vessel_derivative(&s, 0.0, 0.0, Vec2::zeros(), &VesselParams::default()).unwrap();
        assert!((d.du + 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn coasting_surge_matches_closed_form() {
        // u' = -(k/m) u^2 gives u(t) = u0 / (1 + (k/m) u0 t).
        let p = VesselParams::default();
        let mut s = VesselState { u: 2.0, ..Default::default() };
        for _ in 0..1000 {
            s = vessel_step(&s, 0.0, 0.0, Vec2::zeros(), &p, 1e-3).unwrap();
        }
        let exact = 2.0 / (1.0 + 100.0 / 600.0 * 2.0);
        assert!((s.u - exact).abs() < 1e-10);
        assert!((s.x - 600.0 / 100.0 * (1.0f64 + 100.0 / 600.0 * 2.0).ln()).abs() < 1e-10);
    }

    #[test]
    fn rejects_nan() {
        let s = VesselState { u: f64::NAN, ..Default::default() };
        assert!(vessel_derivative(&s, 0.0, 0.0, Vec2::zeros(), &VesselParams::default()).is_err());
    }

    #[test]
    fn stern_velocity_matches_finite_difference() {
        let s = VesselState { x: 1.0, y: 2.0, theta: 0.7, u: 1.3, v: -0.4, omega: 0.25 };
        let d = vessel_derivative_unchecked(&s, 0.0, 0.0, Vec2::zeros(), &VesselParams::default());
        let h = 1e-6;
        let moved = VesselState { x: s.x + h * d.dx, y: s.y + h * d.dy, theta: s.theta + h * d.dtheta, ..s };
        let fd = (moved.stern(2.0) - s.stern(2.0)) / h;
        assert!((fd - s.stern_velocity(2.0)).norm() < 1e-5);
    }
}
