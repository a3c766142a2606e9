use super::lead::{beta_from_phase_margin, LeadGains, LeadLoop, LeadTopology};
use super::{ControlError, Result};
use crate::dynamics::{VesselParams, VesselState};
use crate::geometry::Vec2;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FblGains {
    pub omega_c_u: f64,
    pub beta_u: f64,
    pub omega_c_w: f64,
    pub beta_w: f64,
    pub tau_ref: f64,
    pub topology: LeadTopology,
    /// Feed the measured tow load into the lumped disturbance terms.
    pub tension_feedforward: bool,
}

impl Default for FblGains {
    fn default() -> Self {
        Self {
            omega_c_u: 0.8,
            beta_u: beta_from_phase_margin(20f64.to_radians()).unwrap_or(2.04),
            omega_c_w: 1.2,
            beta_w: beta_from_phase_margin(60f64.to_radians()).unwrap_or(13.93),
            tau_ref: 0.5,
            topology: LeadTopology::Normalized,
            tension_feedforward: true,
        }
    }
}

impl FblGains {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_c_u > 0.0 && self.omega_c_w > 0.0) {
            return Err(ControlError::Config("crossover frequencies must be positive".into()));
        }
        if !(self.beta_u > 0.0) || !(self.beta_w > 1.0) {
            return Err(ControlError::Config("lead ratios need beta_u > 0 and beta_w > 1".into()));
        }
        if !(self.tau_ref >= 0.0) || ![self.omega_c_u, self.omega_c_w, self.beta_u, self.beta_w, self.tau_ref].iter().all(|v| v.is_finite()) {
            return Err(ControlError::Config("FBL parameters must be finite with tau_ref >= 0".into()));
        }
        Ok(())
    }

    /// Surge plant gain `1 / m`.
    pub fn gamma_u(p: &VesselParams) -> f64 {
        1.0 / p.m
    }

    /// Yaw plant gain `r / I`.
    pub fn gamma_w(p: &VesselParams) -> f64 {
        p.r / p.inertia
    }

    /// `K_u = omega_c_u / gamma_u` places the surge crossover at `omega_c_u`.
    pub fn k_u(&self, p: &VesselParams) -> f64 {
        self.omega_c_u / Self::gamma_u(p)
    }

    /// `K_w = omega_c_w^2 / gamma_w` places the yaw crossover at `omega_c_w`.
    pub fn k_w(&self, p: &VesselParams) -> f64 {
        self.omega_c_w * self.omega_c_w / Self::gamma_w(p)
    }
}

/// Lumped non-actuation terms `(d_u, d_w)`; `f_l` is the tow load in the body frame.
pub fn fbl_disturbance_terms(s: &VesselState, f_l: Vec2, p: &VesselParams) -> (f64, f64) {
    let d_u = -f_l.x + p.kappa_l * s.u.abs() * s.u - p.m * s.omega * s.v;
    let d_w = f_l.y + p.kappa_w * s.omega.abs() * s.omega / p.r;
    (d_u, d_w)
}

/// Positive-thrust reconstruction of `(F, eta)` from the demanded force components.
/// The surge component is floored at zero, which keeps `eta` within `[-pi/2, pi/2]`.
pub fn reconstruct_thrust(x: f64, y: f64) -> (f64, f64) {
    let x = x.max(0.0);
    let f = x.hypot(y);
    if f == 0.0 {
        (0.0, 0.0)
    } else {
        (f, y.atan2(x))
    }
}

/// Thrust within `f_max` with the yaw component served first; surge receives the
/// remaining magnitude. Unsaturated demands equal [`reconstruct_thrust`].
pub fn saturate_thrust(x: f64, y: f64, f_max: f64) -> (f64, f64) {
    let y = y.clamp(-f_max, f_max);
    let x = x.max(0.0).min((f_max * f_max - y * y).max(0.0).sqrt());
    reconstruct_thrust(x, y)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FblController {
    gains: FblGains,
    params: VesselParams,
    surge: LeadLoop,
    yaw: LeadLoop,
}

impl FblController {
    pub fn new(gains: &FblGains, params: &VesselParams) -> Self {
        let surge = LeadGains {
            k_p: gains.k_u(params),
            beta: gains.beta_u,
            omega_c: gains.omega_c_u,
            tau_ref: gains.tau_ref,
            topology: gains.topology,
        };
        let yaw = LeadGains {
            k_p: gains.k_w(params),
            beta: gains.beta_w,
            omega_c: gains.omega_c_w,
            tau_ref: gains.tau_ref,
            topology: gains.topology,
        };
        Self { gains: *gains, params: *params, surge: LeadLoop::new(surge, false), yaw: LeadLoop::new(yaw, true) }
    }

    /// Virtual controls `(alpha_u, alpha_w)` for one control period.
    pub fn virtual_controls(&mut self, u_ref: f64, theta_ref: f64, s: &VesselState, dt: f64) -> (f64, f64) {
        (self.surge.step(u_ref, s.u, dt), self.yaw.step(theta_ref, s.theta, dt))
    }

    /// Actuator command before the actuator clamp is applied.
    /// Demanded body-frame thrust components `(F cos eta, F sin eta)`.
    pub fn demand(&mut self, u_ref: f64, theta_ref: f64, s: &VesselState, f_l: Vec2, dt: f64) -> (f64, f64) {
        let (a_u, a_w) = self.virtual_controls(u_ref, theta_ref, s, dt);
        let load = if self.gains.tension_feedforward { f_l } else { Vec2::zeros() };
        let (d_u, d_w) = fbl_disturbance_terms(s, load, &self.params);
        (a_u + d_u, a_w + d_w)
    }

    /// Actuator command before the actuator clamp is applied.
    pub fn step_unclamped(&mut self, u_ref: f64, theta_ref: f64, s: &VesselState, f_l: Vec2, dt: f64) -> (f64, f64) {
        let (x, y) = self.demand(u_ref, theta_ref, s, f_l, dt);
        reconstruct_thrust(x, y)
    }

    pub fn step(&mut self, u_ref: f64, theta_ref: f64, s: &VesselState, f_l: Vec2, dt: f64) -> (f64, f64) {
        let (x, y) = self.demand(u_ref, theta_ref, s, f_l, dt);
        let (f, eta) = saturate_thrust(x, y, self.params.f_max);
        (f, eta.clamp(-self.params.eta_max, self.params.eta_max))
    }
}

/// Free-function form of [`FblController::step`].
pub fn fbl_step(ctrl: &mut FblController, refs: (f64, f64), s: &VesselState, f_l: Vec2, dt: f64) -> (f64, f64) {
    ctrl.step(refs.0, refs.1, s, f_l, dt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_four_five() {
        let (f, eta) = reconstruct_thrust(3.0, 4.0);
        assert!((f - 5.0).abs() < 1e-15);
        assert!((eta - 0.9273).abs() < 1e-4);
        assert_eq!(reconstruct_thrust(2.0, 0.0), (2.0, 0.0));
        assert_eq!(reconstruct_thrust(0.0, 0.0), (0.0, 0.0));
    }

    #[test]
    fn disturbance_terms() {
        let p = VesselParams::default();
        assert_eq!(fbl_disturbance_terms(&VesselState::default(), Vec2::zeros(), &p), (0.0, 0.0));
        let s = VesselState { u: 1.0, ..Default::default() };
        assert_eq!(fbl_disturbance_terms(&s, Vec2::zeros(), &p).0, 100.0);
    }

    #[test]
    fn saturation_serves_yaw_first() {
        assert_eq!(saturate_thrust(3.0, 4.0, 10.0), reconstruct_thrust(3.0, 4.0));
        let (f, eta) = saturate_thrust(8000.0, 3000.0, 5000.0);
        assert!((f - 5000.0).abs() < 1e-9);
        assert!((f * eta.sin() - 3000.0).abs() < 1e-9);
        let (f, eta) = saturate_thrust(100.0, -9000.0, 5000.0);
        assert!((f - 5000.0).abs() < 1e-9 && (eta + std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn steering_stays_within_half_turn() {
        for (x, y) in [(-3.0, 1.0), (-3.0, -1.0), (-1.0, 0.0), (0.5, -7.0)] {
            let (f, eta) = reconstruct_thrust(x, y);
            assert!(f >= 0.0 && eta.abs() <= std::f64::consts::FRAC_PI_2);
        }
    }
}
