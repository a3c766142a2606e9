use super::filter::FirstOrder;
use super::{ControlError, Result};
use crate::geometry::wrap_angle;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

/// Where the lead compensator sits in the loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeadTopology {
    /// `C(s)` in series with the error.
    Standard,
    /// Static gain `K_p / sqrt(beta)` on the error, unit-DC-gain lead `H(s)` on the measurement.
    #[default]
    Normalized,
}

/// One lead loop `C(s) = K_p (sqrt(beta) s + omega_c) / (s + sqrt(beta) omega_c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeadGains {
    pub k_p: f64,
    pub beta: f64,
    pub omega_c: f64,
    /// Reference low-pass time constant; zero disables the filter.
    pub tau_ref: f64,
    pub topology: LeadTopology,
}

/// `beta = (1 + sin phi) / (1 - sin phi)`.
pub fn beta_from_phase_margin(phi: f64) -> Result<f64> {
    if !(0.0..FRAC_PI_2).contains(&phi) {
        return Err(ControlError::Domain(format!("phase lead {phi} rad must lie in [0, pi/2)")));
    }
    let s = phi.sin();
    Ok((1.0 + s) / (1.0 - s))
}

/// Discrete lead loop; references and measurements of an angular loop are
/// compared on the shortest arc.
#[derive(Debug, Clone, PartialEq)]
pub struct LeadLoop {
    gains: LeadGains,
    angular: bool,
    ref_filter: Option<FirstOrder>,
    /// Standard: `C(s)` on the error. Normalized: `H(s) - 1` on the measurement.
    comp: FirstOrder,
    ref_prev: f64,
    started: bool,
}

impl LeadLoop {
    pub fn new(gains: LeadGains, angular: bool) -> Self {
        let sb = gains.beta.sqrt();
        let pole = sb * gains.omega_c;
        let comp = match gains.topology {
            LeadTopology::Standard => FirstOrder::new(gains.k_p * sb, gains.k_p * gains.omega_c, pole),
            LeadTopology::Normalized => FirstOrder::new(gains.beta - 1.0, 0.0, pole),
        };
        let ref_filter = (gains.tau_ref > 0.0).then(|| FirstOrder::low_pass(gains.tau_ref));
        Self { gains, angular, ref_filter, comp, ref_prev: 0.0, started: false }
    }

    pub fn gains(&self) -> &LeadGains {
        &self.gains
    }

    fn diff(&self, a: f64, b: f64) -> f64 {
        if self.angular {
            wrap_angle(a - b)
        } else {
            a - b
        }
    }

    /// Filtered reference of the last step.
    pub fn filtered_reference(&self) -> f64 {
        self.ref_filter.map_or(self.ref_prev, |f| f.output())
    }

    /// Virtual control for one control period.
    pub fn step(&mut self, reference: f64, measurement: f64, dt: f64) -> f64 {
        if !self.started {
            // The loop starts at rest on the current measurement.
            self.started = true;
            self.ref_prev = measurement;
            if let Some(f) = self.ref_filter.as_mut() {
                f.settle(measurement);
            }
            match self.gains.topology {
                LeadTopology::Standard => self.comp.settle(0.0),
                LeadTopology::Normalized => self.comp.settle(measurement),
            }
        }
        // Unwrapped reference sequence keeps the low-pass continuous across +-pi.
        let r = self.ref_prev + self.diff(reference, self.ref_prev);
        self.ref_prev = r;
        let r_f = match self.ref_filter.as_mut() {
            Some(f) => f.step(r, dt),
            None => r,
        };
        let e = self.diff(r_f, measurement);
        match self.gains.topology {
            LeadTopology::Standard => self.comp.step(e, dt),
            LeadTopology::Normalized => {
                let hp = self.comp.step(measurement, dt);
                self.gains.k_p / self.gains.beta.sqrt() * (e - hp)
            }
        }
    }
}

/// Free-function form of [`LeadLoop::step`].
pub fn lead_step(lp: &mut LeadLoop, reference: f64, measurement: f64, dt: f64) -> f64 {
    lp.step(reference, measurement, dt)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gains(beta: f64, topology: LeadTopology) -> LeadGains {
        LeadGains { k_p: 2.0, beta, omega_c: 1.0, tau_ref: 0.0, topology }
    }

    #[test]
    fn beta_values() {
        assert_eq!(beta_from_phase_margin(0.0).unwrap(), 1.0);
        assert!((beta_from_phase_margin(60f64.to_radians()).unwrap() - 13.928).abs() < 1e-3);
        assert!((beta_from_phase_margin(20f64.to_radians()).unwrap() - 2.040).abs() < 1e-3);
        assert!(beta_from_phase_margin(FRAC_PI_2).is_err());
    }

    #[test]
    fn zero_signals_give_zero() {
        for t in [LeadTopology::Standard, LeadTopology::Normalized] {
            let mut l = LeadLoop::new(gains(4.0, t), false);
            for _ in 0..10 {
                assert_eq!(l.step(0.0, 0.0, 0.01), 0.0);
            }
        }
    }

    #[test]
    fn unit_beta_collapses_to_gain() {
        for t in [LeadTopology::Standard, LeadTopology::Normalized] {
            let mut l = LeadLoop::new(gains(1.0, t), false);
            for k in 0..50 {
                let (r, y) = ((k as f64 * 0.3).sin(), (k as f64 * 0.7).cos());
                let a = l.step(r, y, 0.01);
                assert!((a - 2.0 * (r - y)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn angular_error_uses_short_arc() {
        let mut l = LeadLoop::new(gains(1.0, LeadTopology::Normalized), true);
        let a = l.step(3.0, -3.0, 0.01);
        assert!((a - 2.0 * wrap_angle(6.0)).abs() < 1e-12);
    }
}
