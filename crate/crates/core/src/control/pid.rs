use super::filter::FirstOrder;
use super::{ControlError, Result};
use serde::{Deserialize, Serialize};

/// `K_p + K_i / s + K_d s / (tau s + 1)` for one channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidChannel {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub tau: f64,
}

impl PidChannel {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(ControlError::Config("PID derivative filter constant must be positive".into()));
        }
        if ![self.kp, self.ki, self.kd].iter().all(|g| g.is_finite()) {
            return Err(ControlError::Config("PID gains must be finite".into()));
        }
        Ok(())
    }
}

/// Surge error drives thrust, heading error drives steering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidGains {
    pub surge: PidChannel,
    pub heading: PidChannel,
}

impl Default for PidGains {
    fn default() -> Self {
        Self {
            surge: PidChannel { kp: 2500.0, ki: 400.0, kd: 0.0, tau: 0.1 },
            heading: PidChannel { kp: 2.0, ki: 0.4, kd: 1.2, tau: 0.1 },
        }
    }
}

impl PidGains {
    pub fn validate(&self) -> Result<()> {
        self.surge.validate()?;
        self.heading.validate()
    }
}

/// Discrete PID with trapezoidal integral, Tustin-filtered derivative and
/// clamping anti-windup. The error history starts at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PidLoop {
    gains: PidChannel,
    lo: f64,
    hi: f64,
    integral: f64,
    e_prev: f64,
    derivative: FirstOrder,
}

impl PidLoop {
    /// Output is clamped to `[-limit, limit]`.
    pub fn new(gains: PidChannel, limit: f64) -> Self {
        Self::with_range(gains, -limit, limit)
    }

    /// Output is clamped to `[lo, hi]`.
    pub fn with_range(gains: PidChannel, lo: f64, hi: f64) -> Self {
        Self {
            gains,
            lo,
            hi,
            integral: 0.0,
            e_prev: 0.0,
            derivative: FirstOrder::new(gains.kd / gains.tau, 0.0, 1.0 / gains.tau),
        }
    }

    /// Current integral contribution `K_i * integral(e)`.
    pub fn integral_term(&self) -> f64 {
        self.integral
    }

    pub fn step(&mut self, e: f64, dt: f64) -> f64 {
        let p = self.gains.kp * e;
        let d = self.derivative.step(e, dt);
        let candidate = self.integral + self.gains.ki * 0.5 * dt * (e + self.e_prev);
        self.e_prev = e;
        let raw = p + candidate + d;
        let out = raw.clamp(self.lo, self.hi);
        // Integrate only while unsaturated or when the error unwinds the saturation.
        let unwinding = (raw > self.hi && e < 0.0) || (raw < self.lo && e > 0.0);
        if raw == out || unwinding {
            self.integral = candidate;
        }
        self.integral = self.integral.clamp(self.lo.min(-self.hi), self.hi.max(-self.lo));
        out
    }
}

/// Per-vessel PID pair producing `(F, eta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PidController {
    surge: PidLoop,
    heading: PidLoop,
}

impl PidController {
    /// Thrust is kept in `[0, f_max]` so steering keeps its sign.
    pub fn new(gains: &PidGains, f_max: f64, eta_max: f64) -> Self {
        Self { surge: PidLoop::with_range(gains.surge, 0.0, f_max), heading: PidLoop::new(gains.heading, eta_max) }
    }

    /// `e_theta` must already be wrapped to `(-pi, pi]`.
    pub fn step(&mut self, e_u: f64, e_theta: f64, dt: f64) -> (f64, f64) {
        (self.surge.step(e_u, dt), self.heading.step(e_theta, dt))
    }

    pub fn surge_loop(&self) -> &PidLoop {
        &self.surge
    }

    pub fn heading_loop(&self) -> &PidLoop {
        &self.heading
    }
}

/// Free-function form of [`PidController::step`].
pub fn pid_step(ctrl: &mut PidController, error: (f64, f64), dt: f64) -> (f64, f64) {
    ctrl.step(error.0, error.1, dt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_error_gives_zero_output() {
        let mut c = PidController::new(&PidGains::default(), 5000.0, 1.5);
        for _ in 0..10 {
            assert_eq!(pid_step(&mut c, (0.0, 0.0), 0.01), (0.0, 0.0));
        }
    }

    #[test]
    fn proportional_only() {
        let g = PidChannel { kp: 3.0, ki: 0.0, kd: 0.0, tau: 0.1 };
        let mut l = PidLoop::new(g, 100.0);
        for _ in 0..5 {
            assert_eq!(l.step(2.0, 0.01), 6.0);
        }
    }

    #[test]
    fn integral_is_bounded_under_saturation() {
        let g = PidChannel { kp: 1.0, ki: 50.0, kd: 0.0, tau: 0.1 };
        let mut l = PidLoop::new(g, 10.0);
        for _ in 0..10_000 {
            assert!(l.step(100.0, 0.01) <= 10.0);
            assert!(l.integral_term().abs() <= 10.0);
        }
        // Without windup the output leaves saturation as soon as the error flips.
        assert!(l.step(-30.0, 0.01) < 0.0);
    }
}
