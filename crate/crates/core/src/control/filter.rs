/// Tustin discretization of `(b1 s + b0) / (s + a0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct FirstOrder {
    b1: f64,
    b0: f64,
    a0: f64,
    x_prev: f64,
    y_prev: f64,
}

impl FirstOrder {
    pub(crate) fn new(b1: f64, b0: f64, a0: f64) -> Self {
        Self { b1, b0, a0, x_prev: 0.0, y_prev: 0.0 }
    }

    /// Unity low-pass `1 / (tau s + 1)`.
    pub(crate) fn low_pass(tau: f64) -> Self {
        Self::new(0.0, 1.0 / tau, 1.0 / tau)
    }

    /// Places the filter at the equilibrium reached under constant input `x`.
    pub(crate) fn settle(&mut self, x: f64) {
        self.x_prev = x;
        self.y_prev = if self.a0 != 0.0 { self.b0 / self.a0 * x } else { 0.0 };
    }

    pub(crate) fn step(&mut self, x: f64, dt: f64) -> f64 {
        let c = 2.0 / dt;
        let y = ((self.b1 * c + self.b0) * x + (self.b0 - self.b1 * c) * self.x_prev - (self.a0 - c) * self.y_prev) / (c + self.a0);
        self.x_prev = x;
        self.y_prev = y;
        y
    }

    pub(crate) fn output(&self) -> f64 {
        self.y_prev
    }
}
