use super::{Controls, DuoSim, Result};
use crate::geometry::wrap_angle;
use std::io::Write;

pub const TRAJECTORY_HEADER: [&str; 27] = [
    "t", "x_1", "y_1", "theta_1", "u_1", "v_1", "omega_1", "F_1", "eta_1", "fl_u_1", "fl_v_1", "x_2", "y_2", "theta_2", "u_2", "v_2",
    "omega_2", "F_2", "eta_2", "fl_u_2", "fl_v_2", "boom_start_x", "boom_start_y", "boom_end_x", "boom_end_y", "stern_gap", "kinetic_energy",
];

/// CSV trajectory log; headings are wrapped to `(-pi, pi]` on output only.
pub struct TrajectoryLogger<W: Write> {
    out: csv::Writer<W>,
}

impl<W: Write> TrajectoryLogger<W> {
    pub fn new(out: W) -> Result<Self> {
        let mut out = csv::Writer::from_writer(out);
        out.write_record(TRAJECTORY_HEADER)?;
        Ok(Self { out })
    }

    pub fn log(&mut self, sim: &DuoSim, controls: &Controls) -> Result<()> {
        let c = controls.clamped(&sim.params().vessel);
        let l = sim.params().boom.link_length();
        let n = sim.params().boom.n_links;
        let mut row: Vec<f64> = vec![sim.time()];
        for (w, f, eta) in [(0, c.f1, c.eta1), (1, c.f2, c.eta2)] {
            let s = sim.vessel(w);
            let fl = sim.tow_force_body(w);
            row.extend([s.x, s.y, wrap_angle(s.theta), s.u, s.v, s.omega, f, eta, fl.x, fl.y]);
        }
        let a = sim.link(0).n_end(l);
        let b = sim.link(n - 1).m_end(l);
        row.extend([a.x, a.y, b.x, b.y, sim.stern_separation(), sim.kinetic_energy()]);
        self.out.write_record(row.iter().map(|v| v.to_string()))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.flush()?;
        self.out.into_inner().map_err(|e| std::io::Error::other(e.to_string()).into())
    }
}

/// Destination for per-sample trajectory rows.
pub trait TrajectorySink {
    fn log(&mut self, sim: &DuoSim, controls: &Controls) -> Result<()>;
}

impl<W: Write> TrajectorySink for TrajectoryLogger<W> {
    fn log(&mut self, sim: &DuoSim, controls: &Controls) -> Result<()> {
        TrajectoryLogger::log(self, sim, controls)
    }
}
