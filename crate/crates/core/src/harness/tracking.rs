use super::dubins::{DubinsPath, DubinsWord};
use super::{HarnessError, Result};
use crate::control::{
    los_heading, path_to_setpoints, supervisor_step, ControllerConfig, SetpointConfig, SetpointPlan, SupervisorMode, SupervisorState,
    VesselController,
};
use crate::dynamics::{Controls, DuoParams, DuoSim, TrajectorySink};
use crate::geometry::{wrap_angle, Pose, ReferencePath};
use std::f64::consts::FRAC_PI_2;
use serde::{Deserialize, Serialize};
use std::io::Write;

pub const ERROR_HEADER: [&str; 7] = ["t", "cross_track_1", "heading_err_1", "cross_track_2", "heading_err_2", "u_1", "u_2"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackingExperiment {
    pub start: Pose,
    pub goal: Pose,
    /// Turning radius of the reference (m).
    pub rho: f64,
    pub v_ref: f64,
    pub controller: ControllerConfig,
    /// Simulated-time cap (s); `None` derives one from the path length.
    #[serde(default)]
    pub duration_cap: Option<f64>,
}

impl TrackingExperiment {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0) || !(self.v_ref > 0.0) {
            return Err(HarnessError::Config("rho and v_ref must be positive".into()));
        }
        if self.duration_cap.is_some_and(|c| !(c > 0.0)) {
            return Err(HarnessError::Config("duration cap must be positive".into()));
        }
        self.controller.validate()?;
        Ok(())
    }
}

/// Simulation settings shared by tracking runs and missions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackingOptions {
    pub duo: DuoParams,
    /// Control period; dynamics substep is `duo.dt`.
    pub control_dt: f64,
    /// Sampling period of the error and trajectory logs.
    pub log_interval: f64,
    /// Line-of-sight lookahead (m); zero uses the raw setpoint heading.
    pub los_lookahead: f64,
    /// `u_cruise` is replaced by the experiment speed.
    pub setpoints: SetpointConfig,
}

impl Default for TrackingOptions {
    fn default() -> Self {
        Self {
            duo: DuoParams::default(),
            control_dt: 0.01,
            log_interval: 0.05,
            los_lookahead: 10.0,
            setpoints: SetpointConfig::default(),
        }
    }
}

impl TrackingOptions {
    fn ratio(a: f64, b: f64, what: &str) -> Result<usize> {
        let n = (a / b).round();
        if !(n >= 1.0) || ((n * b) - a).abs() > 1e-9 * a.max(1.0) {
            return Err(HarnessError::Config(format!("{what} must be a whole multiple")));
        }
        Ok(n as usize)
    }

    pub fn substeps(&self) -> Result<usize> {
        Self::ratio(self.control_dt, self.duo.dt, "control period over the dynamics step")
    }

    pub fn log_every(&self) -> Result<usize> {
        Self::ratio(self.log_interval, self.control_dt, "log interval over the control period")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSample {
    pub t: f64,
    /// Signed distance to the vessel's own offset reference, positive to the left.
    pub cross_track: [f64; 2],
    /// Heading minus reference tangent, wrapped (rad).
    pub heading_err: [f64; 2],
    pub u: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingResult {
    pub word: DubinsWord,
    pub path_length: f64,
    pub completed: bool,
    pub sim_time: f64,
    pub rmse_cross_track: [f64; 2],
    pub rmse_heading_deg: [f64; 2],
    pub max_stern_separation: f64,
    pub samples: Vec<ErrorSample>,
}

/// Root-mean-square of cross-track (m) and heading (deg) errors per vessel.
pub fn rmse(samples: &[ErrorSample]) -> ([f64; 2], [f64; 2]) {
    if samples.is_empty() {
        return ([0.0; 2], [0.0; 2]);
    }
    let n = samples.len() as f64;
    let ms = |f: &dyn Fn(&ErrorSample) -> f64| (samples.iter().map(|s| f(s).powi(2)).sum::<f64>() / n).sqrt();
    (
        [ms(&|s| s.cross_track[0]), ms(&|s| s.cross_track[1])],
        [ms(&|s| s.heading_err[0]).to_degrees(), ms(&|s| s.heading_err[1]).to_degrees()],
    )
}

pub fn write_error_csv<W: Write>(samples: &[ErrorSample], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ERROR_HEADER)?;
    for s in samples {
        let row = [s.t, s.cross_track[0], s.heading_err[0], s.cross_track[1], s.heading_err[1], s.u[0], s.u[1]];
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseSample {
    pub t: f64,
    pub poses: [Pose; 2],
}

/// Outcome of following one plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LegOutcome {
    Completed,
    TimedOut,
}

/// A duo under closed-loop control with fixed-rate logging.
pub struct DuoRunner<'w> {
    sim: DuoSim,
    controllers: [VesselController; 2],
    options: TrackingOptions,
    substeps: usize,
    log_every: usize,
    tick: u64,
    last: Controls,
    pub samples: Vec<ErrorSample>,
    poses: Vec<PoseSample>,
    pub max_stern_separation: f64,
    logger: Option<&'w mut dyn TrajectorySink>,
}

impl<'w> DuoRunner<'w> {
    pub fn new(
        start: [Pose; 2],
        controller: &ControllerConfig,
        options: &TrackingOptions,
        logger: Option<&'w mut dyn TrajectorySink>,
    ) -> Result<Self> {
        let sim = DuoSim::from_poses(options.duo, start[0], start[1])?;
        let v = options.duo.vessel;
        let max_stern_separation = sim.stern_separation();
        Ok(Self {
            sim,
            controllers: [VesselController::new(controller, &v), VesselController::new(controller, &v)],
            options: *options,
            substeps: options.substeps()?,
            log_every: options.log_every()?,
            tick: 0,
            last: Controls::default(),
            samples: Vec::new(),
            poses: Vec::new(),
            max_stern_separation,
            logger,
        })
    }

    pub fn sim(&self) -> &DuoSim {
        &self.sim
    }

    /// Drains the pose samples logged so far.
    pub fn take_poses(&mut self) -> Vec<PoseSample> {
        std::mem::take(&mut self.poses)
    }

    pub fn time(&self) -> f64 {
        self.tick as f64 * self.options.control_dt
    }

    fn record(&mut self, plan: &SetpointPlan) -> Result<()> {
        let mut sample = ErrorSample { t: self.time(), cross_track: [0.0; 2], heading_err: [0.0; 2], u: [0.0; 2] };
        for w in 0..2 {
            let s = self.sim.vessel(w);
            if let Some(r) = plan.reference(w, s.position(), s.theta) {
                sample.cross_track[w] = r.cross_track;
                sample.heading_err[w] = wrap_angle(s.theta - r.heading);
            }
            sample.u[w] = s.u;
        }
        self.samples.push(sample);
        let pose = |w: usize| {
            let v = self.sim.vessel(w);
            Pose { x: v.x, y: v.y, theta: v.theta }
        };
        self.poses.push(PoseSample { t: sample.t, poses: [pose(0), pose(1)] });
        if let Some(log) = self.logger.as_deref_mut() {
            log.log(&self.sim, &self.last)?;
        }
        Ok(())
    }

    /// One control period with the given references, then the dynamics substeps.
    fn control_tick(&mut self, plan: &SetpointPlan, u_ref: [f64; 2], theta_ref: [f64; 2]) -> Result<()> {
        if self.tick % self.log_every as u64 == 0 {
            self.record(plan)?;
        }
        let dt = self.options.control_dt;
        let mut cmd = [(0.0, 0.0); 2];
        for (w, c) in cmd.iter_mut().enumerate() {
            let s = self.sim.vessel(w);
            let fl = self.sim.tow_force_body(w);
            *c = self.controllers[w].step(u_ref[w], theta_ref[w], &s, fl, dt);
        }
        self.last = Controls { f1: cmd[0].0, eta1: cmd[0].1, f2: cmd[1].0, eta2: cmd[1].1 };
        for _ in 0..self.substeps {
            self.sim.advance(&self.last, self.options.duo.dt)?;
            self.max_stern_separation = self.max_stern_separation.max(self.sim.stern_separation());
        }
        self.tick += 1;
        Ok(())
    }

    /// Heading reference with line-of-sight correction against the plan window
    /// around the current setpoint.
    fn guided_heading(&self, plan: &SetpointPlan, sup: &SupervisorState, w: usize, theta_sup: f64) -> f64 {
        if !(self.options.los_lookahead > 0.0) {
            return theta_sup;
        }
        let sps = &plan.setpoints[w];
        let idx = sup.index[w].min(sps.len() - 1);
        let lo = sps[idx.saturating_sub(2)].station;
        let hi = sps[(idx + 1).min(sps.len() - 1)].station;
        let s = self.sim.vessel(w);
        let Some(r) = plan.reference_at(w, plan.dense_range(w, lo, hi), s.position(), s.theta) else {
            return theta_sup;
        };
        let los = los_heading(theta_sup + wrap_angle(r.heading - theta_sup), r.cross_track, self.options.los_lookahead);
        // Never steer away from the pending setpoint.
        let to_sp = sps[idx].position - s.position();
        if !sup.arrived[w] && to_sp.norm() > 0.0 {
            let bearing = to_sp.y.atan2(to_sp.x);
            if wrap_angle(los - bearing).abs() > FRAC_PI_2 {
                return los + wrap_angle(bearing - los);
            }
        }
        los
    }

    /// Runs the hold-and-align supervisor on `plan` until both vessels reach the
    /// final setpoint or the simulated clock reaches `until`.
    pub fn follow(&mut self, plan: &SetpointPlan, until: f64) -> Result<LegOutcome> {
        let mut sup = SupervisorState::default();
        loop {
            let pos = [self.sim.vessel(0).position(), self.sim.vessel(1).position()];
            let (out, next) = supervisor_step(plan, &sup, pos);
            sup = next;
            if sup.mode == SupervisorMode::Done {
                return Ok(LegOutcome::Completed);
            }
            if self.time() >= until - 1e-9 {
                return Ok(LegOutcome::TimedOut);
            }
            let theta = [self.guided_heading(plan, &sup, 0, out.theta_ref[0]), self.guided_heading(plan, &sup, 1, out.theta_ref[1])];
            self.control_tick(plan, out.u_ref, theta)?;
        }
    }

    /// Holds position (zero surge reference) at the given headings for `duration` seconds.
    pub fn dwell(&mut self, plan: &SetpointPlan, theta_ref: [f64; 2], duration: f64) -> Result<()> {
        let end = self.time() + duration;
        while self.time() < end - 1e-9 {
            self.control_tick(plan, [0.0; 2], theta_ref)?;
        }
        Ok(())
    }

    /// Logs the final state when the last tick was not already logged.
    pub fn finish(&mut self, plan: &SetpointPlan) -> Result<()> {
        if self.samples.last().is_none_or(|s| s.t < self.time()) && self.tick % self.log_every as u64 == 0 {
            self.record(plan)?;
        }
        Ok(())
    }
}

/// Default simulated-time cap for a path of `length` meters at `v_ref`.
pub fn default_cap(length: f64, v_ref: f64) -> f64 {
    60.0 + 3.0 * length / v_ref.min(3.0)
}

/// Dubins reference, setpoint conversion and closed-loop simulation of one duo.
pub fn run_tracking_experiment(exp: &TrackingExperiment, options: &TrackingOptions) -> Result<TrackingResult> {
    run_tracking_logged(exp, options, None)
}

pub fn run_tracking_logged(
    exp: &TrackingExperiment,
    options: &TrackingOptions,
    logger: Option<&mut dyn TrajectorySink>,
) -> Result<TrackingResult> {
    exp.validate()?;
    let path = DubinsPath::shortest(exp.start, exp.goal, exp.rho).ok_or_else(|| HarnessError::Config("no Dubins path".into()))?;
    let mut cfg = options.setpoints;
    cfg.u_cruise = exp.v_ref;
    let plan = path_to_setpoints(&path, &cfg, options.duo.boom.total_length)?;
    let mut runner = DuoRunner::new([plan.pose(0, 0), plan.pose(1, 0)], &exp.controller, options, logger)?;
    let cap = exp.duration_cap.unwrap_or_else(|| default_cap(path.length(), exp.v_ref));
    let outcome = runner.follow(&plan, cap)?;
    runner.finish(&plan)?;
    let (ct, hd) = rmse(&runner.samples);
    Ok(TrackingResult {
        word: path.word,
        path_length: path.length(),
        completed: outcome == LegOutcome::Completed,
        sim_time: runner.time(),
        rmse_cross_track: ct,
        rmse_heading_deg: hd,
        max_stern_separation: runner.max_stern_separation,
        samples: std::mem::take(&mut runner.samples),
    })
}
