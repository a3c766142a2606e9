use crate::config::CliConfig;
use crate::{
    BenchArgs, Cli, Command, ControllerKind, GenArgs, MissionArgs, MissionCmd, RouteCmd, ScenarioCmd, SolveArgs, Status, SweepArgs, TrackArgs,
    TrackCmd,
};
use anyhow::{bail, Context, Result};
use spillfleet::control::ControllerConfig;
use spillfleet::dynamics::TrajectoryLogger;
use spillfleet::geometry::Pose;
use spillfleet::harness::*;
use spillfleet::routing::{evaluate_damage, export_milp, solve, Stage};
use spillfleet::scenario::{build_motion_graph, generate_random_scenario, rasterize, Scenario};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

pub const SPILLS_HEADER: [&str; 6] = ["id", "x", "y", "volume", "perimeter", "risk"];
pub const ROUTES_HEADER: [&str; 5] = ["agent", "position", "spill", "completion", "risk"];
pub const STAGES_HEADER: [&str; 2] = ["stage", "objective"];
pub const TRACK_SUMMARY_HEADER: [&str; 10] = [
    "controller",
    "word",
    "path_length",
    "completed",
    "sim_time",
    "rmse_cross_track_1",
    "rmse_cross_track_2",
    "rmse_heading_deg_1",
    "rmse_heading_deg_2",
    "max_stern_separation",
];
pub const MISSION_SUMMARY_HEADER: [&str; 5] = ["spills", "duos", "planned_damage", "realized_damage", "completed"];
pub const POSE_HEADER: [&str; 7] = ["t", "x_1", "y_1", "theta_1", "x_2", "y_2", "theta_2"];

pub fn run(cli: &Cli) -> Result<Status> {
    let cfg = CliConfig::load(cli.config.as_deref())?;
    std::fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    let ctx = Ctx { seed: cli.seed, out: cli.out.clone(), cfg };
    match &cli.command {
        Command::Scenario(ScenarioCmd::Gen(a)) => ctx.scenario_gen(a),
        Command::Route(RouteCmd::Solve(a)) | Command::Solve(a) => ctx.route_solve(a),
        Command::Route(RouteCmd::Bench(a)) => ctx.route_bench(a),
        Command::Track(TrackCmd::Run(a)) => ctx.track_run(a),
        Command::Track(TrackCmd::Sweep(a)) => ctx.track_sweep(a),
        Command::Mission(MissionCmd::Run(a)) => ctx.mission_run(a),
    }
}

struct Ctx {
    seed: u64,
    out: PathBuf,
    cfg: CliConfig,
}

fn status(complete: bool) -> Status {
    if complete {
        Status::Complete
    } else {
        Status::Incomplete
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn csv_writer(path: &Path, header: &[&str]) -> Result<csv::Writer<BufWriter<File>>> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header)?;
    Ok(w)
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let mut w = create(path)?;
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

fn num(v: f64) -> String {
    v.to_string()
}

impl Ctx {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn controller(&self, kind: ControllerKind) -> ControllerConfig {
        match kind {
            ControllerKind::Pid => ControllerConfig::Pid(self.cfg.pid.unwrap_or_default()),
            ControllerKind::Fbl => ControllerConfig::Fbl(self.cfg.fbl.unwrap_or_default()),
        }
    }

    fn scenario_gen(&self, a: &GenArgs) -> Result<Status> {
        let sc = generate_random_scenario(self.seed, a.spills, a.agents, &self.cfg.generator)?;
        sc.save(self.path("scenario.json"))?;
        let mut w = csv_writer(&self.path("spills.csv"), &SPILLS_HEADER)?;
        for s in &sc.spills {
            w.write_record([s.id.to_string(), num(s.centroid.x), num(s.centroid.y), num(s.volume), num(s.perimeter), num(s.risk)])?;
        }
        w.flush()?;
        let grid = rasterize(&sc.workspace)?;
        write_with(&self.path("grid.pgm"), |w| grid.write_pgm(w))?;
        println!("scenario: {} spills, {} duos, {} obstacles -> {}", sc.spill_count(), sc.fleet_size, sc.workspace.obstacles.len(), self.out.display());
        Ok(Status::Complete)
    }

    fn route_solve(&self, a: &SolveArgs) -> Result<Status> {
        let sc = Scenario::load(&a.scenario).with_context(|| format!("loading {}", a.scenario.display()))?;
        let graph = build_motion_graph(&sc)?;
        let k = a.agents.unwrap_or(sc.fleet_size);
        let mut solver = self.cfg.solver.clone();
        solver.seed = self.seed;
        if let Some(stages) = &a.stages {
            solver.stages = stages.iter().map(|s| s.parse::<Stage>()).collect::<Result<_, _>>()?;
        }
        if let Some(t) = a.time_limit {
            solver.time_limit = t;
        }
        if a.node_limit.is_some() {
            solver.node_limit = a.node_limit;
        }
        let report = solve(&graph, k, &solver)?;
        std::fs::write(self.path("report.json"), serde_json::to_string_pretty(&report)?)?;
        let (_, times) = evaluate_damage(&graph, &report.best)?;
        let mut w = csv_writer(&self.path("routes.csv"), &ROUTES_HEADER)?;
        for (agent, route) in report.best.routes.iter().enumerate() {
            for (pos, &s) in route.iter().enumerate() {
                w.write_record([(agent + 1).to_string(), (pos + 1).to_string(), s.to_string(), num(times.of(s)), num(graph.risk(s))])?;
            }
        }
        w.flush()?;
        let mut w = csv_writer(&self.path("stages.csv"), &STAGES_HEADER)?;
        for r in &report.stage_log {
            w.write_record([r.stage.to_string(), num(r.objective)])?;
        }
        w.flush()?;
        if a.lp {
            export_milp(&graph, k)?.write_lp(self.path("model.lp"))?;
        }
        println!("objective {} lower bound {} gap {:.3e} nodes {}{}", report.objective, report.lower_bound, report.gap, report.nodes_explored, if report.timed_out { " (budget hit)" } else { "" });
        Ok(status(!report.timed_out))
    }

    fn route_bench(&self, a: &BenchArgs) -> Result<Status> {
        let mut spec = self.cfg.bench.clone();
        if let Some(p) = &a.p {
            spec.p = p.clone();
        }
        if let Some(k) = &a.k {
            spec.k = k.clone();
        }
        let n = a.instances.unwrap_or(spec.seeds.len() as u64);
        spec.seeds = (self.seed..self.seed + n).collect();
        if let Some(t) = a.time_limit {
            spec.time_limit = t;
        }
        if a.node_limit.is_some() {
            spec.node_limit = a.node_limit;
        }
        let rows = run_routing_benchmark(&spec)?;
        write_bench_csv(&rows, create(&self.path("bench.csv"))?)?;
        if a.plot {
            let series = objective_series(&rows);
            write_with(&self.path("objective_vs_agents.tsv"), |w| write_series_tsv(&series, "k", "objective", w))?;
            std::fs::write(self.path("objective_vs_agents.svg"), line_chart_svg("Objective vs. fleet size", "duos k", "mean damage", &series))?;
        }
        let chain = rows.iter().filter(|r| r.chain_holds(1e-9)).count();
        let stopped = rows.iter().filter(|r| r.cold_stopped || r.warm_stopped).count();
        let best = rows.iter().map(|r| r.improvement_pct).fold(0.0, f64::max);
        println!("{} instances: chain holds on {chain}, exact search stopped early on {stopped}, heuristic improvement up to {best:.2}%", rows.len());
        Ok(status(stopped == 0))
    }

    fn track_run(&self, a: &TrackArgs) -> Result<Status> {
        let pose = |v: &[f64]| Pose::new(v[0], v[1], v[2]);
        let exp = TrackingExperiment {
            start: pose(&a.start),
            goal: pose(&a.goal),
            rho: a.rho,
            v_ref: a.v_ref,
            controller: self.controller(a.controller),
            duration_cap: a.cap,
        };
        let r = if a.trajectory {
            let mut log = TrajectoryLogger::new(create(&self.path("trajectory.csv"))?)?;
            let r = run_tracking_logged(&exp, &self.cfg.tracking, Some(&mut log))?;
            log.finish()?.flush()?;
            r
        } else {
            run_tracking_experiment(&exp, &self.cfg.tracking)?
        };
        write_error_csv(&r.samples, create(&self.path("errors.csv"))?)?;
        let mut w = csv_writer(&self.path("summary.csv"), &TRACK_SUMMARY_HEADER)?;
        w.write_record([
            exp.controller.name().to_string(),
            r.word.to_string(),
            num(r.path_length),
            (r.completed as u8).to_string(),
            num(r.sim_time),
            num(r.rmse_cross_track[0]),
            num(r.rmse_cross_track[1]),
            num(r.rmse_heading_deg[0]),
            num(r.rmse_heading_deg[1]),
            num(r.max_stern_separation),
        ])?;
        w.flush()?;
        println!(
            "{} {} length {:.2} m: cross-track RMSE {:.3}/{:.3} m, heading RMSE {:.2}/{:.2} deg{}",
            exp.controller.name(),
            r.word,
            r.path_length,
            r.rmse_cross_track[0],
            r.rmse_cross_track[1],
            r.rmse_heading_deg[0],
            r.rmse_heading_deg[1],
            if r.completed { "" } else { " (duration cap hit)" }
        );
        Ok(status(r.completed))
    }

    fn track_sweep(&self, a: &SweepArgs) -> Result<Status> {
        let mut grid = self.cfg.sweep.clone();
        let axis = |current: &[f64], n: Option<usize>, range: &Option<Vec<f64>>| -> Vec<f64> {
            if n.is_none() && range.is_none() {
                return current.to_vec();
            }
            let lo = range.as_ref().map_or_else(|| current.first().copied().unwrap_or(0.0), |r| r[0]);
            let hi = range.as_ref().map_or_else(|| current.last().copied().unwrap_or(0.0), |r| r[1]);
            linspace(lo, hi, n.unwrap_or(current.len()))
        };
        grid.rho = axis(&grid.rho, a.n_rho, &a.rho_range);
        grid.v_ref = axis(&grid.v_ref, a.n_v, &a.v_range);
        if a.controllers.is_empty() {
            bail!("at least one controller is required");
        }
        let controllers: Vec<ControllerConfig> = a.controllers.iter().map(|&c| self.controller(c)).collect();
        let maps = run_rmse_sweep(&grid, &controllers, &self.cfg.tracking)?;
        let mut incomplete = 0;
        for m in &maps {
            m.write_csv(create(&self.path(&format!("sweep_{}.csv", m.controller)))?)?;
            if a.plot {
                for metric in [Metric::CrossTrack, Metric::Heading] {
                    let stem = format!("heatmap_{}_{}", m.controller, metric.slug());
                    write_with(&self.path(&format!("{stem}.tsv")), |w| write_heatmap_tsv(m, metric, w))?;
                    std::fs::write(self.path(&format!("{stem}.svg")), heatmap_svg(m, metric))?;
                }
            }
            let worst = m.cells.iter().map(|c| c.cross_track()).fold(0.0, f64::max);
            println!("{}: {} cells, {} incomplete, worst cross-track RMSE {worst:.3} m", m.controller, m.cells.len(), m.incomplete());
            incomplete += m.incomplete();
        }
        Ok(status(incomplete == 0))
    }

    fn mission_run(&self, a: &MissionArgs) -> Result<Status> {
        let mut sc = match &a.scenario {
            Some(p) => Scenario::load(p).with_context(|| format!("loading {}", p.display()))?,
            None => generate_random_scenario(self.seed, a.spills, a.agents.unwrap_or(2), &self.cfg.generator)?,
        };
        if let Some(k) = a.agents {
            sc.fleet_size = k;
        }
        let mut config = self.cfg.mission.clone();
        config.controller = self.controller(a.controller);
        config.solver.seed = self.seed;
        let r = run_mission(&sc, &config)?;
        r.write_csv(create(&self.path("mission.csv"))?)?;
        let mut w = csv_writer(&self.path("summary.csv"), &MISSION_SUMMARY_HEADER)?;
        w.write_record([sc.spill_count().to_string(), sc.fleet_size.to_string(), num(r.planned_damage), num(r.realized_damage), (r.completed as u8).to_string()])?;
        w.flush()?;
        if a.trajectory {
            for (d, duo) in r.duos.iter().enumerate() {
                let mut w = csv_writer(&self.path(&format!("trajectory_duo{}.csv", d + 1)), &POSE_HEADER)?;
                for s in &duo.trajectory {
                    let [p, q] = s.poses;
                    w.write_record([s.t, p.x, p.y, p.theta, q.x, q.y, q.theta].map(num))?;
                }
                w.flush()?;
            }
        }
        println!(
            "mission: planned damage {:.1}, realized {:.1}, {}",
            r.planned_damage,
            r.realized_damage,
            if r.completed { "all spills completed" } else { "incomplete" }
        );
        Ok(status(r.completed))
    }
}
