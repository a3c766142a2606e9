//! `spillfleet`: scenario generation, routing, tracking experiments and missions.

mod commands;
mod config;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "spillfleet", version, about = "Multi-spill response planning and boom-towing duo simulation")]
pub struct Cli {
    /// Seed for scenario generation and randomized solver stages.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output directory, created when missing.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// JSON configuration file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scenario generation.
    #[command(subcommand)]
    Scenario(ScenarioCmd),
    /// Routing: staged solve and benchmark.
    #[command(subcommand)]
    Route(RouteCmd),
    /// Dubins tracking experiments.
    #[command(subcommand)]
    Track(TrackCmd),
    /// Full missions: routing followed by simulated execution.
    #[command(subcommand)]
    Mission(MissionCmd),
    /// Shorthand for `route solve`.
    Solve(SolveArgs),
}

#[derive(Debug, Subcommand)]
pub enum ScenarioCmd {
    /// Random scenario: scenario.json, spills.csv, grid.pgm.
    Gen(GenArgs),
}

#[derive(Debug, Subcommand)]
pub enum RouteCmd {
    /// Staged solve of one scenario: report.json, routes.csv, stages.csv.
    Solve(SolveArgs),
    /// Greedy, heuristic, cold and warm exact search on generated instances: bench.csv.
    Bench(BenchArgs),
}

#[derive(Debug, Subcommand)]
pub enum TrackCmd {
    /// One Dubins tracking run: errors.csv, summary.csv.
    Run(TrackArgs),
    /// RMSE maps over turning radius and reference speed: sweep_<controller>.csv.
    Sweep(SweepArgs),
}

#[derive(Debug, Subcommand)]
pub enum MissionCmd {
    /// Route and execute a scenario: mission.csv, summary.csv.
    Run(MissionArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    /// Number of spills.
    #[arg(long, default_value_t = 10)]
    pub spills: usize,
    /// Number of duos.
    #[arg(long, default_value_t = 2)]
    pub agents: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Number of duos; defaults to the scenario's fleet size.
    #[arg(long)]
    pub agents: Option<usize>,
    /// Wall-clock limit for the exact search (s).
    #[arg(long)]
    pub time_limit: Option<f64>,
    /// Deterministic node budget for the exact search.
    #[arg(long)]
    pub node_limit: Option<u64>,
    /// Comma-separated stages from greedy, dp, ils, bnb.
    #[arg(long, value_delimiter = ',')]
    pub stages: Option<Vec<String>>,
    /// Also write the MILP model as model.lp.
    #[arg(long)]
    pub lp: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Spill counts.
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<usize>>,
    /// Fleet sizes.
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<usize>>,
    /// Instances per (p, k), seeded from `--seed` upwards.
    #[arg(long)]
    pub instances: Option<u64>,
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub node_limit: Option<u64>,
    /// Also write objective_vs_agents.tsv and .svg.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ControllerKind {
    Pid,
    Fbl,
}

#[derive(Debug, Clone, Args)]
pub struct TrackArgs {
    /// Dubins turning radius (m).
    #[arg(long, default_value_t = 15.0)]
    pub rho: f64,
    /// Reference speed (m/s).
    #[arg(long, default_value_t = 5.0)]
    pub v_ref: f64,
    #[arg(long, value_enum, default_value = "fbl")]
    pub controller: ControllerKind,
    /// Start pose `x,y,theta`.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [0.0, 0.0, 0.0])]
    pub start: Vec<f64>,
    /// Goal pose `x,y,theta`.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [100.0, 65.0, std::f64::consts::PI])]
    pub goal: Vec<f64>,
    /// Simulated-time cap (s).
    #[arg(long)]
    pub cap: Option<f64>,
    /// Also write the full simulator log as trajectory.csv.
    #[arg(long)]
    pub trajectory: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Grid points over the turning radius.
    #[arg(long)]
    pub n_rho: Option<usize>,
    /// Grid points over the reference speed.
    #[arg(long)]
    pub n_v: Option<usize>,
    /// Radius range `lo,hi` (m).
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub rho_range: Option<Vec<f64>>,
    /// Speed range `lo,hi` (m/s).
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub v_range: Option<Vec<f64>>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "pid,fbl")]
    pub controllers: Vec<ControllerKind>,
    /// Also write heatmap TSV and SVG files.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Clone, Args)]
pub struct MissionArgs {
    /// Scenario JSON file; a random scenario is generated when absent.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Spills of the generated scenario.
    #[arg(long, default_value_t = 3)]
    pub spills: usize,
    /// Duos; overrides the scenario's fleet size.
    #[arg(long)]
    pub agents: Option<usize>,
    #[arg(long, value_enum, default_value = "fbl")]
    pub controller: ControllerKind,
    /// Also write trajectory_duo<N>.csv per duo.
    #[arg(long)]
    pub trajectory: bool,
}

/// Finished runs are either complete or carry an incompleteness flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Complete,
    Incomplete,
}

fn main() -> ExitCode {
    // Usage errors share the generic error code; 2 is reserved for incomplete runs.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(&cli) {
        Ok(Status::Complete) => ExitCode::SUCCESS,
        Ok(Status::Incomplete) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn solve_shorthand_parses_stage_list() {
        let cli = Cli::try_parse_from(["spillfleet", "solve", "--scenario", "f.json", "--agents", "3", "--time-limit", "5", "--stages", "greedy,dp,ils,bnb"]).unwrap();
        let Command::Solve(a) = cli.command else { panic!("not solve") };
        assert_eq!(a.agents, Some(3));
        assert_eq!(a.stages.unwrap(), ["greedy", "dp", "ils", "bnb"]);
    }

    #[test]
    fn global_flags_follow_the_verb() {
        let cli = Cli::try_parse_from(["spillfleet", "track", "run", "--seed", "9", "--out", "x"]).unwrap();
        assert_eq!(cli.seed, 9);
        assert_eq!(cli.out, PathBuf::from("x"));
    }
}
