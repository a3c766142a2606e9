use super::{HarnessError, Result};
use crate::routing::{solve, solve_exact_bnb, BnbConfig, SolveReport, SolverConfig, Stage};
use crate::scenario::{build_motion_graph, generate_random_scenario, GeneratorParams, MotionGraph};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::time::Duration;

pub const BENCH_HEADER: [&str; 16] = [
    "p",
    "k",
    "seed",
    "greedy",
    "heuristic",
    "bnb_cold",
    "bnb_warm",
    "lower_bound",
    "gap_cold",
    "gap_warm",
    "nodes_cold",
    "nodes_warm",
    "cold_stopped",
    "warm_stopped",
    "improvement_pct",
    "chain_ok",
];

/// Instances are every `(p, k, seed)` combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchmarkSpec {
    pub p: Vec<usize>,
    pub k: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Wall-clock cap per exact search (s).
    pub time_limit: f64,
    /// Node budget per exact search; the deterministic stopping rule.
    pub node_limit: Option<u64>,
    pub ils_iterations: usize,
    pub generator: GeneratorParams,
}

impl Default for BenchmarkSpec {
    fn default() -> Self {
        Self {
            p: vec![25, 50],
            k: vec![1, 2, 3],
            seeds: (0..5).collect(),
            time_limit: 60.0,
            node_limit: Some(200_000),
            ils_iterations: 150,
            generator: GeneratorParams::default(),
        }
    }
}

impl BenchmarkSpec {
    pub fn validate(&self) -> Result<()> {
        if self.p.is_empty() || self.k.is_empty() || self.seeds.is_empty() {
            return Err(HarnessError::Config("benchmark needs at least one p, k and seed".into()));
        }
        if self.k.contains(&0) {
            return Err(HarnessError::Config("fleet size must be at least 1".into()));
        }
        if !(self.time_limit > 0.0) {
            return Err(HarnessError::Config("time limit must be positive".into()));
        }
        Ok(())
    }

    /// `(p, k, seed)` in output order.
    pub fn instances(&self) -> Vec<(usize, usize, u64)> {
        let mut out = Vec::new();
        for &p in &self.p {
            for &k in &self.k {
                for &s in &self.seeds {
                    out.push((p, k, s));
                }
            }
        }
        out
    }

    fn solver(&self, stages: Vec<Stage>, seed: u64) -> SolverConfig {
        SolverConfig { stages, ils_iterations: self.ils_iterations, seed, time_limit: self.time_limit, node_limit: self.node_limit, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub p: usize,
    pub k: usize,
    pub seed: u64,
    pub greedy: f64,
    pub heuristic: f64,
    pub bnb_cold: f64,
    pub bnb_warm: f64,
    /// Best of the cold and warm search bounds.
    pub lower_bound: f64,
    pub gap_cold: f64,
    pub gap_warm: f64,
    pub nodes_cold: u64,
    pub nodes_warm: u64,
    /// Exact search stopped on its node or time budget.
    pub cold_stopped: bool,
    pub warm_stopped: bool,
    /// Heuristic improvement over greedy, percent of greedy.
    pub improvement_pct: f64,
    /// Excluded from CSV output.
    pub wall_time: f64,
}

impl BenchRow {
    /// `greedy >= heuristic >= warm >= lower bound`, with a relative slack of `tol`.
    pub fn chain_holds(&self, tol: f64) -> bool {
        let le = |a: f64, b: f64| a <= b + tol * b.abs().max(1.0);
        le(self.heuristic, self.greedy) && le(self.bnb_warm, self.heuristic) && le(self.lower_bound, self.bnb_warm)
    }
}

/// Greedy, greedy + DP + ILS, cold exact search and exact search warm-started from
/// the heuristic result on one graph.
pub fn bench_instance(graph: &MotionGraph, p: usize, k: usize, seed: u64, spec: &BenchmarkSpec) -> Result<BenchRow> {
    let t0 = web_time::Instant::now();
    let run = |stages: Vec<Stage>| -> Result<SolveReport> { Ok(solve(graph, k, &spec.solver(stages, seed))?) };
    let greedy = run(vec![Stage::Greedy])?;
    let heuristic = run(vec![Stage::Greedy, Stage::Dp, Stage::Ils])?;
    let cold = run(vec![Stage::Bnb])?;
    let bnb = BnbConfig { time_limit: Duration::from_secs_f64(spec.time_limit), node_limit: spec.node_limit };
    let warm = solve_exact_bnb(graph, k, Some(&heuristic.best), &bnb)?;
    let lower_bound = cold.lower_bound.max(warm.lower_bound);
    let improvement_pct = if greedy.objective > 0.0 { 100.0 * (greedy.objective - heuristic.objective) / greedy.objective } else { 0.0 };
    Ok(BenchRow {
        p,
        k,
        seed,
        greedy: greedy.objective,
        heuristic: heuristic.objective,
        bnb_cold: cold.objective,
        bnb_warm: warm.objective,
        lower_bound,
        gap_cold: cold.gap,
        gap_warm: warm.gap,
        nodes_cold: cold.nodes_explored,
        nodes_warm: warm.nodes_explored,
        cold_stopped: cold.timed_out,
        warm_stopped: warm.timed_out,
        improvement_pct,
        wall_time: t0.elapsed().as_secs_f64(),
    })
}

/// Generates each instance from its seed and benchmarks it; instances run in
/// parallel and rows keep [`BenchmarkSpec::instances`] order.
pub fn run_routing_benchmark(spec: &BenchmarkSpec) -> Result<Vec<BenchRow>> {
    spec.validate()?;
    let inst = spec.instances();
    crate::par::map_indices(inst.len(), |i| {
        let (p, k, seed) = inst[i];
        let scenario = generate_random_scenario(seed, p, k, &spec.generator)?;
        let graph = build_motion_graph(&scenario)?;
        bench_instance(&graph, p, k, seed, spec)
    })
    .into_iter()
    .collect()
}

pub fn write_bench_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BENCH_HEADER)?;
    for r in rows {
        w.write_record([
            r.p.to_string(),
            r.k.to_string(),
            r.seed.to_string(),
            r.greedy.to_string(),
            r.heuristic.to_string(),
            r.bnb_cold.to_string(),
            r.bnb_warm.to_string(),
            r.lower_bound.to_string(),
            r.gap_cold.to_string(),
            r.gap_warm.to_string(),
            r.nodes_cold.to_string(),
            r.nodes_warm.to_string(),
            (r.cold_stopped as u8).to_string(),
            (r.warm_stopped as u8).to_string(),
            r.improvement_pct.to_string(),
            (r.chain_holds(1e-9) as u8).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
