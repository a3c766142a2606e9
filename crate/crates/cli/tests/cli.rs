use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_spillfleet");

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(BIN).arg("--out").arg(out).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

/// Every CSV in `dir`, by file name.
fn csvs(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}

fn header(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap().lines().next().unwrap().to_string()
}

/// Runs `args` in two fresh directories and checks identical CSV output.
fn twice(args: &[&str]) -> (tempfile::TempDir, i32) {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (oa, ob) = (run(a.path(), args), run(b.path(), args));
    assert_eq!(code(&oa), code(&ob));
    let (ca, cb) = (csvs(a.path()), csvs(b.path()));
    assert!(!ca.is_empty(), "{args:?} wrote no CSV; stderr: {}", String::from_utf8_lossy(&oa.stderr));
    assert_eq!(ca, cb, "{args:?} is not reproducible");
    (a, code(&oa))
}

fn small_world(dir: &Path) -> String {
    let path = dir.join("config.json");
    std::fs::write(
        &path,
        r#"{"generator": {"bounds": {"min": [0.0, 0.0], "max": [300.0, 300.0]}, "depot": [20.0, 20.0], "obstacle_coverage": 0.0}}"#,
    )
    .unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn scenario_gen_writes_json_csv_and_pgm() {
    let (dir, c) = twice(&["--seed", "4", "scenario", "gen", "--spills", "5", "--agents", "2"]);
    assert_eq!(c, 0);
    assert_eq!(header(dir.path(), "spills.csv"), "id,x,y,volume,perimeter,risk");
    let pgm = std::fs::read(dir.path().join("grid.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n"));
    let json = std::fs::read_to_string(dir.path().join("scenario.json")).unwrap();
    assert!(json.contains("\"spills\""));
}

#[test]
fn solve_shorthand_and_route_solve_agree() {
    let scen = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(scen.path(), &["--seed", "1", "scenario", "gen", "--spills", "6", "--agents", "2"])), 0);
    let file = scen.path().join("scenario.json");
    let file = file.to_str().unwrap();
    let (a, c) = twice(&["solve", "--scenario", file, "--agents", "2", "--time-limit", "30", "--stages", "greedy,dp,ils,bnb", "--lp"]);
    assert_eq!(c, 0);
    let (b, _) = twice(&["route", "solve", "--scenario", file, "--agents", "2", "--time-limit", "30", "--stages", "greedy,dp,ils,bnb"]);
    assert_eq!(std::fs::read(a.path().join("routes.csv")).unwrap(), std::fs::read(b.path().join("routes.csv")).unwrap());
    assert_eq!(header(a.path(), "routes.csv"), "agent,position,spill,completion,risk");
    assert_eq!(header(a.path(), "stages.csv"), "stage,objective");
    let lp = std::fs::read_to_string(a.path().join("model.lp")).unwrap();
    for section in ["Minimize", "Subject To", "Bounds", "Binaries", "End"] {
        assert!(lp.contains(section), "missing {section}");
    }
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(a.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["gap"].as_f64(), Some(0.0));
}

#[test]
fn solve_budget_hit_is_flagged_incomplete() {
    let scen = tempfile::tempdir().unwrap();
    run(scen.path(), &["--seed", "2", "scenario", "gen", "--spills", "8", "--agents", "2"]);
    let file = scen.path().join("scenario.json");
    let (_, c) = twice(&["solve", "--scenario", file.to_str().unwrap(), "--stages", "bnb", "--node-limit", "3"]);
    assert_eq!(c, 2);
}

#[test]
fn bench_writes_table_and_plots() {
    let (dir, c) = twice(&["route", "bench", "--p", "5", "--k", "1,2", "--instances", "2", "--plot"]);
    assert_eq!(c, 0);
    assert!(header(dir.path(), "bench.csv").starts_with("p,k,seed,greedy,heuristic,bnb_cold,bnb_warm,lower_bound"));
    assert!(std::fs::read_to_string(dir.path().join("objective_vs_agents.svg")).unwrap().starts_with("<svg"));
    assert!(std::fs::read_to_string(dir.path().join("objective_vs_agents.tsv")).unwrap().contains("# p=5 greedy"));
}

#[test]
fn track_run_reports_and_flags_cap() {
    let (dir, c) = twice(&["track", "run", "--rho", "15", "--v-ref", "5", "--controller", "pid", "--trajectory"]);
    assert_eq!(c, 0);
    assert_eq!(header(dir.path(), "errors.csv"), "t,cross_track_1,heading_err_1,cross_track_2,heading_err_2,u_1,u_2");
    assert!(header(dir.path(), "trajectory.csv").starts_with("t,x_1,y_1,theta_1"));
    let (_, c) = twice(&["track", "run", "--cap", "3"]);
    assert_eq!(c, 2);
}

#[test]
fn track_sweep_writes_maps_and_heatmaps() {
    let (dir, c) = twice(&["track", "sweep", "--n-rho", "2", "--n-v", "1", "--controllers", "pid", "--plot"]);
    assert_eq!(c, 0);
    assert_eq!(std::fs::read_to_string(dir.path().join("sweep_pid.csv")).unwrap().lines().count(), 3);
    for m in ["cross_track", "heading"] {
        assert!(dir.path().join(format!("heatmap_pid_{m}.tsv")).exists());
        assert!(std::fs::read_to_string(dir.path().join(format!("heatmap_pid_{m}.svg"))).unwrap().contains("<rect"));
    }
}

#[test]
fn mission_run_completes_reproducibly() {
    let cfg_dir = tempfile::tempdir().unwrap();
    let cfg = small_world(cfg_dir.path());
    let (dir, c) = twice(&["--config", &cfg, "--seed", "1", "mission", "run", "--spills", "2", "--agents", "1", "--trajectory"]);
    assert_eq!(c, 0);
    assert_eq!(header(dir.path(), "mission.csv"), "duo,spill,planned_completion,realized_completion,risk,transit_length,encircle_radius,completed");
    assert_eq!(std::fs::read_to_string(dir.path().join("mission.csv")).unwrap().lines().count(), 3);
    assert!(dir.path().join("trajectory_duo1.csv").exists());
}

#[test]
fn errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["solve", "--scenario", "/nonexistent/scenario.json"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/scenario.json"));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"unknown": 1}"#).unwrap();
    assert_eq!(code(&run(dir.path(), &["--config", bad.to_str().unwrap(), "track", "run"])), 1);
    assert_eq!(code(&run(dir.path(), &["track", "run", "--rho=-1"])), 1);
    assert_eq!(code(&run(dir.path(), &["track", "run", "--no-such-flag"])), 1);
    assert_eq!(code(&run(dir.path(), &["--help"])), 0);
}
