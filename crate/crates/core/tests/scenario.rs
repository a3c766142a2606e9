mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use spillfleet::geometry::Vec2;
use spillfleet::scenario::*;

fn random_grid(seed: u64, n: usize, fill: f64) -> OccupancyGrid {
    let mut r = rng(seed);
    let mut g = OccupancyGrid::empty(n, n, Vec2::zeros(), 1.0);
    for iy in 0..n {
        for ix in 0..n {
            g.set_occupied(ix, iy, r.random_bool(fill));
        }
    }
    g
}

fn random_free_point(g: &OccupancyGrid, r: &mut impl Rng) -> Option<Vec2> {
    for _ in 0..1000 {
        let ix = r.random_range(0..g.width);
        let iy = r.random_range(0..g.height);
        if !g.is_occupied(ix, iy) {
            return Some(g.cell_center(ix, iy));
        }
    }
    None
}

#[test]
fn astar_equals_dijkstra_on_random_grids() {
    let mut checked = 0;
    for seed in 0..200u64 {
        let g = random_grid(seed, 12 + (seed as usize % 20), 0.1 + 0.3 * (seed % 5) as f64 / 4.0);
        let mut r = rng(seed ^ 0xabc);
        let (Some(a), Some(b)) = (random_free_point(&g, &mut r), random_free_point(&g, &mut r)) else {
            continue;
        };
        let oracle = dijkstra_cells(&g, g.cell_of(&a).unwrap(), g.cell_of(&b).unwrap());
        match (shortest_path_length(&g, a, b), oracle) {
            (Ok(l), Some(o)) => assert_eq!(l, o, "seed {seed}"),
            (Err(ScenarioError::Unreachable { .. }), None) => {}
            (got, want) => panic!("seed {seed}: {got:?} vs {want:?}"),
        }
        checked += 1;
    }
    assert_eq!(checked, 200);
}

#[test]
fn wall_with_gap_matches_dijkstra() {
    let mut g = OccupancyGrid::empty(20, 20, Vec2::zeros(), 1.0);
    for y in 0..20 {
        if y != 15 {
            g.set_occupied(10, y, true);
        }
    }
    let a = Vec2::new(5.5, 5.5);
    let b = Vec2::new(15.5, 5.5);
    let l = shortest_path_length(&g, a, b).unwrap();
    assert_eq!(Some(l), dijkstra_cells(&g, (5, 5), (15, 5)));
    assert!(l > 10.0);
}

#[test]
fn removing_an_obstacle_never_lengthens_paths() {
    for seed in 0..30u64 {
        let g = random_grid(seed, 16, 0.3);
        let mut r = rng(seed + 7);
        let (Some(a), Some(b)) = (random_free_point(&g, &mut r), random_free_point(&g, &mut r)) else {
            continue;
        };
        let mut relaxed = g.clone();
        for _ in 0..5 {
            let (x, y) = (r.random_range(0..16), r.random_range(0..16));
            relaxed.set_occupied(x, y, false);
        }
        if let Ok(before) = shortest_path_length(&g, a, b) {
            assert!(shortest_path_length(&relaxed, a, b).unwrap() <= before);
        }
    }
}

#[test]
fn motion_graph_terms_recomputed_independently() {
    let spills = vec![
        Spill { id: 1, centroid: Vec2::new(20.5, 30.5), volume: 3.0, perimeter: 12.0, risk: 2.0 },
        Spill { id: 2, centroid: Vec2::new(70.5, 10.5), volume: 1.5, perimeter: 7.0, risk: 5.0 },
        Spill { id: 3, centroid: Vec2::new(50.5, 80.5), volume: 0.0, perimeter: 3.0, risk: 1.0 },
    ];
    let sc = Scenario {
        workspace: Workspace::new(Bounds::new(0.0, 0.0, 100.0, 100.0), vec![], 1.0),
        depot: Vec2::new(0.5, 0.5),
        spills: spills.clone(),
        fleet_size: 2,
        v_transit: 2.0,
        v_encircle: 0.5,
        alpha_clean: 4.0,
        boom_length: 40.0,
        rng_seed: 0,
    };
    let g = build_motion_graph(&sc).unwrap();
    let pos: Vec<Vec2> = std::iter::once(sc.depot).chain(spills.iter().map(|s| s.centroid)).collect();
    for i in 0..=3 {
        for j in 1..=3 {
            if i == j {
                continue;
            }
            // Obstacle-free octile distance between cell centers.
            let dx = (pos[i].x - pos[j].x).abs().round();
            let dy = (pos[i].y - pos[j].y).abs().round();
            let d = (dx.max(dy) - dx.min(dy)) + dx.min(dy) * std::f64::consts::SQRT_2;
            let s = &spills[j - 1];
            let c = d / 2.0 + s.perimeter / 0.5 + 4.0 * s.volume;
            assert!((g.cost(i, j) - c).abs() < 1e-9, "({i},{j})");
        }
    }
    assert!(g.cost(1, 0).is_infinite());
}

#[test]
fn free_travel_costs_are_proportional_to_distance() {
    let mut sc = generate_random_scenario(4, 5, 1, &GeneratorParams { obstacle_coverage: 0.0, ..Default::default() }).unwrap();
    sc.v_encircle = f64::MAX;
    sc.alpha_clean = 0.0;
    let (g, transit, _) = build_motion_graph_with_transit(&sc).unwrap();
    for i in 0..=5 {
        for j in 1..=5 {
            if i != j {
                assert!((g.cost(i, j) - transit.distance(i, j) / sc.v_transit).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn generated_spills_lie_in_free_cells() {
    let params = GeneratorParams { obstacle_coverage: 0.2, ..Default::default() };
    let sc = generate_random_scenario(99, 50, 3, &params).unwrap();
    assert_eq!(sc.spills.len(), 50);
    let grid = rasterize(&sc.workspace).unwrap();
    assert!(grid.occupied_count() as f64 >= 0.2 * (grid.width * grid.height) as f64);
    for s in &sc.spills {
        assert!(grid.is_free_point(&s.centroid).unwrap());
    }
    build_motion_graph(&sc).unwrap();
}

#[test]
fn scenario_json_round_trip() {
    let sc = generate_random_scenario(5, 8, 2, &GeneratorParams::default()).unwrap();
    let text = sc.to_json_string().unwrap();
    assert_eq!(Scenario::from_json_str(&text).unwrap(), sc);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn path_length_is_symmetric_and_metric(seed in 0u64..100_000) {
        let g = random_grid(seed, 14, 0.25);
        let mut r = rng(seed);
        let pts: Vec<Vec2> = (0..3).filter_map(|_| random_free_point(&g, &mut r)).collect();
        prop_assume!(pts.len() == 3);
        let d = |a: Vec2, b: Vec2| shortest_path_length(&g, a, b).ok();
        if let (Some(ab), Some(ba)) = (d(pts[0], pts[1]), d(pts[1], pts[0])) {
            prop_assert_eq!(ab, ba);
        }
        if let (Some(ac), Some(ab), Some(bc)) = (d(pts[0], pts[2]), d(pts[0], pts[1]), d(pts[1], pts[2])) {
            prop_assert!(ac <= ab + bc + 1e-9);
        }
    }
}
