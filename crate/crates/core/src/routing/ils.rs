use super::{dp_order_with_cap, greedy_order, route_damage, RouteSet};
use crate::scenario::MotionGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn reorder(graph: &MotionGraph, subset: &[usize], dp_cap: usize) -> Vec<usize> {
    if subset.len() <= dp_cap {
        dp_order_with_cap(graph, subset, dp_cap).expect("size checked against cap")
    } else {
        greedy_order(graph, subset)
    }
}

/// Iterated local search over cross-route swaps. Each iteration draws two distinct
/// spills, exchanges their agents, reorders both routes and keeps the move only on
/// strict improvement. The result is never worse than `initial`.
pub fn ils_refine(graph: &MotionGraph, initial: &RouteSet, iterations: usize, seed: u64, dp_cap: usize) -> RouteSet {
    ils_refine_with_trace(graph, initial, iterations, seed, dp_cap).0
}

/// Same as [`ils_refine`], also returning the incumbent objective after every iteration.
pub fn ils_refine_with_trace(
    graph: &MotionGraph,
    initial: &RouteSet,
    iterations: usize,
    seed: u64,
    dp_cap: usize,
) -> (RouteSet, Vec<f64>) {
    let p = graph.spill_count();
    let mut best = initial.clone();
    let mut route_cost: Vec<f64> = best.routes.iter().map(|r| route_damage(graph, r)).collect();
    let mut trace = Vec::with_capacity(iterations);
    if best.agent_count() < 2 || p < 2 {
        trace.resize(iterations, route_cost.iter().sum());
        return (best, trace);
    }
    let mut owner = best.assignment(p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..iterations {
        let a = rng.random_range(1..=p);
        let mut b = rng.random_range(1..p);
        if b >= a {
            b += 1;
        }
        let (ra, rb) = (owner[a], owner[b]);
        if ra != rb {
            let new_a: Vec<usize> = best.routes[ra].iter().map(|&s| if s == a { b } else { s }).collect();
            let new_b: Vec<usize> = best.routes[rb].iter().map(|&s| if s == b { a } else { s }).collect();
            let new_a = reorder(graph, &new_a, dp_cap);
            let new_b = reorder(graph, &new_b, dp_cap);
            let (ca, cb) = (route_damage(graph, &new_a), route_damage(graph, &new_b));
            if ca + cb < route_cost[ra] + route_cost[rb] {
                best.routes[ra] = new_a;
                best.routes[rb] = new_b;
                route_cost[ra] = ca;
                route_cost[rb] = cb;
                owner[a] = rb;
                owner[b] = ra;
            }
        }
        trace.push(route_cost.iter().sum());
    }
    (best, trace)
}
