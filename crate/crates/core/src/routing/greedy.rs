use super::RouteSet;
use crate::scenario::MotionGraph;
use ordered_float::OrderedFloat;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Importance-to-travel-time ratio; a free edge ranks above every finite ratio.
#[inline]
pub(crate) fn ratio(graph: &MotionGraph, from: usize, to: usize) -> f64 {
    let c = graph.cost(from, to);
    if c > 0.0 {
        graph.risk(to) / c
    } else {
        f64::INFINITY
    }
}

/// Best unassigned candidate from `from`; ties go to the lowest id.
fn pick(graph: &MotionGraph, from: usize, candidates: impl Iterator<Item = usize>) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for u in candidates {
        let r = ratio(graph, from, u);
        match best {
            Some((br, bu)) if br > r || (br == r && bu < u) => {}
            _ => best = Some((r, u)),
        }
    }
    best.map(|(_, u)| u)
}

/// Greedy assignment: the agent with the least accumulated time (lowest index on
/// ties) appends the unassigned spill maximizing `R_u / c_vu` from its last vertex.
pub fn greedy_assign(graph: &MotionGraph, k: usize) -> RouteSet {
    let p = graph.spill_count();
    let mut routes = RouteSet::empty(k);
    if k == 0 {
        return routes;
    }
    let mut free = vec![true; p + 1];
    free[0] = false;
    let mut last = vec![0usize; k];
    let mut queue: BinaryHeap<Reverse<(OrderedFloat<f64>, usize)>> =
        (0..k).map(|a| Reverse((OrderedFloat(0.0), a))).collect();
    for _ in 0..p {
        let Reverse((OrderedFloat(t), a)) = queue.pop().expect("queue holds every agent");
        let u = pick(graph, last[a], (1..=p).filter(|&u| free[u])).expect("spills remain");
        free[u] = false;
        let t = t + graph.cost(last[a], u);
        last[a] = u;
        routes.routes[a].push(u);
        queue.push(Reverse((OrderedFloat(t), a)));
    }
    routes
}

/// Single-agent greedy ordering of a fixed subset.
pub fn greedy_order(graph: &MotionGraph, subset: &[usize]) -> Vec<usize> {
    let mut left: Vec<usize> = subset.to_vec();
    let mut order = Vec::with_capacity(left.len());
    let mut from = 0;
    while !left.is_empty() {
        let u = pick(graph, from, left.iter().copied()).expect("non-empty");
        left.retain(|&x| x != u);
        order.push(u);
        from = u;
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(cost: Vec<Vec<f64>>, risk: Vec<f64>) -> MotionGraph {
        MotionGraph::from_costs(cost, risk).unwrap()
    }

    #[test]
    fn picks_highest_ratio_first() {
        // A: R=10, c=5 (ratio 2); B: R=3, c=1 (ratio 3).
        let graph = g(
            vec![vec![0.0, 5.0, 1.0], vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]],
            vec![0.0, 10.0, 3.0],
        );
        assert_eq!(greedy_assign(&graph, 1).routes, vec![vec![2, 1]]);
    }

    #[test]
    fn ties_go_to_lowest_id() {
        let graph = g(
            vec![vec![0.0, 2.0, 1.0], vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]],
            vec![0.0, 2.0, 1.0],
        );
        assert_eq!(greedy_assign(&graph, 1).routes[0][0], 1);
    }

    #[test]
    fn least_loaded_agent_moves() {
        // Spill 1 is taken by agent 0 at time 4; agent 1 (time 0) then takes spill 2,
        // reaching time 6; agent 0 (time 4) takes spill 3.
        let graph = g(
            vec![
                vec![0.0, 4.0, 6.0, 9.0],
                vec![0.0, 0.0, 8.0, 8.0],
                vec![0.0, 8.0, 0.0, 1.0],
                vec![0.0, 8.0, 1.0, 0.0],
            ],
            vec![0.0, 8.0, 6.0, 1.0],
        );
        let r = greedy_assign(&graph, 2);
        assert_eq!(r.routes, vec![vec![1, 3], vec![2]]);
    }

    #[test]
    fn empty_routes_when_k_exceeds_p() {
        let graph = g(vec![vec![0.0, 1.0], vec![0.0, 0.0]], vec![0.0, 1.0]);
        let r = greedy_assign(&graph, 3);
        assert_eq!(r.routes, vec![vec![1], vec![], vec![]]);
    }
}
