use super::{Result, RouteSet, RoutingError};
use crate::scenario::MotionGraph;

/// Largest instance the exhaustive oracle accepts.
pub const BRUTE_FORCE_MAX_SPILLS: usize = 9;

struct Enum<'a> {
    g: &'a MotionGraph,
    k: usize,
    p: usize,
    routes: Vec<Vec<usize>>,
    best: f64,
    best_routes: Vec<Vec<usize>>,
}

impl Enum<'_> {
    /// Every spill sequence, split into at most `k` consecutive non-empty routes.
    fn rec(&mut self, used: u32, placed: usize, t: f64, damage: f64) {
        if placed == self.p {
            if damage < self.best {
                self.best = damage;
                self.best_routes = self.routes.clone();
            }
            return;
        }
        for u in 1..=self.p {
            if used & (1 << u) != 0 {
                continue;
            }
            let r = self.g.risk(u);
            let cur = self.routes.last().expect("one open route");
            let last = cur.last().copied().unwrap_or(0);
            let tu = t + self.g.cost(last, u);
            self.routes.last_mut().unwrap().push(u);
            self.rec(used | (1 << u), placed + 1, tu, damage + r * tu);
            self.routes.last_mut().unwrap().pop();

            if !self.routes.last().unwrap().is_empty() && self.routes.len() < self.k {
                let tu = self.g.cost(0, u);
                self.routes.push(vec![u]);
                self.rec(used | (1 << u), placed + 1, tu, damage + r * tu);
                self.routes.pop();
            }
        }
    }
}

/// Global optimum by enumerating every ordered partition of the spills into at
/// most `k` routes.
pub fn brute_force_oracle(graph: &MotionGraph, k: usize) -> Result<(RouteSet, f64)> {
    let p = graph.spill_count();
    if p > BRUTE_FORCE_MAX_SPILLS {
        return Err(RoutingError::Capacity {
            what: "brute-force oracle",
            size: p,
            cap: BRUTE_FORCE_MAX_SPILLS,
        });
    }
    if k == 0 {
        return Err(RoutingError::Config("fleet size must be at least 1".into()));
    }
    let mut e = Enum {
        g: graph,
        k,
        p,
        routes: vec![Vec::new()],
        best: f64::INFINITY,
        best_routes: Vec::new(),
    };
    e.rec(0, 0, 0.0, 0.0);
    if p == 0 {
        return Ok((RouteSet::empty(k), 0.0));
    }
    let mut routes = e.best_routes;
    routes.resize(k, Vec::new());
    Ok((RouteSet::new(routes), e.best))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_spill() {
        let g = MotionGraph::from_costs(vec![vec![0.0, 2.0], vec![0.0, 0.0]], vec![0.0, 5.0]).unwrap();
        let (r, d) = brute_force_oracle(&g, 1).unwrap();
        assert_eq!((r.routes, d), (vec![vec![1]], 10.0));
    }

    #[test]
    fn split_is_optimal() {
        let g = MotionGraph::from_costs(
            vec![vec![0.0, 1.0, 1.0], vec![0.0, 0.0, 100.0], vec![0.0, 100.0, 0.0]],
            vec![0.0, 1.0, 1.0],
        )
        .unwrap();
        let (r, d) = brute_force_oracle(&g, 2).unwrap();
        assert_eq!(d, 2.0);
        assert_eq!(r.canonical(), vec![vec![1], vec![2]]);
    }

    #[test]
    fn capacity_guard() {
        let n = 11;
        let g = MotionGraph::from_costs(vec![vec![1.0; n]; n], vec![1.0; n]).unwrap();
        assert!(matches!(brute_force_oracle(&g, 2), Err(RoutingError::Capacity { .. })));
    }
}
