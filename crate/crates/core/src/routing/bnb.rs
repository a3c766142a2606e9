use super::greedy::{greedy_assign, ratio};
use super::{relative_gap, total_damage, Result, RouteSet, RoutingError, SolveReport, Stage, StageRecord};
use crate::scenario::MotionGraph;
use std::time::Duration;
use web_time::Instant;

#[derive(Debug, Clone, PartialEq)]
pub struct BnbConfig {
    pub time_limit: Duration,
    /// Stop after this many nodes; gives budgets that do not depend on machine speed.
    pub node_limit: Option<u64>,
}

impl Default for BnbConfig {
    fn default() -> Self {
        Self {
            time_limit: Duration::from_secs(300),
            node_limit: None,
        }
    }
}

/// Partial multi-route state. Routes are kept in canonical form: non-empty routes
/// first, ordered by their first spill id.
#[derive(Debug, Clone)]
struct Node {
    time: Vec<f64>,
    last: Vec<usize>,
    open: Vec<bool>,
    routes: Vec<Vec<usize>>,
    free: Vec<bool>,
    n_free: usize,
    accrued: f64,
}

#[derive(Debug, Clone, Copy)]
enum Move {
    Extend(usize),
    Close,
}

struct Frame {
    node: Node,
    agent: usize,
    children: Vec<(f64, Move)>,
    next: usize,
}

struct Search<'a> {
    graph: &'a MotionGraph,
    /// Cheapest edge into each spill from any other spill.
    min_in: Vec<f64>,
}

impl<'a> Search<'a> {
    fn new(graph: &'a MotionGraph) -> Self {
        let p = graph.spill_count();
        let mut min_in = vec![f64::INFINITY; p + 1];
        for (u, m) in min_in.iter_mut().enumerate().skip(1) {
            for x in 1..=p {
                if x != u {
                    *m = m.min(graph.cost(x, u));
                }
            }
        }
        Self { graph, min_in }
    }

    fn root(&self, k: usize) -> Node {
        let p = self.graph.spill_count();
        let mut free = vec![true; p + 1];
        free[0] = false;
        Node {
            time: vec![0.0; k],
            last: vec![0; k],
            open: vec![true; k],
            routes: vec![Vec::new(); k],
            free,
            n_free: p,
            accrued: 0.0,
        }
    }

    /// Accrued damage plus, for every unassigned spill, its risk times the earliest
    /// time any open agent could complete it.
    fn bound(&self, node: &Node) -> f64 {
        let g = self.graph;
        let open: Vec<usize> = (0..node.open.len()).filter(|&a| node.open[a]).collect();
        if open.is_empty() {
            return if node.n_free == 0 { node.accrued } else { f64::INFINITY };
        }
        let t_min = open.iter().map(|&a| node.time[a]).fold(f64::INFINITY, f64::min);
        let mut rest = 0.0;
        for u in 1..node.free.len() {
            if !node.free[u] {
                continue;
            }
            let mut e = t_min + self.min_in[u];
            for &a in &open {
                e = e.min(node.time[a] + g.cost(node.last[a], u));
            }
            rest += g.risk(u) * e;
        }
        node.accrued + rest
    }

    fn min_time_open_agent(node: &Node) -> Option<usize> {
        let mut best: Option<usize> = None;
        for a in 0..node.open.len() {
            if node.open[a] && best.is_none_or(|b| node.time[a] < node.time[b]) {
                best = Some(a);
            }
        }
        best
    }

    fn may_start(node: &Node, a: usize, u: usize) -> bool {
        a == 0 || node.routes[a - 1].first().is_some_and(|&f| f < u)
    }

    fn apply(&self, node: &Node, agent: usize, mv: Move) -> Node {
        let mut child = node.clone();
        match mv {
            Move::Extend(v) => {
                let t = node.time[agent] + self.graph.cost(node.last[agent], v);
                child.time[agent] = t;
                child.last[agent] = v;
                child.routes[agent].push(v);
                child.free[v] = false;
                child.n_free -= 1;
                child.accrued += self.graph.risk(v) * t;
            }
            Move::Close => {
                child.open[agent] = false;
                if node.routes[agent].is_empty() {
                    for a in agent + 1..child.open.len() {
                        if child.routes[a].is_empty() {
                            child.open[a] = false;
                        }
                    }
                }
            }
        }
        child
    }

    /// Children of `node` for its minimum-time open agent, best-first, with bounds.
    fn expand(&self, node: &Node) -> Option<(usize, Vec<(f64, Move)>)> {
        let g = self.graph;
        let agent = Self::min_time_open_agent(node)?;
        let others: Vec<usize> = (0..node.open.len()).filter(|&a| a != agent && node.open[a]).collect();
        let t_other = others.iter().map(|&a| node.time[a]).fold(f64::INFINITY, f64::min);
        let p = node.free.len() - 1;
        let mut best_other = vec![f64::INFINITY; p + 1];
        for u in 1..=p {
            if node.free[u] {
                for &a in &others {
                    best_other[u] = best_other[u].min(node.time[a] + g.cost(node.last[a], u));
                }
            }
        }
        let from = node.last[agent];
        let starting = node.routes[agent].is_empty();
        let mut ext: Vec<(f64, usize, f64)> = Vec::new();
        for v in 1..=p {
            if !node.free[v] || (starting && !Self::may_start(node, agent, v)) {
                continue;
            }
            let tv = node.time[agent] + g.cost(from, v);
            let t_min = t_other.min(tv);
            let mut b = node.accrued + g.risk(v) * tv;
            for u in 1..=p {
                if node.free[u] && u != v {
                    let e = best_other[u].min(tv + g.cost(v, u)).min(t_min + self.min_in[u]);
                    b += g.risk(u) * e;
                }
            }
            ext.push((ratio(g, from, v), v, b));
        }
        ext.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
        let mut children: Vec<(f64, Move)> = ext.into_iter().map(|(_, v, b)| (b, Move::Extend(v))).collect();
        if node.n_free > 0 && !others.is_empty() {
            let closed = self.apply(node, agent, Move::Close);
            let b = self.bound(&closed);
            if b.is_finite() {
                children.push((b, Move::Close));
            }
        }
        Some((agent, children))
    }
}

/// Lower bound on the optimal damage before any branching.
pub(crate) fn root_lower_bound(graph: &MotionGraph, k: usize) -> f64 {
    let s = Search::new(graph);
    s.bound(&s.root(k.max(1)))
}

fn canonical_incumbent(routes: &RouteSet, k: usize, p: usize) -> Result<RouteSet> {
    routes.validate(p)?;
    let mut nonempty: Vec<Vec<usize>> = routes.routes.iter().filter(|r| !r.is_empty()).cloned().collect();
    if nonempty.len() > k {
        return Err(RoutingError::InvalidRouteSet(format!(
            "incumbent uses {} agents but the fleet has {k}",
            nonempty.len()
        )));
    }
    nonempty.sort_by_key(|r| r[0]);
    nonempty.resize(k, Vec::new());
    Ok(RouteSet::new(nonempty))
}

/// Depth-first branch-and-bound over partial route sets.
///
/// Each node extends the open agent with the least accumulated time, or closes it.
/// Agents are interchangeable, so routes are generated in order of increasing first
/// spill id. On exhaustion the result is optimal with zero gap; on hitting a budget
/// the best incumbent is returned with the least bound over unexplored subtrees.
pub fn solve_exact_bnb(graph: &MotionGraph, k: usize, incumbent: Option<&RouteSet>, config: &BnbConfig) -> Result<SolveReport> {
    if config.time_limit.is_zero() {
        return Err(RoutingError::Config("time limit must be positive".into()));
    }
    if k == 0 {
        return Err(RoutingError::Config("fleet size must be at least 1".into()));
    }
    let start = Instant::now();
    let p = graph.spill_count();
    let search = Search::new(graph);

    let mut best: Option<RouteSet> = None;
    let mut best_obj = f64::INFINITY;
    if let Some(inc) = incumbent {
        let inc = canonical_incumbent(inc, k, p)?;
        best_obj = total_damage(graph, &inc);
        best = Some(inc);
    }

    let root = search.root(k);
    let mut nodes: u64 = 1;
    let mut stack: Vec<Frame> = Vec::new();
    if root.n_free == 0 {
        best_obj = 0.0;
        best = Some(RouteSet::empty(k));
    } else if let Some((agent, children)) = search.expand(&root) {
        stack.push(Frame { node: root, agent, children, next: 0 });
    }

    let mut aborted = false;
    while let Some(frame) = stack.last_mut() {
        if frame.next == frame.children.len() {
            stack.pop();
            continue;
        }
        let (bound, mv) = frame.children[frame.next];
        if bound >= best_obj {
            frame.next += 1;
            continue;
        }
        let over_nodes = config.node_limit.is_some_and(|n| nodes >= n);
        if over_nodes || (nodes % 256 == 0 && start.elapsed() >= config.time_limit) {
            aborted = true;
            break;
        }
        frame.next += 1;
        nodes += 1;
        let child = search.apply(&frame.node, frame.agent, mv);
        if child.n_free == 0 {
            let rs = RouteSet::new(child.routes);
            let obj = total_damage(graph, &rs);
            if obj < best_obj {
                best_obj = obj;
                best = Some(rs);
            }
            continue;
        }
        if let Some((agent, children)) = search.expand(&child) {
            stack.push(Frame { node: child, agent, children, next: 0 });
        }
    }

    let mut lower_bound = best_obj;
    if aborted {
        for f in &stack {
            for &(b, _) in &f.children[f.next..] {
                lower_bound = lower_bound.min(b);
            }
        }
    }
    let best = match best {
        Some(b) => b,
        None => {
            let g = greedy_assign(graph, k);
            best_obj = total_damage(graph, &g);
            g
        }
    };
    if !aborted {
        lower_bound = best_obj;
    }
    let lower_bound = lower_bound.min(best_obj);
    let wall_time = start.elapsed().as_secs_f64();
    Ok(SolveReport {
        best,
        objective: best_obj,
        lower_bound,
        gap: relative_gap(best_obj, lower_bound),
        nodes_explored: nodes,
        wall_time,
        timed_out: aborted,
        stage_log: vec![StageRecord {
            stage: Stage::Bnb,
            objective: best_obj,
            wall_time,
        }],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> BnbConfig {
        BnbConfig {
            time_limit: Duration::from_secs(10),
            node_limit: None,
        }
    }

    #[test]
    fn single_spill() {
        let g = MotionGraph::from_costs(vec![vec![0.0, 4.0], vec![0.0, 0.0]], vec![0.0, 3.0]).unwrap();
        let r = solve_exact_bnb(&g, 1, None, &cfg()).unwrap();
        assert_eq!(r.best.routes, vec![vec![1]]);
        assert_eq!(r.objective, 12.0);
        assert_eq!(r.gap, 0.0);
    }

    #[test]
    fn split_beats_chain() {
        let g = MotionGraph::from_costs(
            vec![vec![0.0, 1.0, 1.0], vec![0.0, 0.0, 100.0], vec![0.0, 100.0, 0.0]],
            vec![0.0, 1.0, 1.0],
        )
        .unwrap();
        let r = solve_exact_bnb(&g, 2, None, &cfg()).unwrap();
        assert_eq!(r.objective, 2.0);
        assert_eq!(r.best.canonical(), vec![vec![1], vec![2]]);
    }

    #[test]
    fn zero_time_limit_rejected() {
        let g = MotionGraph::from_costs(vec![vec![0.0, 4.0], vec![0.0, 0.0]], vec![0.0, 3.0]).unwrap();
        let c = BnbConfig {
            time_limit: Duration::ZERO,
            node_limit: None,
        };
        assert!(matches!(solve_exact_bnb(&g, 1, None, &c), Err(RoutingError::Config(_))));
    }

    #[test]
    fn no_spills() {
        let g = MotionGraph::from_costs(vec![vec![0.0]], vec![0.0]).unwrap();
        let r = solve_exact_bnb(&g, 2, None, &cfg()).unwrap();
        assert_eq!(r.objective, 0.0);
        assert_eq!(r.gap, 0.0);
    }
}
