//! Independent reference implementations used as test oracles. None of these call
//! into the solver code they check.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spillfleet::routing::RouteSet;
use spillfleet::scenario::{MotionGraph, OccupancyGrid};
use std::collections::{BTreeSet, BinaryHeap, HashMap};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random planar instance: Euclidean transit plus a destination-dependent service
/// time, so costs are asymmetric.
pub fn random_graph(seed: u64, p: usize) -> MotionGraph {
    let mut r = rng(seed);
    let pts: Vec<(f64, f64)> = (0..=p).map(|_| (r.random_range(0.0..100.0), r.random_range(0.0..100.0))).collect();
    let service: Vec<f64> = (0..=p).map(|_| r.random_range(0.0..30.0)).collect();
    let mut risk: Vec<f64> = (0..=p).map(|_| r.random_range(1.0..10.0)).collect();
    risk[0] = 0.0;
    let cost = (0..=p)
        .map(|i| {
            (0..=p)
                .map(|j| {
                    let d = ((pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2)).sqrt();
                    d / 2.0 + service[j]
                })
                .collect()
        })
        .collect();
    MotionGraph::from_costs(cost, risk).unwrap()
}

/// Sum of risk times prefix-sum completion time, computed spill by spill.
pub fn damage_oracle(g: &MotionGraph, routes: &RouteSet) -> f64 {
    let mut total = 0.0;
    for route in &routes.routes {
        for (pos, &s) in route.iter().enumerate() {
            let mut t = g.cost(0, route[0]);
            for w in route[..=pos].windows(2) {
                t += g.cost(w[0], w[1]);
            }
            total += g.risk(s) * t;
        }
    }
    total
}

fn seq_damage(g: &MotionGraph, seq: &[usize]) -> f64 {
    damage_oracle(g, &RouteSet::new(vec![seq.to_vec()]))
}

/// Minimum single-route damage over every permutation of `subset`.
pub fn permutation_minimum(g: &MotionGraph, subset: &[usize]) -> f64 {
    fn rec(g: &MotionGraph, rest: &mut Vec<usize>, prefix: &mut Vec<usize>, best: &mut f64) {
        if rest.is_empty() {
            *best = best.min(seq_damage(g, prefix));
            return;
        }
        for i in 0..rest.len() {
            let s = rest.remove(i);
            prefix.push(s);
            rec(g, rest, prefix, best);
            prefix.pop();
            rest.insert(i, s);
        }
    }
    if subset.is_empty() {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    rec(g, &mut subset.to_vec(), &mut Vec::new(), &mut best);
    best
}

/// Optimum over all labelled agent assignments, each route ordered optimally by
/// permutation search.
pub fn assignment_optimum(g: &MotionGraph, k: usize) -> f64 {
    let p = g.spill_count();
    let mut best = f64::INFINITY;
    let mut memo: HashMap<Vec<usize>, f64> = HashMap::new();
    let total = (k as u64).pow(p as u32);
    for code in 0..total {
        let mut c = code;
        let mut groups = vec![Vec::new(); k];
        for s in 1..=p {
            groups[(c % k as u64) as usize].push(s);
            c /= k as u64;
        }
        let mut sum = 0.0;
        for grp in &groups {
            sum += *memo.entry(grp.clone()).or_insert_with(|| permutation_minimum(g, grp));
        }
        best = best.min(sum);
    }
    best
}

/// All route sets (unordered collections of non-empty sequences) over spills
/// `1..=p` using at most `k` routes.
pub fn all_route_sets(p: usize, k: usize) -> BTreeSet<Vec<Vec<usize>>> {
    let mut out = BTreeSet::new();
    let total = (k as u64).pow(p as u32);
    for code in 0..total {
        let mut c = code;
        let mut groups = vec![Vec::new(); k];
        for s in 1..=p {
            groups[(c % k as u64) as usize].push(s);
            c /= k as u64;
        }
        let mut acc = vec![Vec::new()];
        for grp in groups.iter().filter(|g| !g.is_empty()) {
            let perms = permutations(grp);
            let mut next = Vec::new();
            for a in &acc {
                for q in &perms {
                    let mut b: Vec<Vec<usize>> = a.clone();
                    b.push(q.clone());
                    next.push(b);
                }
            }
            acc = next;
        }
        for mut rs in acc {
            rs.sort();
            out.insert(rs);
        }
    }
    out
}

pub fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut q in permutations(&rest) {
            q.insert(0, x);
            out.push(q);
        }
    }
    out
}

/// Exhaustive Dijkstra over the 8-connected grid with the same corner rule. Path
/// cost is kept as (straight, diagonal) move counts and valued as `s + d*sqrt(2)`.
pub fn dijkstra_cells(grid: &OccupancyGrid, a: (usize, usize), b: (usize, usize)) -> Option<f64> {
    use std::cmp::Reverse;
    let (w, h) = (grid.width as i64, grid.height as i64);
    let idx = |x: i64, y: i64| (y * w + x) as usize;
    let occ = |x: i64, y: i64| grid.occupied[idx(x, y)];
    let value = |c: (u32, u32)| c.0 as f64 + c.1 as f64 * std::f64::consts::SQRT_2;
    let mut best: Vec<Option<(u32, u32)>> = vec![None; (w * h) as usize];
    let mut done = vec![false; (w * h) as usize];
    let mut heap = BinaryHeap::new();
    best[idx(a.0 as i64, a.1 as i64)] = Some((0, 0));
    heap.push((Reverse(0f64.to_bits()), a.0 as i64, a.1 as i64));
    while let Some((_, x, y)) = heap.pop() {
        if done[idx(x, y)] {
            continue;
        }
        done[idx(x, y)] = true;
        let cur = best[idx(x, y)].unwrap();
        for dx in -1i64..=1 {
            for dy in -1i64..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w || ny >= h || occ(nx, ny) {
                    continue;
                }
                if dx != 0 && dy != 0 && occ(nx, y) && occ(x, ny) {
                    continue;
                }
                let cand = if dx != 0 && dy != 0 { (cur.0, cur.1 + 1) } else { (cur.0 + 1, cur.1) };
                let ni = idx(nx, ny);
                if best[ni].is_none_or(|o| value(cand) < value(o)) {
                    best[ni] = Some(cand);
                    heap.push((Reverse(value(cand).to_bits()), nx, ny));
                }
            }
        }
    }
    best[idx(b.0 as i64, b.1 as i64)].map(|c| value(c) * grid.resolution)
}

// ---------------------------------------------------------------------------
// LP text reader and exhaustive solver for small models.

#[derive(Debug, Clone)]
pub struct LpRow {
    pub name: String,
    pub terms: Vec<(f64, String)>,
    pub sense: String,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default)]
pub struct LpModel {
    pub objective: Vec<(f64, String)>,
    pub rows: Vec<LpRow>,
    pub bounds: HashMap<String, (f64, f64)>,
    pub binaries: Vec<String>,
}

fn parse_terms(tokens: &[&str]) -> Vec<(f64, String)> {
    let mut out = Vec::new();
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    for tok in tokens {
        match *tok {
            "+" => sign = 1.0,
            "-" => sign = -1.0,
            t => {
                if let Ok(c) = t.parse::<f64>() {
                    coef = Some(c);
                } else {
                    out.push((sign * coef.unwrap_or(1.0), t.to_string()));
                    sign = 1.0;
                    coef = None;
                }
            }
        }
    }
    out
}

pub fn parse_lp(text: &str) -> LpModel {
    let mut model = LpModel::default();
    let mut section = "";
    let mut statement = String::new();
    let flush = |section: &str, stmt: &mut String, model: &mut LpModel| {
        if stmt.trim().is_empty() {
            stmt.clear();
            return;
        }
        let (name, body) = match stmt.split_once(':') {
            Some((n, b)) => (n.trim().to_string(), b.to_string()),
            None => (String::new(), stmt.clone()),
        };
        let tokens: Vec<&str> = body.split_whitespace().collect();
        match section {
            "min" => model.objective = parse_terms(&tokens),
            "st" => {
                let pos = tokens.iter().position(|t| ["<=", ">=", "="].contains(t)).unwrap();
                model.rows.push(LpRow {
                    name,
                    terms: parse_terms(&tokens[..pos]),
                    sense: tokens[pos].to_string(),
                    rhs: tokens[pos + 1].parse().unwrap(),
                });
            }
            _ => {}
        }
        stmt.clear();
    };
    for raw in text.lines() {
        let line = raw.trim_end();
        if line.starts_with('\\') {
            continue;
        }
        let head = line.trim();
        let new_section = match head {
            "Minimize" => Some("min"),
            "Subject To" => Some("st"),
            "Bounds" => Some("bounds"),
            "Binaries" => Some("bin"),
            "End" => Some("end"),
            _ => None,
        };
        if let Some(s) = new_section {
            flush(section, &mut statement, &mut model);
            section = s;
            continue;
        }
        match section {
            "min" | "st" => {
                // Continuation lines are indented further than statement starts.
                if line.starts_with("   ") {
                    statement.push(' ');
                    statement.push_str(head);
                } else {
                    flush(section, &mut statement, &mut model);
                    statement.push_str(head);
                }
            }
            "bounds" => {
                let t: Vec<&str> = head.split_whitespace().collect();
                model.bounds.insert(t[2].to_string(), (t[0].parse().unwrap(), t[4].parse().unwrap()));
            }
            "bin" => model.binaries.push(head.to_string()),
            _ => {}
        }
    }
    flush(section, &mut statement, &mut model);
    model
}

/// Enumerates every binary assignment of a small LP model. Rows over binaries only
/// are checked directly; rows with two continuous variables of opposite unit
/// coefficient are difference constraints, decided by Bellman-Ford together with
/// the variable bounds. Returns `(objective, binaries set to one)` per feasible point.
pub fn enumerate_lp(model: &LpModel) -> Vec<(f64, Vec<String>)> {
    let nb = model.binaries.len();
    assert!(nb <= 24, "too many binaries to enumerate");
    let bin_index: HashMap<&str, usize> = model.binaries.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let cont: Vec<&String> = {
        let mut c: Vec<&String> = model.bounds.keys().collect();
        c.sort();
        c
    };
    let cont_index: HashMap<&str, usize> = cont.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();

    struct Pure {
        terms: Vec<(f64, usize)>,
        sense: String,
        rhs: f64,
    }
    struct Diff {
        plus: usize,
        minus: usize,
        bin: Vec<(f64, usize)>,
        rhs: f64,
    }
    let mut pure = Vec::new();
    let mut diff = Vec::new();
    for row in &model.rows {
        let mut b = Vec::new();
        let mut c = Vec::new();
        for (coef, name) in &row.terms {
            if let Some(&i) = bin_index.get(name.as_str()) {
                b.push((*coef, i));
            } else {
                c.push((*coef, cont_index[name.as_str()]));
            }
        }
        if c.is_empty() {
            pure.push(Pure {
                terms: b,
                sense: row.sense.clone(),
                rhs: row.rhs,
            });
        } else {
            assert_eq!(row.sense, "<=");
            assert_eq!(c.len(), 2);
            let (plus, minus) = if c[0].0 == 1.0 && c[1].0 == -1.0 {
                (c[0].1, c[1].1)
            } else if c[0].0 == -1.0 && c[1].0 == 1.0 {
                (c[1].1, c[0].1)
            } else {
                panic!("unsupported continuous row {}", row.name)
            };
            diff.push(Diff { plus, minus, bin: b, rhs: row.rhs });
        }
    }
    let obj: Vec<(f64, usize)> = model.objective.iter().map(|(c, n)| (*c, bin_index[n.as_str()])).collect();
    let nc = cont.len();
    let mut out = Vec::new();
    let mut x = vec![0.0; nb];
    for mask in 0u64..(1u64 << nb) {
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = ((mask >> i) & 1) as f64;
        }
        let ok = pure.iter().all(|r| {
            let lhs: f64 = r.terms.iter().map(|(c, i)| c * x[*i]).sum();
            match r.sense.as_str() {
                "<=" => lhs <= r.rhs + 1e-9,
                ">=" => lhs >= r.rhs - 1e-9,
                _ => (lhs - r.rhs).abs() <= 1e-9,
            }
        });
        if !ok {
            continue;
        }
        // Difference system: node nc is the zero reference.
        let mut edges: Vec<(usize, usize, f64)> = Vec::new();
        for d in &diff {
            let w = d.rhs - d.bin.iter().map(|(c, i)| c * x[*i]).sum::<f64>();
            edges.push((d.minus, d.plus, w));
        }
        for (i, name) in cont.iter().enumerate() {
            let (lo, hi) = model.bounds[name.as_str()];
            edges.push((nc, i, hi));
            edges.push((i, nc, -lo));
        }
        let mut dist = vec![0.0; nc + 1];
        let mut feasible = true;
        for round in 0..=nc + 1 {
            let mut changed = false;
            for &(a, b, w) in &edges {
                if dist[a] + w < dist[b] - 1e-9 {
                    dist[b] = dist[a] + w;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
            if round == nc + 1 {
                feasible = false;
            }
        }
        if feasible {
            let value = obj.iter().map(|(c, i)| c * x[*i]).sum();
            let ones = (0..nb).filter(|&i| x[i] == 1.0).map(|i| model.binaries[i].clone()).collect();
            out.push((value, ones));
        }
    }
    out
}

/// Route set encoded by the driven edges `f_i_j_j` of a feasible assignment.
pub fn decode_routes(ones: &[String]) -> Vec<Vec<usize>> {
    let mut next: HashMap<usize, Vec<usize>> = HashMap::new();
    for name in ones {
        let parts: Vec<usize> = name[2..].split('_').map(|s| s.parse().unwrap()).collect();
        if parts[1] == parts[2] {
            next.entry(parts[0]).or_default().push(parts[1]);
        }
    }
    let mut routes = Vec::new();
    for &first in next.get(&0).cloned().unwrap_or_default().iter() {
        let mut r = vec![first];
        let mut cur = first;
        while let Some(n) = next.get(&cur) {
            assert_eq!(n.len(), 1, "branching route");
            cur = n[0];
            r.push(cur);
        }
        routes.push(r);
    }
    routes.sort();
    routes
}

pub type C64 = nalgebra::Complex<f64>;

/// Roots of the monic polynomial `s^n + c[0] s^{n-1} + ... + c[n-1]` from the
/// eigenvalues of its companion matrix.
pub fn monic_roots(c: &[f64]) -> Vec<C64> {
    let n = c.len();
    let mut m = nalgebra::DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        m[(0, j)] = -c[j];
    }
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    m.complex_eigenvalues().iter().copied().collect()
}

/// Evaluates a real polynomial given highest power first.
pub fn poly_eval(p: &[f64], s: C64) -> C64 {
    p.iter().fold(C64::new(0.0, 0.0), |acc, &a| acc * s + a)
}

fn poly_derivative(p: &[f64]) -> Vec<f64> {
    let n = p.len() - 1;
    p[..n].iter().enumerate().map(|(i, a)| a * (n - i) as f64).collect()
}

/// Unit-step response of `num(s) / den(s)` (both highest power first, `den` monic,
/// distinct poles) by partial fractions.
pub fn step_response(num: &[f64], den: &[f64], t: f64) -> f64 {
    let poles = monic_roots(&den[1..]);
    let dd = poly_derivative(den);
    let zero = C64::new(0.0, 0.0);
    let mut y = poly_eval(num, zero) / poly_eval(den, zero);
    for p in poles {
        y += poly_eval(num, p) / (p * poly_eval(&dd, p)) * (p * t).exp();
    }
    y.re
}

/// Classic fixed-step RK4 over `x' = f(t, x)`.
pub fn rk4<const N: usize>(f: impl Fn(f64, &[f64; N]) -> [f64; N], x0: [f64; N], dt: f64, steps: usize) -> Vec<[f64; N]> {
    let mut out = vec![x0];
    let mut x = x0;
    let add = |x: &[f64; N], k: &[f64; N], h: f64| {
        let mut y = *x;
        for i in 0..N {
            y[i] += h * k[i];
        }
        y
    };
    for i in 0..steps {
        let t = i as f64 * dt;
        let k1 = f(t, &x);
        let k2 = f(t + dt / 2.0, &add(&x, &k1, dt / 2.0));
        let k3 = f(t + dt / 2.0, &add(&x, &k2, dt / 2.0));
        let k4 = f(t + dt, &add(&x, &k3, dt));
        for j in 0..N {
            x[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        out.push(x);
    }
    out
}
