use super::{Result, RoutingError};
use crate::scenario::MotionGraph;

/// Largest subset the exact ordering accepts by default; the table holds
/// `2^n * n` entries.
pub const DEFAULT_DP_CAP: usize = 20;

/// Exact damage-minimizing order of `subset` for one agent starting at the depot.
pub fn dp_order(graph: &MotionGraph, subset: &[usize]) -> Result<Vec<usize>> {
    dp_order_with_cap(graph, subset, DEFAULT_DP_CAP)
}

/// Subset DP over `D[S, j]`: least damage serving `S` and ending at `j`, where the
/// edge into `j` delays every spill outside `S \ {j}`.
pub fn dp_order_with_cap(graph: &MotionGraph, subset: &[usize], cap: usize) -> Result<Vec<usize>> {
    let m = subset.len();
    if m > cap || m >= usize::BITS as usize - 1 {
        return Err(RoutingError::Capacity { what: "dp_order subset", size: m, cap });
    }
    if m <= 1 {
        return Ok(subset.to_vec());
    }
    let full = (1usize << m) - 1;
    let w: Vec<f64> = subset.iter().map(|&s| graph.risk(s)).collect();
    let total: f64 = w.iter().sum();
    // Weight already completed for each mask.
    let mut done = vec![0.0; full + 1];
    for mask in 1..=full {
        let low = mask.trailing_zeros() as usize;
        done[mask] = done[mask & (mask - 1)] + w[low];
    }
    // c[j * m + v]: travel time from subset[v] to subset[j].
    let c: Vec<f64> = (0..m * m).map(|i| graph.cost(subset[i % m], subset[i / m])).collect();
    let mut d = vec![f64::INFINITY; (full + 1) * m];
    let mut parent = vec![u8::MAX; (full + 1) * m];
    for j in 0..m {
        d[(1 << j) * m + j] = graph.cost(0, subset[j]) * total;
    }
    for mask in 1..=full {
        if mask.count_ones() < 2 {
            continue;
        }
        let mut bits = mask;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let prev = mask ^ (1 << j);
            let pending = total - done[prev];
            let row = &d[prev * m..prev * m + m];
            let cj = &c[j * m..j * m + m];
            let mut best = f64::INFINITY;
            let mut arg = u8::MAX;
            let mut vs = prev;
            while vs != 0 {
                let v = vs.trailing_zeros() as usize;
                vs &= vs - 1;
                let cand = row[v] + cj[v] * pending;
                if cand < best {
                    best = cand;
                    arg = v as u8;
                }
            }
            d[mask * m + j] = best;
            parent[mask * m + j] = arg;
        }
    }
    let mut end = 0;
    for j in 1..m {
        if d[full * m + j] < d[full * m + end] {
            end = j;
        }
    }
    let mut order = Vec::with_capacity(m);
    let mut mask = full;
    let mut j = end;
    loop {
        order.push(subset[j]);
        let pj = parent[mask * m + j];
        mask ^= 1 << j;
        if pj == u8::MAX {
            break;
        }
        j = pj as usize;
    }
    order.reverse();
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::routing::route_damage;

    #[test]
    fn singleton() {
        let g = MotionGraph::from_costs(vec![vec![0.0, 3.0], vec![0.0, 0.0]], vec![0.0, 2.0]).unwrap();
        assert_eq!(dp_order(&g, &[1]).unwrap(), vec![1]);
    }

    #[test]
    fn heavy_spill_first() {
        let g = MotionGraph::from_costs(
            vec![vec![0.0, 1.0, 1.0], vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]],
            vec![0.0, 10.0, 1.0],
        )
        .unwrap();
        let order = dp_order(&g, &[1, 2]).unwrap();
        assert_eq!(order, vec![1, 2]);
        assert_eq!(route_damage(&g, &order), 12.0);
    }

    #[test]
    fn capacity_error_names_cap() {
        let n = 4;
        let cost = vec![vec![1.0; n]; n];
        let g = MotionGraph::from_costs(cost, vec![1.0; n]).unwrap();
        match dp_order_with_cap(&g, &[1, 2, 3], 2) {
            Err(RoutingError::Capacity { cap: 2, size: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
