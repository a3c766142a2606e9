use super::{OccupancyGrid, Result, ScenarioError};
use crate::geometry::{Polyline, Vec2};
use ordered_float::OrderedFloat;
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::f64::consts::SQRT_2;

const MOVES: [(i32, i32); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];

/// Result of a grid search between two points.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPath {
    /// Path length in meters between the start and goal cell centers.
    pub length: f64,
    pub straight_moves: u32,
    pub diagonal_moves: u32,
    /// Visited cells from start to goal, inclusive.
    pub cells: Vec<(usize, usize)>,
}

impl GridPath {
    /// Cell-center polyline with the exact endpoints substituted at both ends.
    pub fn polyline(&self, grid: &OccupancyGrid, a: Vec2, b: Vec2) -> Polyline {
        let mut pts: Vec<Vec2> = self.cells.iter().map(|&(x, y)| grid.cell_center(x, y)).collect();
        if pts.len() <= 1 {
            return Polyline::new(if (a - b).norm() > 0.0 { vec![a, b] } else { vec![a] });
        }
        pts[0] = a;
        let last = pts.len() - 1;
        pts[last] = b;
        Polyline::new(pts)
    }
}

/// Path cost as (straight, diagonal) move counts; comparing the derived length
/// keeps equal-length paths bit-identical regardless of expansion order.
#[inline]
fn cost_of(straight: u32, diagonal: u32) -> f64 {
    straight as f64 + diagonal as f64 * SQRT_2
}

#[inline]
fn octile(ax: usize, ay: usize, bx: usize, by: usize) -> f64 {
    let dx = ax.abs_diff(bx) as f64;
    let dy = ay.abs_diff(by) as f64;
    (dx.max(dy) - dx.min(dy)) + dx.min(dy) * SQRT_2
}

fn free_cell(grid: &OccupancyGrid, p: &Vec2) -> Result<(usize, usize)> {
    let (ix, iy) = grid.cell_of(p).ok_or(ScenarioError::OutsideWorkspace { x: p.x, y: p.y })?;
    if grid.is_occupied(ix, iy) {
        return Err(ScenarioError::PointInObstacle { x: p.x, y: p.y });
    }
    Ok((ix, iy))
}

/// Neighbor step from `(x, y)` by `(dx, dy)` if it lands on a free cell and does not
/// squeeze diagonally between two occupied orthogonal neighbors.
#[inline]
pub(crate) fn step(grid: &OccupancyGrid, x: usize, y: usize, dx: i32, dy: i32) -> Option<(usize, usize)> {
    let nx = x as i64 + dx as i64;
    let ny = y as i64 + dy as i64;
    if nx < 0 || ny < 0 || nx >= grid.width as i64 || ny >= grid.height as i64 {
        return None;
    }
    let (nx, ny) = (nx as usize, ny as usize);
    if grid.is_occupied(nx, ny) {
        return None;
    }
    if dx != 0 && dy != 0 && grid.is_occupied(nx, y) && grid.is_occupied(x, ny) {
        return None;
    }
    Some((nx, ny))
}

/// 8-connected A* with the octile heuristic between the cells containing `a` and `b`.
pub fn shortest_path(grid: &OccupancyGrid, a: Vec2, b: Vec2) -> Result<GridPath> {
    let start = free_cell(grid, &a)?;
    let goal = free_cell(grid, &b)?;
    let res = grid.resolution;
    if start == goal {
        return Ok(GridPath {
            length: 0.0,
            straight_moves: 0,
            diagonal_moves: 0,
            cells: vec![start],
        });
    }

    let n = grid.width * grid.height;
    let mut g: Vec<(u32, u32)> = vec![(u32::MAX, u32::MAX); n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();

    let si = grid.index(start.0, start.1);
    g[si] = (0, 0);
    open.push((Reverse(OrderedFloat(octile(start.0, start.1, goal.0, goal.1))), Reverse(si)));

    while let Some((_, Reverse(ci))) = open.pop() {
        if closed[ci] {
            continue;
        }
        closed[ci] = true;
        let (cx, cy) = (ci % grid.width, ci / grid.width);
        if (cx, cy) == goal {
            let (s, d) = g[ci];
            let mut cells = vec![(cx, cy)];
            let mut cur = ci;
            while parent[cur] != usize::MAX {
                cur = parent[cur];
                cells.push((cur % grid.width, cur / grid.width));
            }
            cells.reverse();
            return Ok(GridPath {
                length: cost_of(s, d) * res,
                straight_moves: s,
                diagonal_moves: d,
                cells,
            });
        }
        let (cs, cd) = g[ci];
        for &(dx, dy) in &MOVES {
            let Some((nx, ny)) = step(grid, cx, cy, dx, dy) else { continue };
            let ni = grid.index(nx, ny);
            if closed[ni] {
                continue;
            }
            let cand = if dx != 0 && dy != 0 { (cs, cd + 1) } else { (cs + 1, cd) };
            let cand_cost = cost_of(cand.0, cand.1);
            if g[ni].0 == u32::MAX || cand_cost < cost_of(g[ni].0, g[ni].1) {
                g[ni] = cand;
                parent[ni] = ci;
                let f = cand_cost + octile(nx, ny, goal.0, goal.1);
                open.push((Reverse(OrderedFloat(f)), Reverse(ni)));
            }
        }
    }
    Err(ScenarioError::Unreachable {
        ax: a.x,
        ay: a.y,
        bx: b.x,
        by: b.y,
    })
}

/// Length in meters of the shortest 8-connected grid path between two free points.
pub fn shortest_path_length(grid: &OccupancyGrid, a: Vec2, b: Vec2) -> Result<f64> {
    shortest_path(grid, a, b).map(|p| p.length)
}

/// Cells reachable from `start` under the same move rules as the search.
pub(crate) fn reachable_from(grid: &OccupancyGrid, start: (usize, usize)) -> Vec<bool> {
    let mut seen = vec![false; grid.width * grid.height];
    if grid.is_occupied(start.0, start.1) {
        return seen;
    }
    let mut stack = vec![start];
    seen[grid.index(start.0, start.1)] = true;
    while let Some((x, y)) = stack.pop() {
        for &(dx, dy) in &MOVES {
            if let Some((nx, ny)) = step(grid, x, y, dx, dy) {
                let i = grid.index(nx, ny);
                if !seen[i] {
                    seen[i] = true;
                    stack.push((nx, ny));
                }
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{rasterize, Bounds, Polygon, Workspace};

    fn open_grid(n: usize) -> OccupancyGrid {
        OccupancyGrid::empty(n, n, Vec2::zeros(), 1.0)
    }

    #[test]
    fn identity_is_zero() {
        let g = open_grid(10);
        assert_eq!(shortest_path_length(&g, Vec2::new(3.2, 4.1), Vec2::new(3.7, 4.9)).unwrap(), 0.0);
    }

    #[test]
    fn straight_line() {
        let g = open_grid(10);
        assert_eq!(shortest_path_length(&g, Vec2::new(0.0, 0.0), Vec2::new(0.0, 5.0)).unwrap(), 5.0);
    }

    #[test]
    fn diagonal_cost() {
        let g = open_grid(10);
        let l = shortest_path_length(&g, Vec2::new(0.5, 0.5), Vec2::new(3.5, 3.5)).unwrap();
        assert_eq!(l, 3.0 * SQRT_2);
    }

    #[test]
    fn occupied_endpoint_and_unreachable_are_distinct() {
        let ws = Workspace::new(
            Bounds::new(0.0, 0.0, 10.0, 10.0),
            vec![Polygon::rectangle(4.0, 0.0, 5.0, 10.0)],
            1.0,
        );
        let g = rasterize(&ws).unwrap();
        assert!(matches!(
            shortest_path_length(&g, Vec2::new(4.5, 4.5), Vec2::new(1.0, 1.0)),
            Err(ScenarioError::PointInObstacle { .. })
        ));
        assert!(matches!(
            shortest_path_length(&g, Vec2::new(1.0, 1.0), Vec2::new(8.0, 8.0)),
            Err(ScenarioError::Unreachable { .. })
        ));
    }

    #[test]
    fn no_corner_cutting_between_two_blocks() {
        // Two blocks touching at a corner: the diagonal through the corner is forbidden.
        let mut g = open_grid(2);
        g.set_occupied(1, 0, true);
        g.set_occupied(0, 1, true);
        assert!(matches!(
            shortest_path_length(&g, Vec2::new(0.5, 0.5), Vec2::new(1.5, 1.5)),
            Err(ScenarioError::Unreachable { .. })
        ));
        // With one side open the diagonal is allowed.
        g.set_occupied(0, 1, false);
        assert_eq!(shortest_path_length(&g, Vec2::new(0.5, 0.5), Vec2::new(1.5, 1.5)).unwrap(), SQRT_2);
    }
}
