use super::{Polygon, Result, ScenarioError, Workspace};
use crate::geometry::Vec2;
use std::io::Write;

/// Row-major occupancy grid; cell `(ix, iy)` covers
/// `[origin.x + ix*res, origin.x + (ix+1)*res] x [origin.y + iy*res, ...]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    pub width: usize,
    pub height: usize,
    pub origin: Vec2,
    pub resolution: f64,
    pub occupied: Vec<bool>,
}

impl OccupancyGrid {
    pub fn empty(width: usize, height: usize, origin: Vec2, resolution: f64) -> Self {
        Self {
            width,
            height,
            origin,
            resolution,
            occupied: vec![false; width * height],
        }
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.width + ix
    }

    #[inline]
    pub fn is_occupied(&self, ix: usize, iy: usize) -> bool {
        self.occupied[self.index(ix, iy)]
    }

    pub fn set_occupied(&mut self, ix: usize, iy: usize, value: bool) {
        let i = self.index(ix, iy);
        self.occupied[i] = value;
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied.iter().filter(|&&o| o).count()
    }

    /// Cell containing `p`. Points on the upper bounds map into the last row/column.
    pub fn cell_of(&self, p: &Vec2) -> Option<(usize, usize)> {
        let fx = (p.x - self.origin.x) / self.resolution;
        let fy = (p.y - self.origin.y) / self.resolution;
        if !(fx >= 0.0 && fy >= 0.0) || !fx.is_finite() || !fy.is_finite() {
            return None;
        }
        let ix = fx.floor() as usize;
        let iy = fy.floor() as usize;
        let ix = if ix == self.width && fx == self.width as f64 { ix - 1 } else { ix };
        let iy = if iy == self.height && fy == self.height as f64 { iy - 1 } else { iy };
        (ix < self.width && iy < self.height).then_some((ix, iy))
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> Vec2 {
        Vec2::new(
            self.origin.x + (ix as f64 + 0.5) * self.resolution,
            self.origin.y + (iy as f64 + 0.5) * self.resolution,
        )
    }

    /// Free-space lookup for an arbitrary point; `Err` when outside the grid.
    pub fn is_free_point(&self, p: &Vec2) -> Result<bool> {
        let (ix, iy) = self.cell_of(p).ok_or(ScenarioError::OutsideWorkspace { x: p.x, y: p.y })?;
        Ok(!self.is_occupied(ix, iy))
    }

    /// Marks every cell whose interior overlaps the polygon's interior.
    pub fn stamp_polygon(&mut self, poly: &Polygon) {
        let bb = poly.bounding_box();
        let Some((lo_x, hi_x)) = self.index_span(bb.min.x, bb.max.x, self.origin.x, self.width) else {
            return;
        };
        let Some((lo_y, hi_y)) = self.index_span(bb.min.y, bb.max.y, self.origin.y, self.height) else {
            return;
        };
        let res = self.resolution;
        for iy in lo_y..=hi_y {
            for ix in lo_x..=hi_x {
                if self.is_occupied(ix, iy) {
                    continue;
                }
                let x0 = self.origin.x + ix as f64 * res;
                let y0 = self.origin.y + iy as f64 * res;
                if polygon_overlaps_open_cell(poly, x0, y0, x0 + res, y0 + res) {
                    self.set_occupied(ix, iy, true);
                }
            }
        }
    }

    /// Inclusive range of cell indices along one axis touched by `[lo, hi]`.
    fn index_span(&self, lo: f64, hi: f64, origin: f64, n: usize) -> Option<(usize, usize)> {
        let a = ((lo - origin) / self.resolution).floor();
        let b = ((hi - origin) / self.resolution).floor();
        if b < 0.0 || a >= n as f64 {
            return None;
        }
        Some((a.max(0.0) as usize, (b as usize).min(n - 1)))
    }

    /// Binary PGM (P5) image, top row = highest y; occupied = 0, free = 255.
    pub fn write_pgm<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "P5\n{} {}\n255\n", self.width, self.height)?;
        let mut row = vec![0u8; self.width];
        for iy in (0..self.height).rev() {
            for (ix, px) in row.iter_mut().enumerate() {
                *px = if self.is_occupied(ix, iy) { 0 } else { 255 };
            }
            out.write_all(&row)?;
        }
        Ok(())
    }
}

/// Conservative rasterization: any positive-area overlap with an obstacle marks the cell.
pub fn rasterize(workspace: &Workspace) -> Result<OccupancyGrid> {
    workspace.validate()?;
    let b = workspace.bounds;
    let res = workspace.grid_resolution;
    let width = ((b.width() / res) - 1e-9).ceil().max(1.0) as usize;
    let height = ((b.height() / res) - 1e-9).ceil().max(1.0) as usize;
    let mut grid = OccupancyGrid::empty(width, height, b.min, res);
    for poly in &workspace.obstacles {
        grid.stamp_polygon(poly);
    }
    Ok(grid)
}

/// Does the polygon's interior intersect the open rectangle `(x0,x1) x (y0,y1)`?
fn polygon_overlaps_open_cell(poly: &Polygon, x0: f64, y0: f64, x1: f64, y1: f64) -> bool {
    for (a, b) in poly.edges() {
        if let Some((p, q)) = clip_segment(a, b, x0, y0, x1, y1) {
            if (q - p).norm_squared() > 0.0 {
                let mid = (p + q) * 0.5;
                if mid.x > x0 && mid.x < x1 && mid.y > y0 && mid.y < y1 {
                    return true;
                }
            }
        }
    }
    // No edge crosses the cell interior, so the cell is entirely inside or outside.
    poly.contains(&Vec2::new(0.5 * (x0 + x1), 0.5 * (y0 + y1)))
}

/// Liang-Barsky clip of segment `ab` to the closed rectangle.
fn clip_segment(a: Vec2, b: Vec2, x0: f64, y0: f64, x1: f64, y1: f64) -> Option<(Vec2, Vec2)> {
    let d = b - a;
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    let checks = [(-d.x, a.x - x0), (d.x, x1 - a.x), (-d.y, a.y - y0), (d.y, y1 - a.y)];
    for (p, q) in checks {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
            if t0 > t1 {
                return None;
            }
        }
    }
    Some((a + d * t0, a + d * t1))
}
