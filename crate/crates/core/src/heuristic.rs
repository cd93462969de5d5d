//! Cost-to-go estimates: straight-line distance and a grid shortest-path
//! field computed over the static map only.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::geometry::{Point2, VehicleState};
use crate::world::StaticMap;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HeuristicError {
    #[error("goal cell at ({x:.2}, {y:.2}) is blocked by static obstacles")]
    GoalBlocked { x: f64, y: f64 },
    #[error("goal ({x:.2}, {y:.2}) lies outside the map")]
    GoalOutside { x: f64, y: f64 },
}

/// Free/blocked classification of grid cells. Shared by every field built on
/// the same map.
#[derive(Debug, Clone)]
pub struct FreeGrid {
    pub resolution: f64,
    /// Center of cell (0, 0).
    pub origin: Point2,
    pub cols: usize,
    pub rows: usize,
    pub clearance_radius: f64,
    free: Vec<bool>,
}

impl FreeGrid {
    /// A cell is free iff its center is farther than `clearance_radius` from
    /// every static point.
    pub fn new(map: &StaticMap, resolution: f64, clearance_radius: f64) -> Self {
        let b = map.bounds();
        let cols = (b.width() / resolution).floor() as usize + 1;
        let rows = (b.height() / resolution).floor() as usize + 1;
        let origin = Point2::new(b.min_x, b.min_y);
        let mut free = vec![true; cols * rows];
        for r in 0..rows {
            for c in 0..cols {
                let center = Point2::new(origin.x + c as f64 * resolution, origin.y + r as f64 * resolution);
                let blocked = !map.for_each_near(&center, clearance_radius, |_| false);
                free[r * cols + c] = !blocked;
            }
        }
        Self {
            resolution,
            origin,
            cols,
            rows,
            clearance_radius,
            free,
        }
    }

    pub fn is_free(&self, c: usize, r: usize) -> bool {
        self.free[r * self.cols + c]
    }

    pub fn cell_center(&self, c: usize, r: usize) -> Point2 {
        Point2::new(
            self.origin.x + c as f64 * self.resolution,
            self.origin.y + r as f64 * self.resolution,
        )
    }

    /// Nearest cell to `p`, if inside the grid.
    pub fn nearest_cell(&self, p: &Point2) -> Option<(usize, usize)> {
        let c = ((p.x - self.origin.x) / self.resolution).round();
        let r = ((p.y - self.origin.y) / self.resolution).round();
        if c < 0.0 || r < 0.0 || c as usize >= self.cols || r as usize >= self.rows {
            return None;
        }
        Some((c as usize, r as usize))
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    cost: f64,
    cell: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.cell.cmp(&self.cell))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Grid shortest-path distance to a goal cell; `+inf` where blocked or
/// unreachable.
#[derive(Debug, Clone)]
pub struct CostField {
    grid: Arc<FreeGrid>,
    pub goal: Point2,
    costs: Vec<f64>,
}

impl CostField {
    pub fn resolution(&self) -> f64 {
        self.grid.resolution
    }

    pub fn origin(&self) -> Point2 {
        self.grid.origin
    }

    pub fn clearance_radius(&self) -> f64 {
        self.grid.clearance_radius
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.grid.cols, self.grid.rows)
    }

    pub fn grid(&self) -> &FreeGrid {
        &self.grid
    }

    pub fn cost(&self, c: usize, r: usize) -> f64 {
        self.costs[r * self.grid.cols + c]
    }

    /// Row-major CSV, blank for unreachable cells.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for r in 0..self.grid.rows {
            for c in 0..self.grid.cols {
                if c > 0 {
                    out.push(',');
                }
                let v = self.cost(c, r);
                if v.is_finite() {
                    let _ = write!(out, "{v:.4}");
                }
            }
            out.push('\n');
        }
        out
    }
}

pub fn precompute_field(
    map: &StaticMap,
    goal: &Point2,
    resolution: f64,
    clearance_radius: f64,
) -> Result<CostField, HeuristicError> {
    let grid = Arc::new(FreeGrid::new(map, resolution, clearance_radius));
    field_on_grid(grid, goal)
}

/// Single-source Dijkstra from the goal cell over the 8-connected grid.
pub fn field_on_grid(grid: Arc<FreeGrid>, goal: &Point2) -> Result<CostField, HeuristicError> {
    let (gc, gr) = grid
        .nearest_cell(goal)
        .ok_or(HeuristicError::GoalOutside { x: goal.x, y: goal.y })?;
    if !grid.is_free(gc, gr) {
        return Err(HeuristicError::GoalBlocked { x: goal.x, y: goal.y });
    }
    let (cols, rows) = (grid.cols, grid.rows);
    let res = grid.resolution;
    let diag = res * std::f64::consts::SQRT_2;
    let mut costs = vec![f64::INFINITY; cols * rows];
    let mut heap = BinaryHeap::new();
    let start = gr * cols + gc;
    costs[start] = 0.0;
    heap.push(Entry { cost: 0.0, cell: start });
    const NEIGHBORS: [(isize, isize); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];
    while let Some(Entry { cost, cell }) = heap.pop() {
        if cost > costs[cell] {
            continue;
        }
        let (c, r) = ((cell % cols) as isize, (cell / cols) as isize);
        for (dc, dr) in NEIGHBORS {
            let (nc, nr) = (c + dc, r + dr);
            if nc < 0 || nr < 0 || nc >= cols as isize || nr >= rows as isize {
                continue;
            }
            let (nc, nr) = (nc as usize, nr as usize);
            if !grid.is_free(nc, nr) {
                continue;
            }
            let step = if dc != 0 && dr != 0 { diag } else { res };
            let next = nr * cols + nc;
            let cand = cost + step;
            if cand < costs[next] {
                costs[next] = cand;
                heap.push(Entry { cost: cand, cell: next });
            }
        }
    }
    Ok(CostField {
        grid,
        goal: *goal,
        costs,
    })
}

/// Bilinear interpolation of the field at the state's position.
pub fn h_astar(field: &CostField, state: &VehicleState) -> f64 {
    let g = &field.grid;
    let fx = (state.x - g.origin.x) / g.resolution;
    let fy = (state.y - g.origin.y) / g.resolution;
    let max_c = (g.cols - 1) as f64;
    let max_r = (g.rows - 1) as f64;
    let fx = fx.clamp(0.0, max_c);
    let fy = fy.clamp(0.0, max_r);
    let c0 = (fx.floor() as usize).min(g.cols.saturating_sub(2));
    let r0 = (fy.floor() as usize).min(g.rows.saturating_sub(2));
    let c1 = (c0 + 1).min(g.cols - 1);
    let r1 = (r0 + 1).min(g.rows - 1);
    let tx = fx - c0 as f64;
    let ty = fy - r0 as f64;
    let corners = [
        (field.cost(c0, r0), (1.0 - tx) * (1.0 - ty), tx * tx + ty * ty),
        (field.cost(c1, r0), tx * (1.0 - ty), (1.0 - tx).powi(2) + ty * ty),
        (field.cost(c0, r1), (1.0 - tx) * ty, tx * tx + (1.0 - ty).powi(2)),
        (field.cost(c1, r1), tx * ty, (1.0 - tx).powi(2) + (1.0 - ty).powi(2)),
    ];
    if corners.iter().all(|(v, _, _)| v.is_finite()) {
        return corners.iter().map(|(v, w, _)| v * w).sum();
    }
    corners
        .iter()
        .filter(|(v, _, _)| v.is_finite())
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .map_or(f64::INFINITY, |(v, _, _)| *v)
}

pub fn h_euclid(state: &VehicleState, goal: &VehicleState) -> f64 {
    state.distance(goal)
}
