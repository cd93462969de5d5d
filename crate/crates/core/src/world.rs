//! Static obstacle point set and its spatial index.

use serde::{Deserialize, Serialize};

use crate::geometry::Point2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Bounds {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Self {
        Self {
            min_x,
            min_y,
            max_x,
            max_y,
        }
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    pub fn contains(&self, p: &Point2) -> bool {
        p.x >= self.min_x && p.x <= self.max_x && p.y >= self.min_y && p.y <= self.max_y
    }

    pub fn corners(&self) -> [Point2; 4] {
        [
            Point2::new(self.min_x, self.min_y),
            Point2::new(self.max_x, self.min_y),
            Point2::new(self.max_x, self.max_y),
            Point2::new(self.min_x, self.max_y),
        ]
    }
}

/// A parked car (or any rectangular static obstacle), posed at its center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParkedVehicle {
    pub x: f64,
    pub y: f64,
    /// Heading of the long axis, degrees.
    pub heading_deg: f64,
    pub length: f64,
    pub width: f64,
}

impl ParkedVehicle {
    pub fn corners(&self) -> [Point2; 4] {
        let (s, c) = self.heading_deg.to_radians().sin_cos();
        let (hl, hw) = (self.length / 2.0, self.width / 2.0);
        [(-hl, -hw), (hl, -hw), (hl, hw), (-hl, hw)]
            .map(|(lx, ly)| Point2::new(self.x + lx * c - ly * s, self.y + lx * s + ly * c))
    }

    pub fn contains(&self, p: &Point2) -> bool {
        let (s, c) = self.heading_deg.to_radians().sin_cos();
        let dx = p.x - self.x;
        let dy = p.y - self.y;
        let lx = dx * c + dy * s;
        let ly = -dx * s + dy * c;
        lx.abs() <= self.length / 2.0 && ly.abs() <= self.width / 2.0
    }
}

/// Walks a closed polygon emitting evenly spaced points per edge, each edge
/// contributing its starting corner.
fn walk_polygon(corners: &[Point2], spacing: f64, out: &mut Vec<Point2>) {
    for i in 0..corners.len() {
        let a = corners[i];
        let b = corners[(i + 1) % corners.len()];
        let len = a.distance(&b);
        let n = ((len / spacing) - 1e-9).ceil().max(1.0) as usize;
        for k in 0..n {
            let f = k as f64 / n as f64;
            out.push(Point2::new(a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)));
        }
    }
}

/// Boundary point set with a uniform-grid bucket index.
#[derive(Debug, Clone)]
pub struct StaticMap {
    points: Vec<Point2>,
    bounds: Bounds,
    cell_size: f64,
    cols: usize,
    rows: usize,
    // CSR layout: cell c owns point indices order[starts[c]..starts[c + 1]].
    starts: Vec<u32>,
    order: Vec<u32>,
}

impl StaticMap {
    pub const DEFAULT_SPACING: f64 = 0.25;

    pub fn new(points: Vec<Point2>, bounds: Bounds, cell_size: f64) -> Self {
        assert!(cell_size > 0.0, "cell size must be positive");
        let cols = ((bounds.width() / cell_size).floor() as usize + 1).max(1);
        let rows = ((bounds.height() / cell_size).floor() as usize + 1).max(1);
        let mut map = Self {
            points,
            bounds,
            cell_size,
            cols,
            rows,
            starts: Vec::new(),
            order: Vec::new(),
        };
        let mut counts = vec![0u32; cols * rows + 1];
        let cells: Vec<usize> = map.points.iter().map(|p| map.cell_of(p)).collect();
        for &c in &cells {
            counts[c + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let mut fill = counts.clone();
        let mut order = vec![0u32; map.points.len()];
        for (i, &c) in cells.iter().enumerate() {
            order[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        map.starts = counts;
        map.order = order;
        map
    }

    fn cell_coords(&self, p: &Point2) -> (isize, isize) {
        (
            ((p.x - self.bounds.min_x) / self.cell_size).floor() as isize,
            ((p.y - self.bounds.min_y) / self.cell_size).floor() as isize,
        )
    }

    fn cell_of(&self, p: &Point2) -> usize {
        let (cx, cy) = self.cell_coords(p);
        let cx = cx.clamp(0, self.cols as isize - 1) as usize;
        let cy = cy.clamp(0, self.rows as isize - 1) as usize;
        cy * self.cols + cx
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    /// Visits every stored point within `radius` of `center`. The visitor
    /// returns `false` to stop early; the return value reports whether the
    /// walk ran to completion.
    pub fn for_each_near(&self, center: &Point2, radius: f64, mut visit: impl FnMut(&Point2) -> bool) -> bool {
        let r2 = radius * radius;
        let lo = self.cell_coords(&Point2::new(center.x - radius, center.y - radius));
        let hi = self.cell_coords(&Point2::new(center.x + radius, center.y + radius));
        let x0 = lo.0.max(0);
        let y0 = lo.1.max(0);
        let x1 = hi.0.min(self.cols as isize - 1);
        let y1 = hi.1.min(self.rows as isize - 1);
        for cy in y0..=y1 {
            for cx in x0..=x1 {
                let c = cy as usize * self.cols + cx as usize;
                let (a, b) = (self.starts[c] as usize, self.starts[c + 1] as usize);
                for &i in &self.order[a..b] {
                    let p = &self.points[i as usize];
                    if p.distance_sq(center) <= r2 && !visit(p) {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn query_near(&self, center: &Point2, radius: f64) -> Vec<Point2> {
        let mut out = Vec::new();
        self.for_each_near(center, radius, |p| {
            out.push(*p);
            true
        });
        out
    }

    /// Euclidean distance from `p` to the nearest stored point.
    pub fn nearest_distance(&self, p: &Point2) -> f64 {
        if self.points.is_empty() {
            return f64::INFINITY;
        }
        let mut radius = self.cell_size;
        loop {
            let mut best = f64::INFINITY;
            self.for_each_near(p, radius, |q| {
                best = best.min(q.distance(p));
                true
            });
            if best.is_finite() {
                return best;
            }
            radius *= 2.0;
        }
    }
}

/// Builds the boundary point set from parked rectangles and the drivable
/// area outline. Points falling outside `bounds` are dropped.
pub fn build_boundary_points(rects: &[ParkedVehicle], bounds: Bounds, spacing: f64, cell_size: f64) -> StaticMap {
    assert!(spacing > 0.0, "spacing must be positive");
    let mut points = Vec::new();
    for r in rects {
        walk_polygon(&r.corners(), spacing, &mut points);
    }
    walk_polygon(&bounds.corners(), spacing, &mut points);
    points.retain(|p| bounds.contains(p));
    StaticMap::new(points, bounds, cell_size)
}
