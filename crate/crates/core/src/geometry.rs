//! Points and closed axis-parallel rectangles in the plane.

use crate::math;

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        math::hypot(self.x - other.x, self.y - other.y)
    }
}

/// Closed rectangle `[x0, x1] × [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub const fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    /// Square of side `side` centred at `c`.
    pub fn centered(c: Point, side: f64) -> Self {
        let h = 0.5 * side;
        Self::new(c.x - h, c.x + h, c.y - h, c.y + h)
    }

    /// Grows every side outward by `t`.
    pub fn inflate(self, t: f64) -> Self {
        Self::new(self.x0 - t, self.x1 + t, self.y0 - t, self.y1 + t)
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        self.x0 <= other.x1 && other.x0 <= self.x1 && self.y0 <= other.y1 && other.y0 <= self.y1
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    pub fn corners(&self) -> [Point; 4] {
        [Point::new(self.x0, self.y0), Point::new(self.x1, self.y0), Point::new(self.x0, self.y1), Point::new(self.x1, self.y1)]
    }

    /// Euclidean distance from the rectangle to `p` (0 inside).
    pub fn dist_to_point(&self, p: Point) -> f64 {
        let dx = (self.x0 - p.x).max(0.0).max(p.x - self.x1);
        let dy = (self.y0 - p.y).max(0.0).max(p.y - self.y1);
        math::hypot(dx, dy)
    }

    /// Euclidean distance between two rectangles (0 when they meet).
    pub fn dist_to_rect(&self, o: &Rect) -> f64 {
        let dx = (o.x0 - self.x1).max(0.0).max(self.x0 - o.x1);
        let dy = (o.y0 - self.y1).max(0.0).max(self.y0 - o.y1);
        math::hypot(dx, dy)
    }
}

/// Closed disk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Disk {
    pub center: Point,
    pub radius: f64,
}

impl Disk {
    pub fn contains_rect(&self, r: &Rect, tol: f64) -> bool {
        r.corners().iter().all(|c| c.dist(self.center) <= self.radius + tol)
    }

    /// Distance between two disks; 0 when they overlap.
    pub fn dist(&self, o: &Disk) -> f64 {
        (self.center.dist(o.center) - self.radius - o.radius).max(0.0)
    }

    pub fn scaled(&self, k: f64) -> Disk {
        Disk { center: self.center, radius: k * self.radius }
    }
}
