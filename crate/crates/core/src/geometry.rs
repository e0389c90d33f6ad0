//! Planar points, poses and the exact grid line traversal shared by the
//! sensor model, the steering check and line-of-sight queries.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

/// A point (or vector) in the plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn dist_sq(self, other: Point) -> f64 {
        let d = self - other;
        d.x * d.x + d.y * d.y
    }

    pub fn from_polar(len: f64, angle: f64) -> Self {
        Self::new(len * angle.cos(), len * angle.sin())
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

/// Vehicle configuration `(x, y, psi)` with `psi` kept in `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub psi: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, psi: f64) -> Self {
        Self {
            x,
            y,
            psi: normalize_angle(psi),
        }
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn normalize_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    if r <= -PI {
        r += 2.0 * PI;
    }
    r
}

/// Geometry of a regular grid: square cells of side `resolution`, with the
/// corner of cell `(0, 0)` at `origin`. Row index grows with y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    pub origin: Point,
    pub resolution: f64,
    pub cols: usize,
    pub rows: usize,
}

impl GridGeometry {
    pub fn width(&self) -> f64 {
        self.cols as f64 * self.resolution
    }

    pub fn height(&self) -> f64 {
        self.rows as f64 * self.resolution
    }

    /// Floor-convention cell coordinates; may be out of range.
    pub fn cell_coords(&self, p: Point) -> (i64, i64) {
        (
            ((p.x - self.origin.x) / self.resolution).floor() as i64,
            ((p.y - self.origin.y) / self.resolution).floor() as i64,
        )
    }

    pub fn contains_coords(&self, col: i64, row: i64) -> bool {
        col >= 0 && row >= 0 && (col as usize) < self.cols && (row as usize) < self.rows
    }

    pub fn cell_center(&self, col: usize, row: usize) -> Point {
        Point::new(
            self.origin.x + (col as f64 + 0.5) * self.resolution,
            self.origin.y + (row as f64 + 0.5) * self.resolution,
        )
    }

    pub fn index(&self, col: usize, row: usize) -> usize {
        row * self.cols + col
    }
}

/// One cell visited by a [`GridRay`], with the ray parameters (meters along
/// the ray) at which the ray enters and leaves it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayCell {
    pub col: usize,
    pub row: usize,
    pub t_enter: f64,
    pub t_exit: f64,
}

/// Exact voxel walk (Amanatides–Woo) over a grid along a ray. Yields every
/// cell the ray passes through, in order, until it leaves the grid or
/// exceeds `max_t`. When the ray crosses a corner exactly, the x step is
/// taken first.
#[derive(Debug, Clone)]
pub struct GridRay {
    geom: GridGeometry,
    col: i64,
    row: i64,
    step_col: i64,
    step_row: i64,
    t_max_x: f64,
    t_max_y: f64,
    t_delta_x: f64,
    t_delta_y: f64,
    t: f64,
    max_t: f64,
    done: bool,
}

impl GridRay {
    /// Ray from `start` along direction `dir` (need not be normalized; the
    /// parameters are reported in meters) up to length `max_t`.
    pub fn new(geom: GridGeometry, start: Point, dir: Point, max_t: f64) -> Self {
        let n = dir.norm();
        let (dx, dy) = if n > 0.0 { (dir.x / n, dir.y / n) } else { (0.0, 0.0) };
        let (col, row) = geom.cell_coords(start);
        let res = geom.resolution;
        let lx = start.x - geom.origin.x;
        let ly = start.y - geom.origin.y;
        let axis = |d: f64, l: f64, c: i64| -> (i64, f64, f64) {
            if d > 0.0 {
                let boundary = (c + 1) as f64 * res;
                (1, (boundary - l) / d, res / d)
            } else if d < 0.0 {
                let boundary = c as f64 * res;
                (-1, (boundary - l) / d, -res / d)
            } else {
                (0, f64::INFINITY, f64::INFINITY)
            }
        };
        let (step_col, t_max_x, t_delta_x) = axis(dx, lx, col);
        let (step_row, t_max_y, t_delta_y) = axis(dy, ly, row);
        Self {
            geom,
            col,
            row,
            step_col,
            step_row,
            t_max_x,
            t_max_y,
            t_delta_x,
            t_delta_y,
            t: 0.0,
            max_t,
            done: false,
        }
    }

    /// Ray covering the segment `a -> b`.
    pub fn segment(geom: GridGeometry, a: Point, b: Point) -> Self {
        Self::new(geom, a, b - a, a.dist(b))
    }
}

impl Iterator for GridRay {
    type Item = RayCell;

    fn next(&mut self) -> Option<RayCell> {
        if self.done || !self.geom.contains_coords(self.col, self.row) || self.t > self.max_t {
            return None;
        }
        let t_exit = self.t_max_x.min(self.t_max_y);
        let cell = RayCell {
            col: self.col as usize,
            row: self.row as usize,
            t_enter: self.t,
            t_exit,
        };
        if t_exit >= self.max_t {
            self.done = true;
        } else if self.t_max_x <= self.t_max_y {
            self.col += self.step_col;
            self.t = self.t_max_x;
            self.t_max_x += self.t_delta_x;
        } else {
            self.row += self.step_row;
            self.t = self.t_max_y;
            self.t_max_y += self.t_delta_y;
        }
        Some(cell)
    }
}
