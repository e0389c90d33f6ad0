#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use nbv_core::geometry::GridGeometry;
use nbv_core::sensor::{integrate_scan, simulate_scan};
use nbv_core::{GridMap, LidarSpec, Point, Pose, SensorModel, World};

pub const RES: f64 = 0.05;

/// Walled `cols x rows` world with a few random rectangular blocks.
pub fn box_world(rng: &mut ChaCha8Rng, cols: usize, rows: usize, blocks: usize) -> World {
    let mut cells = vec![false; cols * rows];
    for r in 0..rows {
        for c in 0..cols {
            cells[r * cols + c] = c == 0 || r == 0 || c + 1 == cols || r + 1 == rows;
        }
    }
    for _ in 0..blocks {
        let w = rng.random_range(2..cols / 5);
        let h = rng.random_range(2..rows / 5);
        let c0 = rng.random_range(1..cols - w - 1);
        let r0 = rng.random_range(1..rows - h - 1);
        for r in r0..r0 + h {
            for c in c0..c0 + w {
                cells[r * cols + c] = true;
            }
        }
    }
    World::from_cells("boxes", RES, cols, rows, cells).unwrap()
}

pub fn random_free_point(world: &World, rng: &mut ChaCha8Rng) -> Point {
    loop {
        let p = Point::new(
            rng.random_range(0.0..world.width_m()),
            rng.random_range(0.0..world.height_m()),
        );
        if !world.is_solid(p) {
            return p;
        }
    }
}

/// Belief map after `scans` noise-free scans; returns the last scan pose.
pub fn partial_map(world: &World, rng: &mut ChaCha8Rng, scans: usize) -> (GridMap, Pose) {
    let mut map = GridMap::for_world(world, SensorModel::default());
    let spec = LidarSpec {
        range_noise_sigma: 0.0,
        ray_count: 360,
        max_range: 4.0,
        ..LidarSpec::default()
    };
    let mut pose = Pose::default();
    for _ in 0..scans {
        let p = random_free_point(world, rng);
        pose = Pose::new(p.x, p.y, rng.random_range(-3.0..3.0));
        let scan = simulate_scan(world, pose, &spec, rng).unwrap();
        integrate_scan(&mut map, &scan);
    }
    (map, pose)
}

pub fn square_geom(n: usize) -> GridGeometry {
    GridGeometry {
        origin: Point::new(0.0, 0.0),
        resolution: RES,
        cols: n,
        rows: n,
    }
}

/// Length of the part of segment `a -> b` inside the open square
/// `[x0, x0 + s] x [y0, y0 + s]`, by slab clipping.
pub fn clip_length(a: Point, b: Point, x0: f64, y0: f64, s: f64) -> f64 {
    let d = b - a;
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for (p, dp, lo, hi) in [(a.x, d.x, x0, x0 + s), (a.y, d.y, y0, y0 + s)] {
        if dp == 0.0 {
            if p <= lo || p >= hi {
                return 0.0;
            }
        } else {
            let (u, v) = ((lo - p) / dp, (hi - p) / dp);
            t0 = t0.max(u.min(v));
            t1 = t1.min(u.max(v));
        }
    }
    ((t1 - t0).max(0.0)) * d.norm()
}

/// Entry distance of the ray `o + t u` into the closed square, if any.
pub fn ray_entry(o: Point, u: Point, x0: f64, y0: f64, s: f64) -> Option<f64> {
    let (mut t0, mut t1) = (0.0f64, f64::INFINITY);
    for (p, dp, lo, hi) in [(o.x, u.x, x0, x0 + s), (o.y, u.y, y0, y0 + s)] {
        if dp == 0.0 {
            if p < lo || p > hi {
                return None;
            }
        } else {
            let (a, b) = ((lo - p) / dp, (hi - p) / dp);
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
    }
    (t0 <= t1).then_some(t0)
}
