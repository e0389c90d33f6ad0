//! Simulated planar lidar and scan integration into the belief map.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geometry::{GridRay, Point, Pose};
use crate::grid_map::GridMap;
use crate::world::World;

/// Ray cells with `t_exit` within this distance of the return are treated
/// as passed; the endpoint on a boundary belongs to the next cell.
const RANGE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LidarSpec {
    pub fov: f64,
    pub ray_count: usize,
    pub max_range: f64,
    pub range_noise_sigma: f64,
}

impl Default for LidarSpec {
    fn default() -> Self {
        Self {
            fov: 240f64.to_radians(),
            ray_count: 720,
            max_range: 8.0,
            range_noise_sigma: 0.01,
        }
    }
}

impl LidarSpec {
    pub fn validate(&self) -> Result<()> {
        if self.ray_count < 2
            || !(self.fov > 0.0 && self.fov <= 2.0 * std::f64::consts::PI)
            || !(self.max_range > 0.0)
            || !(self.range_noise_sigma >= 0.0)
        {
            return Err(Error::Validation(format!("invalid lidar spec {self:?}")));
        }
        Ok(())
    }

    /// Bearing of ray `i` relative to the robot heading.
    pub fn relative_bearing(&self, i: usize) -> f64 {
        -self.fov / 2.0 + i as f64 * self.fov / (self.ray_count - 1) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LidarScan {
    pub pose: Pose,
    pub spec: LidarSpec,
    pub ranges: Vec<f64>,
    pub hit_flags: Vec<bool>,
}

impl LidarScan {
    pub fn bearing(&self, i: usize) -> f64 {
        self.pose.psi + self.spec.relative_bearing(i)
    }

    /// Debug dump, one `bearing_rad range_m hit` line per ray.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for i in 0..self.ranges.len() {
            let _ = writeln!(
                s,
                "{} {} {}",
                self.bearing(i),
                self.ranges[i],
                u8::from(self.hit_flags[i])
            );
        }
        s
    }
}

/// Distance along a ray to the first solid cell, or `None` within `max_range`.
pub fn cast_ray(world: &World, origin: Point, angle: f64, max_range: f64) -> Option<f64> {
    let dir = Point::from_polar(1.0, angle);
    for cell in GridRay::new(world.geometry(), origin, dir, max_range) {
        if world.cell_solid(cell.col, cell.row) {
            return (cell.t_enter < max_range).then_some(cell.t_enter);
        }
    }
    None
}

pub fn simulate_scan<R: Rng + ?Sized>(
    world: &World,
    pose: Pose,
    spec: &LidarSpec,
    rng: &mut R,
) -> Result<LidarScan> {
    spec.validate()?;
    let origin = pose.position();
    if world.is_solid(origin) {
        return Err(Error::PoseInSolid {
            x: pose.x,
            y: pose.y,
        });
    }
    let noise = (spec.range_noise_sigma > 0.0)
        .then(|| Normal::new(0.0, spec.range_noise_sigma).expect("sigma is finite"));
    let mut ranges = Vec::with_capacity(spec.ray_count);
    let mut hit_flags = Vec::with_capacity(spec.ray_count);
    let min_range = world.resolution * 1e-3;
    for i in 0..spec.ray_count {
        let angle = pose.psi + spec.relative_bearing(i);
        match cast_ray(world, origin, angle, spec.max_range) {
            Some(d) => {
                let d = match &noise {
                    Some(n) => (d + n.sample(rng)).clamp(min_range, spec.max_range),
                    None => d.max(min_range),
                };
                ranges.push(d);
                hit_flags.push(true);
            }
            None => {
                ranges.push(spec.max_range);
                hit_flags.push(false);
            }
        }
    }
    Ok(LidarScan {
        pose,
        spec: *spec,
        ranges,
        hit_flags,
    })
}

/// Carves free space along every ray and marks the return cell of hits.
pub fn integrate_scan(map: &mut GridMap, scan: &LidarScan) {
    let geom = map.geometry();
    let origin = scan.pose.position();
    for i in 0..scan.ranges.len() {
        let range = scan.ranges[i];
        let hit = scan.hit_flags[i];
        let dir = Point::from_polar(1.0, scan.bearing(i));
        for cell in GridRay::new(geom, origin, dir, range + RANGE_EPS) {
            let idx = geom.index(cell.col, cell.row);
            if cell.t_exit <= range + RANGE_EPS {
                map.observe_index(idx, false);
            } else {
                map.observe_index(idx, hit);
                break;
            }
        }
    }
}
