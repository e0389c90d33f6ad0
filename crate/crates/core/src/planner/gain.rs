use rand::Rng;

use crate::geometry::{GridRay, Point};
use crate::grid_map::{CellClass, CellIndex, GridMap};

/// Monte-Carlo occupancy-weighted gain around `center`.
///
/// Draws `n_samples` points uniformly from the disc of radius `r_gain_max`
/// about the centre of `center` and sums `exp(-gamma * (1 - 2 p))` over the
/// cells containing them. Unobserved cells (and draws falling outside the
/// map) count with `p = 0.5`. With `clamp_occupied`, occupied cells
/// contribute nothing.
pub fn cell_gain<R: Rng + ?Sized>(
    map: &GridMap,
    center: CellIndex,
    gamma: f64,
    r_gain_max: f64,
    n_samples: usize,
    clamp_occupied: bool,
    rng: &mut R,
) -> f64 {
    let c = map.cell_center(center);
    let g = map.geometry();
    let mut sum = 0.0;
    for _ in 0..n_samples {
        let rho = r_gain_max * rng.random::<f64>().sqrt();
        let theta = rng.random::<f64>() * std::f64::consts::TAU;
        let p = c + Point::from_polar(rho, theta);
        let (col, row) = g.cell_coords(p);
        let prob = if g.contains_coords(col, row) {
            let (col, row) = (col as usize, row as usize);
            if clamp_occupied && map.class_cr(col, row) == CellClass::Occupied {
                continue;
            }
            map.probability_cr(col, row)
        } else {
            0.5
        };
        sum += (-gamma * (1.0 - 2.0 * prob)).exp();
    }
    sum
}

/// Accumulated branch gain: `g_parent + big_g * exp(-lambda * edge_length)`.
pub fn node_gain(g_parent: f64, big_g: f64, edge_length: f64, lambda: f64) -> f64 {
    g_parent + big_g * (-lambda * edge_length).exp()
}

/// Number of Unknown-class cells whose centre lies within `range` of `p`
/// and whose straight line to `p` crosses no Occupied cell.
pub fn visible_unknown_count(map: &GridMap, p: Point, range: f64) -> usize {
    let g = map.geometry();
    let res = g.resolution;
    let (pc, pr) = g.cell_coords(p);
    let span = (range / res).ceil() as i64 + 1;
    let r2 = range * range;
    let mut count = 0;
    for row in (pr - span).max(0)..=(pr + span).min(g.rows as i64 - 1) {
        for col in (pc - span).max(0)..=(pc + span).min(g.cols as i64 - 1) {
            let (col, row) = (col as usize, row as usize);
            if map.class_cr(col, row) != CellClass::Unknown {
                continue;
            }
            let target = g.cell_center(col, row);
            if target.dist_sq(p) > r2 {
                continue;
            }
            let blocked = GridRay::segment(g, p, target)
                .any(|c| map.class_cr(c.col, c.row) == CellClass::Occupied);
            if !blocked {
                count += 1;
            }
        }
    }
    count
}
