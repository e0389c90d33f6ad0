use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{GridRay, Point};
use crate::grid_map::{CellClass, GridMap};

use super::RrtNode;

/// Draws allowed per call to [`sample_known_free`].
pub const SAMPLE_BUDGET: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<RrtNode>,
}

impl Tree {
    pub fn new(root: Point) -> Self {
        Self {
            nodes: vec![RrtNode {
                position: root,
                parent: None,
                gain: 0.0,
                is_frontier_node: false,
            }],
        }
    }

    pub fn push(&mut self, node: RrtNode) -> usize {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Index of the vertex closest to `p`; ties go to the lowest id.
pub fn nearest_neighbor(tree: &Tree, p: Point) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, n) in tree.nodes.iter().enumerate() {
        let d = n.position.dist_sq(p);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

/// Uniform point over Free-classified cells by rejection over the map
/// extent, with uniform jitter inside the accepted cell.
pub fn sample_known_free<R: Rng + ?Sized>(map: &GridMap, rng: &mut R) -> Result<Point> {
    let g = map.geometry();
    for _ in 0..SAMPLE_BUDGET {
        let col = rng.random_range(0..g.cols);
        let row = rng.random_range(0..g.rows);
        let jx: f64 = rng.random();
        let jy: f64 = rng.random();
        if map.class_cr(col, row) == CellClass::Free {
            return Ok(Point::new(
                g.origin.x + (col as f64 + jx) * g.resolution,
                g.origin.y + (row as f64 + jy) * g.resolution,
            ));
        }
    }
    if map.has_free_cell() {
        Err(Error::SamplingBudget)
    } else {
        Err(Error::NoFreeCells)
    }
}

/// Extends `x_near` toward `x_rand` by at most `epsilon`. Returns `None` when
/// the points coincide, or when the segment from `x_near` to the candidate
/// plus `alpha` along the same direction touches a known-occupied cell or
/// leaves the map. Unknown cells do not block.
pub fn steer_overshoot(
    map: &GridMap,
    x_near: Point,
    x_rand: Point,
    epsilon: f64,
    alpha: f64,
) -> Option<Point> {
    let d = x_rand - x_near;
    let len = d.norm();
    if len == 0.0 {
        return None;
    }
    let u = d * (1.0 / len);
    let candidate = if len <= epsilon { x_rand } else { x_near + u * epsilon };
    let reach = candidate.dist(x_near) + alpha;
    if map.world_to_cell(x_near + u * reach).is_err() {
        return None;
    }
    for cell in GridRay::new(map.geometry(), x_near, u, reach) {
        if map.class_cr(cell.col, cell.row) == CellClass::Occupied {
            return None;
        }
    }
    Some(candidate)
}
