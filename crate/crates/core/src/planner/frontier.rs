use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{Point, Pose};
use crate::grid_map::{CellClass, GridMap};

use super::gain::node_gain;
use super::rrt::{nearest_neighbor, sample_known_free, steer_overshoot, Tree};
use super::{PlanResult, PlannerParams, RrtNode};

/// Side of the square buckets used to cluster detected frontier vertices.
pub const CLUSTER_BUCKET_M: f64 = 0.5;

/// Frontier-detection baseline: the tree records every vertex landing on a
/// frontier cell; detected vertices are bucketed and the centroid with the
/// best distance-discounted unknown-neighbour count becomes the goal.
pub fn plan_frontier<R: Rng + ?Sized>(
    map: &GridMap,
    pose: Pose,
    params: &PlannerParams,
    rng: &mut R,
) -> Result<PlanResult> {
    let started = Instant::now();
    params.validate()?;
    let root = pose.position();
    map.world_to_cell(root)?;
    let mut tree = Tree::new(root);
    let mut detected: Vec<usize> = Vec::new();
    let mut accepted = 0usize;
    let mut iterations = 0usize;

    while !(accepted >= params.n_max && !detected.is_empty()) && iterations < params.n_abs_max {
        iterations += 1;
        let x_rand = match sample_known_free(map, rng) {
            Ok(p) => p,
            Err(Error::NoFreeCells) => return Err(Error::NoProgress),
            Err(e) => return Err(e),
        };
        let near = nearest_neighbor(&tree, x_rand);
        let x_near = tree.nodes[near].position;
        let x_new = match steer_overshoot(map, x_near, x_rand, params.epsilon, params.alpha) {
            Some(p) => p,
            None if params.strict_eq2 && x_near != x_rand => x_near,
            None => continue,
        };
        let on_frontier = map
            .world_to_cell(x_new)
            .and_then(|c| map.is_frontier(c))
            .unwrap_or(false);
        let id = tree.push(RrtNode {
            position: x_new,
            parent: Some(near),
            gain: tree.nodes[near].gain,
            is_frontier_node: on_frontier,
        });
        accepted += 1;
        if on_frontier {
            detected.push(id);
        }
    }
    if detected.is_empty() {
        return Err(Error::NoProgress);
    }

    let points: Vec<Point> = detected.iter().map(|&id| tree.nodes[id].position).collect();
    let best = select_cluster(map, root, &points, params.r_gain_max, params.lambda)
        .expect("at least one cluster");
    let (utility, centroid, node) = (best.utility, best.centroid, detected[best.members[0]]);
    let heading = centroid - root;
    let psi = if heading.norm() > 0.0 { heading.angle() } else { pose.psi };
    Ok(PlanResult {
        goal: Pose::new(centroid.x, centroid.y, psi),
        tree: tree.nodes,
        best_gain: utility,
        best_node: node,
        iterations_used: iterations,
        compute_seconds: started.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontierCluster {
    pub centroid: Point,
    pub utility: f64,
    /// Indices into the detection list.
    pub members: Vec<usize>,
}

/// Buckets `detections` into square cells of [`CLUSTER_BUCKET_M`] and
/// returns the bucket whose centroid maximizes
/// `unknown_within(centroid, r_gain) * exp(-lambda * |centroid - root|)`.
/// Ties keep the bucket that comes first in (x, y) bucket order.
pub fn select_cluster(
    map: &GridMap,
    root: Point,
    detections: &[Point],
    r_gain: f64,
    lambda: f64,
) -> Option<FrontierCluster> {
    let origin = map.origin();
    let mut buckets: BTreeMap<(i64, i64), Vec<usize>> = BTreeMap::new();
    for (i, &p) in detections.iter().enumerate() {
        let p = p - origin;
        let key = (
            (p.x / CLUSTER_BUCKET_M).floor() as i64,
            (p.y / CLUSTER_BUCKET_M).floor() as i64,
        );
        buckets.entry(key).or_default().push(i);
    }
    let mut best: Option<FrontierCluster> = None;
    for members in buckets.into_values() {
        let n = members.len() as f64;
        let centroid = members
            .iter()
            .fold(Point::default(), |acc, &i| acc + detections[i])
            * (1.0 / n);
        let unknown = unknown_within(map, centroid, r_gain) as f64;
        let utility = node_gain(0.0, unknown, centroid.dist(root), lambda);
        if best.as_ref().is_none_or(|b| utility > b.utility) {
            best = Some(FrontierCluster {
                centroid,
                utility,
                members,
            });
        }
    }
    best
}

/// Unknown-class cells whose centre lies within `radius` of `p`.
pub(crate) fn unknown_within(map: &GridMap, p: Point, radius: f64) -> usize {
    let g = map.geometry();
    let (pc, pr) = g.cell_coords(p);
    let span = (radius / g.resolution).ceil() as i64 + 1;
    let mut n = 0;
    for row in (pr - span).max(0)..=(pr + span).min(g.rows as i64 - 1) {
        for col in (pc - span).max(0)..=(pc + span).min(g.cols as i64 - 1) {
            let (col, row) = (col as usize, row as usize);
            if g.cell_center(col, row).dist(p) <= radius
                && map.class_cr(col, row) == CellClass::Unknown
            {
                n += 1;
            }
        }
    }
    n
}
