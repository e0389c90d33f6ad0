use std::time::Instant;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{Point, Pose};
use crate::grid_map::GridMap;

use super::gain::{cell_gain, node_gain};
use super::rrt::{nearest_neighbor, sample_known_free, steer_overshoot, Tree};
use super::{extract_next_best_view, PlanResult, PlannerParams, RrtNode};

/// Exploration planner: grows the tree until `n_max` vertices have been
/// accepted and either some vertex has positive gain or the latest vertex
/// sits on a frontier cell; returns the first vertex of the best branch.
pub fn plan_modified_nbv<R: Rng + ?Sized>(
    map: &GridMap,
    pose: Pose,
    params: &PlannerParams,
    rng: &mut R,
) -> Result<PlanResult> {
    grow_scored_tree(map, pose, params, rng, true, |map, x, rng| {
        let cell = map.world_to_cell(x).expect("steered vertices lie inside the map");
        cell_gain(
            map,
            cell,
            params.gamma,
            params.r_gain_max,
            params.n_gain_samples,
            params.clamp_occupied_gain,
            rng,
        )
    })
}

/// Shared loop of the two next-best-view planners. `vertex_gain` is the
/// per-vertex information term discounted by the edge length.
pub(super) fn grow_scored_tree<R, F>(
    map: &GridMap,
    pose: Pose,
    params: &PlannerParams,
    rng: &mut R,
    frontier_stops: bool,
    mut vertex_gain: F,
) -> Result<PlanResult>
where
    R: Rng + ?Sized,
    F: FnMut(&GridMap, Point, &mut R) -> f64,
{
    let started = Instant::now();
    params.validate()?;
    let root = pose.position();
    map.world_to_cell(root)?;
    let mut tree = Tree::new(root);
    let mut accepted = 0usize;
    let mut iterations = 0usize;
    let mut best = 0usize;
    let mut g_best = 0.0f64;
    let mut last_on_frontier = false;

    loop {
        if accepted >= params.n_max && (g_best > 0.0 || (frontier_stops && last_on_frontier)) {
            break;
        }
        if iterations >= params.n_abs_max {
            break;
        }
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
        let big_g = vertex_gain(map, x_new, rng);
        let g_new = node_gain(tree.nodes[near].gain, big_g, x_new.dist(x_near), params.lambda);
        let on_frontier = map
            .world_to_cell(x_new)
            .and_then(|c| map.is_frontier(c))
            .unwrap_or(false);
        let id = tree.push(RrtNode {
            position: x_new,
            parent: Some(near),
            gain: g_new,
            is_frontier_node: on_frontier,
        });
        accepted += 1;
        last_on_frontier = on_frontier;
        if g_new > g_best {
            best = id;
            g_best = g_new;
        }
    }

    let goal = extract_next_best_view(&tree, best)?;
    Ok(PlanResult {
        goal,
        tree: tree.nodes,
        best_gain: g_best,
        best_node: best,
        iterations_used: iterations,
        compute_seconds: started.elapsed().as_secs_f64(),
    })
}
