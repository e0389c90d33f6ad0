use rand::Rng;

use crate::error::Result;
use crate::geometry::Pose;
use crate::grid_map::GridMap;

use super::gain::visible_unknown_count;
use super::nbv::grow_scored_tree;
use super::{PlanResult, PlannerParams};

/// Receding-horizon baseline: same tree and goal extraction, with each
/// vertex scored by the number of unknown cells it can see.
pub fn plan_rh_nbv<R: Rng + ?Sized>(
    map: &GridMap,
    pose: Pose,
    params: &PlannerParams,
    rng: &mut R,
) -> Result<PlanResult> {
    grow_scored_tree(map, pose, params, rng, false, |map, x, _| {
        visible_unknown_count(map, x, params.sensor_range) as f64
    })
}
