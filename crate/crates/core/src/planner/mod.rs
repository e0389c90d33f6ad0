//! Goal selection strategies.
//!
//! All three strategies grow the same rapidly-exploring random tree from the
//! robot's position: samples are drawn from known free space, the nearest
//! vertex is extended by at most `epsilon`, and the extension is rejected if
//! the segment (overshot by `alpha`) crosses an occupied cell. They differ in
//! how vertices are scored and how the goal is extracted:
//!
//! * [`Strategy::ModifiedNbv`] scores a vertex by sampling cells in a small
//!   disc around it, weighting each by its occupancy probability, and
//!   discounting by edge length. The goal is the first vertex on the branch
//!   leading to the best vertex.
//! * [`Strategy::RhNbv`] uses the count of unknown cells visible from the
//!   vertex within sensor range instead, with the same discount and goal
//!   extraction.
//! * [`Strategy::Frontier`] records vertices that land on frontier cells,
//!   clusters them and drives to the best cluster centroid.

mod frontier;
mod gain;
mod nbv;
mod rh_nbv;
mod rrt;

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{Point, Pose};
use crate::grid_map::GridMap;

pub use frontier::{plan_frontier, select_cluster, FrontierCluster, CLUSTER_BUCKET_M};
pub use gain::{cell_gain, node_gain, visible_unknown_count};
pub use nbv::plan_modified_nbv;
pub use rh_nbv::plan_rh_nbv;
pub use rrt::{nearest_neighbor, sample_known_free, steer_overshoot, Tree, SAMPLE_BUDGET};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    ModifiedNbv,
    RhNbv,
    Frontier,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::RhNbv, Strategy::Frontier, Strategy::ModifiedNbv];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::ModifiedNbv => "ours",
            Strategy::RhNbv => "rhnbv",
            Strategy::Frontier => "frontier",
        }
    }

    pub fn plan<R: Rng + ?Sized>(
        self,
        map: &GridMap,
        pose: Pose,
        params: &PlannerParams,
        rng: &mut R,
    ) -> Result<PlanResult> {
        match self {
            Strategy::ModifiedNbv => plan_modified_nbv(map, pose, params, rng),
            Strategy::RhNbv => plan_rh_nbv(map, pose, params, rng),
            Strategy::Frontier => plan_frontier(map, pose, params, rng),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ours" | "modified-nbv" | "modified_nbv" | "nbv" => Ok(Strategy::ModifiedNbv),
            "rhnbv" | "rh-nbv" | "rh_nbv" => Ok(Strategy::RhNbv),
            "frontier" => Ok(Strategy::Frontier),
            other => Err(Error::Validation(format!(
                "unknown strategy '{other}' (expected ours, rhnbv or frontier)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerParams {
    /// Maximum edge length (m).
    pub epsilon: f64,
    /// Overshoot checked beyond each new vertex (m).
    pub alpha: f64,
    /// Accepted insertions before the loop may stop.
    pub n_max: usize,
    /// Distance discount (1/m).
    pub lambda: f64,
    /// Occupancy weight in the cell gain.
    pub gamma: f64,
    /// Radius of the disc sampled for the cell gain (m).
    pub r_gain_max: f64,
    /// Total number of cells drawn per cell gain evaluation.
    pub n_gain_samples: usize,
    /// Hard cap on loop iterations, rejected samples included.
    pub n_abs_max: usize,
    /// Sensor range used by the visible-unknown gain (m).
    pub sensor_range: f64,
    /// Zero the contribution of occupied cells to the cell gain.
    pub clamp_occupied_gain: bool,
    /// Insert a duplicate of the nearest vertex instead of rejecting a
    /// blocked extension.
    pub strict_eq2: bool,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self {
            epsilon: 1.5,
            alpha: 0.3,
            n_max: 15,
            lambda: 0.5,
            gamma: 4.0,
            r_gain_max: 0.3,
            n_gain_samples: 20,
            n_abs_max: 500,
            sensor_range: 8.0,
            clamp_occupied_gain: false,
            strict_eq2: false,
        }
    }
}

impl PlannerParams {
    pub fn validate(&self) -> Result<()> {
        let positive = self.epsilon > 0.0
            && self.alpha > 0.0
            && self.n_max > 0
            && self.lambda > 0.0
            && self.gamma > 0.0
            && self.r_gain_max > 0.0
            && self.n_gain_samples > 0
            && self.sensor_range > 0.0;
        if !positive || self.n_abs_max < self.n_max {
            return Err(Error::Validation(format!("invalid planner parameters {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RrtNode {
    pub position: Point,
    pub parent: Option<usize>,
    pub gain: f64,
    pub is_frontier_node: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    pub goal: Pose,
    pub tree: Vec<RrtNode>,
    pub best_gain: f64,
    /// Id of the best-scoring vertex (tree strategies) or of the frontier
    /// vertex closest to the chosen centroid.
    pub best_node: usize,
    pub iterations_used: usize,
    pub compute_seconds: f64,
}

impl PlanResult {
    /// Tree export, one `node_id parent_id x y gain frontier_flag` line per
    /// vertex; the root's parent is `-1`.
    pub fn tree_text(&self) -> String {
        let mut s = String::new();
        for (i, n) in self.tree.iter().enumerate() {
            let parent = n.parent.map_or(-1, |p| p as i64);
            let _ = writeln!(
                s,
                "{i} {parent} {} {} {} {}",
                n.position.x,
                n.position.y,
                n.gain,
                u8::from(n.is_frontier_node)
            );
        }
        s
    }
}

/// Depth-1 ancestor of `best`, with heading along the incoming edge.
pub(crate) fn extract_next_best_view(tree: &Tree, best: usize) -> Result<Pose> {
    if best == 0 {
        return Err(Error::NoProgress);
    }
    let mut id = best;
    while let Some(parent) = tree.nodes[id].parent {
        if parent == 0 {
            break;
        }
        id = parent;
    }
    let root = tree.nodes[0].position;
    let goal = tree.nodes[id].position;
    let d = goal - root;
    let psi = if d.norm() > 0.0 { d.angle() } else { 0.0 };
    Ok(Pose::new(goal.x, goal.y, psi))
}
