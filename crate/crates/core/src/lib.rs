//! Sampling-based next-best-view exploration for 2D occupancy grids.
//!
//! The crate bundles the exploration planner (an RRT whose vertices are
//! scored by a distance-discounted, occupancy-weighted gain), two baseline
//! strategies, and the headless simulator used to benchmark them: ground
//! truth worlds, a log-odds belief map, a simulated planar lidar, grid
//! navigation and an episode engine with campaign statistics.

// `!(x > 0.0)` style checks are used on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod geometry;
pub mod grid_map;
pub mod harness;
pub mod nav;
pub mod planner;
pub mod sensor;
pub mod sim;
pub mod world;

pub use error::{Error, Result};
pub use geometry::{Point, Pose};
pub use grid_map::{CellClass, CellIndex, GridMap, SensorModel};
pub use planner::{PlanResult, PlannerParams, Strategy};
pub use sensor::{LidarScan, LidarSpec};
pub use sim::{EpisodeConfig, EpisodeLog, TerminationReason};
pub use world::World;
