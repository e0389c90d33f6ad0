//! The episode engine: sense, plan, navigate, repeat.
//!
//! Simulated time advances only while the robot moves. Planning is measured
//! in wall-clock seconds and reported separately, so simulated quantities
//! (time, path length, coverage) are identical across machines and runs
//! with the same seed.

use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{GridRay, Point, Pose};
use crate::grid_map::{GridMap, SensorModel};
use crate::nav::{astar, disc_offsets, follow, inflate, is_traversable, CostMask};
use crate::planner::{PlanResult, PlannerParams, Strategy};
use crate::sensor::{integrate_scan, simulate_scan, LidarScan, LidarSpec};
use crate::world::World;

#[derive(Debug, Clone)]
pub struct EpisodeConfig {
    pub world: Arc<World>,
    pub strategy: Strategy,
    pub planner: PlannerParams,
    pub lidar: LidarSpec,
    pub sensor_model: SensorModel,
    pub v_max: f64,
    pub psi_max: f64,
    /// Follower integration step (s).
    pub dt: f64,
    pub robot_radius: f64,
    pub time_budget_s: f64,
    pub scan_period_s: f64,
    pub seed: u64,
    /// Fraction of the world's free area at which the episode is complete.
    pub done_threshold: f64,
    /// Overrides the world's default start.
    pub start: Option<Pose>,
    pub goal_tolerance_m: f64,
    pub replan_period_s: f64,
    /// Consecutive failed plans (no progress, unreachable, no motion)
    /// before the episode is abandoned.
    pub max_failures: usize,
}

impl EpisodeConfig {
    pub fn new(world: Arc<World>, strategy: Strategy, seed: u64) -> Self {
        Self {
            world,
            strategy,
            planner: PlannerParams::default(),
            lidar: LidarSpec::default(),
            sensor_model: SensorModel::default(),
            v_max: 0.3,
            psi_max: 1.0,
            dt: 0.05,
            robot_radius: 0.2,
            time_budget_s: 900.0,
            scan_period_s: 0.2,
            seed,
            done_threshold: 0.99,
            start: None,
            goal_tolerance_m: 0.3,
            replan_period_s: 30.0,
            max_failures: 3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.planner.validate()?;
        self.lidar.validate()?;
        let ok = self.v_max > 0.0
            && self.psi_max > 0.0
            && self.dt > 0.0
            && self.robot_radius >= 0.0
            && self.time_budget_s >= 0.0
            && self.scan_period_s > 0.0
            && self.done_threshold > 0.0
            && self.done_threshold <= 1.0
            && self.max_failures >= 1;
        if !ok {
            return Err(Error::Validation("invalid episode configuration".into()));
        }
        Ok(())
    }

    pub fn start_pose(&self) -> Pose {
        self.start.unwrap_or_else(|| self.world.default_start())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    Scan,
    Plan,
    Goal,
    Done,
}

impl Event {
    pub fn name(self) -> &'static str {
        match self {
            Event::Scan => "scan",
            Event::Plan => "plan",
            Event::Goal => "goal",
            Event::Done => "done",
        }
    }
}

/// One logged event. For `Goal` records `pose` is the planner's goal; for
/// all others it is the robot pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record {
    pub sim_time: f64,
    pub pose: Pose,
    pub coverage_m2: f64,
    pub event: Event,
    /// Distance driven up to this event.
    pub path_length_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanOutcome {
    Goal,
    NoProgress,
    Unreachable,
    NoMotion,
}

impl PlanOutcome {
    pub fn name(self) -> &'static str {
        match self {
            PlanOutcome::Goal => "goal",
            PlanOutcome::NoProgress => "no_progress",
            PlanOutcome::Unreachable => "unreachable",
            PlanOutcome::NoMotion => "no_motion",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanRecord {
    pub sim_time: f64,
    pub compute_s: f64,
    pub outcome: PlanOutcome,
    pub goal: Option<Pose>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationReason {
    Coverage,
    TimeBudget,
    NoProgress,
    Stuck,
}

impl fmt::Display for TerminationReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TerminationReason::Coverage => "coverage",
            TerminationReason::TimeBudget => "time_budget",
            TerminationReason::NoProgress => "no_progress",
            TerminationReason::Stuck => "stuck",
        })
    }
}

#[derive(Debug, Clone)]
pub struct EpisodeLog {
    pub strategy: Strategy,
    pub seed: u64,
    pub free_area_m2: f64,
    pub start: Pose,
    pub records: Vec<Record>,
    pub plans: Vec<PlanRecord>,
    /// `(second, coverage)` sampled at every whole simulated second.
    pub coverage_curve: Vec<(f64, f64)>,
    pub path_length_m: f64,
    pub exec_time_s: f64,
    pub compute_time_s: f64,
    pub termination: TerminationReason,
    /// Every pose the robot occupied.
    pub trajectory: Vec<(f64, Pose)>,
    /// Tree of the last successful plan.
    pub last_tree: Option<PlanResult>,
}

impl EpisodeLog {
    pub fn final_pose(&self) -> Pose {
        self.trajectory.last().map_or(self.start, |(_, p)| *p)
    }

    pub fn final_coverage(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.coverage_m2)
    }

    /// Index of the first record at which coverage reaches `threshold_m2`.
    pub fn first_reaching(&self, threshold_m2: f64) -> Option<usize> {
        self.records
            .iter()
            .position(|r| r.event != Event::Goal && r.coverage_m2 >= threshold_m2)
    }

    /// Path length, execution time and planner compute time accumulated
    /// until coverage first reaches `threshold_m2`.
    pub fn metrics_at(&self, threshold_m2: f64) -> Option<ThresholdMetrics> {
        let k = self.first_reaching(threshold_m2)?;
        let rec = self.records[k];
        let plans_before = self.records[..k]
            .iter()
            .filter(|r| r.event == Event::Plan)
            .count();
        let compute = self.plans[..plans_before]
            .iter()
            .fold(0.0, |acc, p| acc + p.compute_s);
        Some(ThresholdMetrics {
            path_length_m: rec.path_length_m,
            exec_time_s: rec.sim_time,
            compute_time_s: compute,
            plan_calls: plans_before,
        })
    }

    pub fn goals(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| r.event == Event::Goal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdMetrics {
    pub path_length_m: f64,
    pub exec_time_s: f64,
    pub compute_time_s: f64,
    pub plan_calls: usize,
}

/// What [`replan_trigger`] looks at.
#[derive(Debug, Clone, Copy)]
pub struct ReplanState<'a> {
    pub pose: Pose,
    pub goal: Point,
    /// Waypoints not yet reached, in order.
    pub remaining: &'a [Point],
    pub since_plan_s: f64,
    /// Inflation radius the current path was planned with.
    pub robot_radius: f64,
    pub goal_tolerance_m: f64,
    pub replan_period_s: f64,
}

/// True when the goal is within tolerance, the replan period elapsed, or a
/// cell along the remaining path is no longer traversable.
pub fn replan_trigger(map: &GridMap, state: &ReplanState<'_>) -> bool {
    if state.pose.position().dist(state.goal) <= state.goal_tolerance_m {
        return true;
    }
    if state.since_plan_s >= state.replan_period_s {
        return true;
    }
    let offsets = disc_offsets(map.resolution(), state.robot_radius);
    let mut from = state.pose.position();
    for &to in state.remaining {
        for cell in GridRay::segment(map.geometry(), from, to) {
            if !is_traversable(map, cell.col, cell.row, &offsets) {
                return true;
            }
        }
        from = to;
    }
    false
}

struct Episode<'a> {
    cfg: &'a EpisodeConfig,
    map: GridMap,
    sensor_rng: ChaCha8Rng,
    log: EpisodeLog,
    t: f64,
    pose: Pose,
    path: f64,
}

impl Episode<'_> {
    fn record(&mut self, event: Event, pose: Pose) {
        self.log.records.push(Record {
            sim_time: self.t,
            pose,
            coverage_m2: self.map.coverage_m2(),
            event,
            path_length_m: self.path,
        });
    }

    fn scan(&mut self) {
        let scan = simulate_scan(&self.cfg.world, self.pose, &self.cfg.lidar, &mut self.sensor_rng)
            .expect("robot pose stays in free space");
        integrate_scan(&mut self.map, &scan);
        self.record(Event::Scan, self.pose);
    }

    fn done(&self, target: f64) -> bool {
        self.map.coverage_m2() >= target
    }
}

fn sensor_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// The first scan an episode with this configuration takes.
pub fn initial_scan(cfg: &EpisodeConfig) -> Result<LidarScan> {
    cfg.validate()?;
    simulate_scan(&cfg.world, cfg.start_pose(), &cfg.lidar, &mut sensor_rng(cfg.seed))
}

/// Runs one exploration episode to completion.
pub fn run_episode(cfg: &EpisodeConfig) -> Result<EpisodeLog> {
    run_episode_with_map(cfg).map(|(log, _)| log)
}

/// As [`run_episode`], also returning the final belief map.
pub fn run_episode_with_map(cfg: &EpisodeConfig) -> Result<(EpisodeLog, GridMap)> {
    cfg.validate()?;
    let start = cfg.start_pose();
    if cfg.world.is_solid(start.position()) {
        return Err(Error::PoseInSolid {
            x: start.x,
            y: start.y,
        });
    }
    let sensor_rng = sensor_rng(cfg.seed);
    let mut planner_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    planner_rng.set_stream(2);

    let free_area = cfg.world.free_area_m2();
    let target = cfg.done_threshold * free_area;
    let mut ep = Episode {
        cfg,
        map: GridMap::for_world(&cfg.world, cfg.sensor_model),
        sensor_rng,
        log: EpisodeLog {
            strategy: cfg.strategy,
            seed: cfg.seed,
            free_area_m2: free_area,
            start,
            records: Vec::new(),
            plans: Vec::new(),
            coverage_curve: Vec::new(),
            path_length_m: 0.0,
            exec_time_s: 0.0,
            compute_time_s: 0.0,
            termination: TerminationReason::TimeBudget,
            trajectory: vec![(0.0, start)],
            last_tree: None,
        },
        t: 0.0,
        pose: start,
        path: 0.0,
    };

    let termination = if cfg.time_budget_s <= 0.0 {
        TerminationReason::TimeBudget
    } else {
        ep.scan();
        explore(&mut ep, &mut planner_rng, target)
    };

    ep.record(Event::Done, ep.pose);
    let mut log = ep.log;
    log.termination = termination;
    log.path_length_m = ep.path;
    log.exec_time_s = ep.t;
    log.compute_time_s = log.plans.iter().fold(0.0, |acc, p| acc + p.compute_s);
    log.coverage_curve = coverage_curve(&log.records, ep.t);
    Ok((log, ep.map))
}

fn explore(ep: &mut Episode<'_>, rng: &mut ChaCha8Rng, target: f64) -> TerminationReason {
    let cfg = ep.cfg;
    let mut next_scan = ep.t + cfg.scan_period_s;
    let mut failures = 0usize;
    let mut last_failure = TerminationReason::Stuck;

    loop {
        if ep.done(target) {
            return TerminationReason::Coverage;
        }
        if ep.t >= cfg.time_budget_s {
            return TerminationReason::TimeBudget;
        }
        if failures >= cfg.max_failures {
            return last_failure;
        }

        ep.record(Event::Plan, ep.pose);
        let wall = Instant::now();
        let planned = cfg.strategy.plan(&ep.map, ep.pose, &cfg.planner, rng);
        let compute_s = wall.elapsed().as_secs_f64();
        let (goal, iterations) = match planned {
            Ok(r) => {
                let out = (r.goal, r.iterations_used);
                ep.log.last_tree = Some(r);
                out
            }
            Err(_) => {
                ep.log.plans.push(PlanRecord {
                    sim_time: ep.t,
                    compute_s,
                    outcome: PlanOutcome::NoProgress,
                    goal: None,
                    iterations: cfg.planner.n_abs_max,
                });
                failures += 1;
                last_failure = TerminationReason::NoProgress;
                continue;
            }
        };
        ep.record(Event::Goal, goal);
        let plan_index = ep.log.plans.len();
        ep.log.plans.push(PlanRecord {
            sim_time: ep.t,
            compute_s,
            outcome: PlanOutcome::Goal,
            goal: Some(goal),
            iterations,
        });

        let (mask, radius) = planning_mask(&ep.map, ep.pose.position(), cfg.robot_radius);
        let path = match astar(&mask, ep.pose.position(), goal.position()) {
            Ok(p) => p,
            Err(_) => {
                ep.log.plans[plan_index].outcome = PlanOutcome::Unreachable;
                failures += 1;
                last_failure = TerminationReason::Stuck;
                continue;
            }
        };
        let traj = follow(&path, ep.pose, cfg.v_max, cfg.psi_max, cfg.dt);
        let duration = traj.last().map_or(0.0, |(t, _)| *t);
        if traj.len() < 2 || duration < 1e-6 {
            ep.log.plans[plan_index].outcome = PlanOutcome::NoMotion;
            failures += 1;
            last_failure = TerminationReason::Stuck;
            continue;
        }
        failures = 0;

        let t0 = ep.t;
        let mut next_wp = 1usize;
        for i in 1..traj.len() {
            let (dt, p) = traj[i];
            if t0 + dt > cfg.time_budget_s {
                ep.t = cfg.time_budget_s;
                break;
            }
            ep.path += p.position().dist(ep.pose.position());
            ep.pose = p;
            ep.t = t0 + dt;
            ep.log.trajectory.push((ep.t, p));
            while next_wp < path.waypoints.len() && path.waypoints[next_wp] == p.position() {
                next_wp += 1;
            }
            let moved = p.position() != traj[i - 1].1.position();
            let arrived = moved && traj.get(i + 1).is_none_or(|n| n.1.position() == p.position());
            if ep.t + 1e-9 < next_scan && !arrived {
                continue;
            }
            ep.scan();
            while next_scan <= ep.t + 1e-9 {
                next_scan += cfg.scan_period_s;
            }
            if ep.done(target) {
                break;
            }
            let state = ReplanState {
                pose: ep.pose,
                goal: goal.position(),
                remaining: &path.waypoints[next_wp.min(path.waypoints.len())..],
                since_plan_s: ep.t - t0,
                robot_radius: radius,
                goal_tolerance_m: cfg.goal_tolerance_m,
                replan_period_s: cfg.replan_period_s,
            };
            if replan_trigger(&ep.map, &state) {
                break;
            }
        }
    }
}

/// Inflated mask for planning from `start`; falls back to the bare
/// occupancy mask when the robot already sits inside the inflation band.
fn planning_mask(map: &GridMap, start: Point, radius: f64) -> (CostMask, f64) {
    let mask = inflate(map, radius);
    if !mask.blocked_at(start) || radius == 0.0 {
        return (mask, radius);
    }
    (inflate(map, 0.0), 0.0)
}

fn coverage_curve(records: &[Record], t_end: f64) -> Vec<(f64, f64)> {
    let mut curve = Vec::new();
    let mut k = 0;
    let mut cov = 0.0;
    let mut s = 0.0;
    while s <= t_end + 1e-9 {
        while k < records.len() && records[k].sim_time <= s + 1e-9 {
            if records[k].event == Event::Scan {
                cov = records[k].coverage_m2;
            }
            k += 1;
        }
        curve.push((s, cov));
        s += 1.0;
    }
    curve
}
