//! Flat `key = value` configuration files.
//!
//! Blank lines and `#` comments are ignored. Unknown keys are errors so a
//! typo never silently falls back to a default.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::Pose;
use crate::grid_map::SensorModel;
use crate::planner::{PlannerParams, Strategy};
use crate::sensor::LidarSpec;
use crate::sim::EpisodeConfig;
use crate::world::World;

/// Splits a config file into `(line number, key, value)` entries.
pub fn parse_entries(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Parse(format!("line {}: expected `key = value`", i + 1)));
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(Error::Parse(format!("line {}: empty key", i + 1)));
        }
        out.push((i + 1, k.to_string(), v.to_string()));
    }
    Ok(out)
}

fn value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Parse(format!("invalid value '{v}' for {key}")))
}

fn flag(key: &str, v: &str) -> Result<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Parse(format!("invalid boolean '{v}' for {key}"))),
    }
}

fn list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| value(key, s))
        .collect()
}

/// Everything about an episode except the world, strategy and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub planner: PlannerParams,
    pub lidar: LidarSpec,
    pub sensor_model: SensorModel,
    pub v_max: f64,
    pub psi_max: f64,
    pub dt: f64,
    pub robot_radius: f64,
    pub time_budget_s: f64,
    pub scan_period_s: f64,
    pub done_threshold: f64,
    pub goal_tolerance_m: f64,
    pub replan_period_s: f64,
    pub max_failures: usize,
    pub start: Option<Pose>,
}

impl Default for Settings {
    fn default() -> Self {
        let base = EpisodeConfig::new(Arc::new(World::maze20()), Strategy::ModifiedNbv, 0);
        Self::from_episode(&base)
    }
}

impl Settings {
    fn from_episode(c: &EpisodeConfig) -> Self {
        Self {
            planner: c.planner,
            lidar: c.lidar,
            sensor_model: c.sensor_model,
            v_max: c.v_max,
            psi_max: c.psi_max,
            dt: c.dt,
            robot_radius: c.robot_radius,
            time_budget_s: c.time_budget_s,
            scan_period_s: c.scan_period_s,
            done_threshold: c.done_threshold,
            goal_tolerance_m: c.goal_tolerance_m,
            replan_period_s: c.replan_period_s,
            max_failures: c.max_failures,
            start: c.start,
        }
    }

    pub fn episode(&self, world: Arc<World>, strategy: Strategy, seed: u64) -> EpisodeConfig {
        EpisodeConfig {
            world,
            strategy,
            planner: self.planner,
            lidar: self.lidar,
            sensor_model: self.sensor_model,
            v_max: self.v_max,
            psi_max: self.psi_max,
            dt: self.dt,
            robot_radius: self.robot_radius,
            time_budget_s: self.time_budget_s,
            scan_period_s: self.scan_period_s,
            seed,
            done_threshold: self.done_threshold,
            start: self.start,
            goal_tolerance_m: self.goal_tolerance_m,
            replan_period_s: self.replan_period_s,
            max_failures: self.max_failures,
        }
    }

    /// Applies one entry. Returns `Ok(false)` if the key is not a setting.
    pub fn set(&mut self, key: &str, v: &str) -> Result<bool> {
        let p = &mut self.planner;
        match key {
            "epsilon" => p.epsilon = value(key, v)?,
            "alpha" => p.alpha = value(key, v)?,
            "n_max" => p.n_max = value(key, v)?,
            "lambda" => p.lambda = value(key, v)?,
            "gamma" => p.gamma = value(key, v)?,
            "r_gain_max" => p.r_gain_max = value(key, v)?,
            "n_gain_samples" => p.n_gain_samples = value(key, v)?,
            "n_abs_max" => p.n_abs_max = value(key, v)?,
            "clamp_occupied_gain" => p.clamp_occupied_gain = flag(key, v)?,
            "strict_eq2" => p.strict_eq2 = flag(key, v)?,
            "sensor_range" | "d_sensor_max" => {
                let r: f64 = value(key, v)?;
                p.sensor_range = r;
                self.lidar.max_range = r;
            }
            "fov_deg" => self.lidar.fov = value::<f64>(key, v)?.to_radians(),
            "ray_count" => self.lidar.ray_count = value(key, v)?,
            "range_noise_sigma" => self.lidar.range_noise_sigma = value(key, v)?,
            "l_occ" => self.sensor_model.l_occ = value(key, v)?,
            "l_free" => self.sensor_model.l_free = value(key, v)?,
            "l_min" => self.sensor_model.l_min = value(key, v)?,
            "l_max" => self.sensor_model.l_max = value(key, v)?,
            "p_free" => self.sensor_model.p_free = value(key, v)?,
            "p_occ" => self.sensor_model.p_occ = value(key, v)?,
            "v_max" => self.v_max = value(key, v)?,
            "psi_max" => self.psi_max = value(key, v)?,
            "dt" => self.dt = value(key, v)?,
            "robot_radius" => self.robot_radius = value(key, v)?,
            "time_budget_s" => self.time_budget_s = value(key, v)?,
            "scan_period_s" => self.scan_period_s = value(key, v)?,
            "done_threshold" => self.done_threshold = value(key, v)?,
            "goal_tolerance_m" => self.goal_tolerance_m = value(key, v)?,
            "replan_period_s" => self.replan_period_s = value(key, v)?,
            "max_failures" => self.max_failures = value(key, v)?,
            "start" => {
                let xs: Vec<f64> = list(key, v)?;
                let [x, y, psi] = xs[..] else {
                    return Err(Error::Parse(format!("start expects `x, y, psi`, got '{v}'")));
                };
                self.start = Some(Pose::new(x, y, psi));
            }
            _ => return Ok(false),
        }
        Ok(true)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Self::default();
        for (line, k, v) in parse_entries(text)? {
            if !s.set(&k, &v)? {
                return Err(Error::Parse(format!("line {line}: unknown key '{k}'")));
            }
        }
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.episode(Arc::new(World::maze20()), Strategy::ModifiedNbv, 0)
            .validate()
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq)]
pub enum WorldSource {
    /// The bundled 20 x 20 m maze.
    Maze20,
    File(PathBuf),
    /// One generated maze per seed; episode `i` uses maze `i % len`.
    Generated {
        seeds: Vec<u64>,
        size_m: f64,
        corridor_m: f64,
    },
}

impl WorldSource {
    pub fn load(&self) -> Result<Vec<Arc<World>>> {
        Ok(match self {
            WorldSource::Maze20 => vec![Arc::new(World::maze20())],
            WorldSource::File(p) => vec![Arc::new(World::load(p)?)],
            WorldSource::Generated {
                seeds,
                size_m,
                corridor_m,
            } => seeds
                .iter()
                .map(|&s| {
                    crate::world::generate_maze(*size_m, *size_m, 0.05, *corridor_m, s).map(Arc::new)
                })
                .collect::<Result<_>>()?,
        })
    }
}

/// World path or `maze20`.
pub fn world_source(v: &str, base_dir: &Path) -> WorldSource {
    if v == "maze20" {
        WorldSource::Maze20
    } else {
        WorldSource::File(base_dir.join(v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Thresholds {
    Absolute(Vec<f64>),
    /// Fractions of each world's free area.
    Fractions(Vec<f64>),
}

impl Thresholds {
    pub fn len(&self) -> usize {
        match self {
            Thresholds::Absolute(v) | Thresholds::Fractions(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn resolve(&self, free_area_m2: f64) -> Vec<f64> {
        match self {
            Thresholds::Absolute(v) => v.clone(),
            Thresholds::Fractions(v) => v.iter().map(|f| f * free_area_m2).collect(),
        }
    }

    pub fn fraction(&self, k: usize) -> Option<f64> {
        match self {
            Thresholds::Absolute(_) => None,
            Thresholds::Fractions(v) => Some(v[k]),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignSpec {
    pub world: WorldSource,
    pub strategies: Vec<Strategy>,
    pub episodes: usize,
    pub thresholds: Thresholds,
    pub base_seed: u64,
    pub output_dir: PathBuf,
    /// Run episodes on the worker pool when the `parallel` feature is on.
    pub parallel: bool,
    pub settings: Settings,
}

impl Default for CampaignSpec {
    fn default() -> Self {
        Self {
            world: WorldSource::Maze20,
            strategies: Strategy::ALL.to_vec(),
            episodes: 20,
            thresholds: Thresholds::Absolute(vec![120.0, 240.0, 360.0]),
            base_seed: 0,
            output_dir: PathBuf::from("campaign_out"),
            parallel: true,
            settings: Settings::default(),
        }
    }
}

impl CampaignSpec {
    /// Parses a spec; relative paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut spec = Self::default();
        let mut maze_seeds: Option<Vec<u64>> = None;
        let mut maze_size = 20.0;
        let mut maze_corridor = 4.0;
        for (line, k, v) in parse_entries(text)? {
            match k.as_str() {
                "world" => spec.world = world_source(&v, base_dir),
                "maze_seeds" => maze_seeds = Some(list(&k, &v)?),
                "maze_size_m" => maze_size = value(&k, &v)?,
                "maze_corridor_m" => maze_corridor = value(&k, &v)?,
                "strategies" => spec.strategies = list(&k, &v)?,
                "episodes" => spec.episodes = value(&k, &v)?,
                "coverage_thresholds_m2" => spec.thresholds = Thresholds::Absolute(list(&k, &v)?),
                "coverage_fractions" => spec.thresholds = Thresholds::Fractions(list(&k, &v)?),
                "base_seed" => spec.base_seed = value(&k, &v)?,
                "output_dir" => spec.output_dir = base_dir.join(&v),
                "parallel" => spec.parallel = flag(&k, &v)?,
                _ => {
                    if !spec.settings.set(&k, &v)? {
                        return Err(Error::Parse(format!("line {line}: unknown key '{k}'")));
                    }
                }
            }
        }
        if let Some(seeds) = maze_seeds {
            spec.world = WorldSource::Generated {
                seeds,
                size_m: maze_size,
                corridor_m: maze_corridor,
            };
        }
        spec.settings.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&read(path)?, base)
    }

    /// Checks everything that can be checked against the loaded worlds.
    pub fn validate(&self, worlds: &[Arc<World>]) -> Result<()> {
        if self.episodes == 0 {
            return Err(Error::Validation("episodes must be at least 1".into()));
        }
        if self.strategies.is_empty() {
            return Err(Error::Validation("no strategies selected".into()));
        }
        if self.thresholds.is_empty() {
            return Err(Error::Validation("no coverage thresholds".into()));
        }
        if worlds.is_empty() {
            return Err(Error::Validation("no worlds".into()));
        }
        for w in worlds {
            let t = self.thresholds.resolve(w.free_area_m2());
            if t.iter().any(|x| !(*x > 0.0)) || t.windows(2).any(|p| p[1] <= p[0]) {
                return Err(Error::Validation(
                    "coverage thresholds must be positive and strictly ascending".into(),
                ));
            }
            if t[t.len() - 1] > w.free_area_m2() {
                return Err(Error::Validation(format!(
                    "threshold {} m2 exceeds the free area {} m2 of '{}'",
                    t[t.len() - 1],
                    w.free_area_m2(),
                    w.name
                )));
            }
        }
        Ok(())
    }
}
