//! Configuration, campaigns, statistics, log files and rendering.

pub mod campaign;
pub mod config;
pub mod logfile;
pub mod render;
pub mod stats;

pub use campaign::{episode_file_stem, episode_seed, run_campaign, stat_rows, CampaignResult};
pub use config::{CampaignSpec, Settings, Thresholds, WorldSource};
pub use logfile::{episode_csv, parse_episode_csv, parse_plans_csv, plans_csv, EPISODE_HEADER};
pub use render::{render, render_map, Overlay};
pub use stats::{mean_std, stats_csv, MeanStd, StatRow};
