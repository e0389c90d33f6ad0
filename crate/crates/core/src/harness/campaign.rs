use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exec::{map_jobs, map_sequential};
use crate::planner::Strategy;
use crate::sim::{run_episode, EpisodeLog};
use crate::world::World;

use super::config::CampaignSpec;
use super::logfile::{episode_csv, plans_csv};
use super::stats::{stats_csv, stats_table, StatRow};

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of episode `index` of `strategy` in a campaign.
pub fn episode_seed(base_seed: u64, strategy: Strategy, index: usize) -> u64 {
    let tag = match strategy {
        Strategy::ModifiedNbv => 1,
        Strategy::RhNbv => 2,
        Strategy::Frontier => 3,
    };
    mix(mix(mix(base_seed) ^ tag) ^ index as u64)
}

#[derive(Debug, Clone)]
pub struct CampaignResult {
    pub rows: Vec<StatRow>,
    /// In job order: strategies as listed, episodes ascending.
    pub logs: Vec<EpisodeLog>,
    pub stats_path: PathBuf,
}

pub fn episode_file_stem(strategy: Strategy, index: usize) -> String {
    format!("{}_{index:03}", strategy.name())
}

/// Runs every episode, writes the per-episode CSVs and `stats.csv`.
pub fn run_campaign(spec: &CampaignSpec) -> Result<CampaignResult> {
    let worlds = spec.world.load()?;
    spec.validate(&worlds)?;

    struct Job {
        strategy: Strategy,
        world: Arc<World>,
        seed: u64,
    }
    let mut jobs = Vec::new();
    for &strategy in &spec.strategies {
        for i in 0..spec.episodes {
            jobs.push(Job {
                strategy,
                world: worlds[i % worlds.len()].clone(),
                seed: episode_seed(spec.base_seed, strategy, i),
            });
        }
    }
    let run = |j: Job| run_episode(&spec.settings.episode(j.world, j.strategy, j.seed));
    let results = if spec.parallel {
        map_jobs(jobs, run)
    } else {
        map_sequential(jobs, run)
    };
    let logs: Vec<EpisodeLog> = results.into_iter().collect::<Result<_>>()?;

    let dir = &spec.output_dir;
    let episodes_dir = dir.join("episodes");
    create_dir(&episodes_dir)?;
    for (k, log) in logs.iter().enumerate() {
        let stem = episode_file_stem(log.strategy, k % spec.episodes);
        write(&episodes_dir.join(format!("{stem}.csv")), &episode_csv(log))?;
        write(&episodes_dir.join(format!("{stem}_plans.csv")), &plans_csv(log))?;
    }

    let rows = stat_rows(spec, &worlds, &logs);
    let stats_path = dir.join("stats.csv");
    write(&stats_path, &stats_csv(&rows))?;
    write(&dir.join("stats.txt"), &stats_table(&rows))?;
    Ok(CampaignResult {
        rows,
        logs,
        stats_path,
    })
}

/// One row per strategy and threshold, strategies in spec order.
pub fn stat_rows(spec: &CampaignSpec, worlds: &[Arc<World>], logs: &[EpisodeLog]) -> Vec<StatRow> {
    let mut rows = Vec::new();
    for (s, &strategy) in spec.strategies.iter().enumerate() {
        let eps = &logs[s * spec.episodes..(s + 1) * spec.episodes];
        for k in 0..spec.thresholds.len() {
            let metrics: Vec<_> = eps
                .iter()
                .map(|log| {
                    let t = spec.thresholds.resolve(log.free_area_m2)[k];
                    log.metrics_at(t)
                })
                .collect();
            let label = spec.thresholds.resolve(worlds[0].free_area_m2())[k];
            rows.push(StatRow::compute(
                strategy,
                label,
                spec.thresholds.fraction(k),
                &metrics,
            ));
        }
    }
    rows
}

fn create_dir(p: &Path) -> Result<()> {
    fs::create_dir_all(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))
}

fn write(p: &Path, text: &str) -> Result<()> {
    fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display())))
}
