use std::fmt::Write as _;

use crate::planner::Strategy;
use crate::sim::ThresholdMetrics;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

/// Mean and sample standard deviation. NaN for no values, std 0 for one.
pub fn mean_std(xs: &[f64]) -> MeanStd {
    let n = xs.len();
    if n == 0 {
        return MeanStd {
            mean: f64::NAN,
            std: f64::NAN,
        };
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let std = if n == 1 {
        0.0
    } else {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    MeanStd { mean, std }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatRow {
    pub strategy: Strategy,
    pub threshold_m2: f64,
    /// Set when thresholds were given as fractions of the free area.
    pub threshold_fraction: Option<f64>,
    pub episodes: usize,
    pub successful_iterations: usize,
    pub path_length_m: MeanStd,
    pub exec_time_s: MeanStd,
    pub compute_time_s: MeanStd,
    /// Planner wall-clock per call, pooled over the calls counted above.
    pub compute_per_call_s: f64,
    /// Mean path over mean execution time, to 2 decimals.
    pub average_speed_mps: f64,
}

impl StatRow {
    /// `metrics` holds one entry per episode, `None` where the threshold
    /// was never reached.
    pub fn compute(
        strategy: Strategy,
        threshold_m2: f64,
        threshold_fraction: Option<f64>,
        metrics: &[Option<ThresholdMetrics>],
    ) -> Self {
        let ok: Vec<&ThresholdMetrics> = metrics.iter().flatten().collect();
        let path: Vec<f64> = ok.iter().map(|m| m.path_length_m).collect();
        let exec: Vec<f64> = ok.iter().map(|m| m.exec_time_s).collect();
        let comp: Vec<f64> = ok.iter().map(|m| m.compute_time_s).collect();
        let calls: usize = ok.iter().map(|m| m.plan_calls).sum();
        let path_length_m = mean_std(&path);
        let exec_time_s = mean_std(&exec);
        // a threshold met by the first scan has no motion behind it
        let speed = if exec_time_s.mean == 0.0 {
            0.0
        } else {
            path_length_m.mean / exec_time_s.mean
        };
        Self {
            strategy,
            threshold_m2,
            threshold_fraction,
            episodes: metrics.len(),
            successful_iterations: ok.len(),
            path_length_m,
            exec_time_s,
            compute_time_s: mean_std(&comp),
            compute_per_call_s: if calls == 0 {
                f64::NAN
            } else {
                comp.iter().fold(0.0, |a, c| a + c) / calls as f64
            },
            average_speed_mps: (speed * 100.0).round() / 100.0,
        }
    }
}

pub const STATS_HEADER: &str = "strategy,threshold_m2,threshold_fraction,successful_iterations,episodes,\
path_length_mean_m,path_length_std_m,exec_time_mean_s,exec_time_std_s,\
compute_time_mean_s,compute_time_std_s,compute_per_call_s,average_speed_mps";

pub fn stats_csv(rows: &[StatRow]) -> String {
    let mut s = String::from(STATS_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.strategy,
            r.threshold_m2,
            r.threshold_fraction.unwrap_or(f64::NAN),
            r.successful_iterations,
            r.episodes,
            r.path_length_m.mean,
            r.path_length_m.std,
            r.exec_time_s.mean,
            r.exec_time_s.std,
            r.compute_time_s.mean,
            r.compute_time_s.std,
            r.compute_per_call_s,
            r.average_speed_mps
        );
    }
    s
}

/// Human-readable table in the layout of the statistics CSV.
pub fn stats_table(rows: &[StatRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<9} {:>10} {:>7} {:>18} {:>20} {:>18} {:>9}",
        "method", "area_m2", "success", "path_m", "exec_s", "compute_s", "speed"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<9} {:>10.2} {:>4}/{:<2} {:>8.2} ± {:>7.2} {:>9.2} ± {:>8.2} {:>7.3} ± {:>7.3} {:>9.2}",
            r.strategy.name(),
            r.threshold_m2,
            r.successful_iterations,
            r.episodes,
            r.path_length_m.mean,
            r.path_length_m.std,
            r.exec_time_s.mean,
            r.exec_time_s.std,
            r.compute_time_s.mean,
            r.compute_time_s.std,
            r.average_speed_mps
        );
    }
    s
}
