//! Episode CSV files.
//!
//! `episode.csv` holds only simulated quantities and is reproducible byte
//! for byte. Wall-clock planner timings go to a separate plans file.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::Pose;
use crate::sim::{EpisodeLog, Event, PlanOutcome, PlanRecord, Record};

pub const EPISODE_HEADER: &str = "sim_time_s,x_m,y_m,psi_rad,coverage_m2,event";
pub const PLANS_HEADER: &str = "sim_time_s,compute_s,outcome,goal_x_m,goal_y_m,goal_psi_rad,iterations";

pub fn episode_csv(log: &EpisodeLog) -> String {
    let mut s = String::with_capacity(64 * log.records.len());
    s.push_str(EPISODE_HEADER);
    s.push('\n');
    for r in &log.records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.sim_time,
            r.pose.x,
            r.pose.y,
            r.pose.psi,
            r.coverage_m2,
            r.event.name()
        );
    }
    s
}

pub fn plans_csv(log: &EpisodeLog) -> String {
    let mut s = String::new();
    s.push_str(PLANS_HEADER);
    s.push('\n');
    for p in &log.plans {
        let g = p.goal.unwrap_or(Pose {
            x: f64::NAN,
            y: f64::NAN,
            psi: f64::NAN,
        });
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            p.sim_time,
            p.compute_s,
            p.outcome.name(),
            g.x,
            g.y,
            g.psi,
            p.iterations
        );
    }
    s
}

fn field<T: std::str::FromStr>(line: usize, name: &str, v: Option<&str>) -> Result<T> {
    v.and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::Parse(format!("line {line}: bad {name}")))
}

fn check_header(text: &str, header: &str) -> Result<()> {
    match text.lines().next() {
        Some(h) if h.trim() == header => Ok(()),
        _ => Err(Error::Parse(format!("expected header `{header}`"))),
    }
}

/// Parses an episode CSV. Path lengths are rebuilt from robot poses.
pub fn parse_episode_csv(text: &str) -> Result<Vec<Record>> {
    check_header(text, EPISODE_HEADER)?;
    let mut out: Vec<Record> = Vec::new();
    let mut path = 0.0;
    let mut last = None;
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split(',');
        let sim_time = field(i + 1, "sim_time_s", it.next())?;
        let x = field(i + 1, "x_m", it.next())?;
        let y = field(i + 1, "y_m", it.next())?;
        let psi = field(i + 1, "psi_rad", it.next())?;
        let coverage_m2 = field(i + 1, "coverage_m2", it.next())?;
        let event = match it.next().map(str::trim) {
            Some("scan") => Event::Scan,
            Some("plan") => Event::Plan,
            Some("goal") => Event::Goal,
            Some("done") => Event::Done,
            _ => return Err(Error::Parse(format!("line {}: bad event", i + 1))),
        };
        let pose = Pose { x, y, psi };
        if event != Event::Goal {
            if let Some(prev) = last {
                path += pose.position().dist(prev);
            }
            last = Some(pose.position());
        }
        out.push(Record {
            sim_time,
            pose,
            coverage_m2,
            event,
            path_length_m: path,
        });
    }
    Ok(out)
}

pub fn parse_plans_csv(text: &str) -> Result<Vec<PlanRecord>> {
    check_header(text, PLANS_HEADER)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split(',');
        let sim_time = field(i + 1, "sim_time_s", it.next())?;
        let compute_s = field(i + 1, "compute_s", it.next())?;
        let outcome = match it.next().map(str::trim) {
            Some("goal") => PlanOutcome::Goal,
            Some("no_progress") => PlanOutcome::NoProgress,
            Some("unreachable") => PlanOutcome::Unreachable,
            Some("no_motion") => PlanOutcome::NoMotion,
            _ => return Err(Error::Parse(format!("line {}: bad outcome", i + 1))),
        };
        let x: f64 = field(i + 1, "goal_x_m", it.next())?;
        let y: f64 = field(i + 1, "goal_y_m", it.next())?;
        let psi: f64 = field(i + 1, "goal_psi_rad", it.next())?;
        let iterations = field(i + 1, "iterations", it.next())?;
        out.push(PlanRecord {
            sim_time,
            compute_s,
            outcome,
            goal: (!x.is_nan()).then_some(Pose { x, y, psi }),
            iterations,
        });
    }
    Ok(out)
}
