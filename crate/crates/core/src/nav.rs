//! Grid navigation: obstacle inflation, 8-connected A* and a turn-then-drive
//! path follower.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, GridGeometry, Point, Pose};
use crate::grid_map::{CellClass, GridMap};

/// Radius around an untraversable goal searched for a substitute cell.
pub const GOAL_RETARGET_M: f64 = 0.5;

/// Untraversable-cell mask with the geometry of the map it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMask {
    pub geom: GridGeometry,
    pub blocked: Vec<bool>,
}

impl CostMask {
    pub fn is_blocked(&self, col: usize, row: usize) -> bool {
        self.blocked[row * self.geom.cols + col]
    }

    pub fn blocked_at(&self, p: Point) -> bool {
        let (c, r) = self.geom.cell_coords(p);
        !self.geom.contains_coords(c, r) || self.is_blocked(c as usize, r as usize)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NavPath {
    pub waypoints: Vec<Point>,
    pub length_m: f64,
}

impl NavPath {
    pub fn new(waypoints: Vec<Point>) -> Self {
        let length_m = waypoints.windows(2).map(|w| w[0].dist(w[1])).sum();
        Self {
            waypoints,
            length_m,
        }
    }
}

/// Cell offsets whose centres lie within `radius` of the centre cell.
pub fn disc_offsets(resolution: f64, radius: f64) -> Vec<(i64, i64)> {
    let k = (radius / resolution).floor() as i64;
    let lim = (radius / resolution).powi(2) + 1e-9;
    let mut v = Vec::new();
    for dr in -k..=k {
        for dc in -k..=k {
            if (dc * dc + dr * dr) as f64 <= lim {
                v.push((dc, dr));
            }
        }
    }
    v
}

/// Marks Unknown-class cells and every cell within `robot_radius` of an
/// Occupied cell as untraversable.
pub fn inflate(map: &GridMap, robot_radius: f64) -> CostMask {
    let g = map.geometry();
    let mut blocked = vec![false; g.cols * g.rows];
    let offsets = disc_offsets(g.resolution, robot_radius);
    for row in 0..g.rows {
        for col in 0..g.cols {
            match map.class_cr(col, row) {
                CellClass::Unknown => blocked[row * g.cols + col] = true,
                CellClass::Occupied => {
                    for &(dc, dr) in &offsets {
                        let (c, r) = (col as i64 + dc, row as i64 + dr);
                        if g.contains_coords(c, r) {
                            blocked[r as usize * g.cols + c as usize] = true;
                        }
                    }
                }
                CellClass::Free => {}
            }
        }
    }
    CostMask { geom: g, blocked }
}

/// Single-cell version of [`inflate`], used to re-check a path against a
/// map that changed after planning.
pub fn is_traversable(map: &GridMap, col: usize, row: usize, offsets: &[(i64, i64)]) -> bool {
    let g = map.geometry();
    if map.class_cr(col, row) == CellClass::Unknown {
        return false;
    }
    offsets.iter().all(|&(dc, dr)| {
        let (c, r) = (col as i64 + dc, row as i64 + dr);
        !g.contains_coords(c, r) || map.class_cr(c as usize, r as usize) != CellClass::Occupied
    })
}

const MOVES: [(i64, i64); 8] = [
    (1, 0),
    (0, 1),
    (-1, 0),
    (0, -1),
    (1, 1),
    (-1, 1),
    (-1, -1),
    (1, -1),
];
const START_DIR: usize = 8;

/// Path cost as whole straight and diagonal step counts, so equal-length
/// paths compare exactly, plus the number of heading changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct Cost {
    straight: u32,
    diagonal: u32,
    turns: u32,
}

impl Cost {
    fn length(&self) -> f64 {
        self.straight as f64 + self.diagonal as f64 * std::f64::consts::SQRT_2
    }

    fn better_than(&self, other: &Cost) -> bool {
        if self.straight == other.straight && self.diagonal == other.diagonal {
            return self.turns < other.turns;
        }
        self.length() < other.length()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Open {
    f: f64,
    turns: u32,
    state: usize,
}

impl Eq for Open {}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.turns.cmp(&self.turns))
            .then_with(|| other.state.cmp(&self.state))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn octile(dc: i64, dr: i64) -> f64 {
    let (a, b) = (dc.unsigned_abs(), dr.unsigned_abs());
    let (lo, hi) = (a.min(b) as f64, a.max(b) as f64);
    (hi - lo) + lo * std::f64::consts::SQRT_2
}

fn nearest_traversable(mask: &CostMask, goal: Point) -> Option<(usize, usize)> {
    let g = mask.geom;
    let (gc, gr) = g.cell_coords(goal);
    let k = (GOAL_RETARGET_M / g.resolution).ceil() as i64 + 1;
    let mut best: Option<(f64, usize, usize)> = None;
    for r in gr - k..=gr + k {
        for c in gc - k..=gc + k {
            if !g.contains_coords(c, r) || mask.is_blocked(c as usize, r as usize) {
                continue;
            }
            let d = g.cell_center(c as usize, r as usize).dist(goal);
            if d <= GOAL_RETARGET_M && best.is_none_or(|(bd, _, _)| d < bd) {
                best = Some((d, c as usize, r as usize));
            }
        }
    }
    best.map(|(_, c, r)| (c, r))
}

/// Shortest 8-connected path (unit straight, sqrt(2) diagonal steps; no
/// diagonal squeezing past a blocked orthogonal neighbour). Among
/// equal-length paths the one with the fewest heading changes is returned.
pub fn astar(mask: &CostMask, start: Point, goal: Point) -> Result<NavPath> {
    let g = mask.geom;
    let (sc, sr) = g.cell_coords(start);
    if !g.contains_coords(sc, sr) || mask.is_blocked(sc as usize, sr as usize) {
        return Err(Error::StartBlocked);
    }
    let (sc, sr) = (sc as usize, sr as usize);
    let (gc, gr) = g.cell_coords(goal);
    let direct = g.contains_coords(gc, gr) && !mask.is_blocked(gc as usize, gr as usize);
    let (tc, tr) = if direct {
        (gc as usize, gr as usize)
    } else {
        nearest_traversable(mask, goal).ok_or(Error::Unreachable)?
    };
    let end_point = if direct { goal } else { g.cell_center(tc, tr) };

    if (sc, sr) == (tc, tr) {
        let wps = if start == end_point { vec![start] } else { vec![start, end_point] };
        return Ok(NavPath::new(wps));
    }

    let n = g.cols * g.rows;
    const NS: usize = 9;
    let mut best: Vec<Option<Cost>> = vec![None; n * NS];
    let mut parent: Vec<u32> = vec![u32::MAX; n * NS];
    let mut closed = vec![false; n * NS];
    let mut heap = BinaryHeap::new();
    let start_state = (sr * g.cols + sc) * NS + START_DIR;
    best[start_state] = Some(Cost::default());
    let h = |c: usize, r: usize| octile(c as i64 - tc as i64, r as i64 - tr as i64);
    heap.push(Open {
        f: h(sc, sr),
        turns: 0,
        state: start_state,
    });
    let mut found = None;
    while let Some(Open { state, .. }) = heap.pop() {
        if closed[state] {
            continue;
        }
        closed[state] = true;
        let cell = state / NS;
        let dir = state % NS;
        let (c, r) = (cell % g.cols, cell / g.cols);
        if (c, r) == (tc, tr) {
            found = Some(state);
            break;
        }
        let cost = best[state].expect("open states have a cost");
        for (k, &(dc, dr)) in MOVES.iter().enumerate() {
            let (nc, nr) = (c as i64 + dc, r as i64 + dr);
            if !g.contains_coords(nc, nr) || mask.is_blocked(nc as usize, nr as usize) {
                continue;
            }
            let diagonal = dc != 0 && dr != 0;
            if diagonal
                && (mask.is_blocked(nc as usize, r) || mask.is_blocked(c, nr as usize))
            {
                continue;
            }
            let mut next = cost;
            if diagonal {
                next.diagonal += 1;
            } else {
                next.straight += 1;
            }
            if dir != START_DIR && dir != k {
                next.turns += 1;
            }
            let ns = (nr as usize * g.cols + nc as usize) * NS + k;
            if closed[ns] {
                continue;
            }
            if best[ns].is_none_or(|b| next.better_than(&b)) {
                best[ns] = Some(next);
                parent[ns] = state as u32;
                heap.push(Open {
                    f: next.length() + h(nc as usize, nr as usize),
                    turns: next.turns,
                    state: ns,
                });
            }
        }
    }
    let mut state = found.ok_or(Error::Unreachable)?;
    let mut cells = vec![state / NS];
    while parent[state] != u32::MAX {
        state = parent[state] as usize;
        cells.push(state / NS);
    }
    cells.reverse();
    let mut wps = Vec::with_capacity(cells.len() + 1);
    wps.push(start);
    for &cell in &cells[1..cells.len() - 1] {
        wps.push(g.cell_center(cell % g.cols, cell / g.cols));
    }
    wps.push(end_point);
    Ok(NavPath::new(wps))
}

/// Turn-then-drive execution of `path`: rotate in place at `psi_max` toward
/// the next waypoint, then translate at `v_max`. Samples are `dt` apart
/// except for the final, shorter step of each phase.
pub fn follow(path: &NavPath, start: Pose, v_max: f64, psi_max: f64, dt: f64) -> Vec<(f64, Pose)> {
    let mut out = vec![(0.0, start)];
    let mut t = 0.0;
    let mut pose = start;
    for &wp in &path.waypoints {
        let from = pose.position();
        let seg = wp - from;
        let len = seg.norm();
        if len < 1e-12 {
            continue;
        }
        let target = seg.angle();
        let mut remaining = normalize_angle(target - pose.psi);
        let rot_step = psi_max * dt;
        while remaining != 0.0 {
            if remaining.abs() <= rot_step {
                t += remaining.abs() / psi_max;
                pose.psi = target;
                remaining = 0.0;
            } else {
                t += dt;
                pose.psi = normalize_angle(pose.psi + rot_step.copysign(remaining));
                remaining -= rot_step.copysign(remaining);
            }
            out.push((t, pose));
        }
        let u = seg * (1.0 / len);
        let step = v_max * dt;
        let mut travelled = 0.0;
        while travelled < len {
            if len - travelled <= step {
                t += (len - travelled) / v_max;
                travelled = len;
                pose.x = wp.x;
                pose.y = wp.y;
            } else {
                travelled += step;
                t += dt;
                let p = from + u * travelled;
                pose.x = p.x;
                pose.y = p.y;
            }
            out.push((t, pose));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_map::{CellIndex, SensorModel};

    fn geom(cols: usize, rows: usize) -> GridGeometry {
        GridGeometry {
            origin: Point::new(0.0, 0.0),
            resolution: 0.05,
            cols,
            rows,
        }
    }

    fn free_map(cols: usize, rows: usize) -> GridMap {
        let mut m = GridMap::new(geom(cols, rows), SensorModel::default());
        for r in 0..rows {
            for c in 0..cols {
                m.apply_observation(CellIndex::new(c, r), false).unwrap();
            }
        }
        m
    }

    fn occupy(m: &mut GridMap, c: usize, r: usize) {
        for _ in 0..3 {
            m.apply_observation(CellIndex::new(c, r), true).unwrap();
        }
    }

    #[test]
    fn zero_radius_masks_occupied_and_unknown() {
        let mut m = GridMap::new(geom(10, 10), SensorModel::default());
        for c in 0..5 {
            m.apply_observation(CellIndex::new(c, 0), false).unwrap();
        }
        occupy(&mut m, 2, 0);
        let mask = inflate(&m, 0.0);
        let blocked: Vec<_> = (0..5).map(|c| mask.is_blocked(c, 0)).collect();
        assert_eq!(blocked, vec![false, false, true, false, false]);
        assert!(mask.is_blocked(7, 0));
        assert!(mask.is_blocked(0, 1));
    }

    #[test]
    fn single_obstacle_inflates_to_21_cell_disc() {
        let mut m = free_map(20, 20);
        occupy(&mut m, 10, 10);
        let mask = inflate(&m, 2.5 * 0.05);
        assert_eq!(mask.blocked.iter().filter(|b| **b).count(), 21);
    }

    #[test]
    fn free_map_masks_nothing() {
        let m = free_map(20, 20);
        assert!(inflate(&m, 0.2).blocked.iter().all(|b| !b));
    }

    #[test]
    fn start_equals_goal() {
        let mask = inflate(&free_map(10, 10), 0.0);
        let p = Point::new(0.125, 0.125);
        let path = astar(&mask, p, p).unwrap();
        assert_eq!(path.waypoints, vec![p]);
        assert_eq!(path.length_m, 0.0);
    }

    #[test]
    fn corner_to_corner_is_octile() {
        let mask = inflate(&free_map(10, 10), 0.0);
        let g = mask.geom;
        let path = astar(&mask, g.cell_center(0, 0), g.cell_center(9, 9)).unwrap();
        assert!((path.length_m - 9.0 * 2f64.sqrt() * 0.05).abs() < 1e-12);
        assert_eq!(path.waypoints.len(), 10);
    }

    #[test]
    fn sealed_goal_is_unreachable() {
        let mut m = free_map(30, 30);
        for i in 10..=20 {
            occupy(&mut m, i, 10);
            occupy(&mut m, i, 20);
            occupy(&mut m, 10, i);
            occupy(&mut m, 20, i);
        }
        let mask = inflate(&m, 0.0);
        let g = mask.geom;
        assert_eq!(
            astar(&mask, g.cell_center(2, 2), g.cell_center(15, 15)),
            Err(Error::Unreachable)
        );
    }

    #[test]
    fn blocked_goal_is_retargeted_nearby() {
        let mut m = free_map(40, 40);
        occupy(&mut m, 20, 20);
        let mask = inflate(&m, 0.1);
        let g = mask.geom;
        let goal = g.cell_center(20, 20);
        let path = astar(&mask, g.cell_center(2, 2), goal).unwrap();
        let end = *path.waypoints.last().unwrap();
        assert!(end.dist(goal) <= GOAL_RETARGET_M);
        assert!(!mask.blocked_at(end));
    }

    #[test]
    fn blocked_start_is_an_error() {
        let mut m = free_map(10, 10);
        occupy(&mut m, 1, 1);
        let mask = inflate(&m, 0.0);
        assert_eq!(
            astar(&mask, mask.geom.cell_center(1, 1), mask.geom.cell_center(5, 5)),
            Err(Error::StartBlocked)
        );
    }

    #[test]
    fn straight_path_has_no_zigzag() {
        let mask = inflate(&free_map(60, 60), 0.0);
        let g = mask.geom;
        let path = astar(&mask, g.cell_center(2, 2), g.cell_center(50, 20)).unwrap();
        let mut turns = 0;
        for w in path.waypoints.windows(3) {
            let a = (w[1] - w[0]).angle();
            let b = (w[2] - w[1]).angle();
            if (a - b).abs() > 1e-9 {
                turns += 1;
            }
        }
        assert_eq!(turns, 1);
    }

    #[test]
    fn follow_straight_segment_timing() {
        let path = NavPath::new(vec![Point::new(0.0, 0.0), Point::new(3.0, 0.0)]);
        let traj = follow(&path, Pose::new(0.0, 0.0, 0.0), 0.3, 1.0, 0.05);
        let (t, p) = *traj.last().unwrap();
        assert!((t - 10.0).abs() < 1e-9, "{t}");
        assert_eq!(p.position(), Point::new(3.0, 0.0));
    }

    #[test]
    fn follow_quarter_turn_timing() {
        let path = NavPath::new(vec![Point::new(0.0, 0.0), Point::new(0.0, 1.0)]);
        let traj = follow(&path, Pose::new(0.0, 0.0, 0.0), 0.3, 1.0, 0.05);
        let turn_end = traj
            .iter()
            .find(|(_, p)| (p.psi - std::f64::consts::FRAC_PI_2).abs() < 1e-12)
            .unwrap()
            .0;
        assert!((turn_end - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn follow_empty_motion() {
        let start = Pose::new(1.0, 1.0, 0.2);
        let path = NavPath::new(vec![start.position()]);
        assert_eq!(follow(&path, start, 0.3, 1.0, 0.05), vec![(0.0, start)]);
    }

    #[test]
    fn disc_offsets_count() {
        assert_eq!(disc_offsets(0.05, 0.0).len(), 1);
        assert_eq!(disc_offsets(0.05, 0.125).len(), 21);
    }
}
