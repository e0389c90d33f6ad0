mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{box_world, clip_length, partial_map, square_geom, RES};
use nbv_core::geometry::GridGeometry;
use nbv_core::planner::{cell_gain, plan_frontier, select_cluster, plan_modified_nbv, plan_rh_nbv, visible_unknown_count};
use nbv_core::{CellClass, CellIndex, Error, GridMap, PlanResult, PlannerParams, Point, Pose, SensorModel, Strategy};

fn set(map: &mut GridMap, c: usize, r: usize, class: CellClass) {
    let hit = match class {
        CellClass::Free => false,
        CellClass::Occupied => true,
        CellClass::Unknown => return,
    };
    for _ in 0..3 {
        map.apply_observation(CellIndex::new(c, r), hit).unwrap();
    }
}

fn map_from(geom: GridGeometry, class: impl Fn(Point) -> CellClass) -> GridMap {
    let mut m = GridMap::new(geom, SensorModel::default());
    for r in 0..geom.rows {
        for c in 0..geom.cols {
            set(&mut m, c, r, class(geom.cell_center(c, r)));
        }
    }
    m
}

/// Checks every tree invariant, returning the number of edges checked.
fn check_tree(map: &GridMap, r: &PlanResult, p: &PlannerParams) -> usize {
    let t = &r.tree;
    assert!(t[0].parent.is_none());
    let mut edges = 0;
    for (i, n) in t.iter().enumerate().skip(1) {
        let parent = n.parent.expect("non-root has a parent");
        assert!(parent < i);
        let a = t[parent].position;
        let len = a.dist(n.position);
        assert!(len <= p.epsilon + 1e-9, "edge {len}");
        assert!(n.gain >= t[parent].gain, "gain decreased along a branch");
        if len > 0.0 {
            // dense re-check of the segment plus overshoot
            let u = (n.position - a) * (1.0 / len);
            let reach = len + p.alpha;
            let steps = (reach / (map.resolution() / 4.0)).ceil() as usize;
            for k in 0..=steps {
                let q = a + u * (reach * k as f64 / steps as f64);
                let cell = map.world_to_cell(q).expect("overshoot stays on the map");
                assert_ne!(map.classify(cell).unwrap(), CellClass::Occupied);
            }
        }
        edges += 1;
    }
    // goal is the depth-1 ancestor of the best vertex
    let mut k = r.best_node;
    while t[k].parent != Some(0) {
        k = t[k].parent.unwrap();
    }
    assert_eq!(r.goal.position(), t[k].position);
    assert!(r.best_gain >= t.iter().map(|n| n.gain).fold(0.0, f64::max) - 1e-12);
    edges
}

#[test]
fn modified_nbv_invariants_on_partial_maps() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let params = PlannerParams::default();
    let mut ok = 0;
    for i in 0..200 {
        let w = box_world(&mut rng, 160, 160, 5);
        let (map, pose) = partial_map(&w, &mut rng, 1 + i % 3);
        let mut prng = ChaCha8Rng::seed_from_u64(i as u64);
        match plan_modified_nbv(&map, pose, &params, &mut prng) {
            Ok(r) => {
                check_tree(&map, &r, &params);
                ok += 1;
            }
            Err(e) => assert_eq!(e, Error::NoProgress),
        }
    }
    assert!(ok > 150);
}

#[test]
fn strict_duplicates_keep_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let params = PlannerParams {
        strict_eq2: true,
        ..PlannerParams::default()
    };
    for i in 0..30 {
        let w = box_world(&mut rng, 120, 120, 8);
        let (map, pose) = partial_map(&w, &mut rng, 2);
        if let Ok(r) = plan_modified_nbv(&map, pose, &params, &mut ChaCha8Rng::seed_from_u64(i)) {
            for n in r.tree.iter().skip(1) {
                assert!(r.tree[n.parent.unwrap()].position.dist(n.position) <= params.epsilon + 1e-9);
            }
        }
    }
}

#[test]
fn planners_are_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let w = box_world(&mut rng, 160, 160, 5);
    let (map, pose) = partial_map(&w, &mut rng, 2);
    for s in Strategy::ALL {
        let a = s.plan(&map, pose, &PlannerParams::default(), &mut ChaCha8Rng::seed_from_u64(3));
        let b = s.plan(&map, pose, &PlannerParams::default(), &mut ChaCha8Rng::seed_from_u64(3));
        match (a, b) {
            (Ok(a), Ok(b)) => {
                assert_eq!(a.tree, b.tree);
                assert_eq!(a.goal, b.goal);
            }
            (a, b) => assert_eq!(a.err(), b.err()),
        }
    }
}

#[test]
fn single_vertex_tree_returns_that_vertex() {
    let geom = square_geom(100);
    let map = map_from(geom, |p| if p.x < 2.5 { CellClass::Free } else { CellClass::Unknown });
    let params = PlannerParams {
        n_max: 1,
        ..PlannerParams::default()
    };
    let r = plan_modified_nbv(&map, Pose::new(1.0, 2.5, 0.0), &params, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    assert_eq!(r.tree.len(), 2);
    assert_eq!(r.best_node, 1);
    assert_eq!(r.goal.position(), r.tree[1].position);
}

/// Straight 1.2 m wide hall with walls everywhere except an unexplored
/// continuation past its right end. The robot stands at the centre, so
/// free space alone does not favour either side.
fn dead_end_hall() -> (GridMap, Pose) {
    let geom = GridGeometry {
        origin: Point::new(0.0, 0.0),
        resolution: RES,
        cols: 200,
        rows: 120,
    };
    let map = map_from(geom, |p| {
        let in_hall = (p.y - 3.0).abs() < 0.6;
        if in_hall && p.x > 5.5 {
            CellClass::Unknown
        } else if in_hall && p.x > 2.5 {
            CellClass::Free
        } else {
            CellClass::Occupied
        }
    });
    (map, Pose::new(4.0, 3.0, 0.0))
}

fn rightward_goals(params: &PlannerParams, seeds: u64) -> u64 {
    let (map, pose) = dead_end_hall();
    (0..seeds)
        .filter(|&s| {
            let r = plan_modified_nbv(&map, pose, params, &mut ChaCha8Rng::seed_from_u64(s)).unwrap();
            r.goal.position().x > pose.x
        })
        .count() as u64
}

#[test]
fn goal_heads_toward_the_remaining_unknown_corridor() {
    let params = PlannerParams {
        clamp_occupied_gain: true,
        ..PlannerParams::default()
    };
    // about 0.85 measured; a fair coin reaches 150/200 with p < 1e-12
    let right = rightward_goals(&params, 200);
    assert!(right >= 150, "{right}/200");
}

#[test]
fn unclamped_gain_scores_walls_above_unknown() {
    let (map, _) = dead_end_hall();
    let g = map.geometry();
    let p = PlannerParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (wc, wr) = g.cell_coords(Point::new(4.0, 2.3));
    let (uc, ur) = g.cell_coords(Point::new(7.0, 3.0));
    let wall = CellIndex::new(wc as usize, wr as usize);
    let unknown = CellIndex::new(uc as usize, ur as usize);
    let n = p.n_gain_samples;
    let gw = cell_gain(&map, wall, p.gamma, p.r_gain_max, n, false, &mut rng);
    let gu = cell_gain(&map, unknown, p.gamma, p.r_gain_max, n, false, &mut rng);
    assert_eq!(gu, n as f64);
    assert!(gw > 5.0 * gu, "{gw} vs {gu}");
    let clamped = cell_gain(&map, wall, p.gamma, p.r_gain_max, n, true, &mut rng);
    assert!(clamped < 1.0, "{clamped}");
}

/// Unknown cells in range whose sight line meets no occupied interior.
fn brute_visible(map: &GridMap, p: Point, range: f64) -> usize {
    let g = map.geometry();
    let occupied: Vec<(f64, f64)> = (0..g.rows)
        .flat_map(|r| (0..g.cols).map(move |c| (c, r)))
        .filter(|&(c, r)| map.classify(CellIndex::new(c, r)).unwrap() == CellClass::Occupied)
        .map(|(c, r)| (c as f64 * RES, r as f64 * RES))
        .collect();
    let mut n = 0;
    for r in 0..g.rows {
        for c in 0..g.cols {
            if map.classify(CellIndex::new(c, r)).unwrap() != CellClass::Unknown {
                continue;
            }
            let t = g.cell_center(c, r);
            if t.dist(p) > range {
                continue;
            }
            if occupied.iter().all(|&(x, y)| clip_length(p, t, x, y, RES) <= 1e-12) {
                n += 1;
            }
        }
    }
    n
}

#[test]
fn visible_unknown_count_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..6 {
        // half-known disc with a few random walls
        let blocks: Vec<(f64, f64)> = (0..5)
            .map(|_| (rng.random_range(0.5..3.5), rng.random_range(0.5..3.5)))
            .collect();
        let map = map_from(square_geom(80), |q| {
            if blocks.iter().any(|&(x, y)| (q.x - x).abs() < 0.15 && (q.y - y).abs() < 0.3) {
                CellClass::Occupied
            } else if q.x < 2.0 {
                CellClass::Free
            } else {
                CellClass::Unknown
            }
        });
        let p = Point::new(rng.random_range(1.6..1.99), rng.random_range(0.5..3.5));
        if map.classify(map.world_to_cell(p).unwrap()).unwrap() == CellClass::Occupied {
            continue;
        }
        for range in [1.0, 2.5, 8.0] {
            assert_eq!(visible_unknown_count(&map, p, range), brute_visible(&map, p, range));
        }
    }
}

#[test]
fn rh_nbv_in_fully_known_space_makes_no_progress() {
    let map = map_from(square_geom(60), |_| CellClass::Free);
    let r = plan_rh_nbv(&map, Pose::new(1.5, 1.5, 0.0), &PlannerParams::default(), &mut ChaCha8Rng::seed_from_u64(0));
    assert_eq!(r.err(), Some(Error::NoProgress));
    let f = plan_frontier(&map, Pose::new(1.5, 1.5, 0.0), &PlannerParams::default(), &mut ChaCha8Rng::seed_from_u64(0));
    assert_eq!(f.err(), Some(Error::NoProgress));
}

#[test]
fn frontier_goal_near_the_only_frontier_cell() {
    // 1 x 1 m room closed by walls; one unknown cell diagonal to its corner
    let geom = square_geom(30);
    let mut map = GridMap::new(geom, SensorModel::default());
    let (lo, hi) = (5usize, 24usize);
    for r in 0..30 {
        for c in 0..30 {
            let inside = (lo..=hi).contains(&c) && (lo..=hi).contains(&r);
            let class = if inside { CellClass::Free } else { CellClass::Occupied };
            if (c, r) != (hi + 1, hi + 1) {
                set(&mut map, c, r, class);
            }
        }
    }
    let frontier: Vec<(usize, usize)> = (0..30)
        .flat_map(|r| (0..30).map(move |c| (c, r)))
        .filter(|&(c, r)| map.is_frontier(CellIndex::new(c, r)).unwrap())
        .collect();
    assert_eq!(frontier, vec![(hi, hi)]);
    let params = PlannerParams {
        alpha: 0.01,
        n_abs_max: 20_000,
        ..PlannerParams::default()
    };
    let target = geom.cell_center(hi, hi);
    let r = plan_frontier(&map, Pose::new(0.5, 0.5, 0.0), &params, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    assert!(r.goal.position().dist(target) <= 0.5, "{:?}", r.goal);
}

#[test]
fn frontier_prefers_the_nearer_of_two_equal_clusters() {
    let geom = GridGeometry {
        origin: Point::new(0.0, 0.0),
        resolution: RES,
        cols: 240,
        rows: 80,
    };
    // identical 0.6 m unknown squares 2 m and 4 m from the robot
    let pose = Pose::new(2.0, 2.0, 0.0);
    let near = Point::new(4.0, 2.0);
    let far = Point::new(6.0, 2.0);
    let map = map_from(geom, |p| {
        let inside = |c: Point| (p.x - c.x).abs() < 0.3 && (p.y - c.y).abs() < 0.3;
        if inside(near) || inside(far) {
            CellClass::Unknown
        } else {
            CellClass::Free
        }
    });
    // the same detection pattern on the near side of each patch
    let offsets = [(-0.4, 0.05), (-0.4, 0.2), (-0.35, 0.1)];
    let mut detections: Vec<Point> = offsets.iter().map(|&(dx, dy)| far + Point::new(dx, dy)).collect();
    detections.extend(offsets.iter().map(|&(dx, dy)| near + Point::new(dx, dy)));
    let params = PlannerParams::default();
    let best = select_cluster(&map, pose.position(), &detections, params.r_gain_max, params.lambda).unwrap();
    assert!(best.centroid.dist(near) < 0.5, "{:?}", best.centroid);
    assert_eq!(best.members, vec![3, 4, 5]);
    let alone = select_cluster(&map, pose.position(), &detections[..3], params.r_gain_max, params.lambda).unwrap();
    let d = alone.centroid.dist(pose.position()) - best.centroid.dist(pose.position());
    assert!((alone.utility - best.utility * (-params.lambda * d).exp()).abs() < 1e-9);
}

/// Exact expectation of the cell gain: every cell overlapping the disc,
/// weighted by its share of the disc area (fine subgrid integration).
fn disc_expectation(map: &GridMap, center: Point, gamma: f64, radius: f64) -> (f64, f64) {
    let sub = 40;
    let step = RES / sub as f64;
    let g = map.geometry();
    let (mut mean, mut second, mut total) = (0.0, 0.0, 0.0);
    let span = (radius / RES).ceil() as i64 + 1;
    let (cc, rc) = g.cell_coords(center);
    for r in rc - span..=rc + span {
        for c in cc - span..=cc + span {
            let mut inside = 0usize;
            for i in 0..sub {
                for j in 0..sub {
                    let q = Point::new(
                        c as f64 * RES + (i as f64 + 0.5) * step,
                        r as f64 * RES + (j as f64 + 0.5) * step,
                    );
                    if q.dist(center) <= radius {
                        inside += 1;
                    }
                }
            }
            if inside == 0 {
                continue;
            }
            let w = inside as f64;
            let p = if g.contains_coords(c, r) {
                map.probability(CellIndex::new(c as usize, r as usize)).unwrap()
            } else {
                0.5
            };
            let v = (-gamma * (1.0 - 2.0 * p)).exp();
            mean += w * v;
            second += w * v * v;
            total += w;
        }
    }
    let mean = mean / total;
    (mean, second / total - mean * mean)
}

#[test]
fn cell_gain_mean_matches_disc_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut map = GridMap::new(square_geom(40), SensorModel::default());
    for r in 0..40 {
        for c in 0..40 {
            let k = rng.random_range(0..5);
            for _ in 0..k {
                map.apply_observation(CellIndex::new(c, r), rng.random_bool(0.3)).unwrap();
            }
        }
    }
    for gamma in [4.0, 1.0] {
        let cell = CellIndex::new(20, 20);
        let n = 20;
        let trials = 1000;
        let mut draw = ChaCha8Rng::seed_from_u64(77);
        let sum: f64 = (0..trials)
            .map(|_| cell_gain(&map, cell, gamma, 0.3, n, false, &mut draw))
            .sum();
        let observed = sum / trials as f64;
        let (mu, var) = disc_expectation(&map, map.cell_center(cell), gamma, 0.3);
        let expected = n as f64 * mu;
        let se = (n as f64 * var / trials as f64).sqrt();
        assert!((observed - expected).abs() <= 3.0 * se, "{observed} vs {expected} (se {se})");
    }
}
