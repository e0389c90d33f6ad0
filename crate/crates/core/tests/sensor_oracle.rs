mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{box_world, random_free_point, ray_entry, RES};
use nbv_core::geometry::{GridGeometry, GridRay};
use nbv_core::sensor::{cast_ray, integrate_scan, simulate_scan};
use nbv_core::{GridMap, LidarSpec, Point, Pose, SensorModel, World};

/// Nearest entry of the ray into any solid square, by brute force.
fn oracle_range(world: &World, o: Point, angle: f64) -> Option<f64> {
    let u = Point::from_polar(1.0, angle);
    let mut best: Option<f64> = None;
    for r in 0..world.rows {
        for c in 0..world.cols {
            if !world.cell_solid(c, r) {
                continue;
            }
            if let Some(t) = ray_entry(o, u, c as f64 * RES, r as f64 * RES, RES) {
                best = Some(best.map_or(t, |b: f64| b.min(t)));
            }
        }
    }
    best
}

#[test]
fn cast_ray_matches_continuous_geometry() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let tol = RES * 2f64.sqrt();
    let mut checked = 0;
    for _ in 0..10 {
        let w = box_world(&mut rng, 100, 100, 6);
        for _ in 0..100 {
            let o = random_free_point(&w, &mut rng);
            let a = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            let want = oracle_range(&w, o, a).expect("closed world");
            let got = cast_ray(&w, o, a, 100.0).expect("closed world");
            assert!((got - want).abs() <= tol, "{o:?} {a}: {got} vs {want}");
            assert!((got - want).abs() < 1e-9, "{o:?} {a}: {got} vs {want}");
            checked += 1;
        }
    }
    assert_eq!(checked, 1000);
}

#[test]
fn noise_free_scan_ranges_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let w = box_world(&mut rng, 120, 80, 5);
    let spec = LidarSpec {
        range_noise_sigma: 0.0,
        ray_count: 97,
        max_range: 3.0,
        ..LidarSpec::default()
    };
    let o = random_free_point(&w, &mut rng);
    let pose = Pose::new(o.x, o.y, 0.4);
    let scan = simulate_scan(&w, pose, &spec, &mut rng).unwrap();
    for i in 0..spec.ray_count {
        let want = oracle_range(&w, o, scan.bearing(i)).unwrap();
        if want <= spec.max_range {
            assert!(scan.hit_flags[i]);
            assert!((scan.ranges[i] - want).abs() < 1e-9);
        } else {
            assert!(!scan.hit_flags[i]);
            assert_eq!(scan.ranges[i], spec.max_range);
        }
    }
}

#[test]
fn open_space_coverage_matches_sector_area() {
    let n = 400;
    let mut cells = vec![false; n * n];
    for r in 0..n {
        for c in 0..n {
            cells[r * n + c] = c == 0 || r == 0 || c + 1 == n || r + 1 == n;
        }
    }
    let w = World::from_cells("open", RES, n, n, cells).unwrap();
    let spec = LidarSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let scan = simulate_scan(&w, Pose::new(10.0, 10.0, 0.3), &spec, &mut rng).unwrap();
    let mut map = GridMap::for_world(&w, SensorModel::default());
    integrate_scan(&mut map, &scan);
    let sector = spec.fov / 2.0 * spec.max_range * spec.max_range;
    let rel = (map.coverage_m2() - sector).abs() / sector;
    assert!(rel < 0.05, "{} vs {sector}", map.coverage_m2());
}

fn geom() -> GridGeometry {
    common::square_geom(200)
}

proptest! {
    #[test]
    fn ray_visits_one_cell_per_crossing(
        ax in 0.01f64..9.99, ay in 0.01f64..9.99, bx in 0.01f64..9.99, by in 0.01f64..9.99,
    ) {
        let (a, b) = (Point::new(ax, ay), Point::new(bx, by));
        let cells: Vec<_> = GridRay::segment(geom(), a, b).collect();
        let (ca, ra) = geom().cell_coords(a);
        let (cb, rb) = geom().cell_coords(b);
        let crossings = (cb - ca).unsigned_abs() + (rb - ra).unsigned_abs();
        prop_assert_eq!(cells.len() as u64, crossings + 1);
        prop_assert_eq!((cells[0].col as i64, cells[0].row as i64), (ca, ra));
        let last = cells[cells.len() - 1];
        prop_assert_eq!((last.col as i64, last.row as i64), (cb, rb));
        for w in cells.windows(2) {
            let d = (w[0].col as i64 - w[1].col as i64).abs() + (w[0].row as i64 - w[1].row as i64).abs();
            prop_assert_eq!(d, 1);
            prop_assert!(w[1].t_enter >= w[0].t_enter);
        }
    }

    #[test]
    fn ray_cells_cover_the_segment(
        ax in 0.01f64..9.99, ay in 0.01f64..9.99, bx in 0.01f64..9.99, by in 0.01f64..9.99,
    ) {
        let (a, b) = (Point::new(ax, ay), Point::new(bx, by));
        let cells: std::collections::HashSet<(usize, usize)> =
            GridRay::segment(geom(), a, b).map(|c| (c.col, c.row)).collect();
        for k in 0..=400 {
            let p = a + (b - a) * (k as f64 / 400.0);
            let (c, r) = geom().cell_coords(p);
            // skip samples sitting on a cell edge, where either side is valid
            let fx = p.x / RES - (p.x / RES).round();
            let fy = p.y / RES - (p.y / RES).round();
            if fx.abs() < 1e-9 || fy.abs() < 1e-9 {
                continue;
            }
            prop_assert!(cells.contains(&(c as usize, r as usize)));
        }
    }
}
