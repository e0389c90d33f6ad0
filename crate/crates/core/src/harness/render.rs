use std::path::Path;

use image::{Rgb, RgbImage};

use crate::error::{Error, Result};
use crate::geometry::{GridGeometry, GridRay, Point};
use crate::grid_map::MapImage;
use crate::sim::{Event, Record};

pub const PATH_COLOR: Rgb<u8> = Rgb([0, 0, 255]);
pub const GOAL_COLOR: Rgb<u8> = Rgb([255, 0, 0]);
pub const START_COLOR: Rgb<u8> = Rgb([0, 200, 0]);
pub const END_COLOR: Rgb<u8> = Rgb([255, 220, 0]);

/// What gets drawn over the occupancy layer.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overlay {
    pub path: Vec<Point>,
    pub goals: Vec<Point>,
}

impl Overlay {
    pub fn from_records(records: &[Record]) -> Self {
        let mut o = Overlay::default();
        for r in records {
            if r.event == Event::Goal {
                o.goals.push(r.pose.position());
            } else if o.path.last() != Some(&r.pose.position()) {
                o.path.push(r.pose.position());
            }
        }
        o
    }
}

fn pixel(geom: &GridGeometry, col: i64, row: i64) -> Option<(u32, u32)> {
    geom.contains_coords(col, row)
        .then(|| (col as u32, (geom.rows as i64 - 1 - row) as u32))
}

fn dot(img: &mut RgbImage, geom: &GridGeometry, p: Point, half: i64, color: Rgb<u8>) {
    let (c, r) = geom.cell_coords(p);
    for dr in -half..=half {
        for dc in -half..=half {
            if let Some((x, y)) = pixel(geom, c + dc, r + dr) {
                img.put_pixel(x, y, color);
            }
        }
    }
}

/// One pixel per map cell, top row of the image = top of the map.
pub fn render(map: &MapImage, overlay: &Overlay) -> RgbImage {
    let g = &map.geom;
    let mut img = RgbImage::new(g.cols as u32, g.rows as u32);
    for row in 0..g.rows {
        for col in 0..g.cols {
            let v = map.pixels[(g.rows - 1 - row) * g.cols + col];
            img.put_pixel(col as u32, (g.rows - 1 - row) as u32, Rgb([v, v, v]));
        }
    }
    for w in overlay.path.windows(2) {
        for cell in GridRay::segment(*g, w[0], w[1]) {
            if let Some((x, y)) = pixel(g, cell.col as i64, cell.row as i64) {
                img.put_pixel(x, y, PATH_COLOR);
            }
        }
    }
    for &goal in &overlay.goals {
        dot(&mut img, g, goal, 1, GOAL_COLOR);
    }
    if let (Some(&start), Some(&end)) = (overlay.path.first(), overlay.path.last()) {
        dot(&mut img, g, start, 2, START_COLOR);
        dot(&mut img, g, end, 2, END_COLOR);
    }
    img
}

pub fn render_map(map: &MapImage, records: &[Record], out: &Path) -> Result<()> {
    render(map, &Overlay::from_records(records))
        .save_with_format(out, image::ImageFormat::Png)
        .map_err(|e| Error::Io(format!("{}: {e}", out.display())))
}
