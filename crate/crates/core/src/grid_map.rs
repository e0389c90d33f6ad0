//! The robot's belief map: a log-odds occupancy grid.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{GridGeometry, Point};
use crate::world::World;

/// Inverse sensor model and classification thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorModel {
    pub l_occ: f64,
    pub l_free: f64,
    pub l_min: f64,
    pub l_max: f64,
    pub p_free: f64,
    pub p_occ: f64,
}

impl Default for SensorModel {
    fn default() -> Self {
        let l = (0.7f64 / 0.3).ln();
        Self {
            l_occ: l,
            l_free: -l,
            l_min: -2.0,
            l_max: 3.5,
            p_free: 0.35,
            p_occ: 0.65,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellIndex {
    pub col: usize,
    pub row: usize,
}

impl CellIndex {
    pub const fn new(col: usize, row: usize) -> Self {
        Self { col, row }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellClass {
    Unknown,
    Free,
    Occupied,
}

pub fn logodds_to_probability(l: f64) -> f64 {
    1.0 - 1.0 / (1.0 + l.exp())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    geom: GridGeometry,
    model: SensorModel,
    logodds: Vec<f64>,
    known: Vec<bool>,
    known_count: usize,
}

impl GridMap {
    pub fn new(geom: GridGeometry, model: SensorModel) -> Self {
        let n = geom.cols * geom.rows;
        Self {
            geom,
            model,
            logodds: vec![0.0; n],
            known: vec![false; n],
            known_count: 0,
        }
    }

    /// A fresh map covering the world's extent at the world's resolution.
    pub fn for_world(world: &World, model: SensorModel) -> Self {
        Self::new(world.geometry(), model)
    }

    pub fn geometry(&self) -> GridGeometry {
        self.geom
    }

    pub fn model(&self) -> &SensorModel {
        &self.model
    }

    pub fn resolution(&self) -> f64 {
        self.geom.resolution
    }

    pub fn origin(&self) -> Point {
        self.geom.origin
    }

    pub fn cols(&self) -> usize {
        self.geom.cols
    }

    pub fn rows(&self) -> usize {
        self.geom.rows
    }

    pub fn world_to_cell(&self, p: Point) -> Result<CellIndex> {
        let (c, r) = self.geom.cell_coords(p);
        if self.geom.contains_coords(c, r) {
            Ok(CellIndex::new(c as usize, r as usize))
        } else {
            Err(Error::OutOfExtent { x: p.x, y: p.y })
        }
    }

    pub fn cell_center(&self, cell: CellIndex) -> Point {
        self.geom.cell_center(cell.col, cell.row)
    }

    pub fn contains(&self, cell: CellIndex) -> bool {
        cell.col < self.geom.cols && cell.row < self.geom.rows
    }

    fn idx(&self, cell: CellIndex) -> Result<usize> {
        if self.contains(cell) {
            Ok(cell.row * self.geom.cols + cell.col)
        } else {
            Err(Error::InvalidCell {
                col: cell.col,
                row: cell.row,
            })
        }
    }

    pub fn apply_observation(&mut self, cell: CellIndex, hit: bool) -> Result<()> {
        let i = self.idx(cell)?;
        self.observe_index(i, hit);
        Ok(())
    }

    pub(crate) fn observe_index(&mut self, i: usize, hit: bool) {
        let m = &self.model;
        let delta = if hit { m.l_occ } else { m.l_free };
        self.logodds[i] = (self.logodds[i] + delta).clamp(m.l_min, m.l_max);
        if !self.known[i] {
            self.known[i] = true;
            self.known_count += 1;
        }
    }

    pub fn logodds(&self, cell: CellIndex) -> Result<f64> {
        Ok(self.logodds[self.idx(cell)?])
    }

    pub fn is_known(&self, cell: CellIndex) -> Result<bool> {
        Ok(self.known[self.idx(cell)?])
    }

    pub fn probability(&self, cell: CellIndex) -> Result<f64> {
        Ok(logodds_to_probability(self.logodds[self.idx(cell)?]))
    }

    pub fn classify(&self, cell: CellIndex) -> Result<CellClass> {
        Ok(self.class_at(self.idx(cell)?))
    }

    #[inline]
    pub(crate) fn class_at(&self, i: usize) -> CellClass {
        if !self.known[i] {
            return CellClass::Unknown;
        }
        let p = logodds_to_probability(self.logodds[i]);
        if p < self.model.p_free {
            CellClass::Free
        } else if p >= self.model.p_occ {
            CellClass::Occupied
        } else {
            CellClass::Unknown
        }
    }

    #[inline]
    pub(crate) fn class_cr(&self, col: usize, row: usize) -> CellClass {
        self.class_at(row * self.geom.cols + col)
    }

    #[inline]
    pub(crate) fn probability_cr(&self, col: usize, row: usize) -> f64 {
        logodds_to_probability(self.logodds[row * self.geom.cols + col])
    }

    /// Free cell with at least one Unknown-class cell among its 8 neighbours.
    pub fn is_frontier(&self, cell: CellIndex) -> Result<bool> {
        if self.classify(cell)? != CellClass::Free {
            return Ok(false);
        }
        let (c, r) = (cell.col as i64, cell.row as i64);
        for dr in -1..=1 {
            for dc in -1..=1 {
                if dc == 0 && dr == 0 {
                    continue;
                }
                let (nc, nr) = (c + dc, r + dr);
                if self.geom.contains_coords(nc, nr)
                    && self.class_cr(nc as usize, nr as usize) == CellClass::Unknown
                {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    pub fn known_cells(&self) -> usize {
        self.known_count
    }

    pub fn coverage_m2(&self) -> f64 {
        self.known_count as f64 * self.geom.resolution * self.geom.resolution
    }

    pub fn has_free_cell(&self) -> bool {
        (0..self.logodds.len()).any(|i| self.class_at(i) == CellClass::Free)
    }

    /// Occupancy-image value: 0 occupied, 254 free, 205 unknown.
    pub fn gray_value(&self, cell: CellIndex) -> Result<u8> {
        Ok(match self.classify(cell)? {
            CellClass::Occupied => 0,
            CellClass::Free => 254,
            CellClass::Unknown => 205,
        })
    }

    /// Writes a binary PGM (top row first) and a `key: value` sidecar with
    /// the same stem and a `.yaml` extension.
    pub fn export_pgm(&self, pgm_path: &Path) -> Result<()> {
        let io = |e: std::io::Error| Error::Io(format!("{}: {e}", pgm_path.display()));
        let mut f = std::io::BufWriter::new(std::fs::File::create(pgm_path).map_err(io)?);
        write!(f, "P5\n{} {}\n255\n", self.cols(), self.rows()).map_err(io)?;
        let mut buf = Vec::with_capacity(self.cols() * self.rows());
        for row in (0..self.rows()).rev() {
            for col in 0..self.cols() {
                buf.push(self.gray_value(CellIndex::new(col, row))?);
            }
        }
        f.write_all(&buf).map_err(io)?;
        f.flush().map_err(io)?;
        let image = pgm_path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let sidecar = format!(
            "image: {image}\nresolution: {}\norigin: [{}, {}, 0.0]\n",
            self.resolution(),
            self.origin().x,
            self.origin().y
        );
        std::fs::write(pgm_path.with_extension("yaml"), sidecar).map_err(io)
    }
}

/// A decoded occupancy image with its sidecar metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct MapImage {
    pub geom: GridGeometry,
    /// Row-major, top row first, as stored in the file.
    pub pixels: Vec<u8>,
}

impl MapImage {
    pub fn from_map(map: &GridMap) -> Self {
        let mut pixels = Vec::with_capacity(map.cols() * map.rows());
        for row in (0..map.rows()).rev() {
            for col in 0..map.cols() {
                pixels.push(map.gray_value(CellIndex::new(col, row)).unwrap_or(205));
            }
        }
        Self {
            geom: map.geometry(),
            pixels,
        }
    }

    pub fn load(pgm_path: &Path) -> Result<Self> {
        let data = std::fs::read(pgm_path)
            .map_err(|e| Error::Io(format!("{}: {e}", pgm_path.display())))?;
        let perr = |m: &str| Error::Parse(format!("{}: {m}", pgm_path.display()));
        let mut fields = Vec::new();
        let mut pos = 0;
        while fields.len() < 4 {
            while pos < data.len() && data[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < data.len() && data[pos] == b'#' {
                while pos < data.len() && data[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            let start = pos;
            while pos < data.len() && !data[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(perr("truncated header"));
            }
            fields.push(String::from_utf8_lossy(&data[start..pos]).into_owned());
        }
        pos += 1;
        if fields[0] != "P5" {
            return Err(perr("not a binary graymap"));
        }
        let cols: usize = fields[1].parse().map_err(|_| perr("bad width"))?;
        let rows: usize = fields[2].parse().map_err(|_| perr("bad height"))?;
        if fields[3] != "255" {
            return Err(perr("expected maxval 255"));
        }
        let pixels = data
            .get(pos..pos + cols * rows)
            .ok_or_else(|| perr("truncated pixel data"))?
            .to_vec();

        let yaml = pgm_path.with_extension("yaml");
        let text = std::fs::read_to_string(&yaml)
            .map_err(|e| Error::Io(format!("{}: {e}", yaml.display())))?;
        let mut resolution = None;
        let mut origin = Point::new(0.0, 0.0);
        for line in text.lines() {
            let Some((k, v)) = line.split_once(':') else { continue };
            match k.trim() {
                "resolution" => {
                    resolution = Some(
                        v.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::Parse(format!("bad resolution in {}", yaml.display())))?,
                    )
                }
                "origin" => {
                    let nums: Vec<f64> = v
                        .trim()
                        .trim_start_matches('[')
                        .trim_end_matches(']')
                        .split(',')
                        .filter_map(|s| s.trim().parse().ok())
                        .collect();
                    if nums.len() >= 2 {
                        origin = Point::new(nums[0], nums[1]);
                    }
                }
                _ => {}
            }
        }
        let resolution =
            resolution.ok_or_else(|| Error::Parse(format!("{}: missing resolution", yaml.display())))?;
        Ok(Self {
            geom: GridGeometry {
                origin,
                resolution,
                cols,
                rows,
            },
            pixels,
        })
    }
}
