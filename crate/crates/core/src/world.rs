//! Ground-truth environments: an immutable boolean raster read from a small
//! ASCII format, plus a seeded maze generator.
//!
//! File layout:
//!
//! ```text
//! resolution 0.05
//! size <cols> <rows>
//! ##########
//! #........#
//! ...
//! ```
//!
//! The first raster line is the top (max-y) row. Internally row 0 is the
//! bottom row so that row indices grow with y.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{GridGeometry, Point, Pose};

/// Bytes of the bundled 20 m x 20 m maze.
pub const MAZE20: &str = include_str!("../../../assets/maze20.txt");

#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub name: String,
    pub resolution: f64,
    pub cols: usize,
    pub rows: usize,
    /// Row-major, row 0 at the bottom; `true` is solid.
    cells: Vec<bool>,
    free_area_m2: f64,
}

impl World {
    /// Builds a world from a bottom-up row-major raster and validates it.
    pub fn from_cells(
        name: impl Into<String>,
        resolution: f64,
        cols: usize,
        rows: usize,
        cells: Vec<bool>,
    ) -> Result<Self> {
        if !(resolution > 0.0) || !resolution.is_finite() {
            return Err(Error::Validation(format!("bad resolution {resolution}")));
        }
        if cols == 0 || rows == 0 || cells.len() != cols * rows {
            return Err(Error::Validation(format!(
                "raster has {} cells, expected {cols} x {rows}",
                cells.len()
            )));
        }
        for c in 0..cols {
            for r in 0..rows {
                let border = c == 0 || r == 0 || c + 1 == cols || r + 1 == rows;
                if border && !cells[r * cols + c] {
                    return Err(Error::Validation(format!(
                        "open boundary at column {c}, row {r}"
                    )));
                }
            }
        }
        let free = cells.iter().filter(|s| !**s).count();
        Ok(Self {
            name: name.into(),
            resolution,
            cols,
            rows,
            cells,
            free_area_m2: free as f64 * resolution * resolution,
        })
    }

    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let perr = |m: String| Error::Parse(format!("{name}: {m}"));
        let res_line = lines.next().ok_or_else(|| perr("empty file".into()))?;
        let resolution = match res_line.split_whitespace().collect::<Vec<_>>()[..] {
            ["resolution", v] => v
                .parse::<f64>()
                .map_err(|_| perr(format!("bad resolution value '{v}'")))?,
            _ => return Err(perr(format!("expected 'resolution <float>', got '{res_line}'"))),
        };
        let size_line = lines.next().ok_or_else(|| perr("missing size line".into()))?;
        let (cols, rows) = match size_line.split_whitespace().collect::<Vec<_>>()[..] {
            ["size", c, r] => (
                c.parse::<usize>().map_err(|_| perr(format!("bad cols '{c}'")))?,
                r.parse::<usize>().map_err(|_| perr(format!("bad rows '{r}'")))?,
            ),
            _ => return Err(perr(format!("expected 'size <cols> <rows>', got '{size_line}'"))),
        };
        let mut cells = vec![false; cols * rows];
        let mut n = 0;
        for (k, line) in lines.enumerate() {
            let line = line.trim_end_matches('\r');
            if k >= rows {
                if line.trim().is_empty() {
                    continue;
                }
                return Err(perr(format!("more than {rows} raster rows")));
            }
            if line.len() != cols {
                return Err(perr(format!(
                    "raster row {k} has {} characters, expected {cols}",
                    line.len()
                )));
            }
            let row = rows - 1 - k;
            for (c, ch) in line.bytes().enumerate() {
                cells[row * cols + c] = match ch {
                    b'#' => true,
                    b'.' => false,
                    other => {
                        return Err(perr(format!(
                            "unexpected character '{}' in row {k}",
                            other as char
                        )))
                    }
                };
            }
            n += 1;
        }
        if n != rows {
            return Err(perr(format!("found {n} raster rows, expected {rows}")));
        }
        Self::from_cells(name, resolution, cols, rows, cells)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "world".into());
        Self::parse(&name, &text)
    }

    pub fn maze20() -> Self {
        Self::parse("maze20", MAZE20).expect("bundled maze20 asset is valid")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity((self.cols + 1) * self.rows + 32);
        let _ = writeln!(s, "resolution {}", self.resolution);
        let _ = writeln!(s, "size {} {}", self.cols, self.rows);
        for row in (0..self.rows).rev() {
            for col in 0..self.cols {
                s.push(if self.cells[row * self.cols + col] { '#' } else { '.' });
            }
            s.push('\n');
        }
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    pub fn geometry(&self) -> GridGeometry {
        GridGeometry {
            origin: Point::new(0.0, 0.0),
            resolution: self.resolution,
            cols: self.cols,
            rows: self.rows,
        }
    }

    pub fn width_m(&self) -> f64 {
        self.cols as f64 * self.resolution
    }

    pub fn height_m(&self) -> f64 {
        self.rows as f64 * self.resolution
    }

    pub fn free_area_m2(&self) -> f64 {
        self.free_area_m2
    }

    pub fn cell_solid(&self, col: usize, row: usize) -> bool {
        self.cells[row * self.cols + col]
    }

    /// Closed-world containment test: anything outside the raster is solid.
    pub fn is_solid(&self, p: Point) -> bool {
        let (c, r) = self.geometry().cell_coords(p);
        if !self.geometry().contains_coords(c, r) {
            return true;
        }
        self.cells[r as usize * self.cols + c as usize]
    }

    /// Default start: the free cell farthest from any solid cell (octile
    /// chamfer distance), lowest row then lowest column on ties, facing +x.
    pub fn default_start(&self) -> Pose {
        let dist = self.clearance_cells();
        let mut best = (0usize, f64::NEG_INFINITY);
        for (i, d) in dist.iter().enumerate() {
            if *d > best.1 + 1e-9 {
                best = (i, *d);
            }
        }
        let p = self.geometry().cell_center(best.0 % self.cols, best.0 / self.cols);
        Pose::new(p.x, p.y, 0.0)
    }

    /// Two-pass chamfer distance (in cells) from every cell to the nearest
    /// solid cell.
    fn clearance_cells(&self) -> Vec<f64> {
        let (w, h) = (self.cols, self.rows);
        let mut d: Vec<f64> = self
            .cells
            .iter()
            .map(|s| if *s { 0.0 } else { f64::INFINITY })
            .collect();
        let diag = std::f64::consts::SQRT_2;
        for r in 0..h {
            for c in 0..w {
                let i = r * w + c;
                let mut v = d[i];
                if c > 0 {
                    v = v.min(d[i - 1] + 1.0);
                }
                if r > 0 {
                    v = v.min(d[i - w] + 1.0);
                    if c > 0 {
                        v = v.min(d[i - w - 1] + diag);
                    }
                    if c + 1 < w {
                        v = v.min(d[i - w + 1] + diag);
                    }
                }
                d[i] = v;
            }
        }
        for r in (0..h).rev() {
            for c in (0..w).rev() {
                let i = r * w + c;
                let mut v = d[i];
                if c + 1 < w {
                    v = v.min(d[i + 1] + 1.0);
                }
                if r + 1 < h {
                    v = v.min(d[i + w] + 1.0);
                    if c + 1 < w {
                        v = v.min(d[i + w + 1] + diag);
                    }
                    if c > 0 {
                        v = v.min(d[i + w - 1] + diag);
                    }
                }
                d[i] = v;
            }
        }
        d
    }
}

/// Seeded perfect maze: one-cell-thick walls on a lattice of corridors at
/// least `corridor_m` wide, carved by randomized depth-first search.
pub fn generate_maze(
    width_m: f64,
    height_m: f64,
    resolution: f64,
    corridor_m: f64,
    seed: u64,
) -> Result<World> {
    if !(width_m > 0.0 && height_m > 0.0 && resolution > 0.0 && corridor_m > 0.0) {
        return Err(Error::Validation("maze dimensions must be positive".into()));
    }
    let cols = (width_m / resolution).round() as usize;
    let rows = (height_m / resolution).round() as usize;
    let corridor = (corridor_m / resolution).round() as usize;
    if corridor < 4 {
        return Err(Error::Validation(format!(
            "corridor of {corridor} cells is narrower than the 4-cell minimum"
        )));
    }
    if cols < corridor + 2 || rows < corridor + 2 {
        return Err(Error::Validation(format!(
            "{width_m} x {height_m} m is too small for one {corridor_m} m corridor"
        )));
    }
    let nx = (cols - 1) / (corridor + 1);
    let ny = (rows - 1) / (corridor + 1);
    // wall lines, evenly spread so that leftovers widen corridors
    let xs: Vec<usize> = (0..=nx).map(|k| k * (cols - 1) / nx).collect();
    let ys: Vec<usize> = (0..=ny).map(|k| k * (rows - 1) / ny).collect();

    let mut cells = vec![false; cols * rows];
    for r in 0..rows {
        for &x in &xs {
            cells[r * cols + x] = true;
        }
    }
    for &y in &ys {
        for c in 0..cols {
            cells[y * cols + c] = true;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut visited = vec![false; nx * ny];
    let mut stack = vec![(0usize, 0usize)];
    visited[0] = true;
    while let Some(&(i, j)) = stack.last() {
        let mut nbrs = Vec::with_capacity(4);
        if i > 0 && !visited[j * nx + i - 1] {
            nbrs.push((i - 1, j));
        }
        if i + 1 < nx && !visited[j * nx + i + 1] {
            nbrs.push((i + 1, j));
        }
        if j > 0 && !visited[(j - 1) * nx + i] {
            nbrs.push((i, j - 1));
        }
        if j + 1 < ny && !visited[(j + 1) * nx + i] {
            nbrs.push((i, j + 1));
        }
        let Some(&(ni, nj)) = nbrs.choose(&mut rng) else {
            stack.pop();
            continue;
        };
        visited[nj * nx + ni] = true;
        if ni != i {
            // knock out the vertical wall between horizontally adjacent cells
            let x = xs[i.max(ni)];
            for r in ys[j] + 1..ys[j + 1] {
                cells[r * cols + x] = false;
            }
        } else {
            let y = ys[j.max(nj)];
            for c in xs[i] + 1..xs[i + 1] {
                cells[y * cols + c] = false;
            }
        }
        stack.push((ni, nj));
    }
    World::from_cells(format!("maze-{seed}"), resolution, cols, rows, cells)
}
