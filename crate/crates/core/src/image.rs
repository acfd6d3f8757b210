//! Density images on a square pixel grid and their CSV / graymap forms.
//!
//! Lengths in the image frame are in micrometres and densities in atoms
//! per μm². Pixel (row i, column j) has its centre at
//! x = −h + (j + ½)·d, y = −h + (i + ½)·d with h the half extent and
//! d = 2h/N the pixel size; rows run along +y.

use std::fmt::Write as _;

use crate::error::{invalid, Error, Result};

/// Square sampling grid centred on the trap axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    /// Half the side length (μm).
    pub half_extent_um: f64,
    pub samples: usize,
}

impl Grid2D {
    pub fn new(half_extent_um: f64, samples: usize) -> Result<Self> {
        if !(half_extent_um > 0.0) || !half_extent_um.is_finite() {
            return Err(invalid(format!("grid half extent must be positive, got {half_extent_um}")));
        }
        if samples < 8 {
            return Err(invalid(format!("grid needs at least 8 samples per axis, got {samples}")));
        }
        Ok(Self { half_extent_um, samples })
    }

    pub fn pixel_size_um(&self) -> f64 {
        2.0 * self.half_extent_um / self.samples as f64
    }

    pub fn pixel_area_um2(&self) -> f64 {
        self.pixel_size_um().powi(2)
    }

    pub fn len(&self) -> usize {
        self.samples * self.samples
    }

    pub fn is_empty(&self) -> bool {
        self.samples == 0
    }

    /// Pixel-centre coordinate along one axis.
    pub fn coord_um(&self, index: usize) -> f64 {
        -self.half_extent_um + (index as f64 + 0.5) * self.pixel_size_um()
    }

    /// (x, y) of pixel (row, col).
    pub fn center_um(&self, row: usize, col: usize) -> (f64, f64) {
        (self.coord_um(col), self.coord_um(row))
    }

    /// Pixel centres in row-major order.
    pub fn centers(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.samples).flat_map(move |r| (0..self.samples).map(move |c| self.center_um(r, c)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityImage {
    pub grid: Grid2D,
    /// Row-major densities (atoms / μm²).
    pub values: Vec<f64>,
}

impl DensityImage {
    pub fn new(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid(format!(
                "image has {} values, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("image values must be finite"));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    /// Evaluates `f(x, y)` at every pixel centre.
    pub fn from_fn(grid: Grid2D, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let values = grid.centers().map(|(x, y)| f(x, y)).collect();
        Self { grid, values }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.grid.samples + col]
    }

    /// Σ values · pixel area (atoms).
    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.pixel_area_um2()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| v * factor).collect() }
    }

    /// Wide CSV: header `y_um\x_um,x_0,...`, then one row per image row
    /// led by its y coordinate. Shortest round-trip float formatting.
    pub fn to_csv(&self) -> String {
        let n = self.grid.samples;
        let mut out = String::with_capacity(self.values.len() * 24);
        out.push_str("y_um\\x_um");
        for c in 0..n {
            write!(out, ",{}", self.grid.coord_um(c)).unwrap();
        }
        out.push('\n');
        for r in 0..n {
            write!(out, "{}", self.grid.coord_um(r)).unwrap();
            for v in &self.values[r * n..(r + 1) * n] {
                write!(out, ",{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Parses the CSV written by [`DensityImage::to_csv`]. When `grid` is
    /// given, its sample count must match; otherwise the grid is inferred
    /// from the header coordinates. `path` is only used in error messages.
    pub fn from_csv(text: &str, grid: Option<Grid2D>, path: &str) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Parse { path: path.to_string(), line, msg };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| err(1, "missing header row".into()))?;
        let xs: Vec<f64> = header
            .split(',')
            .skip(1)
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| err(1, format!("bad header coordinate: {e}")))?;
        let n = xs.len();
        let grid = match grid {
            Some(g) => {
                if g.samples != n {
                    return Err(err(1, format!("header has {n} columns, grid expects {}", g.samples)));
                }
                g
            }
            None => {
                if n < 2 {
                    return Err(err(1, "need at least two columns".into()));
                }
                let d = (xs[n - 1] - xs[0]) / (n - 1) as f64;
                Grid2D::new(-xs[0] + 0.5 * d, n).map_err(|e| err(1, e.to_string()))?
            }
        };
        let mut values = Vec::with_capacity(n * n);
        let mut rows = 0;
        for (k, line) in lines.enumerate() {
            let lineno = k + 2;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            fields.next();
            let before = values.len();
            for f in fields {
                let v: f64 = f
                    .trim()
                    .parse()
                    .map_err(|e| err(lineno, format!("bad value {f:?}: {e}")))?;
                values.push(v);
            }
            if values.len() - before != n {
                return Err(err(lineno, format!("expected {n} values, found {}", values.len() - before)));
            }
            rows += 1;
        }
        if rows != n {
            return Err(err(rows + 2, format!("expected {n} data rows, found {rows}")));
        }
        DensityImage::new(grid, values).map_err(|e| err(0, e.to_string()))
    }

    /// ASCII P2 graymap, maxval 65535, linear min–max rescale. The rescale
    /// range is recorded in a comment line.
    pub fn to_pgm(&self) -> String {
        let n = self.grid.samples;
        let (lo, hi) = self
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let span = hi - lo;
        let mut out = String::with_capacity(self.values.len() * 6 + 64);
        writeln!(out, "P2").unwrap();
        writeln!(out, "# linear rescale: 0 -> {lo}, 65535 -> {hi} (atoms/um^2)").unwrap();
        writeln!(out, "{n} {n}").unwrap();
        writeln!(out, "65535").unwrap();
        for r in 0..n {
            let row: Vec<String> = self.values[r * n..(r + 1) * n]
                .iter()
                .map(|&v| {
                    let level = if span > 0.0 { ((v - lo) / span * 65535.0).round() } else { 0.0 };
                    (level as u32).to_string()
                })
                .collect();
            writeln!(out, "{}", row.join(" ")).unwrap();
        }
        out
    }
}
