//! Grids, measures, domains, and the sampled-function container.
//!
//! Cells are closed boxes of side `h` centered at grid nodes; a function's
//! cell value is its node sample. Gaussian cell weights are per-axis
//! differences of the normal cumulative function, so total mass telescopes
//! exactly. Functions must vanish on the one-cell boundary layer of the box
//! (compact support inside the grid); violations are rejected on ingestion.

use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::normal;
use crate::{Error, Result};

/// Uniform grid on `[-L, L]^n`, nodes `-L + i*h` with `h = 2L/(m-1)`.
///
/// Cell ordering is lexicographic in the axis indices, axis 0 most
/// significant.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub half_width: f64,
    pub points_per_axis: usize,
}

/// Build and validate a grid. Rejects `points_per_axis < 3` (stencils
/// undefined), non-positive half widths, and cell counts that overflow.
pub fn build_grid(dim: usize, half_width: f64, points_per_axis: usize) -> Result<GridSpec> {
    if dim < 1 {
        return Err(Error::InvalidGrid("dim must be >= 1".into()));
    }
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(Error::InvalidGrid(format!("half_width must be positive, got {half_width}")));
    }
    if points_per_axis < 3 {
        return Err(Error::InvalidGrid(format!(
            "points_per_axis must be >= 3, got {points_per_axis}"
        )));
    }
    let mut count: usize = 1;
    for _ in 0..dim {
        count = count
            .checked_mul(points_per_axis)
            .ok_or_else(|| Error::InvalidGrid("cell count overflows".into()))?;
    }
    if count > 1 << 28 {
        return Err(Error::InvalidGrid(format!("cell count {count} too large")));
    }
    Ok(GridSpec { dim, half_width, points_per_axis })
}

impl GridSpec {
    /// Node spacing `h = 2L/(m-1)`.
    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points_per_axis - 1) as f64
    }

    /// Total number of cells, `m^n`.
    pub fn cell_count(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    /// Per-axis strides of the lexicographic flat index (axis 0 most
    /// significant, last axis contiguous).
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1usize; self.dim];
        for d in (0..self.dim.saturating_sub(1)).rev() {
            s[d] = s[d + 1] * self.points_per_axis;
        }
        s
    }

    /// Node coordinate along one axis.
    #[inline]
    pub fn axis_coord(&self, i: usize) -> f64 {
        -self.half_width + self.spacing() * i as f64
    }

    /// Decompose a flat index into per-axis indices.
    pub fn decompose(&self, flat: usize, out: &mut [usize]) {
        let m = self.points_per_axis;
        let mut rest = flat;
        for d in (0..self.dim).rev() {
            out[d] = rest % m;
            rest /= m;
        }
    }

    /// Flat index of per-axis indices.
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let m = self.points_per_axis;
        idx.iter().fold(0usize, |acc, &i| acc * m + i)
    }

    /// Coordinates of a cell center.
    pub fn coords(&self, flat: usize) -> Vec<f64> {
        let mut idx = vec![0usize; self.dim];
        self.decompose(flat, &mut idx);
        idx.iter().map(|&i| self.axis_coord(i)).collect()
    }

    /// True when any axis index lies on the outermost layer.
    pub fn on_boundary(&self, flat: usize) -> bool {
        let m = self.points_per_axis;
        let mut idx = vec![0usize; self.dim];
        self.decompose(flat, &mut idx);
        idx.iter().any(|&i| i == 0 || i == m - 1)
    }
}

/// Cell measure: Lebesgue (`h^n` per cell) or the standard n-dimensional
/// Gaussian (per-axis normal-cumulative differences).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureSpec {
    Lebesgue,
    Gaussian,
}

impl fmt::Display for MeasureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureSpec::Lebesgue => write!(f, "lebesgue"),
            MeasureSpec::Gaussian => write!(f, "gaussian"),
        }
    }
}

impl std::str::FromStr for MeasureSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "lebesgue" => Ok(MeasureSpec::Lebesgue),
            "gaussian" => Ok(MeasureSpec::Gaussian),
            other => Err(Error::InvalidParams(format!("unknown measure '{other}'"))),
        }
    }
}

/// Per-axis weights. Cells are side-h boxes centered at nodes, clipped to
/// the ambient box [-L, L], so the outermost cells carry half cells and the
/// per-axis totals telescope exactly (to 2L for Lebesgue, to N(L) - N(-L)
/// for Gaussian). The clipped layer is the forced-zero boundary layer, so
/// integrals of valid functions never see it.
fn axis_weights(grid: &GridSpec, measure: MeasureSpec) -> Vec<f64> {
    let h = grid.spacing();
    let l = grid.half_width;
    (0..grid.points_per_axis)
        .map(|i| {
            let c = grid.axis_coord(i);
            let lo = (c - 0.5 * h).max(-l);
            let hi = (c + 0.5 * h).min(l);
            match measure {
                MeasureSpec::Lebesgue => hi - lo,
                MeasureSpec::Gaussian => normal::cdf(hi) - normal::cdf(lo),
            }
        })
        .collect()
}

/// Weights of every cell under the given measure, in lexicographic order.
pub fn cell_weights(grid: &GridSpec, measure: MeasureSpec) -> Vec<f64> {
    let axis = axis_weights(grid, measure);
    let count = grid.cell_count();
    if grid.dim == 1 {
        return axis;
    }
    let mut out = vec![0.0; count];
    let mut idx = vec![0usize; grid.dim];
    for (flat, slot) in out.iter_mut().enumerate() {
        grid.decompose(flat, &mut idx);
        *slot = idx.iter().map(|&i| axis[i]).product();
    }
    out
}

/// Domain shapes with analytic size parameters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "size")]
pub enum Shape {
    /// Ball of the given radius centered at the origin.
    Ball(f64),
    /// Box `[-s, s]^n` (s = half side).
    Box(f64),
}

impl Shape {
    pub fn contains(&self, x: &[f64]) -> bool {
        match *self {
            Shape::Ball(r) => x.iter().map(|v| v * v).sum::<f64>() <= r * r,
            Shape::Box(s) => x.iter().all(|v| v.abs() <= s),
        }
    }
}

/// A measurable subset of the grid box with its cell mask and measure.
#[derive(Debug, Clone)]
pub struct Domain {
    pub shape: Shape,
    pub mask: Vec<bool>,
    pub measure: f64,
}

impl Domain {
    pub fn new(grid: &GridSpec, measure: MeasureSpec, shape: Shape) -> Self {
        let weights = cell_weights(grid, measure);
        let mut mask = vec![false; grid.cell_count()];
        let mut total = 0.0;
        for (flat, slot) in mask.iter_mut().enumerate() {
            if shape.contains(&grid.coords(flat)) {
                *slot = true;
                total += weights[flat];
            }
        }
        Domain { shape, mask, measure: total }
    }
}

/// Values of a compactly supported function on a grid, with per-cell
/// measure weights.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    grid: GridSpec,
    measure: MeasureSpec,
    values: Vec<f64>,
    weights: Vec<f64>,
    support_mask: Vec<bool>,
}

impl SampledFunction {
    /// Validate and wrap raw cell values.
    ///
    /// Values must be finite and zero on the grid's boundary layer.
    pub fn new(grid: GridSpec, measure: MeasureSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::InvalidFunction(format!(
                "expected {} values, got {}",
                grid.cell_count(),
                values.len()
            )));
        }
        for (flat, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidFunction(format!("non-finite value at cell {flat}")));
            }
            if v != 0.0 && grid.on_boundary(flat) {
                return Err(Error::Invariant(format!(
                    "nonzero value {v} on boundary cell {flat}"
                )));
            }
        }
        let weights = cell_weights(&grid, measure);
        let support_mask = values.iter().map(|&v| v != 0.0).collect();
        Ok(SampledFunction { grid, measure, values, weights, support_mask })
    }

    /// Zero function on the grid.
    pub fn zeros(grid: GridSpec, measure: MeasureSpec) -> Self {
        let n = grid.cell_count();
        SampledFunction {
            grid,
            measure,
            values: vec![0.0; n],
            weights: cell_weights(&grid, measure),
            support_mask: vec![false; n],
        }
    }

    /// Sample `g` at every cell center, forcing the boundary layer to zero
    /// is NOT done silently: the sampled values must already vanish there.
    pub fn from_fn(
        grid: GridSpec,
        measure: MeasureSpec,
        g: impl Fn(&[f64]) -> f64,
    ) -> Result<Self> {
        let values = (0..grid.cell_count()).map(|flat| g(&grid.coords(flat))).collect();
        Self::new(grid, measure, values)
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn measure(&self) -> MeasureSpec {
        self.measure
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn support_mask(&self) -> &[bool] {
        &self.support_mask
    }

    /// Signed integral `Σ value * weight`.
    pub fn integrate_signed(&self) -> f64 {
        self.values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    /// Absolute integral `Σ |value| * weight` (the L1 norm).
    pub fn integrate_abs(&self) -> f64 {
        self.values.iter().zip(&self.weights).map(|(v, w)| v.abs() * w).sum()
    }

    /// Measure of the support, `Σ weights` over nonzero cells.
    pub fn support_measure(&self) -> f64 {
        self.support_mask
            .iter()
            .zip(&self.weights)
            .filter_map(|(&m, w)| m.then_some(*w))
            .sum()
    }

    /// `max |value|`.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Grid Lebesgue-style `L^p` norm `(Σ |v|^p w)^{1/p}`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        assert!(p >= 1.0 && p.is_finite());
        self.values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| v.abs().powf(p) * w)
            .sum::<f64>()
            .powf(1.0 / p)
    }

    /// Pointwise map preserving the grid; used for masking and scaling.
    pub fn map_values(&self, g: impl Fn(usize, f64) -> f64) -> Result<Self> {
        let values = self.values.iter().enumerate().map(|(i, &v)| g(i, v)).collect();
        Self::new(self.grid, self.measure, values)
    }

    /// Write the CSV interchange format:
    ///
    /// ```text
    /// dim,half_width,points_per_axis,measure
    /// 2,2,201,lebesgue
    /// index,value
    /// 20301,1
    /// ```
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "dim,half_width,points_per_axis,measure")?;
        writeln!(
            w,
            "{},{},{},{}",
            self.grid.dim, self.grid.half_width, self.grid.points_per_axis, self.measure
        )?;
        writeln!(w, "index,value")?;
        for (i, &v) in self.values.iter().enumerate() {
            if v != 0.0 {
                writeln!(w, "{i},{v}")?;
            }
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    /// Parse the CSV interchange format with line-numbered errors.
    pub fn read_csv<R: std::io::Read>(r: R) -> Result<Self> {
        let reader = BufReader::new(r);
        let mut lines = reader.lines().enumerate();

        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Parse { line: 1, msg: "empty file".into() })?;
        let header = header?;
        if header.trim() != "dim,half_width,points_per_axis,measure" {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected header 'dim,half_width,points_per_axis,measure', got '{header}'"),
            });
        }

        let (_, meta) = lines
            .next()
            .ok_or_else(|| Error::Parse { line: 2, msg: "missing grid line".into() })?;
        let meta = meta?;
        let parts: Vec<&str> = meta.trim().split(',').collect();
        if parts.len() != 4 {
            return Err(Error::Parse { line: 2, msg: format!("expected 4 fields, got {}", parts.len()) });
        }
        let dim: usize = parts[0]
            .trim()
            .parse()
            .map_err(|_| Error::Parse { line: 2, msg: format!("bad dim '{}'", parts[0]) })?;
        let half_width: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|_| Error::Parse { line: 2, msg: format!("bad half_width '{}'", parts[1]) })?;
        let m: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| Error::Parse { line: 2, msg: format!("bad points_per_axis '{}'", parts[2]) })?;
        let measure: MeasureSpec = parts[3]
            .trim()
            .parse()
            .map_err(|_| Error::Parse { line: 2, msg: format!("bad measure '{}'", parts[3]) })?;
        let grid = build_grid(dim, half_width, m)?;

        let (_, sub) = lines
            .next()
            .ok_or_else(|| Error::Parse { line: 3, msg: "missing 'index,value' line".into() })?;
        let sub = sub?;
        if sub.trim() != "index,value" {
            return Err(Error::Parse { line: 3, msg: format!("expected 'index,value', got '{sub}'") });
        }

        let mut values = vec![0.0; grid.cell_count()];
        for (lineno, line) in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (is, vs) = line.split_once(',').ok_or_else(|| Error::Parse {
                line: lineno + 1,
                msg: format!("expected 'index,value', got '{line}'"),
            })?;
            let idx: usize = is.trim().parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                msg: format!("bad index '{is}'"),
            })?;
            let val: f64 = vs.trim().parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                msg: format!("bad value '{vs}'"),
            })?;
            if idx >= values.len() {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("index {idx} out of range (cell count {})", values.len()),
                });
            }
            values[idx] = val;
        }
        Self::new(grid, measure, values)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(f)
    }
}
