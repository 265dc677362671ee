//! Discrete domains (periodic torus, truncated whole space) and scalar fields
//! on them.
//!
//! Periodic grids place `N` points per axis at `i * L / N` and measure
//! distances with the minimal-image torus metric. Truncated grids place `N`
//! points per axis endpoint-inclusively on `[-R, R]` (so the corner pairs of
//! the box are actual grid pairs) and measure Euclidean distances; their
//! outermost ring is the clamp set that realizes decay at infinity.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    /// Flat torus with the given period per axis.
    Periodic { period: f64 },
    /// Box `[-half_width, half_width]^n` whose boundary ring is clamped to
    /// zero; `eps_decay` is the tolerated far-field magnitude.
    Truncated { half_width: f64, eps_decay: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub domain: Domain,
    pub points_per_axis: usize,
}

impl GridSpec {
    pub fn periodic(dim: usize, period: f64, points_per_axis: usize) -> Self {
        GridSpec {
            dim,
            domain: Domain::Periodic { period },
            points_per_axis,
        }
    }

    pub fn truncated(dim: usize, half_width: f64, eps_decay: f64, points_per_axis: usize) -> Self {
        GridSpec {
            dim,
            domain: Domain::Truncated {
                half_width,
                eps_decay,
            },
            points_per_axis,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.dim > MAX_DIM {
            return Err(Error::Config(format!(
                "grid dimension must be 1 or 2, got {}",
                self.dim
            )));
        }
        if self.points_per_axis < 8 {
            return Err(Error::Config(format!(
                "points per axis must be at least 8, got {}",
                self.points_per_axis
            )));
        }
        match self.domain {
            Domain::Periodic { period } => {
                if period <= 0.0 {
                    return Err(Error::Config(format!("period must be positive: {period}")));
                }
            }
            Domain::Truncated {
                half_width,
                eps_decay,
            } => {
                if half_width <= 0.0 {
                    return Err(Error::Config(format!(
                        "half-width must be positive: {half_width}"
                    )));
                }
                if eps_decay <= 0.0 {
                    return Err(Error::Config(format!(
                        "decay tolerance must be positive: {eps_decay}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Grid spacing along one axis.
    pub fn spacing(&self) -> f64 {
        match self.domain {
            Domain::Periodic { period } => period / self.points_per_axis as f64,
            // Endpoint-inclusive so that the box corners are grid points.
            Domain::Truncated { half_width, .. } => {
                2.0 * half_width / (self.points_per_axis - 1) as f64
            }
        }
    }

    /// Default diameter of a compact repeating region: `L * sqrt(n)` for the
    /// periodic torus. Callers may override it with any larger multiple.
    pub fn default_repeat_diameter(&self) -> Option<f64> {
        match self.domain {
            Domain::Periodic { period } => Some(period * (self.dim as f64).sqrt()),
            Domain::Truncated { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    spec: GridSpec,
    axis: Vec<f64>,
}

pub fn make_grid(spec: GridSpec) -> Result<Grid> {
    Grid::new(spec)
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Grid> {
        spec.validate()?;
        let n = spec.points_per_axis;
        let h = spec.spacing();
        let axis = match spec.domain {
            Domain::Periodic { .. } => (0..n).map(|i| i as f64 * h).collect(),
            Domain::Truncated { half_width, .. } => {
                (0..n).map(|i| -half_width + i as f64 * h).collect()
            }
        };
        Ok(Grid { spec, axis })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.spec.points_per_axis
    }

    pub fn spacing(&self) -> f64 {
        self.spec.spacing()
    }

    pub fn len(&self) -> usize {
        self.spec.points_per_axis.pow(self.spec.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    /// Multi-index of a flat index; axis 0 varies fastest.
    pub fn multi_index(&self, idx: usize) -> [usize; MAX_DIM] {
        let n = self.spec.points_per_axis;
        [idx % n, idx / n]
    }

    pub fn flat_index(&self, mi: &[usize]) -> usize {
        let n = self.spec.points_per_axis;
        match self.spec.dim {
            1 => mi[0],
            _ => mi[0] + n * mi[1],
        }
    }

    /// Coordinates of grid point `idx`.
    pub fn coords(&self, idx: usize) -> [f64; MAX_DIM] {
        let mi = self.multi_index(idx);
        let mut out = [0.0; MAX_DIM];
        for k in 0..self.spec.dim {
            out[k] = self.axis[mi[k]];
        }
        out
    }

    /// Neighbor of `idx` one step along `axis`. Periodic grids wrap;
    /// truncated grids return `None` past the edge.
    pub fn neighbor(&self, idx: usize, axis: usize, step: isize) -> Option<usize> {
        let n = self.spec.points_per_axis as isize;
        let mut mi = self.multi_index(idx);
        let cur = mi[axis] as isize + step;
        let next = match self.spec.domain {
            Domain::Periodic { .. } => cur.rem_euclid(n),
            Domain::Truncated { .. } => {
                if cur < 0 || cur >= n {
                    return None;
                }
                cur
            }
        };
        mi[axis] = next as usize;
        Some(self.flat_index(&mi[..self.spec.dim]))
    }

    /// Pairwise distance respecting the domain kind.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let a = self.coords(i);
        let b = self.coords(j);
        let mut acc = 0.0;
        match self.spec.domain {
            Domain::Periodic { period } => {
                for k in 0..self.spec.dim {
                    let d = (a[k] - b[k]).rem_euclid(period);
                    let d = d.min(period - d);
                    acc += d * d;
                }
            }
            Domain::Truncated { .. } => {
                for k in 0..self.spec.dim {
                    let d = a[k] - b[k];
                    acc += d * d;
                }
            }
        }
        acc.sqrt()
    }

    /// Largest pairwise distance the domain supports: `L*sqrt(n)/2` on the
    /// torus (minimal image), the box diagonal `2R*sqrt(n)` when truncated.
    pub fn max_pair_distance(&self) -> f64 {
        let n = self.spec.dim as f64;
        match self.spec.domain {
            Domain::Periodic { period } => period * n.sqrt() / 2.0,
            Domain::Truncated { half_width, .. } => 2.0 * half_width * n.sqrt(),
        }
    }

    /// Whether `idx` lies on the outermost cell ring (truncated grids only).
    pub fn on_clamp_ring(&self, idx: usize) -> bool {
        match self.spec.domain {
            Domain::Periodic { .. } => false,
            Domain::Truncated { .. } => {
                let n = self.spec.points_per_axis;
                let mi = self.multi_index(idx);
                (0..self.spec.dim).any(|k| mi[k] == 0 || mi[k] == n - 1)
            }
        }
    }

    /// Distance from point `idx` to the clamped box boundary (truncated
    /// grids): `min_k (R - |x_k|)`.
    pub fn distance_to_boundary(&self, idx: usize) -> Option<f64> {
        match self.spec.domain {
            Domain::Periodic { .. } => None,
            Domain::Truncated { half_width, .. } => {
                let c = self.coords(idx);
                let d = (0..self.spec.dim)
                    .map(|k| half_width - c[k].abs())
                    .fold(f64::INFINITY, f64::min);
                Some(d.max(0.0))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(ScalarField { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        ScalarField {
            grid,
            values: vec![0.0; n],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// CSV rows of coordinates followed by the value, with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for k in 0..self.grid.dim() {
            let _ = write!(out, "x{},", k + 1);
        }
        out.push_str("u\n");
        for (idx, v) in self.values.iter().enumerate() {
            let c = self.grid.coords(idx);
            for x in c.iter().take(self.grid.dim()) {
                let _ = write!(out, "{x},");
            }
            let _ = writeln!(out, "{v}");
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// Reads values from a CSV produced by [`to_csv`], validating the header
    /// and that the coordinates match `grid` to within 1e-9.
    pub fn read_csv(grid: Grid, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Config(format!("{}: empty field CSV", path.display())))?;
        let expected_header = {
            let mut h = String::new();
            for k in 0..grid.dim() {
                let _ = write!(h, "x{},", k + 1);
            }
            h.push('u');
            h
        };
        if header.trim() != expected_header {
            return Err(Error::Config(format!(
                "{}: unexpected field CSV header `{}` (want `{}`)",
                path.display(),
                header.trim(),
                expected_header
            )));
        }
        let mut values = Vec::with_capacity(grid.len());
        for (row, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != grid.dim() + 1 {
                return Err(Error::Config(format!(
                    "{}: row {} has {} columns, want {}",
                    path.display(),
                    row + 2,
                    cols.len(),
                    grid.dim() + 1
                )));
            }
            let idx = values.len();
            if idx >= grid.len() {
                return Err(Error::Config(format!(
                    "{}: more rows than grid points ({})",
                    path.display(),
                    grid.len()
                )));
            }
            let want = grid.coords(idx);
            for k in 0..grid.dim() {
                let got: f64 = cols[k].trim().parse().map_err(|_| {
                    Error::Config(format!("{}: bad coordinate `{}`", path.display(), cols[k]))
                })?;
                if (got - want[k]).abs() > 1e-9 {
                    return Err(Error::Config(format!(
                        "{}: row {} coordinate {} is {}, grid expects {}",
                        path.display(),
                        row + 2,
                        k + 1,
                        got,
                        want[k]
                    )));
                }
            }
            let v: f64 = cols[grid.dim()].trim().parse().map_err(|_| {
                Error::Config(format!(
                    "{}: bad value `{}`",
                    path.display(),
                    cols[grid.dim()]
                ))
            })?;
            values.push(v);
        }
        ScalarField::new(grid, values)
    }
}

/// Samples a pointwise map over the grid.
pub fn sample_function<F: Fn(&[f64]) -> f64>(grid: &Grid, g: F) -> ScalarField {
    let values = (0..grid.len())
        .map(|idx| {
            let c = grid.coords(idx);
            g(&c[..grid.dim()])
        })
        .collect();
    ScalarField {
        grid: grid.clone(),
        values,
    }
}

pub fn sup_norm(field: &ScalarField) -> f64 {
    field.sup_norm()
}
