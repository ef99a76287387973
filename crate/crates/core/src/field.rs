//! Uniform radial grids and nonnegative cell-averaged fields on them.

use crate::error::{Error, Result};
use crate::geometry::{ball_volume, lens_volume};

/// Cells `[i dr, (i + 1) dr)` in the radial variable, `i = 0..cells`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    cells: usize,
    dr: f64,
}

impl Grid {
    pub fn new(dim: usize, cells: usize, dr: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidParams(format!("radial grids support N in 1..=3, got {dim}")));
        }
        if cells < 2 {
            return Err(Error::InvalidParams("grid needs at least 2 cells".into()));
        }
        if !(dr > 0.0 && dr.is_finite()) {
            return Err(Error::InvalidParams(format!("dr = {dr} must be > 0")));
        }
        Ok(Self { dim, cells, dr })
    }

    /// Grid covering `[0, radius]` with the given number of cells.
    pub fn with_radius(dim: usize, radius: f64, cells: usize) -> Result<Self> {
        Self::new(dim, cells, radius / cells as f64)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    pub fn radius(&self) -> f64 {
        self.cells as f64 * self.dr
    }

    pub fn center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dr
    }

    /// Inner face radius of cell `i`.
    pub fn face(&self, i: usize) -> f64 {
        i as f64 * self.dr
    }

    pub fn cell_volume(&self, i: usize) -> f64 {
        ball_volume(self.dim, self.face(i + 1)) - ball_volume(self.dim, self.face(i))
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.cells).map(|i| self.center(i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: Grid,
    u: Vec<f64>,
}

impl GridField {
    pub fn new(grid: Grid, u: Vec<f64>) -> Result<Self> {
        if u.len() != grid.cells {
            return Err(Error::InvalidParams(format!(
                "field has {} values for {} cells",
                u.len(),
                grid.cells
            )));
        }
        if let Some((i, v)) = u.iter().enumerate().find(|(_, v)| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidParams(format!("cell {i} value {v} is not finite and >= 0")));
        }
        Ok(Self { grid, u })
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Self> {
        Self::new(grid, vec![c; grid.cells])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.u
    }

    pub(crate) fn values_mut(&mut self) -> &mut Vec<f64> {
        &mut self.u
    }

    pub fn sup(&self) -> f64 {
        self.u.iter().copied().fold(0.0, f64::max)
    }

    pub fn inf(&self) -> f64 {
        self.u.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn total_mass(&self) -> f64 {
        (0..self.grid.cells).map(|i| self.u[i] * self.grid.cell_volume(i)).sum()
    }

    /// `int_{B(0, sigma)} g(u) dx` with partial cells weighted exactly.
    pub fn centered_integral(&self, sigma: f64, g: impl Fn(f64) -> f64) -> f64 {
        self.centered_sum(sigma, |i| g(self.u[i]))
    }

    /// `sum_i h(i) |cell_i ∩ B(0, sigma)|`.
    pub fn centered_sum(&self, sigma: f64, h: impl Fn(usize) -> f64) -> f64 {
        let dim = self.grid.dim;
        let mut acc = 0.0;
        for i in 0..self.grid.cells {
            let lo = self.grid.face(i);
            if lo >= sigma {
                break;
            }
            let hi = self.grid.face(i + 1).min(sigma);
            acc += h(i) * (ball_volume(dim, hi) - ball_volume(dim, lo));
        }
        acc
    }

    pub fn mass_within(&self, sigma: f64) -> f64 {
        self.centered_integral(sigma, |v| v)
    }

    /// `int_{B(z, sigma)} g(u) dx` for `|z| = d`; the field is zero outside the grid.
    pub fn ball_integral(&self, d: f64, sigma: f64, g: impl Fn(f64) -> f64) -> f64 {
        if d == 0.0 {
            return self.centered_integral(sigma, g);
        }
        let dim = self.grid.dim;
        let lo_r = (d - sigma).max(0.0);
        let hi_r = d + sigma;
        let first = ((lo_r / self.grid.dr).floor() as usize).min(self.grid.cells);
        let mut acc = 0.0;
        let mut prev = lens_volume(dim, d, sigma, self.grid.face(first));
        for i in first..self.grid.cells {
            if self.grid.face(i) >= hi_r {
                break;
            }
            let next = lens_volume(dim, d, sigma, self.grid.face(i + 1));
            let w = next - prev;
            if w > 0.0 {
                acc += g(self.u[i]) * w;
            }
            prev = next;
        }
        acc
    }

    /// Linear cell-value lookup at radius `r` (piecewise constant).
    pub fn value_at(&self, r: f64) -> f64 {
        let i = (r / self.grid.dr) as usize;
        if i < self.grid.cells { self.u[i] } else { 0.0 }
    }

    /// Copy with every cell whose inner face lies at or beyond `radius` set to zero.
    pub fn truncated(&self, radius: f64) -> Self {
        let u = (0..self.grid.cells)
            .map(|i| if self.grid.face(i) >= radius { 0.0 } else { self.u[i] })
            .collect();
        Self { grid: self.grid, u }
    }

    /// Merge groups of `factor` cells into one by volume-weighted averaging.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || self.grid.cells / factor < 2 {
            return Err(Error::InvalidParams(format!("cannot coarsen by {factor}")));
        }
        let cells = self.grid.cells / factor;
        let grid = Grid::new(self.grid.dim, cells, self.grid.dr * factor as f64)?;
        let u = (0..cells)
            .map(|j| {
                let (mut m, mut v) = (0.0, 0.0);
                for i in j * factor..(j + 1) * factor {
                    let w = self.grid.cell_volume(i);
                    m += self.u[i] * w;
                    v += w;
                }
                m / v
            })
            .collect();
        Ok(Self { grid, u })
    }
}
