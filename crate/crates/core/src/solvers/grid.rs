use crate::error::{Error, Result};
use crate::fields::BoundarySpec;

/// Uniform grid of `N` cells on `[0, 1]` with faces at `f dx`, `f = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    cells: usize,
    dx: f64,
    boundary: BoundarySpec,
}

impl SpatialGrid {
    pub fn new(cells: usize, boundary: BoundarySpec) -> Result<Self> {
        if cells < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 2 cells, got {cells}"
            )));
        }
        boundary.validate()?;
        Ok(Self {
            cells,
            dx: 1.0 / cells as f64,
            boundary,
        })
    }

    /// Grid with the cell count closest to `1/dx`.
    pub fn with_spacing(dx: f64, boundary: BoundarySpec) -> Result<Self> {
        if !(dx > 0.0 && dx <= 0.5) {
            return Err(Error::InvalidArgument(format!(
                "grid spacing {dx} out of range"
            )));
        }
        Self::new((1.0 / dx).round() as usize, boundary)
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn boundary(&self) -> &BoundarySpec {
        &self.boundary
    }

    pub fn center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx
    }

    pub fn face(&self, f: usize) -> f64 {
        f as f64 * self.dx
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.cells).map(|i| self.center(i)).collect()
    }
}
