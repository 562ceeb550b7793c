//! DEM grid representation, file I/O, joint normalization and shift-based
//! coregistration.

mod coregister;
mod io;
mod normalize;

pub use coregister::{coregister_shift, translate, Coregistration};
pub use io::{read_grid, write_grid, RasterFormat};
pub use normalize::{denormalize, joint_normalize, NormalizationContext};

use crate::error::{Error, Result};

/// Sentinel used when a file does not declare one.
pub const DEFAULT_NODATA: f64 = -9999.0;

/// Single-band raster of heights in meters, row-major with the top row first.
///
/// Every cell is either finite or exactly `nodata`. `cell_size` and the
/// lower-left origin are carried as metadata only; no operation in this
/// crate resamples.
#[derive(Debug, Clone, PartialEq)]
pub struct DemGrid {
    rows: usize,
    cols: usize,
    pub cell_size: f64,
    pub origin_x: f64,
    pub origin_y: f64,
    nodata: f64,
    heights: Vec<f64>,
}

impl DemGrid {
    /// Builds a grid with unit cell size and origin at (0, 0).
    pub fn new(rows: usize, cols: usize, heights: Vec<f64>, nodata: f64) -> Result<Self> {
        Self::with_georef(rows, cols, 1.0, 0.0, 0.0, nodata, heights)
    }

    pub fn with_georef(
        rows: usize,
        cols: usize,
        cell_size: f64,
        origin_x: f64,
        origin_y: f64,
        nodata: f64,
        heights: Vec<f64>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidGrid(format!("empty shape {rows}x{cols}")));
        }
        if heights.len() != rows * cols {
            return Err(Error::InvalidGrid(format!(
                "{} heights for a {rows}x{cols} grid",
                heights.len()
            )));
        }
        if !nodata.is_finite() {
            return Err(Error::InvalidGrid("nodata sentinel must be finite".into()));
        }
        if let Some(i) = heights.iter().position(|h| !h.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "non-finite height at cell {i} (row {}, col {})",
                i / cols,
                i % cols
            )));
        }
        Ok(DemGrid {
            rows,
            cols,
            cell_size,
            origin_x,
            origin_y,
            nodata,
            heights,
        })
    }

    /// A grid of `value` everywhere, sharing the shape and georeferencing of `self`.
    pub fn filled_like(&self, value: f64) -> DemGrid {
        DemGrid {
            heights: vec![value; self.heights.len()],
            ..self.clone()
        }
    }

    /// Same shape and georeferencing as `self`, new payload. `values` may hold
    /// `None` for nodata cells.
    pub fn from_options_like(
        &self,
        values: impl IntoIterator<Item = Option<f64>>,
    ) -> Result<DemGrid> {
        let nodata = self.nodata;
        let heights: Vec<f64> = values.into_iter().map(|v| v.unwrap_or(nodata)).collect();
        DemGrid::with_georef(
            self.rows,
            self.cols,
            self.cell_size,
            self.origin_x,
            self.origin_y,
            nodata,
            heights,
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.heights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heights.is_empty()
    }

    pub fn nodata(&self) -> f64 {
        self.nodata
    }

    /// Raw payload including sentinel cells.
    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    pub fn is_valid(&self, i: usize) -> bool {
        self.heights[i] != self.nodata
    }

    /// Height at flat index `i`, `None` for nodata.
    pub fn get(&self, i: usize) -> Option<f64> {
        let h = self.heights[i];
        (h != self.nodata).then_some(h)
    }

    pub fn at(&self, row: usize, col: usize) -> Option<f64> {
        self.get(self.index(row, col))
    }

    pub fn iter_valid(&self) -> impl Iterator<Item = f64> + '_ {
        self.heights
            .iter()
            .copied()
            .filter(move |&h| h != self.nodata)
    }

    pub fn valid_count(&self) -> usize {
        self.iter_valid().count()
    }

    /// Validity mask, `true` where the cell holds a height.
    pub fn mask(&self) -> Vec<bool> {
        self.heights.iter().map(|&h| h != self.nodata).collect()
    }

    /// Applies `f` to every valid cell, keeping nodata cells untouched.
    pub fn map_valid(&self, f: impl Fn(f64) -> f64) -> Result<DemGrid> {
        self.from_options_like((0..self.len()).map(|i| self.get(i).map(&f)))
    }

    pub fn is_compatible(&self, other: &DemGrid) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.cell_size == other.cell_size
    }

    /// Changes the nodata sentinel, rewriting existing sentinel cells.
    /// Fails if a valid height already equals the new sentinel.
    pub fn with_nodata(&self, nodata: f64) -> Result<DemGrid> {
        if self.iter_valid().any(|h| h == nodata) {
            return Err(Error::InvalidGrid(format!(
                "sentinel {nodata} collides with a valid height"
            )));
        }
        let heights = (0..self.len())
            .map(|i| self.get(i).unwrap_or(nodata))
            .collect();
        DemGrid::with_georef(
            self.rows,
            self.cols,
            self.cell_size,
            self.origin_x,
            self.origin_y,
            nodata,
            heights,
        )
    }
}

/// Checks that every grid in `grids` is compatible with the first one.
pub fn ensure_compatible<'a>(grids: impl IntoIterator<Item = &'a DemGrid>) -> Result<()> {
    let mut iter = grids.into_iter();
    let Some(first) = iter.next() else {
        return Ok(());
    };
    for (k, g) in iter.enumerate() {
        if !first.is_compatible(g) {
            return Err(Error::Incompatible(format!(
                "grid {} is {}x{} (cell {}), grid 0 is {}x{} (cell {})",
                k + 1,
                g.rows,
                g.cols,
                g.cell_size,
                first.rows,
                first.cols,
                first.cell_size
            )));
        }
    }
    Ok(())
}
