//! Inverse-variance fusion weights from interferometric height error maps.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::raster::{ensure_compatible, DemGrid};

/// Per-pixel 1-sigma height error in meters. Cells whose sigma is not
/// strictly positive are stored as nodata.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightErrorMap(DemGrid);

impl HeightErrorMap {
    /// Wraps a sigma raster, masking any cell with sigma <= 0.
    pub fn new(sigma: DemGrid) -> Result<Self> {
        let masked =
            sigma.from_options_like((0..sigma.len()).map(|i| sigma.get(i).filter(|&s| s > 0.0)))?;
        Ok(HeightErrorMap(masked))
    }

    pub fn grid(&self) -> &DemGrid {
        &self.0
    }

    pub fn into_grid(self) -> DemGrid {
        self.0
    }

    pub fn sigma(&self, i: usize) -> Option<f64> {
        self.0.get(i)
    }

    pub fn is_valid(&self, i: usize) -> bool {
        self.0.is_valid(i)
    }
}

/// Height error from phase noise: `sigma = |h_amb| * sigma_phi / 2pi`.
/// `sigma_phi` is in radians; zero-noise pixels come out invalid.
pub fn sigma_from_phase_error(h_amb: f64, sigma_phi: &DemGrid) -> Result<HeightErrorMap> {
    if h_amb == 0.0 || !h_amb.is_finite() {
        return Err(Error::param(format!(
            "height of ambiguity must be non-zero, got {h_amb}"
        )));
    }
    if sigma_phi.iter_valid().any(|s| s < 0.0) {
        return Err(Error::param("phase error must be non-negative"));
    }
    HeightErrorMap::new(sigma_phi.map_valid(|s| h_amb.abs() * s / TAU)?)
}

/// Normalized weight map; nodata where no input is valid.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMap(DemGrid);

impl WeightMap {
    /// Wraps explicit weights. Negative weights are rejected.
    pub fn new(weights: DemGrid) -> Result<Self> {
        if weights.iter_valid().any(|w| w < 0.0) {
            return Err(Error::param("weights must be non-negative"));
        }
        Ok(WeightMap(weights))
    }

    pub fn grid(&self) -> &DemGrid {
        &self.0
    }

    pub fn weight(&self, i: usize) -> Option<f64> {
        self.0.get(i)
    }
}

/// `w_j = sigma_j^-2 / sum_k sigma_k^-2`, summed over the inputs valid at each
/// pixel. Inputs that are invalid at a pixel get weight 0 there; pixels with no
/// valid input are nodata in every output map.
pub fn weights_from_hem(hems: &[HeightErrorMap]) -> Result<Vec<WeightMap>> {
    if hems.is_empty() {
        return Err(Error::param("at least one height error map is required"));
    }
    ensure_compatible(hems.iter().map(HeightErrorMap::grid))?;
    let template = hems[0].grid();
    let n = template.len();

    let mut out: Vec<Vec<Option<f64>>> = vec![Vec::with_capacity(n); hems.len()];
    for i in 0..n {
        let precision: Vec<Option<f64>> = hems
            .iter()
            .map(|h| h.sigma(i).map(|s| 1.0 / (s * s)))
            .collect();
        let total: f64 = precision.iter().flatten().sum();
        for (slot, p) in out.iter_mut().zip(&precision) {
            slot.push(if total > 0.0 {
                Some(p.map_or(0.0, |p| p / total))
            } else {
                None
            });
        }
    }
    out.into_iter()
        .map(|w| template.from_options_like(w).map(WeightMap))
        .collect()
}
