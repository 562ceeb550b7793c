//! Non-variational fusion: weighted averaging and the pixel-wise median.

use crate::error::{Error, Result};
use crate::raster::{ensure_compatible, DemGrid};
use crate::stats::median_in_place;
use crate::weights::WeightMap;

/// `f = sum_i w_i * h_i` per pixel.
///
/// Only inputs that are valid at a pixel contribute, and their weights are
/// renormalized over that subset (a no-op when the weight maps came from
/// [`crate::weights::weights_from_hem`] and the DEM masks match the HEM masks).
/// Pixels where no input carries positive weight become nodata.
pub fn fuse_weighted_average(grids: &[DemGrid], weights: &[WeightMap]) -> Result<DemGrid> {
    if grids.is_empty() {
        return Err(Error::param("weighted average needs at least one grid"));
    }
    if grids.len() != weights.len() {
        return Err(Error::param(format!(
            "{} grids but {} weight maps",
            grids.len(),
            weights.len()
        )));
    }
    ensure_compatible(grids.iter().chain(weights.iter().map(WeightMap::grid)))?;

    let fused = (0..grids[0].len()).map(|i| {
        let mut num = 0.0;
        let mut den = 0.0;
        for (g, w) in grids.iter().zip(weights) {
            if let (Some(h), Some(w)) = (g.get(i), w.weight(i)) {
                if w > 0.0 {
                    num += w * h;
                    den += w;
                }
            }
        }
        (den > 0.0).then(|| {
            // exact when the weights already sum to one
            if den == 1.0 {
                num
            } else {
                num / den
            }
        })
    });
    grids[0].from_options_like(fused)
}

/// Per-pixel median over the valid inputs; even counts average the central pair.
pub fn fuse_median(grids: &[DemGrid]) -> Result<DemGrid> {
    if grids.is_empty() {
        return Err(Error::param("median fusion needs at least one grid"));
    }
    ensure_compatible(grids)?;
    let mut buf = Vec::with_capacity(grids.len());
    let fused = (0..grids[0].len()).map(|i| {
        buf.clear();
        buf.extend(grids.iter().filter_map(|g| g.get(i)));
        median_in_place(&mut buf)
    });
    grids[0].from_options_like(fused.collect::<Vec<_>>())
}
