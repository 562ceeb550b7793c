use serde::{Deserialize, Serialize};

use super::{ensure_compatible, DemGrid};
use crate::error::{Error, Result};

/// Joint height range of a set of input DEMs, used to map heights onto [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationContext {
    pub h_min: f64,
    pub h_max: f64,
}

impl NormalizationContext {
    pub fn new(h_min: f64, h_max: f64) -> Result<Self> {
        if !(h_min.is_finite() && h_max.is_finite()) {
            return Err(Error::param("normalization bounds must be finite"));
        }
        if h_min >= h_max {
            return Err(Error::DegenerateRange(h_min));
        }
        Ok(NormalizationContext { h_min, h_max })
    }

    pub fn range(&self) -> f64 {
        self.h_max - self.h_min
    }

    pub fn normalize(&self, h: f64) -> f64 {
        (h - self.h_min) / self.range()
    }

    pub fn denormalize(&self, n: f64) -> f64 {
        n * self.range() + self.h_min
    }

    /// Converts a height difference in meters to normalized units.
    pub fn to_normalized_length(&self, meters: f64) -> f64 {
        meters / self.range()
    }

    pub fn to_meters_length(&self, normalized: f64) -> f64 {
        normalized * self.range()
    }
}

/// Maps every valid height to `(h - h_min) / (h_max - h_min)`, with the extremes
/// taken jointly over all grids.
pub fn joint_normalize(grids: &[DemGrid]) -> Result<(Vec<DemGrid>, NormalizationContext)> {
    if grids.is_empty() {
        return Err(Error::param("joint_normalize needs at least one grid"));
    }
    ensure_compatible(grids)?;
    let (lo, hi) = grids
        .iter()
        .flat_map(DemGrid::iter_valid)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), h| {
            (lo.min(h), hi.max(h))
        });
    if lo > hi {
        return Err(Error::NoValidData("all input cells are nodata".into()));
    }
    let ctx = NormalizationContext::new(lo, hi)?;
    let out = grids
        .iter()
        .map(|g| g.map_valid(|h| ctx.normalize(h)))
        .collect::<Result<Vec<_>>>()?;
    Ok((out, ctx))
}

pub fn denormalize(grid: &DemGrid, ctx: &NormalizationContext) -> Result<DemGrid> {
    grid.map_valid(|n| ctx.denormalize(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(v: &[f64]) -> DemGrid {
        DemGrid::new(1, v.len(), v.to_vec(), -9999.0).unwrap()
    }

    #[test]
    fn single_grid_midpoint() {
        let (out, ctx) = joint_normalize(&[row(&[100.0, 150.0, 200.0])]).unwrap();
        assert_eq!(out[0].heights(), &[0.0, 0.5, 1.0]);
        assert_eq!((ctx.h_min, ctx.h_max), (100.0, 200.0));
    }

    #[test]
    fn extremes_are_joint() {
        let (out, ctx) = joint_normalize(&[row(&[0.0, 10.0]), row(&[5.0, 20.0])]).unwrap();
        assert_eq!(out[0].heights(), &[0.0, 0.5]);
        assert_eq!(out[1].heights(), &[0.25, 1.0]);
        assert_eq!((ctx.h_min, ctx.h_max), (0.0, 20.0));
    }

    #[test]
    fn denormalize_endpoints() {
        let ctx = NormalizationContext::new(100.0, 200.0).unwrap();
        let g = denormalize(&row(&[0.0, 1.0, 0.5]), &ctx).unwrap();
        assert_eq!(g.heights(), &[100.0, 200.0, 150.0]);
    }

    #[test]
    fn degenerate_inputs_are_errors() {
        assert!(matches!(
            joint_normalize(&[row(&[3.0, 3.0])]),
            Err(Error::DegenerateRange(_))
        ));
        assert!(matches!(
            joint_normalize(&[row(&[-9999.0, -9999.0])]),
            Err(Error::NoValidData(_))
        ));
        assert!(joint_normalize(&[]).is_err());
        assert!(joint_normalize(&[row(&[1.0]), row(&[1.0, 2.0])]).is_err());
    }

    #[test]
    fn nodata_is_preserved() {
        let (out, _) = joint_normalize(&[row(&[1.0, -9999.0, 3.0])]).unwrap();
        assert_eq!(out[0].heights(), &[0.0, -9999.0, 1.0]);
    }

    proptest! {
        #[test]
        fn round_trip_and_order_preserved(
            a in prop::collection::vec(-500.0f64..4000.0, 12),
            b in prop::collection::vec(-500.0f64..4000.0, 12),
        ) {
            let grids = [
                DemGrid::new(3, 4, a.clone(), -9999.0).unwrap(),
                DemGrid::new(3, 4, b, -9999.0).unwrap(),
            ];
            prop_assume!(grids.iter().flat_map(|g| g.iter_valid()).any(|h| h != a[0]));
            let (norm, ctx) = joint_normalize(&grids).unwrap();
            for (g, n) in grids.iter().zip(&norm) {
                for &h in n.heights() {
                    prop_assert!((0.0..=1.0).contains(&h));
                }
                let back = denormalize(n, &ctx).unwrap();
                for (x, y) in g.heights().iter().zip(back.heights()) {
                    prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(ctx.range()));
                }
                let argmax = |v: &[f64]| (0..v.len()).max_by(|&i, &j| v[i].total_cmp(&v[j])).unwrap();
                prop_assert_eq!(argmax(g.heights()), argmax(n.heights()));
            }
        }
    }
}
