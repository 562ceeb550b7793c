use super::DemGrid;
use crate::error::{Error, Result};
use crate::stats::median_in_place;

/// Outcome of [`coregister_shift`].
#[derive(Debug, Clone, PartialEq)]
pub struct Coregistration {
    /// `moving` resampled onto `fixed`'s pixels with the bias removed.
    pub aligned: DemGrid,
    /// Displacement of `moving` relative to `fixed`, in pixels: content found at
    /// `(r, c)` in `fixed` sits at `(r + dy, c + dx)` in `moving`.
    pub dx: i64,
    pub dy: i64,
    /// Median height difference `moving - fixed` over the aligned overlap, meters.
    pub bias: f64,
}

/// Integer-translation plus vertical-offset alignment of `moving` onto `fixed`.
///
/// Every shift in `[-max_shift, max_shift]^2` is scored by the mean squared
/// height difference over the jointly valid overlap. Candidates are visited in
/// order of `|dx| + |dy|`, then `dx`, then `dy`, and only a strictly lower score
/// replaces the incumbent, so ties resolve toward the smallest shift.
pub fn coregister_shift(
    moving: &DemGrid,
    fixed: &DemGrid,
    max_shift: usize,
) -> Result<Coregistration> {
    if !moving.is_compatible(fixed) {
        return Err(Error::Incompatible(format!(
            "moving {}x{} vs fixed {}x{}",
            moving.rows(),
            moving.cols(),
            fixed.rows(),
            fixed.cols()
        )));
    }
    let m = max_shift as i64;
    let mut candidates: Vec<(i64, i64)> = (-m..=m)
        .flat_map(|dx| (-m..=m).map(move |dy| (dx, dy)))
        .collect();
    candidates.sort_by_key(|&(dx, dy)| (dx.abs() + dy.abs(), dx, dy));

    let mut best: Option<(f64, i64, i64)> = None;
    for (dx, dy) in candidates {
        let Some(score) = shifted_mse(moving, fixed, dx, dy) else {
            continue;
        };
        if best.is_none_or(|(s, _, _)| score < s) {
            best = Some((score, dx, dy));
        }
    }
    let (_, dx, dy) = best.ok_or(Error::NoOverlap(max_shift))?;

    let shifted = translated(moving, dx, dy);
    let mut diffs: Vec<f64> = shifted
        .iter()
        .enumerate()
        .filter_map(|(i, s)| Some(s.as_ref()? - fixed.get(i)?))
        .collect();
    let bias = median_in_place(&mut diffs).ok_or(Error::NoOverlap(max_shift))?;
    let aligned = moving.from_options_like(shifted.into_iter().map(|s| s.map(|h| h - bias)))?;
    Ok(Coregistration {
        aligned,
        dx,
        dy,
        bias,
    })
}

/// Samples `grid` at `(r + dy, c + dx)` for every output pixel `(r, c)`;
/// pixels that fall outside become nodata.
pub fn translate(grid: &DemGrid, dx: i64, dy: i64) -> Result<DemGrid> {
    grid.from_options_like(translated(grid, dx, dy))
}

fn translated(grid: &DemGrid, dx: i64, dy: i64) -> Vec<Option<f64>> {
    (0..grid.rows())
        .flat_map(|r| (0..grid.cols()).map(move |c| (r, c)))
        .map(|(r, c)| sample(grid, r as i64 + dy, c as i64 + dx))
        .collect()
}

fn sample(g: &DemGrid, r: i64, c: i64) -> Option<f64> {
    if r < 0 || c < 0 || r >= g.rows() as i64 || c >= g.cols() as i64 {
        return None;
    }
    g.at(r as usize, c as usize)
}

fn shifted_mse(moving: &DemGrid, fixed: &DemGrid, dx: i64, dy: i64) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for r in 0..fixed.rows() {
        for c in 0..fixed.cols() {
            let (Some(f), Some(m)) = (fixed.at(r, c), sample(moving, r as i64 + dy, c as i64 + dx))
            else {
                continue;
            };
            sum += (m - f) * (m - f);
            n += 1;
        }
    }
    (n > 0).then(|| sum / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn relief(rows: usize, cols: usize, seed: u64) -> DemGrid {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = (0..rows * cols)
            .map(|_| rng.random_range(0.0..40.0))
            .collect();
        DemGrid::new(rows, cols, h, -9999.0).unwrap()
    }

    #[test]
    fn identical_grids_need_no_shift() {
        let g = relief(16, 16, 1);
        let c = coregister_shift(&g, &g, 3).unwrap();
        assert_eq!((c.dx, c.dy, c.bias), (0, 0, 0.0));
        assert_eq!(c.aligned, g);
    }

    #[test]
    fn recovers_constructed_shift_and_bias() {
        let fixed = relief(24, 20, 2);
        let (dx0, dy0) = (2i64, 1i64);
        let moved: Vec<Option<f64>> = (0..24)
            .flat_map(|r| (0..20).map(move |c| (r as i64, c as i64)))
            .map(|(r, c)| sample(&fixed, r - dy0, c - dx0).map(|h| h + 3.0))
            .collect();
        let moving = fixed.from_options_like(moved).unwrap();
        let c = coregister_shift(&moving, &fixed, 3).unwrap();
        assert_eq!((c.dx, c.dy), (2, 1));
        assert!((c.bias - 3.0).abs() < 1e-9);
        for i in 0..fixed.len() {
            if let (Some(a), Some(f)) = (c.aligned.get(i), fixed.get(i)) {
                assert!((a - f).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn ties_prefer_the_smallest_shift() {
        // constant grids score zero everywhere
        let a = DemGrid::new(6, 6, vec![5.0; 36], -9999.0).unwrap();
        let c = coregister_shift(&a, &a, 2).unwrap();
        assert_eq!((c.dx, c.dy), (0, 0));

        // vertical stripes: any dy scores equally for the correct dx
        let h: Vec<f64> = (0..36).map(|i| ((i % 6) as f64).powi(2)).collect();
        let fixed = DemGrid::new(6, 6, h, -9999.0).unwrap();
        let c = coregister_shift(&fixed, &fixed, 2).unwrap();
        assert_eq!((c.dx, c.dy), (0, 0));
    }

    #[test]
    fn noise_pairs_are_deterministic() {
        let a = relief(12, 12, 3);
        let b = relief(12, 12, 4);
        let first = coregister_shift(&a, &b, 2).unwrap();
        let second = coregister_shift(&a, &b, 2).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn disjoint_valid_regions_fail() {
        let a = DemGrid::new(1, 4, vec![1.0, -9999.0, -9999.0, -9999.0], -9999.0).unwrap();
        let b = DemGrid::new(1, 4, vec![-9999.0, -9999.0, -9999.0, 1.0], -9999.0).unwrap();
        assert!(matches!(
            coregister_shift(&a, &b, 1),
            Err(Error::NoOverlap(1))
        ));
        assert!(coregister_shift(&a, &b, 3).is_ok());
    }
}
