//! Accuracy of a DEM against a reference: residual statistics, the
//! phase-unwrapping blunder census, accuracy bands and residual maps.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{ensure_compatible, DemGrid};
use crate::stats::{median_in_place, pairwise_sum};

/// Scale factor turning the median absolute deviation into a normal-consistent
/// spread estimate.
pub const NMAD_SCALE: f64 = 1.4826;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mean: f64,
    pub rmse: f64,
    pub mae: f64,
    pub nmad: f64,
    /// Population standard deviation, so `rmse^2 = mean^2 + std^2`.
    pub std: f64,
    pub n_valid: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PuCensus {
    pub count: usize,
    pub max_discrepancy: f64,
    pub min_discrepancy: f64,
}

/// Percentages of valid pixels with `|d| < 2`, `|d| < 4` and `|d| >= 4` meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyBands {
    pub lt2: f64,
    pub lt4: f64,
    pub ge4: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub mean: f64,
    pub rmse: f64,
    pub mae: f64,
    pub nmad: f64,
    pub std: f64,
    pub n_valid: usize,
    pub pu_threshold: Option<f64>,
    pub n_pu_errors: Option<usize>,
    pub max_discrepancy: f64,
    pub min_discrepancy: f64,
    pub band_lt2: f64,
    pub band_lt4: f64,
    pub band_ge4: f64,
}

impl QualityReport {
    pub const CSV_HEADER: &'static str = "mean,rmse,mae,nmad,std,n_valid,pu_threshold,n_pu_errors,\
max_discrepancy,min_discrepancy,band_lt2,band_lt4,band_ge4";

    pub fn to_csv_row(&self) -> String {
        let opt_f = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let opt_u = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.mean,
            self.rmse,
            self.mae,
            self.nmad,
            self.std,
            self.n_valid,
            opt_f(self.pu_threshold),
            opt_u(self.n_pu_errors),
            self.max_discrepancy,
            self.min_discrepancy,
            self.band_lt2,
            self.band_lt4,
            self.band_ge4
        )
    }
}

/// Signed residual `dem - reference` on jointly valid pixels, nodata elsewhere.
pub fn residual_grid(dem: &DemGrid, reference: &DemGrid) -> Result<DemGrid> {
    ensure_compatible([dem, reference])?;
    let out =
        dem.from_options_like((0..dem.len()).map(|i| Some(dem.get(i)? - reference.get(i)?)))?;
    if out.valid_count() == 0 {
        return Err(Error::NoValidData(
            "DEM and reference share no valid pixel".into(),
        ));
    }
    Ok(out)
}

pub fn compute_metrics(residuals: &DemGrid) -> Result<Metrics> {
    let d: Vec<f64> = residuals.iter_valid().collect();
    let n = d.len();
    if n < 2 {
        return Err(Error::NoValidData(format!(
            "{n} valid residuals, need at least 2"
        )));
    }
    let nf = n as f64;
    let mean = pairwise_sum(&d) / nf;
    let sq: Vec<f64> = d.iter().map(|x| x * x).collect();
    let rmse = (pairwise_sum(&sq) / nf).sqrt();
    let abs: Vec<f64> = d.iter().map(|x| x.abs()).collect();
    let mae = pairwise_sum(&abs) / nf;
    let centered: Vec<f64> = d.iter().map(|x| (x - mean) * (x - mean)).collect();
    let std = (pairwise_sum(&centered) / nf).sqrt();
    Ok(Metrics {
        mean,
        rmse,
        mae,
        nmad: nmad(&d),
        std,
        n_valid: n,
    })
}

/// `1.4826 * median(|d - median(d)|)`; 0 for an empty slice.
pub fn nmad(values: &[f64]) -> f64 {
    let mut buf = values.to_vec();
    let Some(med) = median_in_place(&mut buf) else {
        return 0.0;
    };
    buf.iter_mut().for_each(|x| *x = (*x - med).abs());
    NMAD_SCALE * median_in_place(&mut buf).unwrap_or(0.0)
}

/// Blunder threshold `0.75 * min|HoA| - 4` meters.
pub fn pu_threshold(hoas: &[f64]) -> Result<f64> {
    if hoas.is_empty() {
        return Err(Error::param("at least one height of ambiguity is required"));
    }
    if hoas.iter().any(|h| *h == 0.0 || !h.is_finite()) {
        return Err(Error::param(
            "heights of ambiguity must be finite and non-zero",
        ));
    }
    let min = hoas.iter().map(|h| h.abs()).fold(f64::INFINITY, f64::min);
    let th = 0.75 * min - 4.0;
    if th <= 0.0 {
        return Err(Error::param(format!(
            "PU threshold {th} m is not positive (min |HoA| = {min} m < 16/3 m)"
        )));
    }
    Ok(th)
}

/// Counts residuals with `|d| > threshold`; also reports the signed extremes.
pub fn pu_census(residuals: &DemGrid, threshold: f64) -> Result<PuCensus> {
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(Error::param(format!(
            "PU threshold must be positive, got {threshold}"
        )));
    }
    let (max, min) = extremes(residuals)?;
    Ok(PuCensus {
        count: residuals
            .iter_valid()
            .filter(|d| d.abs() > threshold)
            .count(),
        max_discrepancy: max,
        min_discrepancy: min,
    })
}

fn extremes(residuals: &DemGrid) -> Result<(f64, f64)> {
    let (max, min) = residuals
        .iter_valid()
        .fold((f64::NEG_INFINITY, f64::INFINITY), |(hi, lo), d| {
            (hi.max(d), lo.min(d))
        });
    if max < min {
        return Err(Error::NoValidData("no valid residual".into()));
    }
    Ok((max, min))
}

pub fn accuracy_bands(residuals: &DemGrid) -> Result<AccuracyBands> {
    let n = residuals.valid_count();
    if n == 0 {
        return Err(Error::NoValidData("no valid residual".into()));
    }
    let lt2 = residuals.iter_valid().filter(|d| d.abs() < 2.0).count();
    let lt4 = residuals.iter_valid().filter(|d| d.abs() < 4.0).count();
    let pct = |c: usize| 100.0 * c as f64 / n as f64;
    Ok(AccuracyBands {
        lt2: pct(lt2),
        lt4: pct(lt4),
        ge4: pct(n - lt4),
    })
}

/// Full report of `dem` against `reference`. With at least one height of
/// ambiguity the blunder threshold and census are filled in.
pub fn evaluate(
    dem: &DemGrid,
    reference: &DemGrid,
    hoas: &[f64],
) -> Result<(QualityReport, DemGrid)> {
    let residuals = residual_grid(dem, reference)?;
    let m = compute_metrics(&residuals)?;
    let bands = accuracy_bands(&residuals)?;
    let (max, min) = extremes(&residuals)?;
    let (pu_threshold, n_pu_errors) = if hoas.is_empty() {
        (None, None)
    } else {
        let th = pu_threshold(hoas)?;
        (Some(th), Some(pu_census(&residuals, th)?.count))
    };
    let report = QualityReport {
        mean: m.mean,
        rmse: m.rmse,
        mae: m.mae,
        nmad: m.nmad,
        std: m.std,
        n_valid: m.n_valid,
        pu_threshold,
        n_pu_errors,
        max_discrepancy: max,
        min_discrepancy: min,
        band_lt2: bands.lt2,
        band_lt4: bands.lt4,
        band_ge4: bands.ge4,
    };
    Ok((report, residuals))
}

/// Nearest-rank percentile of `|d|` over valid residuals.
pub fn abs_percentile(residuals: &DemGrid, pct: f64) -> Option<f64> {
    let mut a: Vec<f64> = residuals.iter_valid().map(f64::abs).collect();
    if a.is_empty() {
        return None;
    }
    a.sort_by(f64::total_cmp);
    let rank = ((pct / 100.0) * a.len() as f64).ceil().max(1.0) as usize;
    Some(a[rank.min(a.len()) - 1])
}

/// Binary PGM (P5) of `|d|` scaled linearly so that `max` maps to 255.
/// `max` defaults to the 99th percentile of `|d|`. Nodata pixels are 0.
pub fn write_residual_pgm(
    residuals: &DemGrid,
    path: impl AsRef<Path>,
    max: Option<f64>,
) -> Result<()> {
    let path = path.as_ref();
    let max = match max {
        Some(m) if m > 0.0 => m,
        Some(m) => {
            return Err(Error::param(format!(
                "PGM scale maximum must be positive, got {m}"
            )))
        }
        None => abs_percentile(residuals, 99.0).unwrap_or(0.0),
    };
    let mut bytes = format!("P5\n{} {}\n255\n", residuals.cols(), residuals.rows()).into_bytes();
    bytes.extend((0..residuals.len()).map(|i| match residuals.get(i) {
        Some(d) if max > 0.0 => ((d.abs() / max).min(1.0) * 255.0).round() as u8,
        _ => 0,
    }));
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
