//! Regularization weight selection by the L-curve corner.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::DemGrid;
use crate::variational::{data_term, regularity_term, solve_primal_dual, FusionConfig};

/// Floor applied before taking logarithms so exact fits stay finite.
const LOG_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LCurvePoint {
    pub gamma: f64,
    pub log_data: f64,
    pub log_reg: f64,
    /// Signed curvature of the (log data, log reg) curve parameterized by
    /// `ln gamma`; 0 at the two endpoints.
    pub curvature: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LCurve {
    pub gamma_star: f64,
    pub points: Vec<LCurvePoint>,
}

impl LCurve {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("gamma,log_data,log_reg,curvature\n");
        for p in &self.points {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                p.gamma, p.log_data, p.log_reg, p.curvature
            );
        }
        s
    }
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// 15 log-spaced candidates in [0.01, 10].
pub fn default_gammas() -> Vec<f64> {
    log_spaced(0.01, 10.0, 15)
}

/// Solves the model once per candidate and returns the candidate at the
/// maximum signed curvature of the log-log L-curve. Candidates are sorted
/// first; endpoints never win; ties go to the smaller weight.
pub fn lcurve_select_gamma(
    inputs: &[DemGrid],
    config: &FusionConfig,
    gammas: &[f64],
) -> Result<LCurve> {
    let mut gammas = gammas.to_vec();
    if gammas.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
        return Err(Error::param("gamma candidates must be positive and finite"));
    }
    gammas.sort_by(f64::total_cmp);
    if gammas.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::param("gamma candidates must be distinct"));
    }
    if gammas.len() < 3 {
        return Err(Error::param(format!(
            "need at least 3 gamma candidates, got {}",
            gammas.len()
        )));
    }

    let terms = gammas
        .par_iter()
        .map(|&gamma| {
            let cfg = FusionConfig {
                gamma,
                ..config.clone()
            };
            let (u, _) = solve_primal_dual(inputs, &cfg, None)?;
            let data = data_term(&u, inputs, cfg.model, cfg.alpha)?;
            let reg = regularity_term(&u, cfg.model, cfg.beta);
            Ok((data.max(LOG_FLOOR).ln(), reg.max(LOG_FLOOR).ln()))
        })
        .collect::<Result<Vec<_>>>()?;

    let t: Vec<f64> = gammas.iter().map(|g| g.ln()).collect();
    let x: Vec<f64> = terms.iter().map(|p| p.0).collect();
    let y: Vec<f64> = terms.iter().map(|p| p.1).collect();
    let curvature = signed_curvature(&t, &x, &y);

    let mut best = 1;
    for i in 2..gammas.len() - 1 {
        if curvature[i] > curvature[best] {
            best = i;
        }
    }
    let points = (0..gammas.len())
        .map(|i| LCurvePoint {
            gamma: gammas[i],
            log_data: x[i],
            log_reg: y[i],
            curvature: curvature[i],
        })
        .collect();
    Ok(LCurve {
        gamma_star: gammas[best],
        points,
    })
}

/// Curvature `(x'y'' - y'x'') / (x'^2 + y'^2)^1.5` from three-point differences
/// on a non-uniform parameter grid. Endpoints and stationary points get 0.
pub(crate) fn signed_curvature(t: &[f64], x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut k = vec![0.0; n];
    for i in 1..n.saturating_sub(1) {
        let h1 = t[i] - t[i - 1];
        let h2 = t[i + 1] - t[i];
        let d1 = |f: &[f64]| {
            -h2 / (h1 * (h1 + h2)) * f[i - 1]
                + (h2 - h1) / (h1 * h2) * f[i]
                + h1 / (h2 * (h1 + h2)) * f[i + 1]
        };
        let d2 = |f: &[f64]| {
            2.0 * (f[i - 1] / (h1 * (h1 + h2)) - f[i] / (h1 * h2) + f[i + 1] / (h2 * (h1 + h2)))
        };
        let (xp, yp, xpp, ypp) = (d1(x), d1(y), d2(x), d2(y));
        let speed = (xp * xp + yp * yp).powf(1.5);
        let value = (xp * ypp - yp * xpp) / speed;
        k[i] = if speed > 1e-300 && value.is_finite() {
            value
        } else {
            0.0
        };
    }
    k
}
