use super::ops::gradient;
use super::solver::Model;
use crate::error::{Error, Result};
use crate::raster::{ensure_compatible, DemGrid};
use crate::stats::pairwise_sum;

/// Huber penalty: `x^2 / (2 eta)` for `|x| <= eta`, `|x| - eta/2` beyond.
pub fn huber_value(x: f64, eta: f64) -> Result<f64> {
    if eta.is_nan() || eta <= 0.0 {
        return Err(Error::param(format!(
            "huber threshold must be positive, got {eta}"
        )));
    }
    Ok(huber(x, eta))
}

#[inline]
pub(crate) fn huber(x: f64, eta: f64) -> f64 {
    let a = x.abs();
    if a <= eta {
        a * a / (2.0 * eta)
    } else {
        a - 0.5 * eta
    }
}

/// Per-pixel data penalty `phi(u - h_i)` summed over every valid `(pixel, input)` pair.
/// `phi` is `|.|` for TV-L1 and the Huber penalty with threshold `alpha` for Huber.
pub fn data_term(u: &DemGrid, inputs: &[DemGrid], model: Model, alpha: f64) -> Result<f64> {
    ensure_compatible(std::iter::once(u).chain(inputs))?;
    let penalty = |r: f64| match model {
        Model::TvL1 => r.abs(),
        Model::Huber => huber(r, alpha),
    };
    let per_pixel: Vec<f64> = (0..u.len())
        .map(|i| match u.get(i) {
            Some(v) => inputs
                .iter()
                .filter_map(|h| h.get(i))
                .map(|h| penalty(v - h))
                .sum(),
            None => 0.0,
        })
        .collect();
    Ok(pairwise_sum(&per_pixel))
}

/// Regularity term without the `gamma` factor: sum of `psi(|grad u|)` with
/// `psi` the identity (TV) or the Huber penalty with threshold `beta`.
pub fn regularity_term(u: &DemGrid, model: Model, beta: f64) -> f64 {
    let g = gradient(u);
    let per_pixel: Vec<f64> = (0..g.len())
        .map(|i| {
            let m = g.magnitude(i);
            match model {
                Model::TvL1 => m,
                Model::Huber => huber(m, beta),
            }
        })
        .collect();
    pairwise_sum(&per_pixel)
}

/// `sum_i |u - h_i|_1 + gamma * sum |grad u|`.
pub fn energy_tv_l1(u: &DemGrid, inputs: &[DemGrid], gamma: f64) -> Result<f64> {
    Ok(data_term(u, inputs, Model::TvL1, 0.0)? + gamma * regularity_term(u, Model::TvL1, 0.0))
}

/// `sum_i sum huber(u - h_i, alpha) + gamma * sum huber(|grad u|, beta)`.
pub fn energy_huber(
    u: &DemGrid,
    inputs: &[DemGrid],
    gamma: f64,
    alpha: f64,
    beta: f64,
) -> Result<f64> {
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(Error::param("huber thresholds must be positive"));
    }
    Ok(data_term(u, inputs, Model::Huber, alpha)? + gamma * regularity_term(u, Model::Huber, beta))
}

/// Energy of `u` under `model`.
pub fn energy(
    u: &DemGrid,
    inputs: &[DemGrid],
    model: Model,
    gamma: f64,
    alpha: f64,
    beta: f64,
) -> Result<f64> {
    match model {
        Model::TvL1 => energy_tv_l1(u, inputs, gamma),
        Model::Huber => energy_huber(u, inputs, gamma, alpha, beta),
    }
}
