//! Proximal maps used by the primal-dual iteration.
//!
//! The data proxes are separable per pixel. Each pixel's 1-D problem is convex
//! and piecewise smooth with breakpoints at the input heights (TV-L1) or at
//! `h_i +/- alpha` (Huber), so the minimizer is found exactly by locating the
//! sign change of the monotone derivative on the sorted breakpoints.

use super::ops::VectorField;
use crate::error::{Error, Result};
use crate::raster::{ensure_compatible, DemGrid};

/// Valid input heights per pixel, sorted ascending, in CSR layout.
#[derive(Debug, Clone)]
pub(crate) struct PixelStack {
    offsets: Vec<usize>,
    values: Vec<f64>,
}

impl PixelStack {
    pub(crate) fn new(inputs: &[DemGrid]) -> Self {
        let n = inputs.first().map_or(0, DemGrid::len);
        let mut offsets = Vec::with_capacity(n + 1);
        let mut values = Vec::with_capacity(n * inputs.len());
        offsets.push(0);
        for i in 0..n {
            let start = values.len();
            values.extend(inputs.iter().filter_map(|g| g.get(i)));
            values[start..].sort_by(f64::total_cmp);
            offsets.push(values.len());
        }
        PixelStack { offsets, values }
    }

    #[inline]
    pub(crate) fn pixel(&self, i: usize) -> &[f64] {
        &self.values[self.offsets[i]..self.offsets[i + 1]]
    }
}

/// `argmin_v sum_i |v - h_i| + (v - u)^2 / (2 tau)` for ascending `sorted_h`.
/// Returns `u` when there are no samples.
pub fn prox_l1_point(u: f64, sorted_h: &[f64], tau: f64) -> f64 {
    let k = sorted_h.len();
    // With m samples strictly below v and k - m above, the derivative is
    // (v - u)/tau + m - (k - m); its root on that interval is u + tau (k - 2m).
    for m in 0..=k {
        let v = u + tau * (k as f64 - 2.0 * m as f64);
        let lo = if m == 0 {
            f64::NEG_INFINITY
        } else {
            sorted_h[m - 1]
        };
        let hi = if m == k { f64::INFINITY } else { sorted_h[m] };
        if lo <= v && v <= hi {
            return v;
        }
    }
    // No interior root: the derivative jumps over zero at a breakpoint. Take the
    // first sample where the right derivative is non-negative.
    for (j, &h) in sorted_h.iter().enumerate() {
        let at_or_below = sorted_h[j..].iter().take_while(|&&x| x == h).count() + j;
        let right = (h - u) / tau + at_or_below as f64 - (k - at_or_below) as f64;
        if right >= 0.0 {
            return h;
        }
    }
    sorted_h[k - 1]
}

/// `argmin_v sum_i huber(v - h_i, alpha) + (v - u)^2 / (2 tau)` for ascending `sorted_h`.
pub fn prox_huber_point(u: f64, sorted_h: &[f64], tau: f64, alpha: f64) -> f64 {
    let k = sorted_h.len();
    if k == 0 {
        return u;
    }
    let derivative = |v: f64| {
        (v - u) / tau
            + sorted_h
                .iter()
                .map(|h| ((v - h) / alpha).clamp(-1.0, 1.0))
                .sum::<f64>()
    };

    // merge h - alpha and h + alpha, both ascending
    let (mut a, mut b) = (0, 0);
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    while a < k || b < k {
        let bp = if b == k || (a < k && sorted_h[a] - alpha <= sorted_h[b] + alpha) {
            a += 1;
            sorted_h[a - 1] - alpha
        } else {
            b += 1;
            sorted_h[b - 1] + alpha
        };
        if derivative(bp) >= 0.0 {
            hi = bp;
            break;
        }
        lo = bp;
    }

    // The derivative is affine on (lo, hi); classify each sample there.
    let probe = match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (false, true) => hi - alpha,
        (true, false) => lo + alpha,
        (false, false) => unreachable!("at least one breakpoint exists"),
    };
    let mut rhs = u / tau;
    let mut slope = 1.0 / tau;
    for &h in sorted_h {
        let r = probe - h;
        if r >= alpha {
            rhs -= 1.0;
        } else if r <= -alpha {
            rhs += 1.0;
        } else {
            rhs += h / alpha;
            slope += 1.0 / alpha;
        }
    }
    (rhs / slope).clamp(lo, hi)
}

fn check_data_prox_args(u: &DemGrid, inputs: &[DemGrid], tau: f64) -> Result<()> {
    if tau.is_nan() || tau <= 0.0 {
        return Err(Error::param(format!("tau must be positive, got {tau}")));
    }
    ensure_compatible(std::iter::once(u).chain(inputs))
}

/// Pixel-wise TV-L1 data prox. Nodata pixels of `u` stay nodata; pixels with
/// no valid input keep `u`.
pub fn prox_data_l1(u: &DemGrid, inputs: &[DemGrid], tau: f64) -> Result<DemGrid> {
    check_data_prox_args(u, inputs, tau)?;
    let stack = PixelStack::new(inputs);
    u.from_options_like(
        (0..u.len()).map(|i| u.get(i).map(|v| prox_l1_point(v, stack.pixel(i), tau))),
    )
}

/// Pixel-wise Huber data prox with threshold `alpha`.
pub fn prox_data_huber(u: &DemGrid, inputs: &[DemGrid], tau: f64, alpha: f64) -> Result<DemGrid> {
    check_data_prox_args(u, inputs, tau)?;
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::param(format!("alpha must be positive, got {alpha}")));
    }
    let stack = PixelStack::new(inputs);
    u.from_options_like((0..u.len()).map(|i| {
        u.get(i)
            .map(|v| prox_huber_point(v, stack.pixel(i), tau, alpha))
    }))
}

/// Projection of every dual vector onto the Euclidean ball of radius `gamma`.
pub fn prox_dual_tv(p: &mut VectorField, gamma: f64) {
    for i in 0..p.len() {
        let scale = (p.magnitude(i) / gamma).max(1.0);
        p.x[i] /= scale;
        p.y[i] /= scale;
    }
}

/// Resolvent of the conjugate of `gamma * huber(|.|, beta)`: shrink by
/// `1 + sigma beta / gamma`, then project onto the `gamma` ball.
pub fn prox_dual_huber(p: &mut VectorField, gamma: f64, beta: f64, sigma: f64) {
    let shrink = 1.0 + sigma * beta / gamma;
    for i in 0..p.len() {
        p.x[i] /= shrink;
        p.y[i] /= shrink;
    }
    prox_dual_tv(p, gamma);
}
