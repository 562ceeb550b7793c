use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::energy;
use super::ops::{divergence_into, gradient_into, VectorField, GRADIENT_NORM_SQ_BOUND};
use super::prox::{prox_dual_huber, prox_dual_tv, prox_huber_point, prox_l1_point, PixelStack};
use crate::baseline::fuse_median;
use crate::error::{Error, Result};
use crate::raster::{ensure_compatible, DemGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    TvL1,
    Huber,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::TvL1 => "tv_l1",
            Model::Huber => "huber",
        }
    }
}

/// Solver hyperparameters. All thresholds are in normalized height units;
/// convert meter values with [`crate::raster::NormalizationContext::to_normalized_length`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    pub model: Model,
    /// Regularization weight.
    pub gamma: f64,
    /// Huber threshold of the data term.
    pub alpha: f64,
    /// Huber threshold of the regularity term.
    pub beta: f64,
    /// Extrapolation factor in [0, 1].
    pub theta: f64,
    /// Primal step.
    pub tau: f64,
    /// Dual step.
    pub sigma: f64,
    pub max_iters: usize,
    /// Stop once the relative change of both `u` and the dual field drops below this.
    pub rel_tol: f64,
    /// Record energy every this many iterations; 0 disables the trace.
    pub energy_trace_every: usize,
}

impl FusionConfig {
    pub const DEFAULT_ALPHA_METERS: f64 = 4.0;
    pub const DEFAULT_BETA: f64 = 1.0;
    pub const DEFAULT_MAX_ITERS: usize = 1000;
    pub const DEFAULT_REL_TOL: f64 = 1e-5;

    fn base(model: Model, gamma: f64, alpha: f64, beta: f64) -> Self {
        let step = 1.0 / GRADIENT_NORM_SQ_BOUND.sqrt();
        FusionConfig {
            model,
            gamma,
            alpha,
            beta,
            theta: 1.0,
            tau: step,
            sigma: step,
            max_iters: Self::DEFAULT_MAX_ITERS,
            rel_tol: Self::DEFAULT_REL_TOL,
            energy_trace_every: 0,
        }
    }

    pub fn tv_l1(gamma: f64) -> Self {
        Self::base(Model::TvL1, gamma, 0.0, 0.0)
    }

    /// `alpha` and `beta` in normalized units.
    pub fn huber(gamma: f64, alpha: f64, beta: f64) -> Self {
        Self::base(Model::Huber, gamma, alpha, beta)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        positive("gamma", self.gamma)?;
        positive("tau", self.tau)?;
        positive("sigma", self.sigma)?;
        positive("rel_tol", self.rel_tol)?;
        if self.model == Model::Huber {
            positive("alpha", self.alpha)?;
            positive("beta", self.beta)?;
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::param(format!(
                "theta must lie in [0, 1], got {}",
                self.theta
            )));
        }
        if self.tau * self.sigma * GRADIENT_NORM_SQ_BOUND > 1.0 + 1e-12 {
            return Err(Error::param(format!(
                "step sizes violate tau*sigma*8 <= 1 (tau={}, sigma={})",
                self.tau, self.sigma
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iter: usize,
    pub energy: f64,
    pub max_dual_norm: f64,
}

/// Solver iterates after the last step.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub u: Vec<f64>,
    pub u_bar: Vec<f64>,
    pub p: VectorField,
    /// Iterations executed.
    pub iter: usize,
    pub energy_trace: Vec<TraceEntry>,
    pub last_rel_change: f64,
    pub converged: bool,
    /// Energy of the starting point.
    pub initial_energy: f64,
}

/// Primal-dual iteration for TV-L1 or Huber fusion of normalized inputs:
///
/// ```text
/// p  <- prox_dual(p + sigma * grad(u_bar))
/// u' <- prox_data(u + tau * div(p))
/// u_bar <- u' + theta * (u' - u)
/// ```
///
/// Starts from `init` or, when absent, the pixel-wise median of the inputs.
/// Pixels without any valid input have no data term and are filled by the
/// regularizer alone. The returned grid carries no nodata.
pub fn solve_primal_dual(
    inputs: &[DemGrid],
    config: &FusionConfig,
    init: Option<&DemGrid>,
) -> Result<(DemGrid, SolverState)> {
    if inputs.is_empty() {
        return Err(Error::param("solver needs at least one input"));
    }
    config.validate()?;
    ensure_compatible(inputs.iter().chain(init))?;
    let template = &inputs[0];
    let (rows, cols) = (template.rows(), template.cols());
    let n = rows * cols;

    let start = match init {
        Some(g) => g.clone(),
        None => fuse_median(inputs)?,
    };
    let valid: Vec<f64> = start.iter_valid().collect();
    if valid.is_empty() {
        return Err(Error::NoValidData(
            "no pixel has a valid input or initial value".into(),
        ));
    }
    let fill = valid.iter().sum::<f64>() / valid.len() as f64;
    let mut u: Vec<f64> = (0..n).map(|i| start.get(i).unwrap_or(fill)).collect();

    let stack = PixelStack::new(inputs);
    let energy_of = |u: &[f64]| -> Result<f64> {
        let g = template.from_options_like(u.iter().map(|&v| Some(v)))?;
        energy::energy(
            &g,
            inputs,
            config.model,
            config.gamma,
            config.alpha,
            config.beta,
        )
    };
    let initial_energy = energy_of(&u)?;

    let mut u_bar = u.clone();
    let mut u_next = vec![0.0; n];
    let mut p = VectorField::zeros(rows, cols);
    let mut grad = VectorField::zeros(rows, cols);
    let mut div = vec![0.0; n];
    let mut p_prev = VectorField::zeros(rows, cols);
    let mut trace = Vec::new();
    if config.energy_trace_every > 0 {
        trace.push(TraceEntry {
            iter: 0,
            energy: initial_energy,
            max_dual_norm: 0.0,
        });
    }

    let (tau, sigma) = (config.tau, config.sigma);
    let mut iter = 0;
    let mut rel = f64::INFINITY;
    let mut converged = false;
    while iter < config.max_iters {
        gradient_into(&u_bar, rows, cols, None, &mut grad);
        p_prev.x.copy_from_slice(&p.x);
        p_prev.y.copy_from_slice(&p.y);
        for i in 0..n {
            p.x[i] += sigma * grad.x[i];
            p.y[i] += sigma * grad.y[i];
        }
        match config.model {
            Model::TvL1 => prox_dual_tv(&mut p, config.gamma),
            Model::Huber => prox_dual_huber(&mut p, config.gamma, config.beta, sigma),
        }
        let mut dual_diff_sq = 0.0;
        let mut dual_norm_sq = 0.0;
        for i in 0..n {
            let (dx, dy) = (p.x[i] - p_prev.x[i], p.y[i] - p_prev.y[i]);
            dual_diff_sq += dx * dx + dy * dy;
            dual_norm_sq += p_prev.x[i] * p_prev.x[i] + p_prev.y[i] * p_prev.y[i];
        }

        divergence_into(&p, None, &mut div);
        u_next.par_iter_mut().enumerate().for_each(|(i, out)| {
            let v = u[i] + tau * div[i];
            let h = stack.pixel(i);
            *out = match config.model {
                Model::TvL1 => prox_l1_point(v, h, tau),
                Model::Huber => prox_huber_point(v, h, tau, config.alpha),
            };
        });
        iter += 1;

        let mut diff_sq = 0.0;
        let mut norm_sq = 0.0;
        for i in 0..n {
            let d = u_next[i] - u[i];
            diff_sq += d * d;
            norm_sq += u[i] * u[i];
            u_bar[i] = u_next[i] + config.theta * d;
        }
        if !diff_sq.is_finite() || !norm_sq.is_finite() {
            return Err(Error::Diverged { iter });
        }
        std::mem::swap(&mut u, &mut u_next);
        rel = diff_sq.sqrt() / norm_sq.sqrt().max(1e-12);

        // u can sit still while the dual is still building up, so both must settle
        let dual_rel = dual_diff_sq.sqrt() / dual_norm_sq.sqrt().max(1e-12);
        let stop = rel < config.rel_tol && dual_rel < config.rel_tol;
        if config.energy_trace_every > 0 && (iter % config.energy_trace_every == 0 || stop) {
            trace.push(TraceEntry {
                iter,
                energy: energy_of(&u)?,
                max_dual_norm: p.max_magnitude(),
            });
        }
        if stop {
            converged = true;
            break;
        }
    }

    let fused = template.from_options_like(u.iter().map(|&v| Some(v)))?;
    let state = SolverState {
        u,
        u_bar,
        p,
        iter,
        energy_trace: trace,
        last_rel_change: rel,
        converged,
        initial_energy,
    };
    Ok((fused, state))
}
