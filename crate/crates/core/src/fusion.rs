//! End-to-end fusion in meters: optional coregistration, joint normalization,
//! the chosen fusion method, and denormalization, with a run manifest that
//! records every effective parameter.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baseline::{fuse_median, fuse_weighted_average};
use crate::error::{Error, Result};
use crate::raster::{
    coregister_shift, denormalize, joint_normalize, translate, DemGrid, NormalizationContext,
};
use crate::tuning::{default_gammas, lcurve_select_gamma, LCurve};
use crate::variational::{solve_primal_dual, FusionConfig, Model, TraceEntry};
use crate::weights::WeightMap;

pub const MANIFEST_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Wa,
    Median,
    Tvl1,
    Huber,
}

impl Method {
    pub const NAMES: [&'static str; 4] = ["wa", "median", "tvl1", "huber"];

    pub fn name(self) -> &'static str {
        match self {
            Method::Wa => "wa",
            Method::Median => "median",
            Method::Tvl1 => "tvl1",
            Method::Huber => "huber",
        }
    }

    pub fn model(self) -> Option<Model> {
        match self {
            Method::Tvl1 => Some(Model::TvL1),
            Method::Huber => Some(Model::Huber),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wa" => Ok(Method::Wa),
            "median" => Ok(Method::Median),
            "tvl1" => Ok(Method::Tvl1),
            "huber" => Ok(Method::Huber),
            other => Err(Error::param(format!("unknown method '{other}'"))),
        }
    }
}

/// Parameters of [`fuse`]. `alpha_m` is in meters; `gamma` and `beta` are
/// dimensionless (normalized units). Without `gamma`, variational methods pick
/// it from `gamma_candidates` by the L-curve.
#[derive(Debug, Clone, PartialEq)]
pub struct FuseParams {
    pub method: Method,
    pub gamma: Option<f64>,
    pub gamma_candidates: Vec<f64>,
    pub alpha_m: f64,
    pub beta: f64,
    pub theta: f64,
    pub tau: f64,
    pub sigma: f64,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub energy_trace_every: usize,
    /// Align inputs 2..k onto input 1 within this many pixels.
    pub coregister: Option<usize>,
}

impl FuseParams {
    pub fn new(method: Method) -> Self {
        let d = FusionConfig::tv_l1(1.0);
        FuseParams {
            method,
            gamma: None,
            gamma_candidates: default_gammas(),
            alpha_m: FusionConfig::DEFAULT_ALPHA_METERS,
            beta: FusionConfig::DEFAULT_BETA,
            theta: d.theta,
            tau: d.tau,
            sigma: d.sigma,
            max_iters: d.max_iters,
            rel_tol: d.rel_tol,
            energy_trace_every: 0,
            coregister: None,
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = Some(gamma);
        self
    }

    /// Solver configuration in normalized units for the given context.
    pub fn solver_config(
        &self,
        model: Model,
        gamma: f64,
        ctx: &NormalizationContext,
    ) -> FusionConfig {
        FusionConfig {
            model,
            gamma,
            alpha: ctx.to_normalized_length(self.alpha_m),
            beta: self.beta,
            theta: self.theta,
            tau: self.tau,
            sigma: self.sigma,
            max_iters: self.max_iters,
            rel_tol: self.rel_tol,
            energy_trace_every: self.energy_trace_every,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftRecord {
    pub input: usize,
    pub dx: i64,
    pub dy: i64,
    pub bias_m: f64,
}

/// Run manifest, written next to every fused DEM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: u32,
    pub method: Method,
    pub n_inputs: usize,
    pub gamma: Option<f64>,
    pub gamma_source: Option<String>,
    pub alpha_m: f64,
    pub alpha_normalized: Option<f64>,
    pub beta: f64,
    pub theta: f64,
    pub tau: f64,
    pub sigma: f64,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub iterations: Option<usize>,
    pub final_rel_change: Option<f64>,
    pub converged: Option<bool>,
    pub normalization: Option<NormalizationContext>,
    pub coregistration: Vec<ShiftRecord>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone)]
pub struct FuseOutcome {
    /// Fused DEM in meters.
    pub fused: DemGrid,
    pub manifest: RunManifest,
    pub trace: Vec<TraceEntry>,
    pub lcurve: Option<LCurve>,
}

/// Fuses `inputs` (meters). `weights` is required for [`Method::Wa`] and must
/// line up with `inputs`.
pub fn fuse(
    inputs: &[DemGrid],
    weights: Option<&[WeightMap]>,
    params: &FuseParams,
) -> Result<FuseOutcome> {
    let started = Instant::now();
    if inputs.is_empty() {
        return Err(Error::param("at least one input DEM is required"));
    }

    let mut grids = inputs.to_vec();
    let mut shifts = Vec::new();
    let mut weights: Option<Vec<WeightMap>> = weights.map(<[WeightMap]>::to_vec);
    if let Some(max_shift) = params.coregister {
        for k in 1..grids.len() {
            let c = coregister_shift(&grids[k], &grids[0], max_shift)?;
            if let Some(w) = weights.as_mut() {
                if let Some(wk) = w.get_mut(k) {
                    *wk = WeightMap::new(translate(wk.grid(), c.dx, c.dy)?)?;
                }
            }
            shifts.push(ShiftRecord {
                input: k,
                dx: c.dx,
                dy: c.dy,
                bias_m: c.bias,
            });
            grids[k] = c.aligned;
        }
    }

    let mut manifest = RunManifest {
        schema: MANIFEST_SCHEMA,
        method: params.method,
        n_inputs: grids.len(),
        gamma: None,
        gamma_source: None,
        alpha_m: params.alpha_m,
        alpha_normalized: None,
        beta: params.beta,
        theta: params.theta,
        tau: params.tau,
        sigma: params.sigma,
        max_iters: params.max_iters,
        rel_tol: params.rel_tol,
        iterations: None,
        final_rel_change: None,
        converged: None,
        normalization: None,
        coregistration: shifts,
        wall_time_s: 0.0,
    };

    let mut trace = Vec::new();
    let mut lcurve = None;
    let fused = match params.method {
        Method::Median => fuse_median(&grids)?,
        Method::Wa => {
            let w = weights
                .ok_or_else(|| Error::param("weighted averaging needs HEMs or weight maps"))?;
            fuse_weighted_average(&grids, &w)?
        }
        Method::Tvl1 | Method::Huber => {
            let model = params.method.model().expect("variational method");
            let (normalized, ctx) = joint_normalize(&grids)?;
            let gamma = match params.gamma {
                Some(g) => {
                    manifest.gamma_source = Some("user".into());
                    g
                }
                None => {
                    let probe = params.solver_config(model, 1.0, &ctx);
                    let curve = lcurve_select_gamma(&normalized, &probe, &params.gamma_candidates)?;
                    manifest.gamma_source = Some("lcurve".into());
                    let g = curve.gamma_star;
                    lcurve = Some(curve);
                    g
                }
            };
            let config = params.solver_config(model, gamma, &ctx);
            let (u, state) = solve_primal_dual(&normalized, &config, None)?;
            manifest.gamma = Some(gamma);
            if model == Model::Huber {
                manifest.alpha_normalized = Some(config.alpha);
            }
            manifest.iterations = Some(state.iter);
            manifest.final_rel_change = Some(state.last_rel_change);
            manifest.converged = Some(state.converged);
            manifest.normalization = Some(ctx);
            trace = state.energy_trace;
            denormalize(&u, &ctx)?
        }
    };
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    Ok(FuseOutcome {
        fused,
        manifest,
        trace,
        lcurve,
    })
}

/// Energy trace as CSV with header `iter,energy,max_dual_norm`.
pub fn trace_csv(trace: &[TraceEntry]) -> String {
    let mut s = String::from("iter,energy,max_dual_norm\n");
    for t in trace {
        s.push_str(&format!("{},{},{}\n", t.iter, t.energy, t.max_dual_norm));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{weights_from_hem, HeightErrorMap};

    fn grid(v: &[f64]) -> DemGrid {
        DemGrid::new(2, v.len() / 2, v.to_vec(), -9999.0).unwrap()
    }

    #[test]
    fn wa_with_equal_hems_is_the_mean() {
        let a = grid(&[100.0, 102.0, 104.0, 106.0]);
        let b = grid(&[101.0, 103.0, 108.0, 90.0]);
        let hem = HeightErrorMap::new(a.filled_like(1.5)).unwrap();
        let w = weights_from_hem(&[hem.clone(), hem]).unwrap();
        let out = fuse(&[a, b], Some(&w), &FuseParams::new(Method::Wa)).unwrap();
        assert_eq!(out.fused.heights(), &[100.5, 102.5, 106.0, 98.0]);
        assert_eq!(out.manifest.iterations, None);
    }

    #[test]
    fn wa_without_weights_fails() {
        let a = grid(&[1.0, 2.0]);
        assert!(fuse(&[a], None, &FuseParams::new(Method::Wa)).is_err());
    }

    #[test]
    fn variational_runs_in_meters_and_records_parameters() {
        let a = grid(&[500.0, 500.0, 510.0, 510.0]);
        let params = FuseParams::new(Method::Huber).with_gamma(0.5);
        let out = fuse(&[a.clone(), a.clone()], None, &params).unwrap();
        let h = out.fused.heights();
        assert!(h.iter().all(|v| (500.0..=510.0).contains(v)));
        assert!(h[2] > h[0] && h[3] > h[1]);
        let m = &out.manifest;
        assert_eq!(m.schema, 1);
        assert_eq!(m.gamma, Some(0.5));
        assert_eq!(m.gamma_source.as_deref(), Some("user"));
        assert_eq!(m.alpha_m, 4.0);
        assert_eq!(m.alpha_normalized, Some(0.4));
        assert_eq!(m.beta, 1.0);
        assert!(m.iterations.unwrap() >= 1);
    }

    #[test]
    fn method_names_round_trip() {
        for name in Method::NAMES {
            assert_eq!(name.parse::<Method>().unwrap().name(), name);
        }
        assert!("mode".parse::<Method>().is_err());
    }
}
