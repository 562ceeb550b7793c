//! Desk-scale benchmark: generate a scene, fuse it every way, score every
//! input and fusion against the truth.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::baseline::fuse_median;
use crate::error::Result;
use crate::fusion::{fuse, FuseParams, Method};
use crate::quality::{evaluate, pu_threshold, QualityReport};
use crate::raster::{joint_normalize, DemGrid};
use crate::synth::{generate_scene, Scene, SceneSpec};
use crate::variational::energy;
use crate::weights::weights_from_hem;

/// Default TV-L1 weight for the presets.
pub const DEFAULT_GAMMA_TVL1: f64 = 1.5;
/// Default Huber weight for the presets.
pub const DEFAULT_GAMMA_HUBER: f64 = 1.5;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchParams {
    pub gamma_tvl1: f64,
    pub gamma_huber: f64,
    pub alpha_m: f64,
    pub beta: f64,
    pub max_iters: usize,
    pub rel_tol: f64,
}

impl Default for BenchParams {
    fn default() -> Self {
        let p = FuseParams::new(Method::Tvl1);
        BenchParams {
            gamma_tvl1: DEFAULT_GAMMA_TVL1,
            gamma_huber: DEFAULT_GAMMA_HUBER,
            alpha_m: p.alpha_m,
            beta: p.beta,
            max_iters: p.max_iters,
            rel_tol: p.rel_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub name: String,
    #[serde(flatten)]
    pub report: QualityReport,
}

/// Energies in normalized units at the median start and at the solver output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyPair {
    pub initial: f64,
    #[serde(rename = "final")]
    pub final_: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchTable {
    pub seed: u64,
    pub gamma_tvl1: f64,
    pub gamma_huber: f64,
    pub alpha_m: f64,
    pub beta: f64,
    pub pu_threshold: f64,
    pub rows: Vec<BenchRow>,
    pub energy_tvl1: EnergyPair,
    pub energy_huber: EnergyPair,
    pub iterations_tvl1: usize,
    pub iterations_huber: usize,
}

impl BenchTable {
    pub fn row(&self, name: &str) -> Option<&QualityReport> {
        self.rows.iter().find(|r| r.name == name).map(|r| &r.report)
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("name,{}\n", QualityReport::CSV_HEADER);
        for r in &self.rows {
            let _ = writeln!(s, "{},{}", r.name, r.report.to_csv_row());
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub scene: Scene,
    pub median: DemGrid,
    pub wa: DemGrid,
    pub tvl1: DemGrid,
    pub huber: DemGrid,
    pub table: BenchTable,
}

/// Runs median, WA, TV-L1 and Huber on a generated scene. The table has one
/// row per input (`input_1` ...) followed by `WA`, `TV-L1` and `Huber`.
pub fn run_bench(spec: &SceneSpec, params: &BenchParams) -> Result<BenchOutcome> {
    let scene = generate_scene(spec)?;
    run_bench_on(scene, &spec.outlier_hoas, spec.seed, params)
}

pub fn run_bench_on(
    scene: Scene,
    hoas: &[f64],
    seed: u64,
    params: &BenchParams,
) -> Result<BenchOutcome> {
    let inputs = &scene.inputs;
    let threshold = pu_threshold(hoas)?;
    let weights = weights_from_hem(&scene.hems)?;

    let variational = |method: Method, gamma: f64| -> Result<(DemGrid, EnergyPair, usize)> {
        let mut p = FuseParams::new(method).with_gamma(gamma);
        p.alpha_m = params.alpha_m;
        p.beta = params.beta;
        p.max_iters = params.max_iters;
        p.rel_tol = params.rel_tol;
        let out = fuse(inputs, None, &p)?;

        let (normalized, ctx) = joint_normalize(inputs)?;
        let model = method.model().expect("variational method");
        let cfg = p.solver_config(model, gamma, &ctx);
        let e = |g: &DemGrid| energy(g, &normalized, model, cfg.gamma, cfg.alpha, cfg.beta);
        let start = fuse_median(&normalized)?;
        let end = out.fused.map_valid(|h| ctx.normalize(h))?;
        let pair = EnergyPair {
            initial: e(&start)?,
            final_: e(&end)?,
        };
        Ok((out.fused, pair, out.manifest.iterations.unwrap_or(0)))
    };

    let median = fuse_median(inputs)?;
    let wa = fuse(inputs, Some(&weights), &FuseParams::new(Method::Wa))?.fused;
    let (tvl1, energy_tvl1, iterations_tvl1) = variational(Method::Tvl1, params.gamma_tvl1)?;
    let (huber, energy_huber, iterations_huber) = variational(Method::Huber, params.gamma_huber)?;

    let mut rows = Vec::new();
    for (k, g) in inputs.iter().enumerate() {
        rows.push(BenchRow {
            name: format!("input_{}", k + 1),
            report: evaluate(g, &scene.truth, hoas)?.0,
        });
    }
    for (name, g) in [("WA", &wa), ("TV-L1", &tvl1), ("Huber", &huber)] {
        rows.push(BenchRow {
            name: name.to_string(),
            report: evaluate(g, &scene.truth, hoas)?.0,
        });
    }

    let table = BenchTable {
        seed,
        gamma_tvl1: params.gamma_tvl1,
        gamma_huber: params.gamma_huber,
        alpha_m: params.alpha_m,
        beta: params.beta,
        pu_threshold: threshold,
        rows,
        energy_tvl1,
        energy_huber,
        iterations_tvl1,
        iterations_huber,
    };
    Ok(BenchOutcome {
        scene,
        median,
        wa,
        tvl1,
        huber,
        table,
    })
}

/// Median fusion evaluated against the truth; reported separately from the table.
pub fn median_report(outcome: &BenchOutcome, hoas: &[f64]) -> Result<QualityReport> {
    Ok(evaluate(&outcome.median, &outcome.scene.truth, hoas)?.0)
}
