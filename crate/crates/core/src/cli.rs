//! Command-line frontend. Exit codes: 0 success, 1 runtime error, 2 usage error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::builder::PossibleValuesParser;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bench::{run_bench, BenchParams, DEFAULT_GAMMA_HUBER, DEFAULT_GAMMA_TVL1};
use crate::error::{Error, Result};
use crate::fusion::{fuse, trace_csv, FuseOutcome, FuseParams, Method};
use crate::quality::{evaluate, write_residual_pgm};
use crate::raster::{joint_normalize, read_grid, write_grid, DemGrid, RasterFormat};
use crate::synth::{generate_scene, preset, Preset, SceneSpec};
use crate::tuning::{default_gammas, lcurve_select_gamma};
use crate::variational::FusionConfig;
use crate::weights::{weights_from_hem, HeightErrorMap, WeightMap};

#[derive(Debug, Parser)]
#[command(name = "demfuse", version, about = "Variational fusion of InSAR DEMs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic scene: truth, noisy inputs, height error maps.
    Synth(SynthArgs),
    /// Fuse input DEMs into one.
    Fuse(FuseArgs),
    /// Score a DEM against a reference.
    Eval(EvalArgs),
    /// Select the regularization weight by the L-curve.
    Lcurve(LcurveArgs),
    /// Run every method on a synthetic scene and tabulate accuracy.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Asc,
    F32,
}

impl From<FormatArg> for RasterFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Asc => RasterFormat::EsriAscii,
            FormatArg::F32 => RasterFormat::RawF32,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Wa,
    Median,
    Tvl1,
    Huber,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Wa => Method::Wa,
            MethodArg::Median => Method::Median,
            MethodArg::Tvl1 => Method::Tvl1,
            MethodArg::Huber => Method::Huber,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Tvl1,
    Huber,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct SceneSource {
    /// Built-in scene preset.
    #[arg(long, value_parser = PossibleValuesParser::new(Preset::NAMES))]
    preset: Option<String>,
    /// Scene spec JSON file.
    #[arg(long)]
    spec: Option<PathBuf>,
}

impl SceneSource {
    fn resolve(&self, seed: Option<u64>) -> Result<SceneSpec> {
        let mut spec = match (&self.preset, &self.spec) {
            (Some(name), _) => preset(name)?,
            (None, Some(path)) => {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                SceneSpec::from_json(&text)?
            }
            (None, None) => unreachable!("clap enforces one scene source"),
        };
        if let Some(s) = seed {
            spec.seed = s;
        }
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[command(flatten)]
    scene: SceneSource,
    /// Override the scene seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "asc")]
    format: FormatArg,
}

/// Solver flags shared by `fuse` and `lcurve`.
#[derive(Debug, Args)]
struct SolverArgs {
    /// Huber data threshold in meters.
    #[arg(long, default_value_t = FusionConfig::DEFAULT_ALPHA_METERS)]
    alpha: f64,
    /// Huber regularity threshold in normalized units.
    #[arg(long, default_value_t = FusionConfig::DEFAULT_BETA)]
    beta: f64,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, default_value_t = FusionConfig::DEFAULT_MAX_ITERS)]
    max_iters: usize,
    #[arg(long, default_value_t = FusionConfig::DEFAULT_REL_TOL)]
    rel_tol: f64,
    /// Align inputs 2..k onto input 1 by integer shifts up to N pixels.
    #[arg(long, value_name = "N")]
    coregister: Option<usize>,
}

impl SolverArgs {
    fn apply(&self, p: &mut FuseParams) {
        p.alpha_m = self.alpha;
        p.beta = self.beta;
        if let Some(v) = self.theta {
            p.theta = v;
        }
        if let Some(v) = self.tau {
            p.tau = v;
        }
        if let Some(v) = self.sigma {
            p.sigma = v;
        }
        p.max_iters = self.max_iters;
        p.rel_tol = self.rel_tol;
        p.coregister = self.coregister;
    }
}

#[derive(Debug, Args)]
struct FuseArgs {
    /// Input DEMs (.asc, or .f32 with a .f32.hdr sidecar).
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Regularization weight, dimensionless. Chosen by the L-curve when omitted.
    #[arg(long)]
    gamma: Option<f64>,
    /// Height error map per input, in input order.
    #[arg(long)]
    hem: Vec<PathBuf>,
    /// Explicit weight grid per input, in input order.
    #[arg(long, conflicts_with = "hem")]
    weights: Vec<PathBuf>,
    /// Also write the energy trace CSV.
    #[arg(long)]
    trace: bool,
    /// Log the energy every N iterations in the trace.
    #[arg(long, default_value_t = 10)]
    trace_every: usize,
    #[command(flatten)]
    solver: SolverArgs,
    /// Fused DEM path; the manifest and trace are written next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    candidate: PathBuf,
    reference: PathBuf,
    /// Height of ambiguity in meters, once per input, for the PU census.
    #[arg(long)]
    hoa: Vec<f64>,
    /// Residual magnitude mapped to white in the PGM (default: 99th percentile).
    #[arg(long)]
    pgm_max: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct LcurveArgs {
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "tvl1")]
    model: ModelArg,
    /// Comma-separated candidates (default: 15 log-spaced values in [0.01, 10]).
    #[arg(long, value_delimiter = ',')]
    gammas: Option<Vec<f64>>,
    /// Also fuse with the selected weight.
    #[arg(long)]
    apply: bool,
    #[command(flatten)]
    solver: SolverArgs,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    scene: SceneSource,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_GAMMA_TVL1)]
    gamma_tvl1: f64,
    #[arg(long, default_value_t = DEFAULT_GAMMA_HUBER)]
    gamma_huber: f64,
    #[arg(long, default_value_t = FusionConfig::DEFAULT_ALPHA_METERS)]
    alpha: f64,
    #[arg(long, default_value_t = FusionConfig::DEFAULT_BETA)]
    beta: f64,
    #[arg(long, default_value_t = FusionConfig::DEFAULT_MAX_ITERS)]
    max_iters: usize,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Synth(a) => cmd_synth(&a),
        Command::Fuse(a) => cmd_fuse(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Lcurve(a) => cmd_lcurve(&a),
        Command::Bench(a) => cmd_bench(&a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

fn read_any(path: &Path) -> Result<DemGrid> {
    read_grid(path, RasterFormat::from_path(path))
}

fn read_all(paths: &[PathBuf]) -> Result<Vec<DemGrid>> {
    paths.iter().map(|p| read_any(p)).collect()
}

/// `dir/a.b.asc` -> `dir/a.b.<suffix>`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn cmd_synth(a: &SynthArgs) -> Result<()> {
    let spec = a.scene.resolve(a.seed)?;
    let scene = generate_scene(&spec)?;
    let format = RasterFormat::from(a.format);
    let ext = format.extension();
    create_dir(&a.out)?;
    write_grid(&scene.truth, a.out.join(format!("truth.{ext}")), format)?;
    for (k, (g, h)) in scene.inputs.iter().zip(&scene.hems).enumerate() {
        write_grid(g, a.out.join(format!("input_{}.{ext}", k + 1)), format)?;
        write_grid(h.grid(), a.out.join(format!("hem_{}.{ext}", k + 1)), format)?;
    }
    write_text(&a.out.join("spec.json"), &(spec.to_json()? + "\n"))
}

fn load_weights(a: &FuseArgs, n: usize) -> Result<Option<Vec<WeightMap>>> {
    let check = |got: usize, what: &str| {
        if got == n {
            Ok(())
        } else {
            Err(Error::param(format!("{got} {what} given for {n} inputs")))
        }
    };
    if !a.hem.is_empty() {
        check(a.hem.len(), "height error maps")?;
        let hems = read_all(&a.hem)?
            .into_iter()
            .map(HeightErrorMap::new)
            .collect::<Result<Vec<_>>>()?;
        return Ok(Some(weights_from_hem(&hems)?));
    }
    if !a.weights.is_empty() {
        check(a.weights.len(), "weight grids")?;
        let maps = read_all(&a.weights)?
            .into_iter()
            .map(WeightMap::new)
            .collect::<Result<Vec<_>>>()?;
        return Ok(Some(maps));
    }
    Ok(None)
}

fn write_fused(out: &Path, outcome: &FuseOutcome, trace: bool) -> Result<()> {
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    write_grid(&outcome.fused, out, RasterFormat::from_path(out))?;
    write_json(&sibling(out, "manifest.json"), &outcome.manifest)?;
    if trace {
        write_text(&sibling(out, "trace.csv"), &trace_csv(&outcome.trace))?;
    }
    if let Some(curve) = &outcome.lcurve {
        write_text(&sibling(out, "lcurve.csv"), &curve.to_csv())?;
    }
    Ok(())
}

fn cmd_fuse(a: &FuseArgs) -> Result<()> {
    let inputs = read_all(&a.inputs)?;
    let weights = load_weights(a, inputs.len())?;
    let mut params = FuseParams::new(a.method.into());
    params.gamma = a.gamma;
    params.energy_trace_every = if a.trace { a.trace_every.max(1) } else { 0 };
    a.solver.apply(&mut params);
    let outcome = fuse(&inputs, weights.as_deref(), &params)?;
    write_fused(&a.out, &outcome, a.trace)
}

fn cmd_eval(a: &EvalArgs) -> Result<()> {
    let candidate = read_any(&a.candidate)?;
    let reference = read_any(&a.reference)?;
    let (report, residuals) = evaluate(&candidate, &reference, &a.hoa)?;
    create_dir(&a.out)?;
    write_json(&a.out.join("report.json"), &report)?;
    let csv = format!(
        "{}\n{}\n",
        crate::quality::QualityReport::CSV_HEADER,
        report.to_csv_row()
    );
    write_text(&a.out.join("report.csv"), &csv)?;
    write_residual_pgm(&residuals, a.out.join("residual.pgm"), a.pgm_max)?;
    write_grid(
        &residuals,
        a.out.join("residual.asc"),
        RasterFormat::EsriAscii,
    )
}

#[derive(Serialize)]
struct GammaStar {
    model: &'static str,
    gamma_star: f64,
    candidates: usize,
}

fn cmd_lcurve(a: &LcurveArgs) -> Result<()> {
    let inputs = read_all(&a.inputs)?;
    let method = match a.model {
        ModelArg::Tvl1 => Method::Tvl1,
        ModelArg::Huber => Method::Huber,
    };
    let mut params = FuseParams::new(method);
    a.solver.apply(&mut params);
    let gammas = a.gammas.clone().unwrap_or_else(default_gammas);

    let (normalized, ctx) = joint_normalize(&inputs)?;
    let model = method.model().expect("variational method");
    let config = params.solver_config(model, gammas[0], &ctx);
    let curve = lcurve_select_gamma(&normalized, &config, &gammas)?;

    create_dir(&a.out)?;
    write_text(&a.out.join("lcurve.csv"), &curve.to_csv())?;
    write_json(
        &a.out.join("gamma_star.json"),
        &GammaStar {
            model: model.name(),
            gamma_star: curve.gamma_star,
            candidates: curve.points.len(),
        },
    )?;
    if a.apply {
        let outcome = fuse(&inputs, None, &params.with_gamma(curve.gamma_star))?;
        write_fused(&a.out.join("fused.asc"), &outcome, false)?;
    }
    Ok(())
}

fn cmd_bench(a: &BenchArgs) -> Result<()> {
    let spec = a.scene.resolve(a.seed)?;
    let params = BenchParams {
        gamma_tvl1: a.gamma_tvl1,
        gamma_huber: a.gamma_huber,
        alpha_m: a.alpha,
        beta: a.beta,
        max_iters: a.max_iters,
        ..BenchParams::default()
    };
    let outcome = run_bench(&spec, &params)?;
    create_dir(&a.out)?;
    write_text(&a.out.join("bench.csv"), &outcome.table.to_csv())?;
    write_json(&a.out.join("bench.json"), &outcome.table)?;
    write_text(&a.out.join("spec.json"), &(spec.to_json()? + "\n"))
}
