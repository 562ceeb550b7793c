use demfuse::fusion::{fuse, FuseParams, Method};
use demfuse::quality::{compute_metrics, residual_grid};
use demfuse::raster::joint_normalize;
use demfuse::synth::{generate_scene, Preset};
use demfuse::tuning::{default_gammas, lcurve_select_gamma};
use demfuse::variational::FusionConfig;

/// The L-curve pick lands within one grid step of the gamma with the lowest
/// RMSE against the truth in an exhaustive sweep.
fn check(preset: Preset) {
    let mut spec = preset.spec();
    spec.rows = 96;
    spec.cols = 96;
    spec.buildings
        .retain(|b| b.row0 + b.depth_px <= 96 && b.col0 + b.width_px <= 96);
    let scene = generate_scene(&spec).unwrap();
    let (normalized, _) = joint_normalize(&scene.inputs).unwrap();
    let gammas = default_gammas();
    let curve = lcurve_select_gamma(&normalized, &FusionConfig::tv_l1(1.0), &gammas).unwrap();

    let rmse: Vec<f64> = gammas
        .iter()
        .map(|&g| {
            let out = fuse(
                &scene.inputs,
                None,
                &FuseParams::new(Method::Tvl1).with_gamma(g),
            )
            .unwrap();
            compute_metrics(&residual_grid(&out.fused, &scene.truth).unwrap())
                .unwrap()
                .rmse
        })
        .collect();
    let best = (0..rmse.len())
        .min_by(|&a, &b| rmse[a].total_cmp(&rmse[b]))
        .unwrap();
    let picked = gammas.iter().position(|&g| g == curve.gamma_star).unwrap();
    assert!(
        picked.abs_diff(best) <= 1,
        "{}: picked gamma {} (index {picked}), best {} (index {best}), rmse {rmse:?}",
        preset.name(),
        curve.gamma_star,
        gammas[best]
    );
}

#[test]
fn lcurve_near_rmse_optimum_residential() {
    check(Preset::Residential);
}

#[test]
fn lcurve_near_rmse_optimum_inner_city() {
    check(Preset::InnerCity);
}
