//! L-curve selection of the TV-L1 weight on a cropped scene.

use demfuse::raster::joint_normalize;
use demfuse::synth::{generate_scene, Preset};
use demfuse::tuning::{default_gammas, lcurve_select_gamma};
use demfuse::variational::FusionConfig;

fn main() -> demfuse::Result<()> {
    let mut spec = Preset::Residential.spec();
    spec.rows = 96;
    spec.cols = 96;
    spec.buildings
        .retain(|b| b.row0 + b.depth_px <= 96 && b.col0 + b.width_px <= 96);
    let scene = generate_scene(&spec)?;
    let (normalized, _) = joint_normalize(&scene.inputs)?;

    let curve = lcurve_select_gamma(&normalized, &FusionConfig::tv_l1(1.0), &default_gammas())?;
    print!("{}", curve.to_csv());
    println!("selected gamma {:.4}", curve.gamma_star);
    Ok(())
}
