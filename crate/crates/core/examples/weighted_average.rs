//! Inverse-variance weighted averaging from height error maps, next to the
//! pixel-wise median.

use demfuse::baseline::{fuse_median, fuse_weighted_average};
use demfuse::quality::{compute_metrics, residual_grid};
use demfuse::synth::{generate_scene, Preset};
use demfuse::weights::weights_from_hem;

fn main() -> demfuse::Result<()> {
    let scene = generate_scene(&Preset::Residential.spec())?;
    let weights = weights_from_hem(&scene.hems)?;
    println!(
        "weight of input 1 at pixel 0: {:.4}",
        weights[0].weight(0).unwrap_or(0.0)
    );

    let wa = fuse_weighted_average(&scene.inputs, &weights)?;
    let median = fuse_median(&scene.inputs)?;
    for (name, g) in [
        ("input_1", &scene.inputs[0]),
        ("input_2", &scene.inputs[1]),
        ("WA", &wa),
        ("median", &median),
    ] {
        let m = compute_metrics(&residual_grid(g, &scene.truth)?)?;
        println!("{name:>8}: rmse {:.3} m, nmad {:.3} m", m.rmse, m.nmad);
    }
    Ok(())
}
