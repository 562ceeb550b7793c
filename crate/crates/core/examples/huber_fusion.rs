//! Huber fusion on a scene with strong phase-unwrapping blunders, with the
//! PU census against weighted averaging.

use demfuse::fusion::{fuse, FuseParams, Method};
use demfuse::quality::evaluate;
use demfuse::synth::{generate_scene, Preset};
use demfuse::weights::weights_from_hem;

fn main() -> demfuse::Result<()> {
    let mut spec = Preset::Industrial.spec();
    spec.outlier_hoas = vec![45.81, 72.02];
    spec.outlier_rate = 0.03;
    let scene = generate_scene(&spec)?;
    let hoas = &spec.outlier_hoas;

    let weights = weights_from_hem(&scene.hems)?;
    let wa = fuse(&scene.inputs, Some(&weights), &FuseParams::new(Method::Wa))?;
    // alpha = 4 m, beta = 1
    let huber = fuse(
        &scene.inputs,
        None,
        &FuseParams::new(Method::Huber).with_gamma(1.5),
    )?;

    for (name, g) in [("WA", &wa.fused), ("Huber", &huber.fused)] {
        let (r, _) = evaluate(g, &scene.truth, hoas)?;
        println!(
            "{name:>6}: rmse {:.3} m, PU errors {} (threshold {:.2} m), max {:.2} m, min {:.2} m",
            r.rmse,
            r.n_pu_errors.unwrap_or(0),
            r.pu_threshold.unwrap_or(f64::NAN),
            r.max_discrepancy,
            r.min_discrepancy
        );
    }
    Ok(())
}
