//! Accuracy report of a fused DEM: metrics, bands, PU census, residual map.
//!
//! cargo run --release --example quality_report -- /tmp/residual.pgm

use demfuse::fusion::{fuse, FuseParams, Method};
use demfuse::quality::{evaluate, write_residual_pgm, QualityReport};
use demfuse::synth::{generate_scene, Preset};

fn main() -> demfuse::Result<()> {
    let pgm = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "residual.pgm".into());
    let spec = Preset::InnerCity.spec();
    let scene = generate_scene(&spec)?;
    let fused = fuse(
        &scene.inputs,
        None,
        &FuseParams::new(Method::Tvl1).with_gamma(1.5),
    )?
    .fused;

    let (report, residuals) = evaluate(&fused, &scene.truth, &spec.outlier_hoas)?;
    println!("{}", QualityReport::CSV_HEADER);
    println!("{}", report.to_csv_row());
    println!(
        "bands: {:.2}% < 2 m, {:.2}% < 4 m, {:.2}% >= 4 m",
        report.band_lt2, report.band_lt4, report.band_ge4
    );
    write_residual_pgm(&residuals, &pgm, None)?;
    println!("residual map -> {pgm}");
    Ok(())
}
