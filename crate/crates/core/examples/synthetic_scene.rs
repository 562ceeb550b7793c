//! Generate a preset scene and write it to a directory.
//!
//! cargo run --release --example synthetic_scene -- inner_city /tmp/scene

use std::env;
use std::path::PathBuf;

use demfuse::raster::{write_grid, RasterFormat};
use demfuse::synth::{generate_scene, preset};

fn main() -> demfuse::Result<()> {
    let mut args = env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "industrial".into());
    let out = PathBuf::from(args.next().unwrap_or_else(|| "scene".into()));
    let spec = preset(&name)?;
    let scene = generate_scene(&spec)?;

    std::fs::create_dir_all(&out).map_err(|e| demfuse::Error::Io {
        path: out.clone(),
        source: e,
    })?;
    write_grid(&scene.truth, out.join("truth.asc"), RasterFormat::EsriAscii)?;
    for (k, g) in scene.inputs.iter().enumerate() {
        write_grid(
            g,
            out.join(format!("input_{}.asc", k + 1)),
            RasterFormat::EsriAscii,
        )?;
        write_grid(
            scene.hems[k].grid(),
            out.join(format!("hem_{}.asc", k + 1)),
            RasterFormat::EsriAscii,
        )?;
    }
    println!(
        "{name}: {}x{}, {} buildings, {} inputs -> {}",
        spec.rows,
        spec.cols,
        spec.buildings.len(),
        spec.n_inputs,
        out.display()
    );
    Ok(())
}
