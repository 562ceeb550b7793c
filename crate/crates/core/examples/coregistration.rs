//! Recover an integer shift and vertical bias between two DEMs before fusing.

use demfuse::raster::{coregister_shift, translate};
use demfuse::synth::{generate_scene, Preset};

fn main() -> demfuse::Result<()> {
    let scene = generate_scene(&Preset::Industrial.spec())?;
    let fixed = &scene.inputs[0];
    // moving(r, c) = input_2(r + 2, c - 3) + 1.5 m; expect dx 3, dy -2, bias 1.5
    let moving = translate(&scene.inputs[1], -3, 2)?.map_valid(|h| h + 1.5)?;

    let c = coregister_shift(&moving, fixed, 5)?;
    println!("dx {}, dy {}, bias {:.3} m", c.dx, c.dy, c.bias);
    Ok(())
}
