//! The full benchmark table for one preset.
//!
//! cargo run --release --example bench_table -- agricultural

use demfuse::bench::{run_bench, BenchParams};
use demfuse::synth::preset;

fn main() -> demfuse::Result<()> {
    let name = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "industrial".into());
    let outcome = run_bench(&preset(&name)?, &BenchParams::default())?;
    print!("{}", outcome.table.to_csv());
    Ok(())
}
