//! Fusion of coregistered raster DEMs.
//!
//! Inputs are jointly normalized to [0, 1], optionally aligned by an integer
//! shift plus vertical bias, then fused by one of
//!
//! * weighted averaging with inverse-variance weights from height error maps,
//! * the pixel-wise median,
//! * TV-L1 or Huber variational models solved by a primal-dual iteration.
//!
//! [`quality`] scores a DEM against a reference (RMSE, NMAD, phase-unwrapping
//! blunder census, accuracy bands) and [`synth`] generates seeded urban scenes
//! with ground truth for benchmarking.

pub mod baseline;
pub mod bench;
pub mod cli;
pub mod error;
pub mod fusion;
pub mod quality;
pub mod raster;
pub mod stats;
pub mod synth;
pub mod tuning;
pub mod variational;
pub mod weights;

pub use error::{Error, Result};
pub use raster::DemGrid;
