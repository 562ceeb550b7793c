//! Seeded synthetic urban scenes: a ground plane with rectangular buildings,
//! noisy input DEMs with phase-unwrapping blunders, and constant height error
//! maps.
//!
//! Generation is reproducible bit-for-bit for a given [`SceneSpec`]. The
//! random stream is `ChaCha8Rng::seed_from_u64(seed)`, consumed input by input
//! and, within an input, pixel by pixel in row-major order. Each pixel draws one
//! standard normal (ziggurat, `rand_distr::StandardNormal`), then one uniform
//! in [0, 1) that decides whether a blunder is added, then, only for blunders,
//! one fair coin for its sign.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{DemGrid, DEFAULT_NODATA};
use crate::weights::HeightErrorMap;

/// Axis-aligned prism. `width_px` runs along columns, `depth_px` along rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Building {
    pub row0: usize,
    pub col0: usize,
    pub height_m: f64,
    pub width_px: usize,
    pub depth_px: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub rows: usize,
    pub cols: usize,
    pub ground_level: f64,
    pub buildings: Vec<Building>,
    /// Terrain slope along columns, meters per pixel.
    #[serde(default)]
    pub ramp_m_per_px: f64,
    pub n_inputs: usize,
    /// Gaussian noise sigma per input, meters.
    pub noise_sigmas: Vec<f64>,
    /// Per-pixel probability of a +/-1 HoA blunder.
    pub outlier_rate: f64,
    /// Height of ambiguity per input, meters.
    pub outlier_hoas: Vec<f64>,
    pub seed: u64,
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::param("scene must have at least one row and column"));
        }
        if self.n_inputs == 0 {
            return Err(Error::param("scene needs at least one input"));
        }
        if self.noise_sigmas.len() != self.n_inputs || self.outlier_hoas.len() != self.n_inputs {
            return Err(Error::param(format!(
                "n_inputs = {} but {} noise sigmas and {} HoAs",
                self.n_inputs,
                self.noise_sigmas.len(),
                self.outlier_hoas.len()
            )));
        }
        if self
            .noise_sigmas
            .iter()
            .any(|s| !(s.is_finite() && *s >= 0.0))
        {
            return Err(Error::param("noise sigmas must be finite and non-negative"));
        }
        if self.outlier_hoas.iter().any(|h| !h.is_finite()) {
            return Err(Error::param("HoAs must be finite"));
        }
        if !(0.0..1.0).contains(&self.outlier_rate) {
            return Err(Error::param(format!(
                "outlier rate {} outside [0, 1)",
                self.outlier_rate
            )));
        }
        if !(self.ground_level.is_finite() && self.ramp_m_per_px.is_finite()) {
            return Err(Error::param("ground level and ramp must be finite"));
        }
        for (k, b) in self.buildings.iter().enumerate() {
            if b.width_px == 0
                || b.depth_px == 0
                || b.row0 + b.depth_px > self.rows
                || b.col0 + b.width_px > self.cols
                || !b.height_m.is_finite()
            {
                return Err(Error::param(format!(
                    "building {k} at ({}, {}) size {}x{} does not fit a {}x{} scene",
                    b.row0, b.col0, b.depth_px, b.width_px, self.rows, self.cols
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SceneSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone)]
pub struct Scene {
    pub truth: DemGrid,
    pub inputs: Vec<DemGrid>,
    pub hems: Vec<HeightErrorMap>,
}

pub fn generate_scene(spec: &SceneSpec) -> Result<Scene> {
    spec.validate()?;
    let (rows, cols) = (spec.rows, spec.cols);
    let mut truth: Vec<f64> = (0..rows * cols)
        .map(|i| spec.ground_level + spec.ramp_m_per_px * (i % cols) as f64)
        .collect();
    for b in &spec.buildings {
        for r in b.row0..b.row0 + b.depth_px {
            for c in b.col0..b.col0 + b.width_px {
                truth[r * cols + c] = spec.ground_level + b.height_m;
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut inputs = Vec::with_capacity(spec.n_inputs);
    for (&sigma, &hoa) in spec.noise_sigmas.iter().zip(&spec.outlier_hoas) {
        let heights = truth
            .iter()
            .map(|&t| {
                let noise: f64 = rng.sample(StandardNormal);
                let mut h = t + sigma * noise;
                if rng.random::<f64>() < spec.outlier_rate {
                    h += if rng.random_bool(0.5) { hoa } else { -hoa };
                }
                h
            })
            .collect();
        inputs.push(DemGrid::new(rows, cols, heights, DEFAULT_NODATA)?);
    }
    let hems = spec
        .noise_sigmas
        .iter()
        .map(|&s| {
            HeightErrorMap::new(DemGrid::new(
                rows,
                cols,
                vec![s; rows * cols],
                DEFAULT_NODATA,
            )?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Scene {
        truth: DemGrid::new(rows, cols, truth, DEFAULT_NODATA)?,
        inputs,
        hems,
    })
}

/// Scene archetypes for the land-use classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// A few large, low halls.
    Industrial,
    /// Dense blocks of tall buildings.
    InnerCity,
    /// Sparse small houses.
    Residential,
    /// No buildings, gently sloping terrain.
    Agricultural,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::Industrial,
        Preset::InnerCity,
        Preset::Residential,
        Preset::Agricultural,
    ];

    pub const NAMES: [&'static str; 4] =
        ["industrial", "inner_city", "residential", "agricultural"];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Industrial => "industrial",
            Preset::InnerCity => "inner_city",
            Preset::Residential => "residential",
            Preset::Agricultural => "agricultural",
        }
    }

    /// 256 x 256 scene with two inputs (sigma 2.0 / 2.2 m, 2% blunders at
    /// HoA 45.81 / 53.21 m) and seed 0.
    pub fn spec(self) -> SceneSpec {
        let mut buildings = Vec::new();
        let mut ramp = 0.0;
        match self {
            Preset::Industrial => {
                for k in 0..6 {
                    buildings.push(Building {
                        row0: 30 + (k / 3) * 110,
                        col0: 20 + (k % 3) * 80,
                        height_m: 10.0 + k as f64,
                        width_px: 60,
                        depth_px: 70,
                    });
                }
            }
            Preset::InnerCity => {
                for r in 0..8 {
                    for c in 0..8 {
                        buildings.push(Building {
                            row0: 4 + r * 32,
                            col0: 4 + c * 32,
                            height_m: 15.0 + ((r * 8 + c) * 7 % 11) as f64,
                            width_px: 24,
                            depth_px: 24,
                        });
                    }
                }
            }
            Preset::Residential => {
                for r in 0..5 {
                    for c in 0..5 {
                        buildings.push(Building {
                            row0: 15 + r * 50,
                            col0: 15 + c * 50,
                            height_m: 5.0 + ((r * 5 + c) % 4) as f64,
                            width_px: 12,
                            depth_px: 10,
                        });
                    }
                }
            }
            Preset::Agricultural => ramp = 0.02,
        }
        SceneSpec {
            rows: 256,
            cols: 256,
            ground_level: 520.0,
            buildings,
            ramp_m_per_px: ramp,
            n_inputs: 2,
            noise_sigmas: vec![2.0, 2.2],
            outlier_rate: 0.02,
            outlier_hoas: vec![45.81, 53.21],
            seed: 0,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

/// Spec of a named preset.
pub fn preset(name: &str) -> Result<SceneSpec> {
    Ok(name.parse::<Preset>()?.spec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> SceneSpec {
        SceneSpec {
            rows: 16,
            cols: 20,
            ground_level: 100.0,
            buildings: vec![Building {
                row0: 2,
                col0: 3,
                height_m: 12.0,
                width_px: 5,
                depth_px: 4,
            }],
            ramp_m_per_px: 0.0,
            n_inputs: 2,
            noise_sigmas: vec![0.0, 0.0],
            outlier_rate: 0.0,
            outlier_hoas: vec![45.0, 60.0],
            seed: 1,
        }
    }

    #[test]
    fn noiseless_inputs_equal_truth() {
        let scene = generate_scene(&small_spec()).unwrap();
        for g in &scene.inputs {
            assert_eq!(g, &scene.truth);
        }
        let values: std::collections::BTreeSet<u64> =
            scene.truth.heights().iter().map(|h| h.to_bits()).collect();
        assert_eq!(values.len(), 2);
        assert_eq!(scene.truth.at(2, 3), Some(112.0));
        assert_eq!(scene.truth.at(6, 3), Some(100.0));
    }

    #[test]
    fn noise_statistics() {
        let mut spec = small_spec();
        spec.rows = 128;
        spec.cols = 128;
        spec.noise_sigmas = vec![2.0, 0.5];
        let scene = generate_scene(&spec).unwrap();
        for (g, sigma) in scene.inputs.iter().zip([2.0, 0.5]) {
            let d: Vec<f64> = g
                .heights()
                .iter()
                .zip(scene.truth.heights())
                .map(|(a, b)| a - b)
                .collect();
            let mean = d.iter().sum::<f64>() / d.len() as f64;
            let std = (d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / d.len() as f64).sqrt();
            assert!(
                (std - sigma).abs() < 0.05 * sigma,
                "std {std} sigma {sigma}"
            );
        }
        assert_eq!(scene.hems[0].sigma(0), Some(2.0));
        assert_eq!(scene.hems[1].sigma(100), Some(0.5));
    }

    #[test]
    fn outlier_fraction() {
        let mut spec = Preset::Agricultural.spec();
        spec.noise_sigmas = vec![0.0, 0.0];
        spec.outlier_rate = 0.05;
        let scene = generate_scene(&spec).unwrap();
        for (g, hoa) in scene.inputs.iter().zip(&spec.outlier_hoas) {
            let blunders = g
                .heights()
                .iter()
                .zip(scene.truth.heights())
                .filter(|(a, b)| (*a - *b).abs() > 0.5 * hoa)
                .count();
            let frac = blunders as f64 / g.len() as f64;
            assert!((frac - 0.05).abs() <= 0.2 * 0.05, "fraction {frac}");
        }
    }

    #[test]
    fn same_seed_same_scene() {
        let spec = Preset::Residential.spec();
        let a = generate_scene(&spec).unwrap();
        let b = generate_scene(&spec).unwrap();
        assert_eq!(a.inputs, b.inputs);
        let mut other = spec.clone();
        other.seed = 1;
        assert_ne!(generate_scene(&other).unwrap().inputs, a.inputs);
    }

    #[test]
    fn presets() {
        assert!(Preset::Agricultural.spec().buildings.is_empty());
        assert_eq!(preset("industrial").unwrap(), preset("industrial").unwrap());
        let counts: Vec<usize> = Preset::ALL
            .iter()
            .map(|p| p.spec().buildings.len())
            .collect();
        for i in 0..counts.len() {
            for j in i + 1..counts.len() {
                assert_ne!(counts[i], counts[j]);
            }
        }
        for p in Preset::ALL {
            p.spec().validate().unwrap();
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert!(matches!(preset("suburb"), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn building_heights_match_classes() {
        let within = |p: Preset, lo: f64, hi: f64| {
            p.spec()
                .buildings
                .iter()
                .all(|b| (lo..=hi).contains(&b.height_m))
        };
        assert!(within(Preset::Industrial, 10.0, 15.0));
        assert!(within(Preset::InnerCity, 15.0, 25.0));
        assert!(within(Preset::Residential, 5.0, 8.0));
    }

    #[test]
    fn invalid_specs() {
        let mut s = small_spec();
        s.buildings[0].col0 = 18;
        assert!(generate_scene(&s).is_err());
        let mut s = small_spec();
        s.noise_sigmas.pop();
        assert!(s.validate().is_err());
        let mut s = small_spec();
        s.outlier_rate = 1.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = Preset::InnerCity.spec();
        assert_eq!(
            SceneSpec::from_json(&spec.to_json().unwrap()).unwrap(),
            spec
        );
    }
}
