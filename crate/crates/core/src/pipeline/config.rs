use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::env::{random_grid_environment, wfc_environment, Environment, EnvError, RandomGridSpec, WfcDescriptor};
use crate::growth::{GrowthConfig, DEFAULT_PLACEMENT_ATTEMPTS};
use crate::mesh::SeedParams;
use crate::raster::{default_octaves, NoiseOctaveSpec, DEFAULT_POINT_COUNT, DEFAULT_SMOOTHING_SIGMA};

use super::PipelineError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum EnvironmentConfig {
    RandomGrid(RandomGridSpec),
    Wfc(WfcDescriptor),
}

impl Default for EnvironmentConfig {
    fn default() -> Self {
        EnvironmentConfig::RandomGrid(RandomGridSpec::default())
    }
}

impl EnvironmentConfig {
    pub fn build(&self, seed: u64) -> Result<Environment, EnvError> {
        match self {
            EnvironmentConfig::RandomGrid(spec) => random_grid_environment(spec, seed),
            EnvironmentConfig::Wfc(descriptor) => wfc_environment(descriptor, seed),
        }
    }
}

/// Cellular displacement settings used by the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DisplacementConfig {
    pub intensity: f64,
    pub feature_size: f64,
    pub max_attenuations: u32,
    /// Minimum gap and wall clearance, in voxels of the sample grid.
    pub min_clearance_voxels: f64,
    pub max_crease_degrees: f64,
}

impl Default for DisplacementConfig {
    fn default() -> Self {
        DisplacementConfig { intensity: 0.05, feature_size: 0.1, max_attenuations: 8, min_clearance_voxels: 1.5, max_crease_degrees: 60.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetConfig {
    /// Inclusive genus interval.
    pub genus_range: [u32; 2],
    pub samples_per_genus: u32,
    pub voxel_resolution: usize,
    pub seed: SeedParams,
    pub environment: EnvironmentConfig,
    pub growth: GrowthConfig,
    pub displacement: DisplacementConfig,
    pub noise: Vec<NoiseOctaveSpec>,
    pub smoothing_sigma: f64,
    pub point_count: usize,
    pub master_seed: u64,
    /// Fraction of samples assigned to the training split.
    pub train_test_split: f64,
    pub placement_attempts: u32,
    /// Full restarts (new environment and placement) after a placement
    /// failure or stalled growth.
    pub sample_attempts: u32,
    pub output_directory: Option<PathBuf>,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            genus_range: [0, 5],
            samples_per_genus: 2,
            voxel_resolution: 64,
            seed: SeedParams::default(),
            environment: EnvironmentConfig::default(),
            growth: GrowthConfig { target_area_multiplier: [3.0, 3.0], ..GrowthConfig::default() },
            displacement: DisplacementConfig::default(),
            noise: default_octaves(),
            smoothing_sigma: DEFAULT_SMOOTHING_SIGMA,
            point_count: DEFAULT_POINT_COUNT,
            master_seed: 0,
            train_test_split: 0.8,
            placement_attempts: DEFAULT_PLACEMENT_ATTEMPTS,
            sample_attempts: 4,
            output_directory: None,
        }
    }
}

impl DatasetConfig {
    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        let config: DatasetConfig =
            serde_json::from_str(text).map_err(|e| PipelineError::InvalidConfig(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::InvalidConfig(m));
        let [g0, g1] = self.genus_range;
        if g0 > g1 || g1 > self.seed.max_genus {
            return bad(format!("genus range [{g0}, {g1}] invalid for ceiling {}", self.seed.max_genus));
        }
        if self.samples_per_genus == 0 {
            return bad("samples_per_genus must be positive".into());
        }
        if self.voxel_resolution < 8 {
            return bad(format!("voxel resolution {} too small", self.voxel_resolution));
        }
        if !(self.train_test_split > 0.0 && self.train_test_split < 1.0) {
            return bad(format!("train_test_split {} must lie in (0, 1)", self.train_test_split));
        }
        if self.point_count == 0 || self.placement_attempts == 0 || self.sample_attempts == 0 {
            return bad("point_count, placement_attempts and sample_attempts must be positive".into());
        }
        if !(self.smoothing_sigma >= 0.0) {
            return bad("smoothing_sigma must be nonnegative".into());
        }
        for o in &self.noise {
            if !(o.scale > 0.0) || !o.threshold.is_finite() {
                return bad(format!("noise octave {o:?} invalid"));
            }
        }
        let d = &self.displacement;
        if !(d.intensity >= 0.0) || !(d.feature_size > 0.0) || !(d.min_clearance_voxels >= 0.0)
            || !(d.max_crease_degrees > 0.0)
        {
            return bad(format!("displacement settings {d:?} invalid"));
        }
        self.growth.validate().map_err(|e| PipelineError::InvalidConfig(e.to_string()))?;
        match &self.environment {
            EnvironmentConfig::RandomGrid(spec) => spec.validate(),
            EnvironmentConfig::Wfc(desc) => desc.tile_set().map(|_| ()),
        }
        .map_err(|e| PipelineError::InvalidConfig(e.to_string()))
    }

    pub fn genera(&self) -> impl Iterator<Item = u32> {
        self.genus_range[0]..=self.genus_range[1]
    }
}
