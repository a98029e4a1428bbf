//! Seed placement, repulsive growth and surface displacement.

mod displacement;
mod energy;
mod flow;
mod placement;
mod proximity;

use thiserror::Error;

use crate::mesh::MeshError;

pub use displacement::{cellular_displacement, CellularNoise, DisplacementParams, DisplacementOutcome};
pub use energy::{TangentPointEnergy, DEFAULT_ALPHA, DEFAULT_BETA};
pub use flow::{grow, GrowthConfig, GrowthOutcome, GrowthSnapshot, GrowthStats, TraceRow, DEFAULT_SNAPSHOT_FRACTIONS};
pub use placement::{place_seed, place_seed_random, PlacementParams, DEFAULT_PLACEMENT_ATTEMPTS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrowthError {
    #[error("invalid growth configuration: {0}")]
    InvalidConfig(String),
    #[error("coincident centroids for faces {faces:?}")]
    Singular { faces: (usize, usize) },
    #[error("no collision-free placement after {attempts} attempts")]
    PlacementInfeasible { attempts: u32 },
    #[error("growth stalled at area ratio {area_ratio:.3} after {iterations} iterations")]
    Stalled { iterations: usize, area_ratio: f64 },
    #[error("no admissible displacement down to intensity {intensity:e}")]
    Displacement { intensity: f64 },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}
