//! Mesh to voxel volume, noise perturbation, smoothing, point clouds and
//! cross-section images.

mod noise;
mod points;
mod slice;
mod smooth;
mod voxel;
mod voxelize;

use thiserror::Error;

use crate::mesh::MeshError;

pub use noise::{apply_noise_octaves, default_octaves, NoiseMode, NoiseOctaveSpec, Perlin};
pub use points::{sample_point_cloud, PointCloud, DEFAULT_POINT_COUNT};
pub use slice::{extract_slice, Axis, SliceImage};
pub use smooth::{gaussian_kernel, gaussian_smooth_binarize};
pub use voxel::{VoxelGrid, VoxelIoError, VOXEL_HEADER_LEN, VOXEL_MAGIC};
pub use voxelize::{fit_grid, voxelize_into, voxelize_solid, RayDirection, GRID_PADDING};

pub const DEFAULT_SMOOTHING_SIGMA: f64 = 0.25;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("mesh is not closed: {0}")]
    OpenMesh(MeshError),
    #[error("mesh exceeds the grid bounds")]
    OutOfBounds,
    #[error("grid has no occupied voxels")]
    EmptyGrid,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
