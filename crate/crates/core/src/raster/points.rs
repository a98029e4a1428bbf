use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mesh::Vec3;

use super::{RasterError, VoxelGrid};

pub const DEFAULT_POINT_COUNT: usize = 8192;

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Every point falls in an occupied voxel of `grid`.
    pub fn lies_in(&self, grid: &VoxelGrid) -> bool {
        self.points.iter().all(|p| grid.voxel_of(p).is_some_and(|[x, y, z]| grid.get(x, y, z)))
    }

    pub fn write_xyz<W: Write>(&self, mut out: W) -> io::Result<()> {
        for p in &self.points {
            writeln!(out, "{} {} {}", p.x, p.y, p.z)?;
        }
        Ok(())
    }
}

/// Uniform over occupied voxels (with replacement), then uniform within
/// the chosen voxel's cell.
pub fn sample_point_cloud(grid: &VoxelGrid, count: usize, seed: u64) -> Result<PointCloud, RasterError> {
    let occupied = grid.occupied_indices();
    if occupied.is_empty() {
        return Err(RasterError::EmptyGrid);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..count)
        .map(|_| {
            let [x, y, z] = grid.coords(occupied[rng.random_range(0..occupied.len())]);
            // Keep the jitter strictly inside the cell so rounding cannot
            // move a point across a voxel boundary.
            let mut j = || rng.random_range(1e-9..1.0 - 1e-9);
            let local = Vec3::new(x as f64 + j(), y as f64 + j(), z as f64 + j());
            grid.origin + grid.voxel_size * local
        })
        .collect();
    Ok(PointCloud { points })
}
