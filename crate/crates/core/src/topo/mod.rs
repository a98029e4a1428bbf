//! Betti numbers and Euler characteristic of voxel solids.
//!
//! Voxels are treated as closed unit cubes. Two routes compute the Betti
//! numbers: [`betti_voxel`] counts cells and digital components in linear
//! time, and [`homology_oracle`] reduces boundary matrices over GF(2) for
//! small grids. They share no code beyond the grid accessors.

mod betti;
mod counts;
mod oracle;
mod verify;

use serde::{Deserialize, Serialize};

pub use betti::{background_cavities, betti_voxel, foreground_components, Connectivity};
pub use counts::{cubical_counts, CubicalComplexCounts};
pub use oracle::{homology_oracle, OracleError, ORACLE_MAX_RESOLUTION};
pub use verify::{verify_sample, VerificationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BettiTriple {
    pub beta0: u64,
    pub beta1: u64,
    pub beta2: u64,
    pub chi: i64,
}

impl BettiTriple {
    pub fn new(beta0: u64, beta1: u64, beta2: u64) -> Self {
        BettiTriple { beta0, beta1, beta2, chi: beta0 as i64 - beta1 as i64 + beta2 as i64 }
    }

    pub fn as_tuple(&self) -> (u64, u64, u64) {
        (self.beta0, self.beta1, self.beta2)
    }
}

impl std::fmt::Display for BettiTriple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {}) chi={}", self.beta0, self.beta1, self.beta2, self.chi)
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use crate::raster::VoxelGrid;

    pub fn from_coords(res: usize, coords: &[[usize; 3]]) -> VoxelGrid {
        let mut g = VoxelGrid::new(res);
        for c in coords {
            g.set(c[0], c[1], c[2], true);
        }
        g
    }

    pub fn single_voxel() -> VoxelGrid {
        from_coords(3, &[[1, 1, 1]])
    }

    pub fn bar() -> VoxelGrid {
        from_coords(4, &[[1, 1, 1], [2, 1, 1]])
    }

    /// 8 voxels around an empty center in one z-layer.
    pub fn ring() -> VoxelGrid {
        VoxelGrid::from_fn(5, |x, y, z| z == 2 && (1..=3).contains(&x) && (1..=3).contains(&y) && !(x == 2 && y == 2))
    }

    pub fn shell() -> VoxelGrid {
        VoxelGrid::from_fn(5, |x, y, z| {
            [x, y, z].iter().all(|c| (1..=3).contains(c)) && !(x == 2 && y == 2 && z == 2)
        })
    }

    pub fn two_blocks() -> VoxelGrid {
        VoxelGrid::from_fn(8, |x, y, z| {
            let a = x < 2 && y < 2 && z < 2;
            let b = (5..7).contains(&x) && (4..8).contains(&y) && z == 3;
            a || b
        })
    }

    pub fn solid_block(res: usize, k: usize) -> VoxelGrid {
        VoxelGrid::from_fn(res, |x, y, z| x < k && y < k && z < k)
    }
}
