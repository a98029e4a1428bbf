use crate::raster::VoxelGrid;

use super::{cubical_counts, BettiTriple};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Six,
    TwentySix,
}

impl Connectivity {
    fn offsets(self) -> Vec<[i64; 3]> {
        let mut out = Vec::new();
        for dz in -1..=1i64 {
            for dy in -1..=1i64 {
                for dx in -1..=1i64 {
                    let nonzero = (dx != 0) as u8 + (dy != 0) as u8 + (dz != 0) as u8;
                    let keep = match self {
                        Connectivity::Six => nonzero == 1,
                        Connectivity::TwentySix => nonzero >= 1,
                    };
                    if keep {
                        out.push([dx, dy, dz]);
                    }
                }
            }
        }
        out
    }
}

/// Flood-fills the voxels where `select` holds and returns the number of
/// components plus, for each, whether it touches the grid boundary.
fn label_components(
    grid: &VoxelGrid,
    connectivity: Connectivity,
    select: impl Fn(usize) -> bool,
) -> Vec<bool> {
    let r = grid.resolution() as i64;
    let offsets = connectivity.offsets();
    let mut seen = vec![false; grid.len()];
    let mut touches_border = Vec::new();
    let mut stack = Vec::new();
    for start in 0..grid.len() {
        if seen[start] || !select(start) {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut border = false;
        while let Some(i) = stack.pop() {
            let [x, y, z] = grid.coords(i).map(|c| c as i64);
            if x == 0 || y == 0 || z == 0 || x == r - 1 || y == r - 1 || z == r - 1 {
                border = true;
            }
            for o in &offsets {
                let (nx, ny, nz) = (x + o[0], y + o[1], z + o[2]);
                if nx < 0 || ny < 0 || nz < 0 || nx >= r || ny >= r || nz >= r {
                    continue;
                }
                let j = grid.index(nx as usize, ny as usize, nz as usize);
                if !seen[j] && select(j) {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        touches_border.push(border);
    }
    touches_border
}

pub fn foreground_components(grid: &VoxelGrid, connectivity: Connectivity) -> usize {
    let occ = grid.occupancy();
    label_components(grid, connectivity, |i| occ[i]).len()
}

/// Background components that do not reach the grid boundary (everything
/// outside the grid counts as background).
pub fn background_cavities(grid: &VoxelGrid, connectivity: Connectivity) -> usize {
    let occ = grid.occupancy();
    label_components(grid, connectivity, |i| !occ[i]).iter().filter(|&&b| !b).count()
}

/// Betti numbers of the union of closed voxel cubes.
///
/// Closed cubes that share only an edge or corner are connected, so the
/// foreground is labelled with 26-connectivity and the background with the
/// complementary 6-connectivity. `beta1` follows from the Euler
/// characteristic of the cubical complex.
pub fn betti_voxel(grid: &VoxelGrid) -> BettiTriple {
    let beta0 = foreground_components(grid, Connectivity::TwentySix) as i64;
    let beta2 = background_cavities(grid, Connectivity::Six) as i64;
    let chi = cubical_counts(grid).euler_characteristic();
    let beta1 = beta0 + beta2 - chi;
    debug_assert!(beta1 >= 0, "negative beta1 from chi {chi}");
    BettiTriple { beta0: beta0 as u64, beta1: beta1.max(0) as u64, beta2: beta2 as u64, chi }
}
