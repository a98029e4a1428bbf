use serde::{Deserialize, Serialize};

use crate::raster::VoxelGrid;

/// Cell counts of the union of closed unit cubes at occupied voxels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CubicalComplexCounts {
    pub vertices: u64,
    pub edges: u64,
    pub squares: u64,
    pub cubes: u64,
}

impl CubicalComplexCounts {
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices as i64 - self.edges as i64 + self.squares as i64 - self.cubes as i64
    }
}

/// A lattice cell at corner `(x, y, z)` is present iff one of the voxels
/// whose closure contains it is occupied. For each cell type that is a
/// fixed set of voxel offsets in {-1, 0}.
pub fn cubical_counts(grid: &VoxelGrid) -> CubicalComplexCounts {
    let r = grid.resolution() as i64;
    let occ = |x: i64, y: i64, z: i64| grid.get_signed(x, y, z);
    let mut c = CubicalComplexCounts { cubes: grid.occupied_count() as u64, ..Default::default() };
    for z in 0..=r {
        for y in 0..=r {
            for x in 0..=r {
                // vertex: any of the 8 cubes sharing the corner
                let mut any = false;
                'v: for dz in -1..=0 {
                    for dy in -1..=0 {
                        for dx in -1..=0 {
                            if occ(x + dx, y + dy, z + dz) {
                                any = true;
                                break 'v;
                            }
                        }
                    }
                }
                if !any {
                    continue;
                }
                c.vertices += 1;
                // edges leaving the corner in +x, +y, +z
                let ex = occ(x, y, z) || occ(x, y - 1, z) || occ(x, y, z - 1) || occ(x, y - 1, z - 1);
                let ey = occ(x, y, z) || occ(x - 1, y, z) || occ(x, y, z - 1) || occ(x - 1, y, z - 1);
                let ez = occ(x, y, z) || occ(x - 1, y, z) || occ(x, y - 1, z) || occ(x - 1, y - 1, z);
                c.edges += ex as u64 + ey as u64 + ez as u64;
                // squares with this corner as minimum, normal to x, y, z
                let sx = occ(x, y, z) || occ(x - 1, y, z);
                let sy = occ(x, y, z) || occ(x, y - 1, z);
                let sz = occ(x, y, z) || occ(x, y, z - 1);
                c.squares += sx as u64 + sy as u64 + sz as u64;
            }
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;
    use crate::topo::fixtures::*;
    use proptest::prelude::*;

    /// Enumerate every face of every cube in doubled coordinates and
    /// deduplicate; the number of odd coordinates is the cell dimension.
    fn brute_force(grid: &VoxelGrid) -> CubicalComplexCounts {
        let r = grid.resolution();
        let mut cells = HashSet::new();
        for z in 0..r {
            for y in 0..r {
                for x in 0..r {
                    if !grid.get(x, y, z) {
                        continue;
                    }
                    for dz in 0..3 {
                        for dy in 0..3 {
                            for dx in 0..3 {
                                cells.insert([2 * x + dx, 2 * y + dy, 2 * z + dz]);
                            }
                        }
                    }
                }
            }
        }
        let mut c = CubicalComplexCounts::default();
        for cell in cells {
            match cell.iter().filter(|&&v| v % 2 == 1).count() {
                0 => c.vertices += 1,
                1 => c.edges += 1,
                2 => c.squares += 1,
                _ => c.cubes += 1,
            }
        }
        c
    }

    #[test]
    fn single_voxel_counts() {
        let c = cubical_counts(&single_voxel());
        assert_eq!(c, CubicalComplexCounts { vertices: 8, edges: 12, squares: 6, cubes: 1 });
        assert_eq!(c.euler_characteristic(), 1);
    }

    #[test]
    fn face_adjacent_pair_counts() {
        let c = cubical_counts(&bar());
        assert_eq!(c, brute_force(&bar()));
        assert_eq!(c, CubicalComplexCounts { vertices: 12, edges: 20, squares: 11, cubes: 2 });
        assert_eq!(c.euler_characteristic(), 1);
    }

    #[test]
    fn ring_has_zero_chi() {
        let c = cubical_counts(&ring());
        assert_eq!(c, brute_force(&ring()));
        assert_eq!(c.euler_characteristic(), 0);
    }

    #[test]
    fn voxels_on_grid_border_are_counted() {
        let g = VoxelGrid::from_fn(2, |_, _, _| true);
        assert_eq!(cubical_counts(&g), brute_force(&g));
        assert_eq!(cubical_counts(&g).euler_characteristic(), 1);
    }

    #[test]
    fn chi_is_additive_over_separated_regions() {
        let a = VoxelGrid::from_fn(9, |x, y, z| x < 3 && y < 3 && z < 3 && !(x == 1 && y == 1));
        let b = VoxelGrid::from_fn(9, |x, y, z| x > 5 && y > 4 && z == 7);
        let both = VoxelGrid::from_fn(9, |x, y, z| a.get(x, y, z) || b.get(x, y, z));
        assert_eq!(
            cubical_counts(&both).euler_characteristic(),
            cubical_counts(&a).euler_characteristic() + cubical_counts(&b).euler_characteristic()
        );
    }

    proptest! {
        #[test]
        fn matches_brute_force(bits in proptest::collection::vec(proptest::bool::weighted(0.4), 64)) {
            let g = VoxelGrid::from_fn(4, |x, y, z| bits[x + 4 * (y + 4 * z)]);
            prop_assert_eq!(cubical_counts(&g), brute_force(&g));
        }
    }
}
