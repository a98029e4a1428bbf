//! Solid voxelization by axis-parallel ray parity.

use crate::mesh::{euler_characteristic_of, Aabb, TriangleMesh, Vec3};

use super::{RasterError, VoxelGrid};

/// Padding, in voxels, between the mesh bounds and the grid boundary.
pub const GRID_PADDING: usize = 2;

const MAX_JITTER_RETRIES: usize = 8;

/// Which side of the voxel center the parity count is taken on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RayDirection {
    PosX,
    NegX,
}

/// Cube grid around `bounds` with [`GRID_PADDING`] voxels of margin along
/// the longest axis, centered on the bounds.
pub fn fit_grid(bounds: &Aabb, resolution: usize) -> Result<(Vec3, f64), RasterError> {
    if resolution <= 2 * GRID_PADDING {
        return Err(RasterError::InvalidArgument(format!("resolution {resolution} too small")));
    }
    let side = bounds.extent().max();
    if !(side > 0.0) || !side.is_finite() {
        return Err(RasterError::InvalidArgument("mesh has empty bounds".into()));
    }
    let voxel_size = side / (resolution - 2 * GRID_PADDING) as f64;
    let origin = bounds.center() - Vec3::repeat(0.5 * resolution as f64 * voxel_size);
    Ok((origin, voxel_size))
}

/// Voxelizes into a grid fitted to the mesh bounds.
pub fn voxelize_solid(mesh: &TriangleMesh, resolution: usize) -> Result<VoxelGrid, RasterError> {
    let (origin, voxel_size) = fit_grid(&mesh.bounds(), resolution)?;
    voxelize_into(mesh.vertices(), mesh.faces(), resolution, origin, voxel_size, RayDirection::PosX)
}

/// A voxel is occupied iff its center is inside the closed surface, by the
/// parity of ray crossings. Columns whose ray grazes an edge or vertex are
/// recast with a small deterministic offset.
pub fn voxelize_into(
    vertices: &[Vec3],
    faces: &[[u32; 3]],
    resolution: usize,
    origin: Vec3,
    voxel_size: f64,
    direction: RayDirection,
) -> Result<VoxelGrid, RasterError> {
    euler_characteristic_of(vertices.len(), faces).map_err(RasterError::OpenMesh)?;
    let bounds = Aabb::from_points(vertices.iter());
    let grid_max = origin + Vec3::repeat(resolution as f64 * voxel_size);
    if (0..3).any(|a| bounds.min[a] < origin[a] || bounds.max[a] > grid_max[a]) {
        return Err(RasterError::OutOfBounds);
    }

    let mut grid = VoxelGrid::with_transform(resolution, origin, voxel_size);
    let r = resolution;
    let to_local = |p: &Vec3| (p - origin) / voxel_size;
    let local: Vec<Vec3> = vertices.iter().map(to_local).collect();

    // Bin triangles by the (y, z) columns their projection covers.
    let mut columns: Vec<Vec<u32>> = vec![Vec::new(); r * r];
    for (fi, f) in faces.iter().enumerate() {
        let tri = f.map(|i| local[i as usize]);
        let (ymin, ymax) = (tri.iter().map(|p| p.y).fold(f64::INFINITY, f64::min), tri.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max));
        let (zmin, zmax) = (tri.iter().map(|p| p.z).fold(f64::INFINITY, f64::min), tri.iter().map(|p| p.z).fold(f64::NEG_INFINITY, f64::max));
        let lo = |v: f64| ((v - 0.5).floor().max(0.0)) as usize;
        let hi = |v: f64| ((v - 0.5).ceil().max(0.0) as usize).min(r - 1);
        for z in lo(zmin)..=hi(zmax) {
            for y in lo(ymin)..=hi(ymax) {
                columns[y + r * z].push(fi as u32);
            }
        }
    }

    let mut crossings = Vec::new();
    for z in 0..r {
        for y in 0..r {
            let candidates = &columns[y + r * z];
            if candidates.is_empty() {
                continue;
            }
            let mut attempt = 0;
            loop {
                // Irrational-ish offsets keep retries off lattice features.
                let jitter = attempt as f64 * 1e-6;
                let (py, pz) = (y as f64 + 0.5 + jitter * 0.7548776662, z as f64 + 0.5 + jitter * 0.5698402910);
                crossings.clear();
                let mut grazing = false;
                for &fi in candidates {
                    let tri = faces[fi as usize].map(|i| local[i as usize]);
                    match ray_crossing(&tri, py, pz) {
                        Crossing::Miss => {}
                        Crossing::Hit(x) => crossings.push(x),
                        Crossing::Grazing => {
                            grazing = true;
                            break;
                        }
                    }
                }
                if !grazing || attempt >= MAX_JITTER_RETRIES {
                    break;
                }
                attempt += 1;
            }
            crossings.sort_by(f64::total_cmp);
            for x in 0..r {
                let cx = x as f64 + 0.5;
                let count = match direction {
                    RayDirection::PosX => crossings.len() - crossings.partition_point(|&c| c <= cx),
                    RayDirection::NegX => crossings.partition_point(|&c| c < cx),
                };
                if count % 2 == 1 {
                    grid.set(x, y, z, true);
                }
            }
        }
    }
    Ok(grid)
}

enum Crossing {
    Miss,
    Hit(f64),
    Grazing,
}

/// Intersection of the x-parallel line through (·, py, pz) with a triangle.
fn ray_crossing(tri: &[Vec3; 3], py: f64, pz: f64) -> Crossing {
    const EPS: f64 = 1e-10;
    let e = |a: &Vec3, b: &Vec3| (b.y - a.y) * (pz - a.z) - (b.z - a.z) * (py - a.y);
    let w0 = e(&tri[1], &tri[2]);
    let w1 = e(&tri[2], &tri[0]);
    let w2 = e(&tri[0], &tri[1]);
    let area = w0 + w1 + w2;
    if area.abs() < EPS {
        // Triangle is parallel to the ray; neighbors decide.
        return Crossing::Miss;
    }
    let (w0, w1, w2) = (w0 / area, w1 / area, w2 / area);
    if w0 < -EPS || w1 < -EPS || w2 < -EPS {
        return Crossing::Miss;
    }
    if w0 < EPS || w1 < EPS || w2 < EPS {
        return Crossing::Grazing;
    }
    Crossing::Hit(w0 * tri[0].x + w1 * tri[1].x + w2 * tri[2].x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{make_genus_g_seed, SeedParams};
    use crate::topo::betti_voxel;

    #[test]
    fn cuboid_fills_exactly_its_voxel_centers() {
        // 3 x 2 x 4 block scaled so its faces sit on voxel boundaries.
        let p = SeedParams { hole_blocks: 1, bar_blocks: 1, thickness_blocks: 4, ..SeedParams::default() };
        let m = make_genus_g_seed(0, &p).unwrap(); // 3 x 3 x 4 cuboid
        let m = m.translated(Vec3::new(2.0, 3.0, 1.0));
        let g = voxelize_into(m.vertices(), m.faces(), 10, Vec3::zeros(), 1.0, RayDirection::PosX).unwrap();
        assert_eq!(g.occupied_count(), 3 * 3 * 4);
        assert!(g.get(2, 3, 1) && g.get(4, 5, 4) && !g.get(5, 5, 4) && !g.get(1, 3, 1));
    }

    #[test]
    fn empty_columns_stay_empty() {
        let m = make_genus_g_seed(0, &SeedParams::default()).unwrap().translated(Vec3::new(1.0, 1.0, 1.0));
        let g = voxelize_into(m.vertices(), m.faces(), 12, Vec3::zeros(), 1.0, RayDirection::PosX).unwrap();
        assert!(!(0..12).any(|x| g.get(x, 11, 11)));
    }

    #[test]
    fn out_of_bounds_and_open_meshes_rejected() {
        let m = make_genus_g_seed(0, &SeedParams::default()).unwrap();
        assert!(matches!(
            voxelize_into(m.vertices(), m.faces(), 3, Vec3::zeros(), 1.0, RayDirection::PosX),
            Err(RasterError::OutOfBounds)
        ));
        let open = &m.faces()[1..];
        assert!(matches!(
            voxelize_into(m.vertices(), open, 8, Vec3::repeat(-1.0), 1.0, RayDirection::PosX),
            Err(RasterError::OpenMesh(_))
        ));
    }

    #[test]
    fn ray_direction_does_not_change_result() {
        let m = make_genus_g_seed(3, &SeedParams::default())
            .unwrap()
            .transform([0.3, 0.9, 2.1], [1.0, 1.3, 0.8], Vec3::zeros())
            .unwrap();
        let (o, s) = fit_grid(&m.bounds(), 40).unwrap();
        let a = voxelize_into(m.vertices(), m.faces(), 40, o, s, RayDirection::PosX).unwrap();
        let b = voxelize_into(m.vertices(), m.faces(), 40, o, s, RayDirection::NegX).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn seed_voxelization_is_a_handlebody() {
        for g in [0, 1, 3, 5] {
            let m = make_genus_g_seed(g, &SeedParams::default())
                .unwrap()
                .transform([0.4, 1.2, 0.3], [1.0; 3], Vec3::zeros())
                .unwrap();
            let grid = voxelize_solid(&m, 64).unwrap();
            let b = betti_voxel(&grid);
            assert_eq!(b.as_tuple(), (1, g as u64, 0), "genus {g}");
        }
    }
}
