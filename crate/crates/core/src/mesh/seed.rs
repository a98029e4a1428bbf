use serde::{Deserialize, Serialize};

use super::{LatticeWelder, MeshError, TriangleMesh};

/// How the through-holes of a seed frame are arranged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedLayout {
    pub columns: u32,
    pub rows: u32,
}

impl SeedLayout {
    /// A single row up to `row_limit` holes, a near-square grid beyond.
    pub fn for_genus(genus: u32, row_limit: u32) -> Self {
        if genus <= row_limit {
            SeedLayout { columns: genus.max(1), rows: 1 }
        } else {
            let columns = (genus as f64).sqrt().ceil() as u32;
            let rows = genus.div_ceil(columns);
            SeedLayout { columns, rows }
        }
    }
}

/// Frame geometry in block units. A block is a cube of side `block_size`;
/// each block face is split into `subdivisions`² quads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SeedParams {
    pub hole_blocks: u32,
    pub bar_blocks: u32,
    pub thickness_blocks: u32,
    pub subdivisions: u32,
    pub block_size: f64,
    pub max_genus: u32,
    /// Largest genus laid out as a single row of holes.
    pub row_limit: u32,
}

impl Default for SeedParams {
    fn default() -> Self {
        SeedParams {
            hole_blocks: 2,
            bar_blocks: 2,
            thickness_blocks: 2,
            subdivisions: 1,
            block_size: 1.0,
            max_genus: 20,
            row_limit: 5,
        }
    }
}

// (axis, sign) -> the two in-plane axes ordered so that u x v points outward.
const FACE_AXES: [(usize, i64, usize, usize); 6] = [
    (0, 1, 1, 2),
    (0, -1, 2, 1),
    (1, 1, 2, 0),
    (1, -1, 0, 2),
    (2, 1, 0, 1),
    (2, -1, 1, 0),
];

/// Builds a closed frame with `genus` rectangular through-holes.
///
/// The solid is a union of blocks with no edge- or corner-only contacts,
/// so its boundary is a 2-manifold; genus follows from the hole count and
/// is re-checked through the Euler characteristic before returning.
pub fn make_genus_g_seed(genus: u32, params: &SeedParams) -> Result<TriangleMesh, MeshError> {
    if genus > params.max_genus {
        return Err(MeshError::GenusTooLarge { requested: genus, ceiling: params.max_genus });
    }
    if params.hole_blocks == 0
        || params.bar_blocks == 0
        || params.thickness_blocks == 0
        || params.subdivisions == 0
        || !(params.block_size > 0.0)
    {
        return Err(MeshError::InvalidArgument(format!("invalid seed parameters {params:?}")));
    }

    let layout = SeedLayout::for_genus(genus, params.row_limit);
    let pitch = (params.hole_blocks + params.bar_blocks) as i64;
    let bar = params.bar_blocks as i64;
    let dims = [
        layout.columns as i64 * pitch + bar,
        layout.rows as i64 * pitch + bar,
        params.thickness_blocks as i64,
    ];

    let is_hole = |x: i64, y: i64| -> bool {
        let (cx, rx) = ((x - bar).div_euclid(pitch), (x - bar).rem_euclid(pitch));
        let (cy, ry) = ((y - bar).div_euclid(pitch), (y - bar).rem_euclid(pitch));
        if x < bar || y < bar || cx >= layout.columns as i64 || cy >= layout.rows as i64 {
            return false;
        }
        if rx >= params.hole_blocks as i64 || ry >= params.hole_blocks as i64 {
            return false;
        }
        let cell = (cy * layout.columns as i64 + cx) as u32;
        cell < genus
    };
    let solid = |p: [i64; 3]| -> bool {
        (0..3).all(|a| p[a] >= 0 && p[a] < dims[a]) && !is_hole(p[0], p[1])
    };

    let s = params.subdivisions as i64;
    let mut welder = LatticeWelder::new(params.block_size / s as f64);
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                let block = [x, y, z];
                if !solid(block) {
                    continue;
                }
                for &(axis, sign, u, v) in &FACE_AXES {
                    let mut nb = block;
                    nb[axis] += sign;
                    if solid(nb) {
                        continue;
                    }
                    let mut origin = [block[0] * s, block[1] * s, block[2] * s];
                    if sign > 0 {
                        origin[axis] += s;
                    }
                    for i in 0..s {
                        for j in 0..s {
                            let corner = |di: i64, dj: i64| {
                                let mut k = origin;
                                k[u] += i + di;
                                k[v] += j + dj;
                                k
                            };
                            let a = welder.vertex(corner(0, 0));
                            let b = welder.vertex(corner(1, 0));
                            let c = welder.vertex(corner(1, 1));
                            let d = welder.vertex(corner(0, 1));
                            welder.faces.push([a, b, c]);
                            welder.faces.push([a, c, d]);
                        }
                    }
                }
            }
        }
    }
    let mesh = welder.finish()?;
    let chi = mesh.euler_characteristic();
    debug_assert_eq!(chi, 2 - 2 * genus as i64);
    if mesh.genus()? != genus {
        return Err(MeshError::InvalidArgument(format!(
            "frame construction produced chi {chi} for genus {genus}"
        )));
    }
    Ok(mesh)
}
