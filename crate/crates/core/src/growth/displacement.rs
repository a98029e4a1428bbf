use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::mesh::{TriangleMesh, Vec3};

use super::proximity::facing_gaps;
use super::GrowthError;

const CLEARANCE_CONE: f64 = 0.5;
// Gaps already below the clearance may shrink to this fraction of their size.
const GAP_SHRINK_LIMIT: f64 = 0.75;
// Edges already sharper than the crease limit may turn this much further.
const CREASE_SLACK_DEGREES: f64 = 10.0;

fn unit_face_normals(mesh: &TriangleMesh) -> Vec<Vec3> {
    (0..mesh.faces().len())
        .map(|f| {
            let [a, b, c] = mesh.triangle(f);
            (b - a).cross(&(c - a)).normalize()
        })
        .collect()
}

/// The two faces on each edge, in `mesh.edges()` order.
fn edge_faces(mesh: &TriangleMesh) -> Vec<[usize; 2]> {
    let mut by_edge: HashMap<[u32; 2], Vec<usize>> = HashMap::new();
    for (f, t) in mesh.faces().iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            by_edge.entry([a.min(b), a.max(b)]).or_default().push(f);
        }
    }
    mesh.edges().iter().map(|e| [by_edge[e][0], by_edge[e][1]]).collect()
}

/// Turning angle across each edge, in degrees.
fn crease_angles(mesh: &TriangleMesh, pairs: &[[usize; 2]]) -> Vec<f64> {
    let n = unit_face_normals(mesh);
    pairs.iter().map(|&[a, b]| n[a].dot(&n[b]).clamp(-1.0, 1.0).acos().to_degrees()).collect()
}

/// Smaller of the outward gap (to surface in front) and the inward gap
/// (local thickness), per vertex.
fn two_sided_gaps(mesh: &TriangleMesh, neighbors: &[Vec<u32>], radius: f64) -> Vec<f64> {
    let normals = mesh.vertex_normals();
    let inward: Vec<Vec3> = normals.iter().map(|n| -n).collect();
    let out = facing_gaps(mesh, neighbors, &normals, radius, CLEARANCE_CONE);
    let inn = facing_gaps(mesh, neighbors, &inward, radius, CLEARANCE_CONE);
    out.iter().zip(&inn).map(|(a, b)| a.min(*b)).collect()
}

/// Worley (cellular) noise: distance to the nearest feature point, one
/// hashed feature point per unit lattice cell.
#[derive(Debug, Clone, Copy)]
pub struct CellularNoise {
    seed: u64,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl CellularNoise {
    pub fn new(seed: u64) -> Self {
        CellularNoise { seed }
    }

    fn feature_point(&self, cell: [i64; 3]) -> Vec3 {
        let mut h = self.seed;
        for c in cell {
            h = splitmix(h ^ c as u64);
        }
        let unit = |k: u64| (splitmix(h.wrapping_add(k)) >> 11) as f64 / (1u64 << 53) as f64;
        Vec3::new(cell[0] as f64 + unit(1), cell[1] as f64 + unit(2), cell[2] as f64 + unit(3))
    }

    /// Nearest-feature distance, clamped to [0, 1].
    pub fn value(&self, p: &Vec3) -> f64 {
        let base = p.map(|c| c.floor() as i64);
        let mut best = f64::INFINITY;
        for dz in -1..=1 {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let f = self.feature_point([base.x + dx, base.y + dy, base.z + dz]);
                    best = best.min((f - p).norm_squared());
                }
            }
        }
        best.sqrt().min(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DisplacementParams {
    pub intensity: f64,
    pub feature_size: f64,
    /// Times the intensity may be halved to remove self-intersections.
    pub max_attenuations: u32,
    /// Facing surface parts may not be brought closer than this (world
    /// units) unless they already were; 0 disables the check.
    pub min_clearance: f64,
    /// No edge may turn more sharply than this (degrees between face
    /// normals) unless it already did.
    pub max_crease_degrees: f64,
}

impl Default for DisplacementParams {
    fn default() -> Self {
        DisplacementParams { intensity: 0.5, feature_size: 0.1, max_attenuations: 8, min_clearance: 0.0, max_crease_degrees: 60.0 }
    }
}

#[derive(Debug, Clone)]
pub struct DisplacementOutcome {
    pub mesh: TriangleMesh,
    pub applied_intensity: f64,
    pub attenuations: u32,
}

/// Moves each vertex along its normal by `intensity * (noise - 0.5)` with
/// noise sampled at `position / feature_size`. If the result intersects
/// itself, sharpens an edge beyond `max_crease_degrees`, or
/// narrows a gap or wall below `min_clearance`, the intensity is halved
/// and the displacement redone.
pub fn cellular_displacement(
    mesh: &TriangleMesh,
    params: &DisplacementParams,
    rng_seed: u64,
) -> Result<DisplacementOutcome, GrowthError> {
    if !(params.intensity >= 0.0) || !(params.feature_size > 0.0) || !(params.max_crease_degrees > 0.0) {
        return Err(GrowthError::InvalidConfig(format!("displacement parameters {params:?} out of range")));
    }
    if params.intensity == 0.0 {
        return Ok(DisplacementOutcome { mesh: mesh.clone(), applied_intensity: 0.0, attenuations: 0 });
    }
    let noise = CellularNoise::new(rng_seed);
    let normals = mesh.vertex_normals();
    let offsets: Vec<f64> =
        mesh.vertices().iter().map(|v| noise.value(&(v / params.feature_size)) - 0.5).collect();
    let neighbors = mesh.vertex_neighbors();
    let clearance = |m: &TriangleMesh| two_sided_gaps(m, &neighbors, 2.0 * params.min_clearance);
    let floor: Vec<f64> = if params.min_clearance > 0.0 {
        clearance(mesh).into_iter().map(|g| g.min(params.min_clearance).min(GAP_SHRINK_LIMIT * g)).collect()
    } else {
        Vec::new()
    };
    let pairs = edge_faces(mesh);
    let crease_ceiling: Vec<f64> = crease_angles(mesh, &pairs)
        .into_iter()
        .map(|a| params.max_crease_degrees.max(a + CREASE_SLACK_DEGREES))
        .collect();
    let mut intensity = params.intensity;
    for attenuations in 0..=params.max_attenuations {
        let x = mesh
            .vertices()
            .iter()
            .zip(&normals)
            .zip(&offsets)
            .map(|((v, n), o)| v + intensity * o * n)
            .collect();
        if let Ok(out) = mesh.with_vertices(x) {
            let clear = crease_angles(&out, &pairs).iter().zip(&crease_ceiling).all(|(a, c)| a <= c)
                && (floor.is_empty() || clearance(&out).iter().zip(&floor).all(|(g, f)| g >= f));
            if clear && !out.has_self_intersection() {
                return Ok(DisplacementOutcome { mesh: out, applied_intensity: intensity, attenuations });
            }
        }
        if attenuations < params.max_attenuations {
            intensity *= 0.5;
        }
    }
    Err(GrowthError::Displacement { intensity })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{make_genus_g_seed, SeedParams};

    #[test]
    fn zero_intensity_is_identity() {
        let m = make_genus_g_seed(2, &SeedParams::default()).unwrap();
        let p = DisplacementParams { intensity: 0.0, ..Default::default() };
        assert_eq!(cellular_displacement(&m, &p, 1).unwrap().mesh, m);
    }

    #[test]
    fn noise_is_bounded_and_deterministic() {
        let n = CellularNoise::new(3);
        for i in 0..500 {
            let p = Vec3::new(i as f64 * 0.37, (i * i) as f64 * 0.011, -(i as f64) * 0.23);
            let v = n.value(&p);
            assert!((0.0..=1.0).contains(&v));
            assert_eq!(v, CellularNoise::new(3).value(&p));
        }
        // feature points themselves read zero
        let f = n.feature_point([2, -1, 5]);
        assert_eq!(n.value(&f), 0.0);
    }

    #[test]
    fn nearest_feature_matches_brute_force() {
        let n = CellularNoise::new(11);
        let p = Vec3::new(3.3, -0.7, 1.9);
        let mut best = f64::INFINITY;
        for x in -3..=8 {
            for y in -5..=4 {
                for z in -3..=6 {
                    best = best.min((n.feature_point([x, y, z]) - p).norm());
                }
            }
        }
        assert_eq!(n.value(&p), best.min(1.0));
    }

    #[test]
    fn clearance_check_attenuates() {
        let seed = make_genus_g_seed(3, &SeedParams::default()).unwrap();
        let m = seed.transform([0.0; 3], [0.1; 3], Vec3::zeros()).unwrap();
        let loose = cellular_displacement(&m, &DisplacementParams::default(), 4).unwrap();
        let strict = DisplacementParams { min_clearance: 0.2, ..Default::default() };
        let out = cellular_displacement(&m, &strict, 4).unwrap();
        assert!(out.applied_intensity <= loose.applied_intensity);
        let nb = m.vertex_neighbors();
        let before = two_sided_gaps(&m, &nb, 0.4);
        let after = two_sided_gaps(&out.mesh, &nb, 0.4);
        for (a, b) in after.iter().zip(&before) {
            assert!(*a >= b.min(0.2).min(GAP_SHRINK_LIMIT * b));
        }
    }

    #[test]
    fn accepted_output_keeps_topology() {
        let seed = make_genus_g_seed(3, &SeedParams::default()).unwrap();
        let m = seed.transform([0.0; 3], [0.1; 3], Vec3::zeros()).unwrap();
        let out = cellular_displacement(&m, &DisplacementParams::default(), 4).unwrap();
        assert_eq!(out.mesh.euler_characteristic(), m.euler_characteristic());
        assert!(!out.mesh.has_self_intersection());
        assert!(out.applied_intensity <= 0.5);
        assert_eq!(out.applied_intensity, 0.5 / 2f64.powi(out.attenuations as i32));
    }

    #[test]
    fn creases_stay_within_limit() {
        let seed = make_genus_g_seed(2, &SeedParams::default()).unwrap();
        let m = seed.transform([0.0; 3], [0.05; 3], Vec3::zeros()).unwrap();
        let pairs = edge_faces(&m);
        let before = crease_angles(&m, &pairs);
        // block frames turn by right angles or not at all
        assert!(before.iter().all(|a| a.abs() < 1e-9 || (a - 90.0).abs() < 1e-9));
        for limit in [30.0, 60.0] {
            let p = DisplacementParams { max_crease_degrees: limit, ..Default::default() };
            let out = cellular_displacement(&m, &p, 9).unwrap();
            for (a, b) in crease_angles(&out.mesh, &pairs).iter().zip(&before) {
                assert!(*a <= limit.max(b + CREASE_SLACK_DEGREES) + 1e-9);
            }
        }
        let loose = DisplacementParams { max_crease_degrees: 180.0, ..Default::default() };
        let tight = DisplacementParams { max_crease_degrees: 5.0, ..Default::default() };
        let a = cellular_displacement(&m, &loose, 9).unwrap().applied_intensity;
        let b = cellular_displacement(&m, &tight, 9).unwrap().applied_intensity;
        assert!(b < a);
    }
}
