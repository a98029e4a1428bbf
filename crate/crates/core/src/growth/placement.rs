use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::Environment;
use crate::mesh::TriangleMesh;

use super::GrowthError;

pub const DEFAULT_PLACEMENT_ATTEMPTS: u32 = 64;
pub const UNIFORM_JITTER_LIMIT: f64 = 0.25;
pub const ANISOTROPIC_JITTER_LIMIT: f64 = 0.5;

/// Random pose and scale applied when placing a seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacementParams {
    /// Angles about x, y and z, in radians.
    pub rotation: [f64; 3],
    pub uniform_scale_jitter: f64,
    pub anisotropic_scale_jitter: [f64; 3],
}

impl Default for PlacementParams {
    fn default() -> Self {
        PlacementParams { rotation: [0.0; 3], uniform_scale_jitter: 0.0, anisotropic_scale_jitter: [0.0; 3] }
    }
}

impl PlacementParams {
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let rotation = std::array::from_fn(|_| rng.random_range(0.0..TAU));
        let uniform_scale_jitter = rng.random_range(-UNIFORM_JITTER_LIMIT..=UNIFORM_JITTER_LIMIT);
        let anisotropic_scale_jitter =
            std::array::from_fn(|_| rng.random_range(-ANISOTROPIC_JITTER_LIMIT..=ANISOTROPIC_JITTER_LIMIT));
        PlacementParams { rotation, uniform_scale_jitter, anisotropic_scale_jitter }
    }

    pub fn validate(&self) -> Result<(), GrowthError> {
        let ok = self.uniform_scale_jitter.abs() <= UNIFORM_JITTER_LIMIT
            && self.anisotropic_scale_jitter.iter().all(|a| a.abs() <= ANISOTROPIC_JITTER_LIMIT)
            && self.rotation.iter().all(|r| r.is_finite());
        if ok {
            Ok(())
        } else {
            Err(GrowthError::InvalidConfig(format!("placement jitter out of range: {self:?}")))
        }
    }
}

/// Deterministic placement: center on the environment, rotate, normalize
/// the area to 1, apply the uniform then per-axis jitter. Does not check
/// for collisions.
pub fn place_seed(seed: &TriangleMesh, env: &Environment, params: &PlacementParams) -> Result<TriangleMesh, GrowthError> {
    params.validate()?;
    let centered = seed.translated(-seed.bounds().center());
    let rotated = centered.transform(params.rotation, [1.0; 3], Default::default())?;
    let unit = 1.0 / rotated.surface_area().sqrt();
    let s = unit * (1.0 + params.uniform_scale_jitter);
    let scale = params.anisotropic_scale_jitter.map(|a| s * (1.0 + a));
    Ok(rotated.transform([0.0; 3], scale, env.center())?)
}

/// Draws placements until one does not touch the environment.
pub fn place_seed_random<R: Rng + ?Sized>(
    seed: &TriangleMesh,
    env: &Environment,
    rng: &mut R,
    max_attempts: u32,
) -> Result<(TriangleMesh, PlacementParams), GrowthError> {
    for _ in 0..max_attempts {
        let params = PlacementParams::sample(rng);
        let placed = place_seed(seed, env, &params)?;
        if !env.intersects_mesh(&placed) {
            return Ok((placed, params));
        }
    }
    Err(GrowthError::PlacementInfeasible { attempts: max_attempts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Provenance, RandomGridSpec, random_grid_environment};
    use crate::mesh::{make_genus_g_seed, Aabb, SeedParams, Vec3};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cube_env(boxes: Vec<Aabb>) -> Environment {
        let cube = Aabb { min: Vec3::zeros(), max: Vec3::repeat(20.0) };
        Environment::new(boxes, cube, Provenance::Custom).unwrap()
    }

    #[test]
    fn unit_area_without_jitter() {
        let seed = make_genus_g_seed(3, &SeedParams::default()).unwrap();
        let placed = place_seed(&seed, &cube_env(vec![]), &PlacementParams::default()).unwrap();
        assert!((placed.surface_area() - 1.0).abs() < 1e-9);
        assert!((placed.bounds().center() - Vec3::repeat(10.0)).norm() < 1e-9);
    }

    #[test]
    fn uniform_jitter_scales_area_quadratically() {
        let seed = make_genus_g_seed(1, &SeedParams::default()).unwrap();
        let params = PlacementParams { rotation: [0.3, 1.0, 2.0], uniform_scale_jitter: 0.25, ..Default::default() };
        let placed = place_seed(&seed, &cube_env(vec![]), &params).unwrap();
        assert!((placed.surface_area() - 1.5625).abs() < 1e-9);
    }

    #[test]
    fn placement_preserves_topology() {
        let seed = make_genus_g_seed(4, &SeedParams::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let placed = place_seed(&seed, &cube_env(vec![]), &PlacementParams::sample(&mut rng)).unwrap();
            assert_eq!(placed.euler_characteristic(), -6);
            assert_eq!(placed.faces(), seed.faces());
            assert!(!placed.has_self_intersection());
        }
    }

    #[test]
    fn out_of_range_jitter_rejected() {
        let seed = make_genus_g_seed(0, &SeedParams::default()).unwrap();
        let params = PlacementParams { uniform_scale_jitter: 0.3, ..Default::default() };
        assert!(place_seed(&seed, &cube_env(vec![]), &params).is_err());
    }

    #[test]
    fn blocked_center_is_infeasible() {
        let seed = make_genus_g_seed(2, &SeedParams::default()).unwrap();
        let env = cube_env(vec![Aabb { min: Vec3::repeat(8.0), max: Vec3::repeat(12.0) }]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(
            place_seed_random(&seed, &env, &mut rng, 5).unwrap_err(),
            GrowthError::PlacementInfeasible { attempts: 5 }
        );
    }

    #[test]
    fn random_grid_placements_avoid_boxes() {
        let seed = make_genus_g_seed(5, &SeedParams::default()).unwrap();
        for s in 0..4 {
            let env = random_grid_environment(&RandomGridSpec::default(), s).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            if let Ok((mesh, _)) = place_seed_random(&seed, &env, &mut rng, DEFAULT_PLACEMENT_ATTEMPTS) {
                assert!(mesh.vertices().iter().all(|v| env.distance(v) > 0.0));
            }
        }
    }
}
