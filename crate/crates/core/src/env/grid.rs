use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::mesh::{Aabb, Vec3};

use super::{EnvError, Environment, Provenance};

/// Parameters of the random strut-lattice environment. Ranges are closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RandomGridSpec {
    pub cube_side: f64,
    pub chunks_per_axis: u32,
    pub subchunk_side: f64,
    pub axis_resolution_range: [u32; 2],
    pub connection_probability_range: [f64; 2],
    pub edge_thickness_range: [f64; 2],
}

impl Default for RandomGridSpec {
    fn default() -> Self {
        RandomGridSpec {
            cube_side: 20.0,
            chunks_per_axis: 5,
            subchunk_side: 4.0,
            axis_resolution_range: [2, 4],
            connection_probability_range: [0.15, 0.25],
            edge_thickness_range: [0.4, 0.6],
        }
    }
}

impl RandomGridSpec {
    pub fn validate(&self) -> Result<(), EnvError> {
        let bad = |m: String| Err(EnvError::InvalidSpec(m));
        if !(self.cube_side > 0.0) || !(self.subchunk_side > 0.0) || self.chunks_per_axis == 0 {
            return bad("sides and chunk count must be positive".into());
        }
        if (self.chunks_per_axis as f64 * self.subchunk_side - self.cube_side).abs() > 1e-9 * self.cube_side {
            return bad(format!(
                "{} chunks of side {} do not tile a cube of side {}",
                self.chunks_per_axis, self.subchunk_side, self.cube_side
            ));
        }
        let [rmin, rmax] = self.axis_resolution_range;
        if rmin < 2 || rmin > rmax {
            return bad(format!("axis resolution range {rmin}..={rmax} must satisfy 2 <= min <= max"));
        }
        let [pmin, pmax] = self.connection_probability_range;
        if !(0.0..=1.0).contains(&pmin) || !(0.0..=1.0).contains(&pmax) || pmin > pmax {
            return bad(format!("connection probability range [{pmin}, {pmax}] invalid"));
        }
        let [tmin, tmax] = self.edge_thickness_range;
        if !(tmin > 0.0) || tmin > tmax {
            return bad(format!("edge thickness range [{tmin}, {tmax}] invalid"));
        }
        Ok(())
    }
}

fn draw_closed(rng: &mut ChaCha8Rng, [lo, hi]: [f64; 2]) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

/// Strut lattice built chunk by chunk.
///
/// Each subchunk draws its own lattice resolution per axis, connection
/// probability P and strut thickness T. Lattice points are evenly spaced
/// and include the subchunk faces. Every connected edge becomes a box with
/// a T x T cross-section that extends T/2 past both endpoints, clipped to
/// the bounding cube. Chunks are visited x-fastest and edges in axis order,
/// so the result is a pure function of `(spec, seed)`.
pub fn random_grid_environment(spec: &RandomGridSpec, seed: u64) -> Result<Environment, EnvError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cube = Aabb { min: Vec3::zeros(), max: Vec3::repeat(spec.cube_side) };
    let n = spec.chunks_per_axis;
    let mut boxes = Vec::new();
    for cz in 0..n {
        for cy in 0..n {
            for cx in 0..n {
                let chunk_min = Vec3::new(cx as f64, cy as f64, cz as f64) * spec.subchunk_side;
                let [rmin, rmax] = spec.axis_resolution_range;
                let res: [u32; 3] = std::array::from_fn(|_| rng.random_range(rmin..=rmax));
                let p = draw_closed(&mut rng, spec.connection_probability_range);
                let t = draw_closed(&mut rng, spec.edge_thickness_range);
                let point = |i: [u32; 3]| -> Vec3 {
                    Vec3::from_fn(|a, _| chunk_min[a] + spec.subchunk_side * i[a] as f64 / (res[a] - 1) as f64)
                };
                for axis in 0..3 {
                    let mut count = res;
                    count[axis] -= 1;
                    for k in 0..count[2] {
                        for j in 0..count[1] {
                            for i in 0..count[0] {
                                if !rng.random_bool(p) {
                                    continue;
                                }
                                let start = [i, j, k];
                                let mut end = start;
                                end[axis] += 1;
                                let (a, b) = (point(start), point(end));
                                let strut = Aabb { min: a.inf(&b), max: a.sup(&b) }.expanded(0.5 * t);
                                let clipped = Aabb { min: strut.min.sup(&cube.min), max: strut.max.inf(&cube.max) };
                                boxes.push(clipped);
                            }
                        }
                    }
                }
            }
        }
    }
    Environment::new(boxes, cube, Provenance::RandomGrid { spec: spec.clone(), seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_probability_gives_no_boxes() {
        let spec = RandomGridSpec { connection_probability_range: [0.0, 0.0], ..Default::default() };
        assert!(random_grid_environment(&spec, 1).unwrap().boxes().is_empty());
    }

    #[test]
    fn full_probability_minimal_lattice_counts() {
        // 2x2x2 lattice: 4 edges per axis, 3 axes, 125 chunks.
        let spec = RandomGridSpec {
            connection_probability_range: [1.0, 1.0],
            axis_resolution_range: [2, 2],
            ..Default::default()
        };
        let env = random_grid_environment(&spec, 9).unwrap();
        assert_eq!(env.boxes().len(), 12 * 125);
    }

    #[test]
    fn lattice_count_matches_enumeration_for_fixed_resolution() {
        // Independent count: edges along x in an a*b*c lattice = (a-1)*b*c, etc.
        for r in 2..=4u32 {
            let spec = RandomGridSpec {
                connection_probability_range: [1.0, 1.0],
                axis_resolution_range: [r, r],
                chunks_per_axis: 1,
                subchunk_side: 20.0,
                ..Default::default()
            };
            let expected = 3 * (r - 1) * r * r;
            assert_eq!(random_grid_environment(&spec, 0).unwrap().boxes().len() as u32, expected);
        }
    }

    #[test]
    fn default_spec_has_125_chunks_in_side_20_cube() {
        let spec = RandomGridSpec::default();
        assert_eq!(spec.chunks_per_axis.pow(3), 125);
        let env = random_grid_environment(&spec, 3).unwrap();
        assert_eq!(env.bounding_cube().extent(), Vec3::repeat(20.0));
        assert!(!env.boxes().is_empty());
    }

    #[test]
    fn struts_have_square_cross_section_and_end_padding() {
        let spec = RandomGridSpec {
            connection_probability_range: [1.0, 1.0],
            axis_resolution_range: [3, 3],
            edge_thickness_range: [0.5, 0.5],
            ..Default::default()
        };
        let env = random_grid_environment(&spec, 4).unwrap();
        for b in env.boxes() {
            let e = b.extent();
            let long = e.imax();
            let short: Vec<f64> = (0..3).filter(|&a| a != long).map(|a| e[a]).collect();
            // interior struts are exactly T x T; ones on the cube boundary are clipped
            assert!(short.iter().all(|&s| (s - 0.5).abs() < 1e-12 || (s - 0.25).abs() < 1e-12), "{b:?}");
            assert!(e[long] <= 2.0 + 0.5 + 1e-12);
        }
        let interior = env.boxes().iter().filter(|b| {
            (0..3).all(|a| b.min[a] > 0.0 && b.max[a] < 20.0)
        }).count();
        assert!(interior > 0);
        assert!(env.boxes().iter().any(|b| (b.extent().max() - 2.5).abs() < 1e-12));
    }

    #[test]
    fn deterministic_given_seed() {
        let spec = RandomGridSpec::default();
        let a = random_grid_environment(&spec, 77).unwrap();
        let b = random_grid_environment(&spec, 77).unwrap();
        assert_eq!(a.boxes(), b.boxes());
        assert_ne!(a.boxes(), random_grid_environment(&spec, 78).unwrap().boxes());
    }

    #[test]
    fn invalid_specs_rejected() {
        let bad_tiling = RandomGridSpec { subchunk_side: 3.0, ..Default::default() };
        assert!(random_grid_environment(&bad_tiling, 0).is_err());
        let bad_p = RandomGridSpec { connection_probability_range: [0.3, 0.2], ..Default::default() };
        assert!(bad_p.validate().is_err());
        let bad_res = RandomGridSpec { axis_resolution_range: [1, 3], ..Default::default() };
        assert!(bad_res.validate().is_err());
    }
}
