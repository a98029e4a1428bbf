//! Obstacle environments: box unions produced by the random-grid method or
//! by tile-based wave function collapse, with signed distance queries.

mod grid;
mod wfc;

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mesh::{triangle_overlaps_box, Aabb, Bvh, TriangleMesh, Vec3};

pub use grid::{random_grid_environment, RandomGridSpec};
pub use wfc::{
    wfc_collapse, wfc_environment, Direction, Tile, TileGrid, TileSet, TileSetDocument, WfcDescriptor,
    DEFAULT_MAX_RESTARTS,
};

#[derive(Debug, Error, PartialEq)]
pub enum EnvError {
    #[error("invalid environment spec: {0}")]
    InvalidSpec(String),
    #[error("invalid tile set: {0}")]
    InvalidTileSet(String),
    #[error("no consistent tiling after {attempts} attempts")]
    Unsatisfiable { attempts: u32 },
}

/// Where an environment came from, enough to regenerate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Provenance {
    RandomGrid { spec: RandomGridSpec, seed: u64 },
    Wfc { descriptor: WfcDescriptor, seed: u64 },
    Custom,
}

#[derive(Debug, Clone)]
pub struct Environment {
    boxes: Vec<Aabb>,
    bounding_cube: Aabb,
    provenance: Provenance,
    bvh: Bvh,
}

/// Signed distance to a box: negative inside, exact Euclidean outside.
pub fn box_signed_distance(b: &Aabb, p: &Vec3) -> f64 {
    let c = b.center();
    let h = 0.5 * b.extent();
    let q = (p - c).abs() - h;
    let outside = q.sup(&Vec3::zeros()).norm();
    let inside = q.max().min(0.0);
    outside + inside
}

/// Gradient of [`box_signed_distance`] (unit length away from edges).
pub fn box_distance_gradient(b: &Aabb, p: &Vec3) -> Vec3 {
    let c = b.center();
    let h = 0.5 * b.extent();
    let d = p - c;
    let q = d.abs() - h;
    if q.max() > 0.0 {
        let mut g = Vec3::zeros();
        for a in 0..3 {
            if q[a] > 0.0 {
                g[a] = q[a] * d[a].signum();
            }
        }
        g / g.norm()
    } else {
        let a = q.imax();
        let mut g = Vec3::zeros();
        g[a] = if d[a] >= 0.0 { 1.0 } else { -1.0 };
        g
    }
}

fn point_box_gap(b: &Aabb, p: &Vec3) -> f64 {
    let q = (b.min - p).sup(&(p - b.max)).sup(&Vec3::zeros());
    q.norm()
}

impl Environment {
    pub fn new(boxes: Vec<Aabb>, bounding_cube: Aabb, provenance: Provenance) -> Result<Self, EnvError> {
        for (i, b) in boxes.iter().enumerate() {
            if (0..3).any(|a| !(b.min[a] < b.max[a])) {
                return Err(EnvError::InvalidSpec(format!("box {i} is empty: {b:?}")));
            }
            if (0..3).any(|a| b.min[a] < bounding_cube.min[a] - 1e-9 || b.max[a] > bounding_cube.max[a] + 1e-9) {
                return Err(EnvError::InvalidSpec(format!("box {i} leaves the bounding cube")));
            }
        }
        let bvh = Bvh::build(&boxes);
        Ok(Environment { boxes, bounding_cube, provenance, bvh })
    }

    pub fn empty(bounding_cube: Aabb) -> Self {
        Environment::new(Vec::new(), bounding_cube, Provenance::Custom).expect("empty environment is valid")
    }

    pub fn boxes(&self) -> &[Aabb] {
        &self.boxes
    }

    pub fn bounding_cube(&self) -> &Aabb {
        &self.bounding_cube
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn center(&self) -> Vec3 {
        self.bounding_cube.center()
    }

    /// Nearest box and its signed distance.
    pub fn nearest_box(&self, p: &Vec3) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut stack = vec![];
        self.bvh.visit_nearest(p, &mut stack, |i| {
            let d = box_signed_distance(&self.boxes[i as usize], p);
            match best {
                Some((bi, bd)) if bd < d || (bd == d && bi < i as usize) => {}
                _ => best = Some((i as usize, d)),
            }
            best.map_or(f64::INFINITY, |b| b.1)
        }, point_box_gap);
        best
    }

    /// Minimum signed distance over all boxes; `+inf` with no boxes.
    pub fn distance(&self, p: &Vec3) -> f64 {
        self.nearest_box(p).map_or(f64::INFINITY, |(_, d)| d)
    }

    pub fn distance_and_gradient(&self, p: &Vec3) -> (f64, Vec3) {
        match self.nearest_box(p) {
            Some((i, d)) => (d, box_distance_gradient(&self.boxes[i], p)),
            None => (f64::INFINITY, Vec3::zeros()),
        }
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        let mut inside = false;
        self.bvh.query(&Aabb { min: *p, max: *p }, |i| {
            if box_signed_distance(&self.boxes[i as usize], p) < 0.0 {
                inside = true;
            }
        });
        inside
    }

    pub fn intersects_triangle(&self, tri: &[Vec3; 3]) -> bool {
        let mut hit = false;
        self.bvh.query(&Aabb::from_points(tri.iter()), |i| {
            hit = hit || triangle_overlaps_box(tri, &self.boxes[i as usize]);
        });
        hit
    }

    /// True if any face of the mesh touches a box or a box sits inside the
    /// mesh volume (checked through one box corner by ray parity).
    pub fn intersects_mesh(&self, mesh: &TriangleMesh) -> bool {
        if (0..mesh.faces().len()).any(|f| self.intersects_triangle(&mesh.triangle(f))) {
            return true;
        }
        let bounds = mesh.bounds();
        self.boxes_in(&bounds).into_iter().any(|i| mesh.contains_point(&self.boxes[i].min))
    }

    /// Indices of boxes overlapping `region`.
    pub fn boxes_in(&self, region: &Aabb) -> Vec<usize> {
        let mut out = Vec::new();
        self.bvh.query(region, |i| out.push(i as usize));
        out.sort_unstable();
        out
    }

    /// Restriction to the boxes overlapping `region`, same bounding cube.
    pub fn restricted_to(&self, region: &Aabb) -> Environment {
        let boxes = self.boxes_in(region).into_iter().map(|i| self.boxes[i]).collect();
        Environment::new(boxes, self.bounding_cube, self.provenance.clone()).expect("subset of a valid environment")
    }

    /// All boxes as one OBJ, six quads per box with outward winding.
    pub fn write_obj<W: Write>(&self, mut out: W) -> io::Result<()> {
        for b in &self.boxes {
            for k in 0..8 {
                let p = Vec3::new(
                    if k & 1 == 0 { b.min.x } else { b.max.x },
                    if k & 2 == 0 { b.min.y } else { b.max.y },
                    if k & 4 == 0 { b.min.z } else { b.max.z },
                );
                writeln!(out, "v {} {} {}", p.x, p.y, p.z)?;
            }
        }
        const QUADS: [[usize; 4]; 6] =
            [[0, 2, 3, 1], [4, 5, 7, 6], [0, 1, 5, 4], [2, 6, 7, 3], [0, 4, 6, 2], [1, 3, 7, 5]];
        for i in 0..self.boxes.len() {
            let base = 8 * i + 1;
            for q in QUADS {
                writeln!(out, "f {} {} {} {}", base + q[0], base + q[1], base + q[2], base + q[3])?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::io::read_obj;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_box(at: Vec3) -> Aabb {
        Aabb { min: at, max: at + Vec3::repeat(1.0) }
    }

    fn cube(side: f64) -> Aabb {
        Aabb { min: Vec3::zeros(), max: Vec3::repeat(side) }
    }

    #[test]
    fn distance_inside_and_outside() {
        let b = Aabb { min: Vec3::new(1.0, 1.0, 1.0), max: Vec3::new(3.0, 2.0, 5.0) };
        let env = Environment::new(vec![b], cube(10.0), Provenance::Custom).unwrap();
        assert_eq!(env.distance(&b.center()), -0.5);
        assert!(env.contains(&b.center()));
        let u = Environment::new(vec![unit_box(Vec3::zeros())], cube(10.0), Provenance::Custom).unwrap();
        assert_eq!(u.distance(&Vec3::new(4.0, 0.5, 0.5)), 3.0);
        assert!(!u.contains(&Vec3::new(4.0, 0.5, 0.5)));
    }

    #[test]
    fn empty_environment_is_infinitely_far() {
        let env = Environment::empty(cube(20.0));
        assert_eq!(env.distance(&Vec3::repeat(10.0)), f64::INFINITY);
    }

    #[test]
    fn boxes_must_stay_in_cube() {
        let b = Aabb { min: Vec3::repeat(9.0), max: Vec3::repeat(11.0) };
        assert!(Environment::new(vec![b], cube(10.0), Provenance::Custom).is_err());
        let flat = Aabb { min: Vec3::zeros(), max: Vec3::new(1.0, 0.0, 1.0) };
        assert!(Environment::new(vec![flat], cube(10.0), Provenance::Custom).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let b = Aabb { min: Vec3::new(1.0, 1.0, 1.0), max: Vec3::new(3.0, 2.0, 5.0) };
        for p in [Vec3::new(4.0, 1.5, 2.0), Vec3::new(4.0, 3.0, 6.5), Vec3::new(1.2, 1.5, 3.0)] {
            let g = box_distance_gradient(&b, &p);
            for a in 0..3 {
                let mut e = Vec3::zeros();
                e[a] = 1e-6;
                let fd = (box_signed_distance(&b, &(p + e)) - box_signed_distance(&b, &(p - e))) / 2e-6;
                assert!((fd - g[a]).abs() < 1e-6, "{p:?} axis {a}");
            }
        }
    }

    #[test]
    fn obj_export_is_closed_per_box() {
        let env = Environment::new(vec![unit_box(Vec3::zeros()), unit_box(Vec3::repeat(3.0))], cube(10.0), Provenance::Custom).unwrap();
        let mut buf = Vec::new();
        env.write_obj(&mut buf).unwrap();
        let mesh = read_obj(&buf[..]).unwrap();
        assert_eq!(mesh.faces().len(), 24);
        assert!((mesh.surface_area() - 12.0).abs() < 1e-12);
        // outward winding: positive enclosed volume
        let vol: f64 = (0..mesh.faces().len()).map(|f| {
            let [a, b, c] = mesh.triangle(f);
            a.dot(&b.cross(&c)) / 6.0
        }).sum();
        assert!((vol - 2.0).abs() < 1e-12);
    }

    fn random_env(seed: u64) -> Environment {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let boxes = (0..60)
            .map(|_| {
                let min = Vec3::new(rng.random_range(0.0..18.0), rng.random_range(0.0..18.0), rng.random_range(0.0..18.0));
                let ext = Vec3::new(rng.random_range(0.1..2.0), rng.random_range(0.1..2.0), rng.random_range(0.1..2.0));
                Aabb { min, max: min + ext }
            })
            .collect();
        Environment::new(boxes, cube(20.0), Provenance::Custom).unwrap()
    }

    #[test]
    fn accelerated_distance_equals_brute_force() {
        let env = random_env(11);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..2000 {
            let p = Vec3::new(rng.random_range(-2.0..22.0), rng.random_range(-2.0..22.0), rng.random_range(-2.0..22.0));
            let brute = env.boxes().iter().map(|b| box_signed_distance(b, &p)).fold(f64::INFINITY, f64::min);
            assert!((env.distance(&p) - brute).abs() <= 1e-12);
        }
    }

    proptest! {
        #[test]
        fn distance_is_one_lipschitz(
            p in proptest::array::uniform3(-1.0f64..21.0),
            q in proptest::array::uniform3(-1.0f64..21.0),
        ) {
            let env = random_env(5);
            let (p, q) = (Vec3::from(p), Vec3::from(q));
            prop_assert!((env.distance(&p) - env.distance(&q)).abs() <= (p - q).norm() + 1e-12);
        }
    }
}
