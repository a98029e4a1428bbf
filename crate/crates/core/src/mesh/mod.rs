//! Closed, oriented triangle meshes with exact topological bookkeeping.
//!
//! A [`TriangleMesh`] is validated on construction: every undirected edge
//! must be shared by exactly two faces with opposite orientation, indices
//! must be in range and no face may be degenerate. Everything downstream
//! (growth, voxelization, labels) relies on these invariants holding.

mod intersect;
pub mod io;
mod seed;

use std::collections::HashMap;

use nalgebra::{Rotation3, Vector3};
use thiserror::Error;

pub use intersect::{
    first_self_intersection, segment_hits_triangle, triangle_overlaps_box, triangles_intersect, triangles_self_intersect, Aabb, Bvh,
};
pub use seed::{make_genus_g_seed, SeedLayout, SeedParams};

use crate::topo::BettiTriple;

pub type Vec3 = Vector3<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("face {face} references vertex {index} but mesh has {count} vertices")]
    IndexOutOfRange { face: usize, index: u32, count: usize },
    #[error("face {face} is degenerate (area {area:e})")]
    DegenerateFace { face: usize, area: f64 },
    #[error("non-manifold edge ({0}, {1}): shared by {2} faces")]
    NonManifoldEdge(u32, u32, usize),
    #[error("inconsistent winding on edge ({0}, {1})")]
    InconsistentOrientation(u32, u32),
    #[error("mesh has {0} connected components, expected 1")]
    Disconnected(usize),
    #[error("odd Euler characteristic {0}")]
    OddEulerCharacteristic(i64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("genus {requested} exceeds ceiling {ceiling}")]
    GenusTooLarge { requested: u32, ceiling: u32 },
}

/// Counts that pin down the topology of a closed orientable surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TopologySummary {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub face_count: usize,
    pub euler_characteristic: i64,
    /// Total genus summed over components, `(2 * components - chi) / 2`.
    pub genus: u32,
    pub component_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[u32; 3]>,
    edges: Vec<[u32; 2]>,
}

/// Sorted, deduplicated undirected edge list; fails on any edge whose face
/// count differs from two or whose two uses are not oppositely oriented.
fn manifold_edges(faces: &[[u32; 3]]) -> Result<Vec<[u32; 2]>, MeshError> {
    let mut directed: Vec<(u32, u32)> = Vec::with_capacity(faces.len() * 3);
    for f in faces {
        for k in 0..3 {
            directed.push((f[k], f[(k + 1) % 3]));
        }
    }
    let mut undirected: Vec<([u32; 2], bool)> = directed
        .iter()
        .map(|&(a, b)| if a < b { ([a, b], true) } else { ([b, a], false) })
        .collect();
    undirected.sort_unstable();

    let mut edges = Vec::with_capacity(undirected.len() / 2);
    let mut i = 0;
    while i < undirected.len() {
        let key = undirected[i].0;
        let mut j = i;
        while j < undirected.len() && undirected[j].0 == key {
            j += 1;
        }
        let uses = j - i;
        if uses != 2 {
            return Err(MeshError::NonManifoldEdge(key[0], key[1], uses));
        }
        if undirected[i].1 == undirected[i + 1].1 {
            return Err(MeshError::InconsistentOrientation(key[0], key[1]));
        }
        edges.push(key);
        i = j;
    }
    Ok(edges)
}

/// `V - E + F` for a raw face list, with the edge set checked for
/// manifoldness first.
pub fn euler_characteristic_of(vertex_count: usize, faces: &[[u32; 3]]) -> Result<i64, MeshError> {
    let edges = manifold_edges(faces)?;
    Ok(vertex_count as i64 - edges.len() as i64 + faces.len() as i64)
}

pub(crate) fn triangle_area(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    0.5 * (b - a).cross(&(c - a)).norm()
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[u32; 3]>) -> Result<Self, MeshError> {
        let n = vertices.len();
        let mut scale: f64 = 0.0;
        for v in &vertices {
            scale = scale.max(v.amax());
        }
        let area_floor = 1e-14 * scale.max(1.0).powi(2);
        for (fi, f) in faces.iter().enumerate() {
            for &i in f {
                if i as usize >= n {
                    return Err(MeshError::IndexOutOfRange { face: fi, index: i, count: n });
                }
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(MeshError::DegenerateFace { face: fi, area: 0.0 });
            }
            let area = triangle_area(
                &vertices[f[0] as usize],
                &vertices[f[1] as usize],
                &vertices[f[2] as usize],
            );
            if !(area > area_floor) {
                return Err(MeshError::DegenerateFace { face: fi, area });
            }
        }
        let edges = manifold_edges(&faces)?;
        Ok(TriangleMesh { vertices, faces, edges })
    }

    /// Same connectivity, new positions. Only the degenerate-face check is
    /// repeated since the edge structure cannot change.
    pub fn with_vertices(&self, vertices: Vec<Vec3>) -> Result<Self, MeshError> {
        if vertices.len() != self.vertices.len() {
            return Err(MeshError::InvalidArgument(format!(
                "expected {} vertices, got {}",
                self.vertices.len(),
                vertices.len()
            )));
        }
        for (fi, f) in self.faces.iter().enumerate() {
            let area = triangle_area(
                &vertices[f[0] as usize],
                &vertices[f[1] as usize],
                &vertices[f[2] as usize],
            );
            if !(area > 0.0) || !area.is_finite() {
                return Err(MeshError::DegenerateFace { face: fi, area });
            }
        }
        Ok(TriangleMesh { vertices, faces: self.faces.clone(), edges: self.edges.clone() })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    pub fn edges(&self) -> &[[u32; 2]] {
        &self.edges
    }

    pub fn triangle(&self, face: usize) -> [Vec3; 3] {
        let f = self.faces[face];
        [self.vertices[f[0] as usize], self.vertices[f[1] as usize], self.vertices[f[2] as usize]]
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    pub fn component_count(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in &self.edges {
            let a = find(&mut parent, e[0] as usize);
            let b = find(&mut parent, e[1] as usize);
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        // Isolated vertices are not part of the surface.
        let mut used = vec![false; self.vertices.len()];
        for f in &self.faces {
            for &i in f {
                used[i as usize] = true;
            }
        }
        (0..self.vertices.len())
            .filter(|&i| used[i] && find(&mut parent, i) == i)
            .count()
    }

    pub fn genus(&self) -> Result<u32, MeshError> {
        let components = self.component_count();
        if components != 1 {
            return Err(MeshError::Disconnected(components));
        }
        let chi = self.euler_characteristic();
        if chi % 2 != 0 {
            return Err(MeshError::OddEulerCharacteristic(chi));
        }
        Ok(((2 - chi) / 2) as u32)
    }

    pub fn topology(&self) -> TopologySummary {
        let components = self.component_count();
        let chi = self.euler_characteristic();
        TopologySummary {
            vertex_count: self.vertices.len(),
            edge_count: self.edges.len(),
            face_count: self.faces.len(),
            euler_characteristic: chi,
            genus: ((2 * components as i64 - chi).max(0) / 2) as u32,
            component_count: components,
        }
    }

    /// Betti numbers of the surface itself: (components, 2g, components).
    pub fn surface_betti(&self) -> BettiTriple {
        let t = self.topology();
        let c = t.component_count as u64;
        BettiTriple::new(c, 2 * t.genus as u64, c)
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.faces.len())
            .map(|f| {
                let [a, b, c] = self.triangle(f);
                triangle_area(&a, &b, &c)
            })
            .sum()
    }

    pub fn face_areas(&self) -> Vec<f64> {
        (0..self.faces.len())
            .map(|f| {
                let [a, b, c] = self.triangle(f);
                triangle_area(&a, &b, &c)
            })
            .collect()
    }

    pub fn mean_edge_length(&self) -> f64 {
        let total: f64 = self
            .edges
            .iter()
            .map(|e| (self.vertices[e[0] as usize] - self.vertices[e[1] as usize]).norm())
            .sum();
        total / self.edges.len().max(1) as f64
    }

    pub fn bounds(&self) -> Aabb {
        Aabb::from_points(self.vertices.iter())
    }

    /// Unit vertex normals from area-weighted face normals.
    pub fn vertex_normals(&self) -> Vec<Vec3> {
        self.area_weighted_normals()
            .into_iter()
            .map(|n| {
                let len = n.norm();
                if len > 0.0 {
                    n / len
                } else {
                    n
                }
            })
            .collect()
    }

    /// Per-vertex sum of (unnormalized) face normals, i.e. twice the
    /// incident face areas times their unit normals.
    pub fn area_weighted_normals(&self) -> Vec<Vec3> {
        let mut normals = vec![Vec3::zeros(); self.vertices.len()];
        for f in &self.faces {
            let [a, b, c] = [f[0] as usize, f[1] as usize, f[2] as usize];
            let n = (self.vertices[b] - self.vertices[a]).cross(&(self.vertices[c] - self.vertices[a]));
            normals[a] += n;
            normals[b] += n;
            normals[c] += n;
        }
        normals
    }

    /// Scale per axis, then rotate (x, then y, then z axis), then translate.
    pub fn transform(
        &self,
        rotation: [f64; 3],
        scale: [f64; 3],
        translation: Vec3,
    ) -> Result<Self, MeshError> {
        if scale.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(MeshError::InvalidArgument(format!("scale must be positive, got {scale:?}")));
        }
        let rot = Rotation3::from_euler_angles(rotation[0], rotation[1], rotation[2]);
        let vertices = self
            .vertices
            .iter()
            .map(|v| rot * Vec3::new(v.x * scale[0], v.y * scale[1], v.z * scale[2]) + translation)
            .collect();
        self.with_vertices(vertices)
    }

    pub fn translated(&self, offset: Vec3) -> Self {
        TriangleMesh {
            vertices: self.vertices.iter().map(|v| v + offset).collect(),
            faces: self.faces.clone(),
            edges: self.edges.clone(),
        }
    }

    /// Inside test by crossing parity along a fixed generic ray direction.
    pub fn contains_point(&self, p: &Vec3) -> bool {
        let dir = Vec3::new(1.0, 0.003_141_592_7, 0.002_718_281_8).normalize();
        let mut crossings = 0usize;
        for f in 0..self.faces.len() {
            let [a, b, c] = self.triangle(f);
            let (e1, e2) = (b - a, c - a);
            let h = dir.cross(&e2);
            let det = e1.dot(&h);
            if det.abs() < 1e-300 {
                continue;
            }
            let s = p - a;
            let u = s.dot(&h) / det;
            let q = s.cross(&e1);
            let v = dir.dot(&q) / det;
            if u < 0.0 || v < 0.0 || u + v > 1.0 {
                continue;
            }
            if e2.dot(&q) / det > 0.0 {
                crossings += 1;
            }
        }
        crossings % 2 == 1
    }

    pub fn has_self_intersection(&self) -> bool {
        triangles_self_intersect(&self.vertices, &self.faces)
    }

    /// Vertex to incident-vertex adjacency, built from the edge list.
    pub fn vertex_neighbors(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for e in &self.edges {
            adj[e[0] as usize].push(e[1]);
            adj[e[1] as usize].push(e[0]);
        }
        adj
    }
}

/// Welds a triangle soup keyed by exact integer lattice positions.
pub(crate) struct LatticeWelder {
    index: HashMap<[i64; 3], u32>,
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[u32; 3]>,
    spacing: f64,
}

impl LatticeWelder {
    pub fn new(spacing: f64) -> Self {
        LatticeWelder { index: HashMap::new(), vertices: Vec::new(), faces: Vec::new(), spacing }
    }

    pub fn vertex(&mut self, key: [i64; 3]) -> u32 {
        let spacing = self.spacing;
        let vertices = &mut self.vertices;
        *self.index.entry(key).or_insert_with(|| {
            vertices.push(Vec3::new(key[0] as f64, key[1] as f64, key[2] as f64) * spacing);
            (vertices.len() - 1) as u32
        })
    }

    pub fn finish(self) -> Result<TriangleMesh, MeshError> {
        TriangleMesh::new(self.vertices, self.faces)
    }
}
