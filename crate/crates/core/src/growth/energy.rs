//! Discrete tangent-point energy with one-point (centroid) quadrature.
//!
//! For ordered pairs of faces (S, T) that share no vertex:
//!
//! ```text
//! E = sum  A_S A_T |n_S . (c_T - c_S)|^alpha / |c_T - c_S|^beta
//! ```
//!
//! with A the face area, n the unit normal and c the centroid. The energy
//! is homogeneous of degree `alpha - beta + 4` under scaling.

use rayon::prelude::*;

use crate::mesh::{TriangleMesh, Vec3};

use super::GrowthError;

pub const DEFAULT_ALPHA: f64 = 2.0;
pub const DEFAULT_BETA: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentPointEnergy {
    pub alpha: f64,
    pub beta: f64,
    /// Pairs with centroid distance above this are dropped.
    pub cutoff: Option<f64>,
}

impl Default for TangentPointEnergy {
    fn default() -> Self {
        TangentPointEnergy { alpha: DEFAULT_ALPHA, beta: DEFAULT_BETA, cutoff: None }
    }
}

struct FaceData {
    centroid: Vec3,
    normal: Vec3,
    area: f64,
}

fn face_data(vertices: &[Vec3], faces: &[[u32; 3]]) -> Vec<FaceData> {
    faces
        .iter()
        .map(|f| {
            let [a, b, c] = f.map(|i| vertices[i as usize]);
            let n = (b - a).cross(&(c - a));
            let len = n.norm();
            FaceData { centroid: (a + b + c) / 3.0, normal: n / len, area: 0.5 * len }
        })
        .collect()
}

#[inline]
fn share_vertex(a: &[u32; 3], b: &[u32; 3]) -> bool {
    a.iter().any(|i| b.contains(i))
}

/// Per-face partial derivatives of the energy.
struct FaceGrad {
    d_normal_raw: Vec3,
    d_centroid: Vec3,
}

impl TangentPointEnergy {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, GrowthError> {
        let e = TangentPointEnergy { alpha, beta, cutoff: None };
        e.validate()?;
        Ok(e)
    }

    pub fn with_cutoff(self, cutoff: Option<f64>) -> Self {
        TangentPointEnergy { cutoff, ..self }
    }

    pub fn validate(&self) -> Result<(), GrowthError> {
        if !(self.alpha >= 1.0) || !(self.beta > self.alpha + 2.0) {
            return Err(GrowthError::InvalidConfig(format!(
                "energy exponents need alpha >= 1 and beta > alpha + 2, got ({}, {})",
                self.alpha, self.beta
            )));
        }
        Ok(())
    }

    /// Degree of homogeneity under uniform scaling.
    pub fn scaling_degree(&self) -> f64 {
        self.alpha - self.beta + 4.0
    }

    fn cutoff_sq(&self) -> f64 {
        self.cutoff.map_or(f64::INFINITY, |c| c * c)
    }

    fn singular_floor(fd: &[FaceData]) -> f64 {
        let scale = fd.iter().map(|f| f.area).sum::<f64>().sqrt();
        (1e-12 * scale).powi(2)
    }

    pub fn energy(&self, mesh: &TriangleMesh) -> Result<f64, GrowthError> {
        self.energy_at(mesh.vertices(), mesh.faces())
    }

    pub fn energy_at(&self, vertices: &[Vec3], faces: &[[u32; 3]]) -> Result<f64, GrowthError> {
        let fd = face_data(vertices, faces);
        let floor = Self::singular_floor(&fd);
        let cut = self.cutoff_sq();
        let rows: Vec<Result<f64, GrowthError>> = (0..faces.len())
            .into_par_iter()
            .map(|s| {
                let fs = &fd[s];
                let mut row = 0.0;
                for t in 0..faces.len() {
                    if t == s || share_vertex(&faces[s], &faces[t]) {
                        continue;
                    }
                    let d = fd[t].centroid - fs.centroid;
                    let r2 = d.norm_squared();
                    if r2 <= floor {
                        return Err(GrowthError::Singular { faces: (s, t) });
                    }
                    if r2 > cut {
                        continue;
                    }
                    let u = fs.normal.dot(&d).abs();
                    row += fd[t].area * u.powf(self.alpha) * r2.powf(-0.5 * self.beta);
                }
                Ok(fs.area * row)
            })
            .collect();
        // Fixed-order reduction keeps the result independent of scheduling.
        let mut total = 0.0;
        for r in rows {
            total += r?;
        }
        Ok(total)
    }

    pub fn gradient(&self, mesh: &TriangleMesh) -> Result<Vec<Vec3>, GrowthError> {
        self.gradient_at(mesh.vertices(), mesh.faces())
    }

    /// Exact gradient with respect to vertex positions.
    ///
    /// Each face collects every term it takes part in, as the normal face
    /// S and as the target T, so faces can be processed independently.
    pub fn gradient_at(&self, vertices: &[Vec3], faces: &[[u32; 3]]) -> Result<Vec<Vec3>, GrowthError> {
        let fd = face_data(vertices, faces);
        let floor = Self::singular_floor(&fd);
        let cut = self.cutoff_sq();
        let (alpha, beta) = (self.alpha, self.beta);
        let per_face: Vec<Result<FaceGrad, GrowthError>> = (0..faces.len())
            .into_par_iter()
            .map(|f| {
                let me = &fd[f];
                let mut g = FaceGrad { d_normal_raw: Vec3::zeros(), d_centroid: Vec3::zeros() };
                let len_n = 2.0 * me.area;
                for o in 0..faces.len() {
                    if o == f || share_vertex(&faces[f], &faces[o]) {
                        continue;
                    }
                    let other = &fd[o];
                    let d = other.centroid - me.centroid;
                    let r2 = d.norm_squared();
                    if r2 <= floor {
                        return Err(GrowthError::Singular { faces: (f, o) });
                    }
                    if r2 > cut {
                        continue;
                    }
                    let rb = r2.powf(-0.5 * beta);
                    let rb2 = rb / r2;

                    // As S: term A_f A_o |n_f . d|^a r^-b with d = c_o - c_f.
                    let u = me.normal.dot(&d);
                    let ua = u.abs().powf(alpha);
                    let du = alpha * u.abs().powf(alpha - 1.0) * u.signum();
                    g.d_normal_raw += other.area * rb * (0.5 * ua * me.normal + me.area * du * (d - u * me.normal) / len_n);
                    let d_d = me.area * other.area * (du * rb * me.normal - beta * ua * rb2 * d);
                    g.d_centroid -= d_d;

                    // As T: term A_o A_f |n_o . e|^a r^-b with e = c_f - c_o = -d.
                    let v = -other.normal.dot(&d);
                    let va = v.abs().powf(alpha);
                    let dv = alpha * v.abs().powf(alpha - 1.0) * v.signum();
                    g.d_normal_raw += other.area * va * rb * 0.5 * me.normal;
                    g.d_centroid += other.area * me.area * (dv * rb * other.normal + beta * va * rb2 * d);
                }
                Ok(g)
            })
            .collect();

        let mut grad = vec![Vec3::zeros(); vertices.len()];
        for (f, g) in per_face.into_iter().enumerate() {
            let g = g?;
            let [i0, i1, i2] = faces[f].map(|i| i as usize);
            let (p0, p1, p2) = (vertices[i0], vertices[i1], vertices[i2]);
            let third = g.d_centroid / 3.0;
            // dN = dp0 x (p1 - p2) + cyclic, so grad_p0 = (p1 - p2) x dE/dN.
            grad[i0] += third + (p1 - p2).cross(&g.d_normal_raw);
            grad[i1] += third + (p2 - p0).cross(&g.d_normal_raw);
            grad[i2] += third + (p0 - p1).cross(&g.d_normal_raw);
        }
        Ok(grad)
    }
}
