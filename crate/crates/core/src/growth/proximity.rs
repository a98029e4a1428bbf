use std::collections::HashMap;

use crate::mesh::{TriangleMesh, Vec3};

/// Per vertex, distance to the nearest face centroid outside its two-ring
/// that lies in front of it: `(c - v) . n > cone_cos * |c - v|`. Capped at
/// `radius`.
pub(crate) fn facing_gaps(
    mesh: &TriangleMesh,
    neighbors: &[Vec<u32>],
    normals: &[Vec3],
    radius: f64,
    cone_cos: f64,
) -> Vec<f64> {
    let x = mesh.vertices();
    let faces = mesh.faces();
    let centroids: Vec<Vec3> =
        faces.iter().map(|f| (x[f[0] as usize] + x[f[1] as usize] + x[f[2] as usize]) / 3.0).collect();
    let cell = |p: &Vec3| p.map(|c| (c / radius).floor() as i64);
    let mut grid: HashMap<[i64; 3], Vec<u32>> = HashMap::new();
    for (f, c) in centroids.iter().enumerate() {
        let k = cell(c);
        grid.entry([k.x, k.y, k.z]).or_default().push(f as u32);
    }
    let mut near = Vec::new();
    (0..x.len())
        .map(|i| {
            near.clear();
            near.push(i as u32);
            for &j in &neighbors[i] {
                near.push(j);
                near.extend(neighbors[j as usize].iter().copied());
            }
            let k = cell(&x[i]);
            let mut best = radius;
            for dz in -1..=1 {
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let Some(list) = grid.get(&[k.x + dx, k.y + dy, k.z + dz]) else { continue };
                        for &f in list {
                            let d = centroids[f as usize] - x[i];
                            let r = d.norm();
                            if r >= best || d.dot(&normals[i]) <= cone_cos * r {
                                continue;
                            }
                            if !faces[f as usize].iter().any(|v| near.contains(v)) {
                                best = r;
                            }
                        }
                    }
                }
            }
            best
        })
        .collect()
}
