//! OBJ (ASCII) and binary little-endian PLY for triangle meshes.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::{MeshError, TriangleMesh, Vec3};

#[derive(Debug, Error)]
pub enum MeshIoError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unsupported PLY: {0}")]
    UnsupportedPly(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

pub fn write_obj<W: Write>(mesh: &TriangleMesh, mut out: W) -> io::Result<()> {
    for v in mesh.vertices() {
        writeln!(out, "v {} {} {}", v.x, v.y, v.z)?;
    }
    for f in mesh.faces() {
        writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
    }
    Ok(())
}

/// Reads `v` and `f` records; polygon faces are fan-triangulated and
/// `v/vt/vn` index forms are accepted.
pub fn read_obj<R: BufRead>(input: R) -> Result<TriangleMesh, MeshIoError> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        let mut parts = line.split_whitespace();
        let parse_err = |message: String| MeshIoError::Parse { line: n + 1, message };
        match parts.next() {
            Some("v") => {
                let c: Vec<f64> = parts
                    .take(3)
                    .map(|t| t.parse::<f64>().map_err(|e| parse_err(e.to_string())))
                    .collect::<Result<_, _>>()?;
                if c.len() != 3 {
                    return Err(parse_err("vertex needs 3 coordinates".into()));
                }
                vertices.push(Vec3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let idx: Vec<u32> = parts
                    .map(|t| {
                        let first = t.split('/').next().unwrap_or("");
                        let i: i64 = first.parse().map_err(|_| parse_err(format!("bad index {t:?}")))?;
                        let resolved = if i < 0 { vertices.len() as i64 + i } else { i - 1 };
                        if resolved < 0 {
                            return Err(parse_err(format!("index {i} out of range")));
                        }
                        Ok(resolved as u32)
                    })
                    .collect::<Result<_, _>>()?;
                if idx.len() < 3 {
                    return Err(parse_err("face needs at least 3 indices".into()));
                }
                for k in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    Ok(TriangleMesh::new(vertices, faces)?)
}

pub fn write_ply<W: Write>(mesh: &TriangleMesh, mut out: W) -> io::Result<()> {
    write!(
        out,
        "ply\nformat binary_little_endian 1.0\nelement vertex {}\nproperty float x\nproperty float y\nproperty float z\nelement face {}\nproperty list uchar int vertex_indices\nend_header\n",
        mesh.vertices().len(),
        mesh.faces().len()
    )?;
    let mut buf = Vec::with_capacity(mesh.vertices().len() * 12 + mesh.faces().len() * 13);
    for v in mesh.vertices() {
        for c in [v.x, v.y, v.z] {
            buf.extend_from_slice(&(c as f32).to_le_bytes());
        }
    }
    for f in mesh.faces() {
        buf.push(3u8);
        for &i in f {
            buf.extend_from_slice(&(i as i32).to_le_bytes());
        }
    }
    out.write_all(&buf)
}

/// Reads the layout produced by [`write_ply`].
pub fn read_ply<R: BufRead>(mut input: R) -> Result<TriangleMesh, MeshIoError> {
    let mut header = Vec::new();
    let mut line = String::new();
    loop {
        line.clear();
        if input.read_line(&mut line)? == 0 {
            return Err(MeshIoError::UnsupportedPly("missing end_header".into()));
        }
        let t = line.trim().to_string();
        if t == "end_header" {
            break;
        }
        header.push(t);
    }
    if header.first().map(String::as_str) != Some("ply")
        || !header.iter().any(|h| h == "format binary_little_endian 1.0")
    {
        return Err(MeshIoError::UnsupportedPly("expected binary_little_endian 1.0".into()));
    }
    let count = |name: &str| -> Result<usize, MeshIoError> {
        header
            .iter()
            .find_map(|h| h.strip_prefix(&format!("element {name} ")).map(|n| n.trim().parse::<usize>()))
            .ok_or_else(|| MeshIoError::UnsupportedPly(format!("missing element {name}")))?
            .map_err(|e| MeshIoError::UnsupportedPly(e.to_string()))
    };
    let (nv, nf) = (count("vertex")?, count("face")?);
    let mut body = Vec::new();
    input.read_to_end(&mut body)?;
    if body.len() < nv * 12 + nf * 13 {
        return Err(MeshIoError::UnsupportedPly("truncated body".into()));
    }
    let f32_at = |o: usize| f32::from_le_bytes(body[o..o + 4].try_into().unwrap()) as f64;
    let i32_at = |o: usize| i32::from_le_bytes(body[o..o + 4].try_into().unwrap());
    let vertices = (0..nv).map(|i| Vec3::new(f32_at(12 * i), f32_at(12 * i + 4), f32_at(12 * i + 8))).collect();
    let mut faces = Vec::with_capacity(nf);
    let mut o = nv * 12;
    for _ in 0..nf {
        if body[o] != 3 {
            return Err(MeshIoError::UnsupportedPly(format!("non-triangle face with {} vertices", body[o])));
        }
        let idx = [i32_at(o + 1), i32_at(o + 5), i32_at(o + 9)];
        if idx.iter().any(|&i| i < 0) {
            return Err(MeshIoError::UnsupportedPly("negative face index".into()));
        }
        faces.push(idx.map(|i| i as u32));
        o += 13;
    }
    Ok(TriangleMesh::new(vertices, faces)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{make_genus_g_seed, SeedParams};

    #[test]
    fn obj_round_trip_is_exact_for_lattice_seed() {
        let m = make_genus_g_seed(2, &SeedParams::default()).unwrap();
        let mut buf = Vec::new();
        write_obj(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.lines().any(|l| l.starts_with("f 1 ")));
        let back = read_obj(&buf[..]).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn ply_round_trip_preserves_connectivity() {
        let m = make_genus_g_seed(3, &SeedParams::default()).unwrap();
        let mut buf = Vec::new();
        write_ply(&m, &mut buf).unwrap();
        let header_end = buf.windows(11).position(|w| w == b"end_header\n").unwrap() + 11;
        assert_eq!(buf.len() - header_end, m.vertices().len() * 12 + m.faces().len() * 13);
        let back = read_ply(&buf[..]).unwrap();
        assert_eq!(back.faces(), m.faces());
        assert_eq!(back.euler_characteristic(), -4);
    }

    #[test]
    fn obj_quads_are_triangulated_and_bad_lines_reported() {
        let cube = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nv 0 0 1\nv 1 0 1\nv 1 1 1\nv 0 1 1\n\
                    f 1 4 3 2\nf 5 6 7 8\nf 1 2 6 5\nf 2 3 7 6\nf 3 4 8 7\nf 4 1 5 8\n";
        let m = read_obj(cube.as_bytes()).unwrap();
        assert_eq!(m.faces().len(), 12);
        assert!((m.surface_area() - 6.0).abs() < 1e-12);
        assert!(matches!(read_obj("v 0 0\n".as_bytes()), Err(MeshIoError::Parse { line: 1, .. })));
    }
}
