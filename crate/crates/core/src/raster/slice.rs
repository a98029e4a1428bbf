use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::{RasterError, VoxelGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// 8-bit binary image, row-major; 255 marks foreground.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl SliceImage {
    pub fn get(&self, u: usize, v: usize) -> bool {
        self.pixels[u + self.width * v] == 255
    }

    pub fn foreground_count(&self) -> usize {
        self.pixels.iter().filter(|&&p| p == 255).count()
    }

    pub fn write_pgm<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "P5\n{} {}\n255\n", self.width, self.height)?;
        out.write_all(&self.pixels)
    }
}

/// The plane `axis = index`. Image axes are the remaining grid axes in
/// (x, y, z) order: for Z the image is indexed by (x, y).
pub fn extract_slice(grid: &VoxelGrid, axis: Axis, index: usize) -> Result<SliceImage, RasterError> {
    let r = grid.resolution();
    if index >= r {
        return Err(RasterError::InvalidArgument(format!("slice index {index} out of range 0..{r}")));
    }
    let mut pixels = Vec::with_capacity(r * r);
    for v in 0..r {
        for u in 0..r {
            let on = match axis {
                Axis::X => grid.get(index, u, v),
                Axis::Y => grid.get(u, index, v),
                Axis::Z => grid.get(u, v, index),
            };
            pixels.push(if on { 255 } else { 0 });
        }
    }
    Ok(SliceImage { width: r, height: r, pixels })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_grid_gives_full_image() {
        let g = VoxelGrid::from_fn(4, |_, _, _| true);
        let s = extract_slice(&g, Axis::Y, 2).unwrap();
        assert_eq!(s.foreground_count(), 16);
    }

    #[test]
    fn cuboid_mid_slice_is_a_rectangle() {
        let g = VoxelGrid::from_fn(10, |x, y, z| (2..7).contains(&x) && (3..5).contains(&y) && (1..9).contains(&z));
        let s = extract_slice(&g, Axis::Z, 5).unwrap();
        assert_eq!(s.foreground_count(), 5 * 2);
        assert!(s.get(2, 3) && s.get(6, 4) && !s.get(7, 4) && !s.get(2, 5));
        let sx = extract_slice(&g, Axis::X, 4).unwrap();
        assert_eq!(sx.foreground_count(), 2 * 8);
        assert!(sx.get(3, 1) && !sx.get(3, 0));
    }

    #[test]
    fn out_of_range_index() {
        assert!(extract_slice(&VoxelGrid::new(4), Axis::X, 4).is_err());
    }

    #[test]
    fn pgm_header() {
        let s = extract_slice(&VoxelGrid::new(3), Axis::Z, 0).unwrap();
        let mut buf = Vec::new();
        s.write_pgm(&mut buf).unwrap();
        assert!(buf.starts_with(b"P5\n3 3\n255\n"));
        assert_eq!(buf.len(), 11 + 9);
    }
}
