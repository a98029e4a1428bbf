use std::io::{self, Read, Write};

use thiserror::Error;

use crate::mesh::Vec3;

pub const VOXEL_MAGIC: &[u8; 4] = b"TGV1";
pub const VOXEL_HEADER_LEN: usize = 16;

#[derive(Debug, Error)]
pub enum VoxelIoError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("bad magic {0:?}")]
    BadMagic([u8; 4]),
    #[error("payload length {found} does not match resolution {resolution} (expected {expected})")]
    PayloadLength { resolution: u32, expected: u64, found: u64 },
}

/// Cubic binary occupancy volume, x-fastest.
///
/// Voxel `(i, j, k)` covers the world cell `origin + voxel_size * [i, i+1)`
/// (and likewise for `j`, `k`); its center is at `+ 0.5`.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    resolution: usize,
    occupancy: Vec<bool>,
    pub origin: Vec3,
    pub voxel_size: f64,
}

impl VoxelGrid {
    pub fn new(resolution: usize) -> Self {
        Self::with_transform(resolution, Vec3::zeros(), 1.0)
    }

    pub fn with_transform(resolution: usize, origin: Vec3, voxel_size: f64) -> Self {
        VoxelGrid { resolution, occupancy: vec![false; resolution.pow(3)], origin, voxel_size }
    }

    pub fn from_fn(resolution: usize, mut f: impl FnMut(usize, usize, usize) -> bool) -> Self {
        let mut g = Self::new(resolution);
        for z in 0..resolution {
            for y in 0..resolution {
                for x in 0..resolution {
                    let i = g.index(x, y, z);
                    g.occupancy[i] = f(x, y, z);
                }
            }
        }
        g
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.occupancy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupancy.is_empty()
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.resolution * (y + self.resolution * z)
    }

    #[inline]
    pub fn coords(&self, index: usize) -> [usize; 3] {
        let r = self.resolution;
        [index % r, (index / r) % r, index / (r * r)]
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> bool {
        self.occupancy[self.index(x, y, z)]
    }

    /// Out-of-range coordinates read as empty.
    #[inline]
    pub fn get_signed(&self, x: i64, y: i64, z: i64) -> bool {
        let r = self.resolution as i64;
        if x < 0 || y < 0 || z < 0 || x >= r || y >= r || z >= r {
            return false;
        }
        self.get(x as usize, y as usize, z as usize)
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, z: usize, value: bool) {
        let i = self.index(x, y, z);
        self.occupancy[i] = value;
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occupancy
    }

    pub fn occupancy_mut(&mut self) -> &mut [bool] {
        &mut self.occupancy
    }

    pub fn occupied_count(&self) -> usize {
        self.occupancy.iter().filter(|&&b| b).count()
    }

    pub fn occupied_indices(&self) -> Vec<usize> {
        self.occupancy.iter().enumerate().filter_map(|(i, &b)| b.then_some(i)).collect()
    }

    pub fn voxel_center(&self, x: usize, y: usize, z: usize) -> Vec3 {
        self.origin + self.voxel_size * Vec3::new(x as f64 + 0.5, y as f64 + 0.5, z as f64 + 0.5)
    }

    /// World point to voxel coordinates, if inside the grid.
    pub fn voxel_of(&self, p: &Vec3) -> Option<[usize; 3]> {
        let local = (p - self.origin) / self.voxel_size;
        let mut out = [0usize; 3];
        for a in 0..3 {
            let c = local[a].floor();
            if c < 0.0 || c >= self.resolution as f64 {
                return None;
            }
            out[a] = c as usize;
        }
        Some(out)
    }

    /// Packed occupancy, one bit per voxel, least significant bit first.
    pub fn packed_bits(&self) -> Vec<u8> {
        let mut bytes = vec![0u8; self.occupancy.len().div_ceil(8)];
        for (i, &b) in self.occupancy.iter().enumerate() {
            if b {
                bytes[i / 8] |= 1 << (i % 8);
            }
        }
        bytes
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> io::Result<()> {
        let payload = self.packed_bits();
        out.write_all(VOXEL_MAGIC)?;
        out.write_all(&(self.resolution as u32).to_le_bytes())?;
        out.write_all(&(payload.len() as u64).to_le_bytes())?;
        out.write_all(&payload)
    }

    /// Reads the binary voxel format. The world transform is not part of
    /// the format and comes back as the identity.
    pub fn read_from<R: Read>(mut input: R) -> Result<Self, VoxelIoError> {
        let mut header = [0u8; VOXEL_HEADER_LEN];
        input.read_exact(&mut header)?;
        let magic: [u8; 4] = header[0..4].try_into().unwrap();
        if &magic != VOXEL_MAGIC {
            return Err(VoxelIoError::BadMagic(magic));
        }
        let resolution = u32::from_le_bytes(header[4..8].try_into().unwrap());
        let declared = u64::from_le_bytes(header[8..16].try_into().unwrap());
        let expected = (resolution as u64).pow(3).div_ceil(8);
        if declared != expected {
            return Err(VoxelIoError::PayloadLength { resolution, expected, found: declared });
        }
        let mut payload = Vec::with_capacity(expected as usize);
        input.read_to_end(&mut payload)?;
        if payload.len() as u64 != expected {
            return Err(VoxelIoError::PayloadLength { resolution, expected, found: payload.len() as u64 });
        }
        let n = (resolution as usize).pow(3);
        let occupancy = (0..n).map(|i| payload[i / 8] >> (i % 8) & 1 == 1).collect();
        Ok(VoxelGrid { resolution: resolution as usize, occupancy, origin: Vec3::zeros(), voxel_size: 1.0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let g = VoxelGrid::from_fn(3, |x, y, z| x == 0 && y == 0 && z == 0);
        let mut buf = Vec::new();
        g.write_to(&mut buf).unwrap();
        assert_eq!(&buf[0..4], b"TGV1");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 3);
        assert_eq!(u64::from_le_bytes(buf[8..16].try_into().unwrap()), 4);
        assert_eq!(buf.len(), 16 + 4);
        assert_eq!(buf[16], 1);
    }

    #[test]
    fn truncated_and_bad_magic_rejected() {
        let g = VoxelGrid::new(4);
        let mut buf = Vec::new();
        g.write_to(&mut buf).unwrap();
        assert!(matches!(VoxelGrid::read_from(&buf[..buf.len() - 1]), Err(VoxelIoError::PayloadLength { .. })));
        buf[0] = b'X';
        assert!(matches!(VoxelGrid::read_from(&buf[..]), Err(VoxelIoError::BadMagic(_))));
    }

    proptest! {
        #[test]
        fn binary_round_trip(res in 1usize..7, bits in proptest::collection::vec(any::<bool>(), 343)) {
            let g = VoxelGrid::from_fn(res, |x, y, z| bits[x + 7 * (y + 7 * z)]);
            let mut buf = Vec::new();
            g.write_to(&mut buf).unwrap();
            let back = VoxelGrid::read_from(&buf[..]).unwrap();
            prop_assert_eq!(back.occupancy(), g.occupancy());
        }
    }
}
