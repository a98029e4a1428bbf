//! Seeded 3D gradient (Perlin) noise and thresholded octave masks.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::VoxelGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseMode {
    Add,
    Subtract,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseOctaveSpec {
    /// Noise periods across the grid edge; larger means finer features.
    pub scale: f64,
    pub threshold: f64,
    pub mode: NoiseMode,
}

impl NoiseOctaveSpec {
    pub const fn new(scale: f64, threshold: f64, mode: NoiseMode) -> Self {
        NoiseOctaveSpec { scale, threshold, mode }
    }
}

pub fn default_octaves() -> Vec<NoiseOctaveSpec> {
    vec![
        NoiseOctaveSpec::new(4.0, 0.5, NoiseMode::Add),
        NoiseOctaveSpec::new(8.0, 0.55, NoiseMode::Add),
        NoiseOctaveSpec::new(16.0, 0.55, NoiseMode::Subtract),
    ]
}

const GRADIENTS: [[f64; 3]; 12] = [
    [1., 1., 0.],
    [-1., 1., 0.],
    [1., -1., 0.],
    [-1., -1., 0.],
    [1., 0., 1.],
    [-1., 0., 1.],
    [1., 0., -1.],
    [-1., 0., -1.],
    [0., 1., 1.],
    [0., -1., 1.],
    [0., 1., -1.],
    [0., -1., -1.],
];

/// Classic gradient-lattice noise over a seeded permutation table.
#[derive(Debug, Clone)]
pub struct Perlin {
    perm: [u8; 512],
}

fn fade(t: f64) -> f64 {
    t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
}

fn lerp(t: f64, a: f64, b: f64) -> f64 {
    a + t * (b - a)
}

impl Perlin {
    pub fn new(seed: u64) -> Self {
        let mut table: Vec<u8> = (0..=255).collect();
        table.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut perm = [0u8; 512];
        for i in 0..512 {
            perm[i] = table[i & 255];
        }
        Perlin { perm }
    }

    fn grad(&self, hash: u8, x: f64, y: f64, z: f64) -> f64 {
        let g = GRADIENTS[hash as usize % 12];
        g[0] * x + g[1] * y + g[2] * z
    }

    /// Raw noise, roughly in [-1, 1], zero at lattice points.
    pub fn noise(&self, x: f64, y: f64, z: f64) -> f64 {
        let (fx, fy, fz) = (x.floor(), y.floor(), z.floor());
        let (xi, yi, zi) = ((fx as i64 & 255) as usize, (fy as i64 & 255) as usize, (fz as i64 & 255) as usize);
        let (x, y, z) = (x - fx, y - fy, z - fz);
        let (u, v, w) = (fade(x), fade(y), fade(z));
        let p = &self.perm;
        let a = p[xi] as usize + yi;
        let aa = p[a] as usize + zi;
        let ab = p[a + 1] as usize + zi;
        let b = p[xi + 1] as usize + yi;
        let ba = p[b] as usize + zi;
        let bb = p[b + 1] as usize + zi;
        lerp(
            w,
            lerp(
                v,
                lerp(u, self.grad(p[aa], x, y, z), self.grad(p[ba], x - 1., y, z)),
                lerp(u, self.grad(p[ab], x, y - 1., z), self.grad(p[bb], x - 1., y - 1., z)),
            ),
            lerp(
                v,
                lerp(u, self.grad(p[aa + 1], x, y, z - 1.), self.grad(p[ba + 1], x - 1., y, z - 1.)),
                lerp(u, self.grad(p[ab + 1], x, y - 1., z - 1.), self.grad(p[bb + 1], x - 1., y - 1., z - 1.)),
            ),
        )
    }

    /// Noise mapped affinely from [-1, 1] to [0, 1].
    pub fn unit(&self, x: f64, y: f64, z: f64) -> f64 {
        (0.5 * (self.noise(x, y, z) + 1.0)).clamp(0.0, 1.0)
    }
}

/// Octave `k` draws its permutation from `seed` mixed with `k`, so octaves
/// are independent but the whole stack is fixed by `seed`.
pub fn apply_noise_octaves(grid: &VoxelGrid, octaves: &[NoiseOctaveSpec], seed: u64) -> VoxelGrid {
    let mut out = grid.clone();
    let r = grid.resolution();
    for (k, octave) in octaves.iter().enumerate() {
        let perlin = Perlin::new(seed ^ (0x9E37_79B9_7F4A_7C15u64.wrapping_mul(k as u64 + 1)));
        let freq = octave.scale / r as f64;
        let occ = out.occupancy_mut();
        for z in 0..r {
            for y in 0..r {
                for x in 0..r {
                    let n = perlin.unit((x as f64 + 0.5) * freq, (y as f64 + 0.5) * freq, (z as f64 + 0.5) * freq);
                    if n >= octave.threshold {
                        let i = x + r * (y + r * z);
                        occ[i] = octave.mode == NoiseMode::Add;
                    }
                }
            }
        }
    }
    out
}
