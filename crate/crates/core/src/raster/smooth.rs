use super::VoxelGrid;

/// Normalized 1D Gaussian taps for offsets `-radius..=radius`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let mut w: Vec<f64> = (-radius..=radius).map(|x| (-(x * x) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    w
}

/// Separable Gaussian blur of the 0/1 field followed by thresholding at
/// 0.5. Taps falling outside the grid are dropped and the remaining
/// weights renormalized, so constant fields are fixed points.
pub fn gaussian_smooth_binarize(grid: &VoxelGrid, sigma: f64) -> VoxelGrid {
    if sigma <= 0.0 {
        return grid.clone();
    }
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as i64;
    let r = grid.resolution();
    let mut field: Vec<f64> = grid.occupancy().iter().map(|&b| b as u8 as f64).collect();
    let mut scratch = vec![0.0; field.len()];
    let strides = [1, r, r * r];
    for &stride in &strides {
        for (i, out) in scratch.iter_mut().enumerate() {
            let pos = ((i / stride) % r) as i64;
            let (mut acc, mut wsum) = (0.0, 0.0);
            for (k, w) in kernel.iter().enumerate() {
                let o = k as i64 - radius;
                let q = pos + o;
                if q < 0 || q >= r as i64 {
                    continue;
                }
                acc += w * field[(i as i64 + o * stride as i64) as usize];
                wsum += w;
            }
            *out = acc / wsum;
        }
        std::mem::swap(&mut field, &mut scratch);
    }
    let mut out = grid.clone();
    for (o, v) in out.occupancy_mut().iter_mut().zip(&field) {
        *o = *v >= 0.5;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_center_weight_for_quarter_sigma() {
        // Independent evaluation: taps at -1, 0, 1 with exp(-x^2 / (2 * 0.0625)).
        let side = (-8.0f64).exp();
        let center = 1.0 / (1.0 + 2.0 * side);
        let k = gaussian_kernel(0.25);
        assert_eq!(k.len(), 3);
        assert!((k[1] - center).abs() < 1e-15);
        // 3D center weight is the cube of the 1D weight.
        assert!(center.powi(3) > 0.5);
    }

    #[test]
    fn zero_sigma_is_identity() {
        let g = VoxelGrid::from_fn(6, |x, y, z| (x + 2 * y + z) % 3 == 0);
        assert_eq!(gaussian_smooth_binarize(&g, 0.0), g);
    }

    #[test]
    fn constant_fields_are_fixed() {
        let full = VoxelGrid::from_fn(7, |_, _, _| true);
        assert_eq!(gaussian_smooth_binarize(&full, 0.25), full);
        assert_eq!(gaussian_smooth_binarize(&full, 1.5), full);
        let empty = VoxelGrid::new(7);
        assert_eq!(gaussian_smooth_binarize(&empty, 1.5), empty);
    }

    #[test]
    fn isolated_voxel_survives_quarter_sigma() {
        let mut g = VoxelGrid::new(5);
        g.set(2, 2, 2, true);
        assert_eq!(gaussian_smooth_binarize(&g, 0.25), g);
    }

    #[test]
    fn wide_blur_erases_isolated_voxel() {
        let mut g = VoxelGrid::new(9);
        g.set(4, 4, 4, true);
        assert_eq!(gaussian_smooth_binarize(&g, 1.0).occupied_count(), 0);
    }
}
