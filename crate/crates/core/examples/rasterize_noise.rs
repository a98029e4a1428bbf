//! Voxelizes a seed, applies the three Perlin octaves and Gaussian
//! smoothing, then samples a point cloud and writes z slices as PGM.
//!
//! `cargo run --release --example rasterize_noise -- [genus] [out_dir]`

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use topogen::mesh::{make_genus_g_seed, SeedParams};
use topogen::raster::{
    apply_noise_octaves, default_octaves, extract_slice, gaussian_smooth_binarize, sample_point_cloud,
    voxelize_solid, Axis, DEFAULT_SMOOTHING_SIGMA,
};
use topogen::topo::verify_sample;

fn main() -> anyhow::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let genus: u32 = args.get(1).map_or(Ok(2), |s| s.parse())?;
    let out = PathBuf::from(args.get(2).map_or("target/rasterize_noise", String::as_str));
    std::fs::create_dir_all(&out)?;

    let mesh = make_genus_g_seed(genus, &SeedParams::default())?;
    let clean = voxelize_solid(&mesh, 64)?;
    let noisy = apply_noise_octaves(&clean, &default_octaves(), 5);
    let smooth = gaussian_smooth_binarize(&noisy, DEFAULT_SMOOTHING_SIGMA);
    for (name, grid) in [("clean", &clean), ("octaves", &noisy), ("smoothed", &smooth)] {
        let r = verify_sample(grid, genus);
        println!("{name:9} occupied {:6}  betti {}  label pass {}", grid.occupied_count(), r.actual, r.pass);
    }

    let cloud = sample_point_cloud(&smooth, 8192, 5)?;
    cloud.write_xyz(BufWriter::new(File::create(out.join("points.xyz"))?))?;
    println!("{} points, all inside occupied voxels: {}", cloud.len(), cloud.lies_in(&smooth));

    for z in [16, 32, 48] {
        let image = extract_slice(&smooth, Axis::Z, z)?;
        image.write_pgm(BufWriter::new(File::create(out.join(format!("slice_z{z:02}.pgm")))?))?;
        println!("slice z={z}: {} foreground pixels", image.foreground_count());
    }
    println!("outputs in {}", out.display());
    Ok(())
}
