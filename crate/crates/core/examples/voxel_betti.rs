//! Voxelizes seed frames and compares the fast Betti computation with the
//! matrix-rank oracle on small random grids.
//!
//! `cargo run --release --example voxel_betti -- [resolution]`

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use topogen::mesh::{make_genus_g_seed, SeedParams};
use topogen::raster::{voxelize_solid, VoxelGrid};
use topogen::topo::{betti_voxel, cubical_counts, homology_oracle, verify_sample};

fn main() -> anyhow::Result<()> {
    let res: usize = std::env::args().nth(1).map_or(Ok(48), |s| s.parse())?;

    for g in [0, 1, 3, 6] {
        let grid = voxelize_solid(&make_genus_g_seed(g, &SeedParams::default())?, res)?;
        let report = verify_sample(&grid, g);
        let c = cubical_counts(&grid);
        println!(
            "genus {g}: {} voxels, cells (V={} E={} S={} C={}), betti {}, pass {}",
            grid.occupied_count(),
            c.vertices,
            c.edges,
            c.squares,
            c.cubes,
            report.actual,
            report.pass
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut agree = 0;
    for _ in 0..50 {
        let grid = VoxelGrid::from_fn(6, |_, _, _| rng.random_bool(0.45));
        if betti_voxel(&grid) == homology_oracle(&grid)? {
            agree += 1;
        }
    }
    println!("fast vs oracle on random 6^3 grids: {agree}/50 agree");
    Ok(())
}
