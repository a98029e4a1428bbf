//! Places a seed in a random environment, grows it to three times its
//! area and verifies every snapshot before and after displacement.
//!
//! `cargo run --release --example grow_seed -- [genus] [seed]`

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use topogen::env::{random_grid_environment, RandomGridSpec};
use topogen::growth::{cellular_displacement, grow, place_seed_random, DisplacementParams, GrowthConfig};
use topogen::pipeline::DisplacementConfig;
use topogen::mesh::{make_genus_g_seed, SeedParams};
use topogen::raster::{fit_grid, voxelize_solid};
use topogen::topo::verify_sample;

fn main() -> anyhow::Result<()> {
    env_logger::init();
    let args: Vec<String> = std::env::args().collect();
    let genus: u32 = args.get(1).map_or(Ok(3), |s| s.parse())?;
    let seed: u64 = args.get(2).map_or(Ok(1), |s| s.parse())?;

    let mesh = make_genus_g_seed(genus, &SeedParams::default())?;
    let env = random_grid_environment(&RandomGridSpec::default(), seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (placed, params) = place_seed_random(&mesh, &env, &mut rng, 64)?;
    println!("genus {genus}: {} faces, placement {params:?}", mesh.faces().len());

    let config = GrowthConfig { target_area_multiplier: [3.0, 3.0], ..Default::default() };
    let start = Instant::now();
    let outcome = grow(&placed, &env, &config, seed)?;
    println!(
        "grew to {:.3}x in {} iterations ({:?}), stats {:?}",
        outcome.snapshots.last().unwrap().area_ratio,
        outcome.iterations,
        start.elapsed(),
        outcome.stats
    );
    for snap in &outcome.snapshots {
        let d = DisplacementConfig::default();
        let (_, voxel) = fit_grid(&snap.mesh.bounds(), 64)?;
        let params = DisplacementParams {
            intensity: d.intensity,
            feature_size: d.feature_size,
            max_attenuations: d.max_attenuations,
            min_clearance: d.min_clearance_voxels * voxel,
            max_crease_degrees: d.max_crease_degrees,
        };
        let displaced = cellular_displacement(&snap.mesh, &params, seed)?;
        for (name, m) in [("grown", &snap.mesh), ("displaced", &displaced.mesh)] {
            let grid = voxelize_solid(m, 64)?;
            let report = verify_sample(&grid, genus);
            println!(
                "level {} ratio {:.3} iter {} {name}: betti {} pass {} (intensity {:.4})",
                snap.complexity_level, snap.area_ratio, snap.iteration, report.actual, report.pass, displaced.applied_intensity
            );
        }
    }
    Ok(())
}
