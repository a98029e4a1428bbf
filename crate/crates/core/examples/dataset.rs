//! Generates a small dataset, re-verifies it from disk and exports views
//! of one sample.
//!
//! `cargo run --release --example dataset -- [out_dir]`

use std::path::PathBuf;

use topogen::growth::GrowthConfig;
use topogen::pipeline::{export_views, generate_dataset, verify_dataset, DatasetConfig, MANIFEST_FILE};

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "target/dataset".into()));

    let config = DatasetConfig {
        genus_range: [0, 2],
        samples_per_genus: 1,
        voxel_resolution: 48,
        point_count: 2048,
        master_seed: 42,
        growth: GrowthConfig { target_area_multiplier: [2.0, 2.5], ..Default::default() },
        ..Default::default()
    };
    let summary = generate_dataset(&config, &out, None)?;
    println!("{} entries, {} failed samples", summary.entries.len(), summary.failures.len());
    for e in &summary.entries {
        println!(
            "{}  {:5}  area x{:.2}  pre-noise {}  post-noise {}",
            e.sample_id,
            format!("{:?}", e.split),
            e.area_ratio,
            e.verification.pre_noise.actual,
            e.verification.post_noise.actual
        );
    }

    let manifest = out.join(MANIFEST_FILE);
    let report = verify_dataset(&manifest)?;
    println!(
        "re-verified: consistency {:.3}, pre-noise label pass {:.3}, post-noise {:.3}",
        report.consistency_fraction(),
        report.pre_noise_pass_fraction(),
        report.post_noise_pass_fraction()
    );

    if let Some(last) = summary.entries.last() {
        for p in export_views(&manifest, &last.sample_id)? {
            println!("view {}", p.display());
        }
    }
    Ok(())
}
