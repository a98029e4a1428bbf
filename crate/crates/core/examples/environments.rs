//! Generates a random strut-lattice environment and a WFC environment,
//! reports their size and writes both as OBJ.
//!
//! `cargo run --example environments -- [seed] [out_dir]`

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use topogen::env::{random_grid_environment, wfc_environment, RandomGridSpec, WfcDescriptor};

fn main() -> anyhow::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let seed: u64 = args.get(1).map_or(Ok(7), |s| s.parse())?;
    let out = PathBuf::from(args.get(2).map_or("target/environments", String::as_str));
    std::fs::create_dir_all(&out)?;

    let grid = random_grid_environment(&RandomGridSpec::default(), seed)?;
    let wfc = wfc_environment(&WfcDescriptor { dims: [6, 6, 6], ..Default::default() }, seed)?;

    for (name, env) in [("random_grid", &grid), ("wfc", &wfc)] {
        let cube = env.bounding_cube();
        let center = env.center();
        println!(
            "{name}: {} boxes in a cube of side {:.1}; center clearance {:.3}",
            env.boxes().len(),
            cube.extent().x,
            env.distance(&center)
        );
        let path = out.join(format!("{name}.obj"));
        env.write_obj(BufWriter::new(File::create(&path)?))?;
        println!("  wrote {}", path.display());
    }
    Ok(())
}
