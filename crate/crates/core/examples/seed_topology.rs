//! Builds genus-g seed frames, prints their combinatorial invariants and
//! writes one as OBJ.
//!
//! `cargo run --example seed_topology -- [max_genus] [out.obj]`

use std::fs::File;
use std::io::BufWriter;

use topogen::mesh::{io::write_obj, make_genus_g_seed, SeedLayout, SeedParams};

fn main() -> anyhow::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let max_genus: u32 = args.get(1).map_or(Ok(8), |s| s.parse())?;
    let params = SeedParams::default();

    println!(" g   V     E     F    chi  betti");
    for g in 0..=max_genus {
        let mesh = make_genus_g_seed(g, &params)?;
        let t = mesh.topology();
        let layout = SeedLayout::for_genus(g, params.row_limit);
        println!(
            "{g:2} {:4}  {:4}  {:4}  {:4}  {}   layout {layout:?}",
            t.vertex_count,
            t.edge_count,
            t.face_count,
            t.euler_characteristic,
            mesh.surface_betti()
        );
    }

    if let Some(path) = args.get(2) {
        let mesh = make_genus_g_seed(max_genus, &params)?;
        write_obj(&mesh, BufWriter::new(File::create(path)?))?;
        println!("wrote genus {max_genus} seed to {path}");
    }
    Ok(())
}
