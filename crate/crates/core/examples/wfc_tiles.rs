//! Wave function collapse on the built-in tile sets and on a tile set read
//! from JSON, checking every result against the adjacency rules.
//!
//! `cargo run --example wfc_tiles`

use topogen::env::{wfc_collapse, TileSet};

const CORRIDORS: &str = r#"{
  "tiles": [
    {"name": "empty", "boxes": []},
    {"name": "rod_x", "boxes": [[[0.0, 0.4, 0.4], [1.0, 0.6, 0.6]]]}
  ],
  "rules": [
    {"from": "empty", "to": "empty", "direction": "+x"},
    {"from": "rod_x", "to": "rod_x", "direction": "+x"},
    {"from": "empty", "to": "empty", "direction": "+y"},
    {"from": "empty", "to": "rod_x", "direction": "+y"},
    {"from": "rod_x", "to": "empty", "direction": "+y"},
    {"from": "empty", "to": "empty", "direction": "+z"},
    {"from": "empty", "to": "rod_x", "direction": "+z"},
    {"from": "rod_x", "to": "empty", "direction": "+z"}
  ]
}"#;

fn main() -> anyhow::Result<()> {
    let sets = [
        ("checkerboard", TileSet::checkerboard()),
        ("struts", TileSet::struts(0.25)),
        ("corridors", TileSet::from_json(CORRIDORS)?),
    ];
    for (name, tiles) in &sets {
        let grid = wfc_collapse([6, 5, 4], tiles, 3, 32)?;
        let mut counts = vec![0usize; tiles.len()];
        for &c in &grid.cells {
            counts[c] += 1;
        }
        println!("{name}: tile counts {counts:?}, violations {}", grid.violations(tiles));
        if *name == "checkerboard" {
            for y in 0..5 {
                let row: String = (0..6).map(|x| if grid.get(x, y, 0) == 0 { '#' } else { '.' }).collect();
                println!("  {row}");
            }
        }
    }
    match wfc_collapse([2, 1, 1], &TileSet::single(false), 0, 4) {
        Ok(_) => println!("self-incompatible tile set unexpectedly tiled"),
        Err(e) => println!("self-incompatible tile set: {e}"),
    }
    Ok(())
}
