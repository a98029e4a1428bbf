//! Tile-based wave function collapse on a 3D grid.
//!
//! Each cell holds the set of still-possible tiles as a bit mask. The loop
//! collapses a cell with the fewest candidates (uniform tie-break), picks
//! one of its tiles uniformly, and propagates adjacency constraints until
//! nothing changes. A contradiction restarts from scratch on a fresh RNG
//! stream.

use std::collections::{BTreeMap, VecDeque};

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::mesh::{Aabb, Vec3};

use super::{EnvError, Environment, Provenance};

pub const DEFAULT_MAX_RESTARTS: u32 = 32;
const MAX_TILES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "+x")]
    PosX,
    #[serde(rename = "-x")]
    NegX,
    #[serde(rename = "+y")]
    PosY,
    #[serde(rename = "-y")]
    NegY,
    #[serde(rename = "+z")]
    PosZ,
    #[serde(rename = "-z")]
    NegZ,
}

impl Direction {
    pub const ALL: [Direction; 6] =
        [Direction::PosX, Direction::NegX, Direction::PosY, Direction::NegY, Direction::PosZ, Direction::NegZ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn opposite(self) -> Direction {
        Direction::ALL[self.index() ^ 1]
    }

    pub fn offset(self) -> [i64; 3] {
        match self {
            Direction::PosX => [1, 0, 0],
            Direction::NegX => [-1, 0, 0],
            Direction::PosY => [0, 1, 0],
            Direction::NegY => [0, -1, 0],
            Direction::PosZ => [0, 0, 1],
            Direction::NegZ => [0, 0, -1],
        }
    }
}

/// A tile and the obstacle boxes it contributes, in unit-cell coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tile {
    pub name: String,
    #[serde(default)]
    pub boxes: Vec<[[f64; 3]; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleEntry {
    pub from: String,
    pub to: String,
    pub direction: Direction,
}

/// JSON form of a tile set. Each listed rule `(from, to, d)` also implies
/// `(to, from, opposite(d))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileSetDocument {
    pub tiles: Vec<Tile>,
    pub rules: Vec<RuleEntry>,
}

/// Tiles plus per-direction compatibility masks:
/// `allowed[d][a]` has bit `b` set iff `b` may sit next to `a` in direction `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct TileSet {
    tiles: Vec<Tile>,
    allowed: [Vec<u64>; 6],
}

impl TileSet {
    pub fn new(tiles: Vec<Tile>, allowed: [Vec<u64>; 6]) -> Result<Self, EnvError> {
        let n = tiles.len();
        if n == 0 {
            return Err(EnvError::InvalidTileSet("no tiles".into()));
        }
        if n > MAX_TILES {
            return Err(EnvError::InvalidTileSet(format!("{n} tiles exceeds limit of {MAX_TILES}")));
        }
        if allowed.iter().any(|m| m.len() != n) {
            return Err(EnvError::InvalidTileSet("rule table size does not match tile count".into()));
        }
        for d in Direction::ALL {
            for a in 0..n {
                for b in 0..n {
                    let fwd = allowed[d.index()][a] >> b & 1;
                    let back = allowed[d.opposite().index()][b] >> a & 1;
                    if fwd != back {
                        return Err(EnvError::InvalidTileSet(format!(
                            "rule ({}, {}, {d:?}) is not mirrored",
                            tiles[a].name, tiles[b].name
                        )));
                    }
                }
            }
        }
        Ok(TileSet { tiles, allowed })
    }

    pub fn from_document(doc: &TileSetDocument) -> Result<Self, EnvError> {
        let n = doc.tiles.len();
        let mut id = BTreeMap::new();
        for (i, t) in doc.tiles.iter().enumerate() {
            if id.insert(t.name.clone(), i).is_some() {
                return Err(EnvError::InvalidTileSet(format!("duplicate tile {:?}", t.name)));
            }
        }
        let mut allowed: [Vec<u64>; 6] = std::array::from_fn(|_| vec![0u64; n]);
        for r in &doc.rules {
            let lookup = |name: &String| {
                id.get(name).copied().ok_or_else(|| EnvError::InvalidTileSet(format!("unknown tile {name:?}")))
            };
            let (a, b) = (lookup(&r.from)?, lookup(&r.to)?);
            allowed[r.direction.index()][a] |= 1 << b;
            allowed[r.direction.opposite().index()][b] |= 1 << a;
        }
        TileSet::new(doc.tiles.clone(), allowed)
    }

    pub fn from_json(text: &str) -> Result<Self, EnvError> {
        let doc: TileSetDocument =
            serde_json::from_str(text).map_err(|e| EnvError::InvalidTileSet(e.to_string()))?;
        TileSet::from_document(&doc)
    }

    pub fn to_document(&self) -> TileSetDocument {
        let mut rules = Vec::new();
        for d in Direction::ALL {
            for a in 0..self.tiles.len() {
                for b in 0..self.tiles.len() {
                    if self.allows(a, b, d) {
                        rules.push(RuleEntry { from: self.tiles[a].name.clone(), to: self.tiles[b].name.clone(), direction: d });
                    }
                }
            }
        }
        TileSetDocument { tiles: self.tiles.clone(), rules }
    }

    /// Tiles whose faces carry connectors; neighbors must agree on the
    /// connector across their shared face. `sockets[t][d]` is tile `t`'s
    /// connector on face `d`.
    pub fn from_sockets(tiles: Vec<Tile>, sockets: &[[bool; 6]]) -> Result<Self, EnvError> {
        let n = tiles.len();
        let allowed = std::array::from_fn(|d| {
            let dir = Direction::ALL[d];
            (0..n)
                .map(|a| {
                    (0..n)
                        .filter(|&b| sockets[a][d] == sockets[b][dir.opposite().index()])
                        .fold(0u64, |m, b| m | 1 << b)
                })
                .collect()
        });
        TileSet::new(tiles, allowed)
    }

    /// Empty cells, straight beams along each axis and a three-way cross,
    /// each of square cross-section `thickness` (fraction of the cell).
    pub fn struts(thickness: f64) -> Self {
        let (lo, hi) = (0.5 - 0.5 * thickness, 0.5 + 0.5 * thickness);
        let beam = |axis: usize| {
            let mut min = [lo; 3];
            let mut max = [hi; 3];
            min[axis] = 0.0;
            max[axis] = 1.0;
            [min, max]
        };
        let tiles = vec![
            Tile { name: "empty".into(), boxes: vec![] },
            Tile { name: "beam_x".into(), boxes: vec![beam(0)] },
            Tile { name: "beam_y".into(), boxes: vec![beam(1)] },
            Tile { name: "beam_z".into(), boxes: vec![beam(2)] },
            Tile { name: "cross".into(), boxes: vec![beam(0), beam(1), beam(2)] },
        ];
        let sockets = [
            [false; 6],
            [true, true, false, false, false, false],
            [false, false, true, true, false, false],
            [false, false, false, false, true, true],
            [true; 6],
        ];
        TileSet::from_sockets(tiles, &sockets).expect("socket tile sets are mirrored")
    }

    /// Two tiles that may only neighbor each other: a 3D checkerboard.
    pub fn checkerboard() -> Self {
        let tiles = vec![Tile { name: "black".into(), boxes: vec![] }, Tile { name: "white".into(), boxes: vec![] }];
        TileSet::new(tiles, std::array::from_fn(|_| vec![0b10, 0b01])).unwrap()
    }

    pub fn single(self_compatible: bool) -> Self {
        let mask = if self_compatible { 1 } else { 0 };
        TileSet::new(vec![Tile { name: "only".into(), boxes: vec![] }], std::array::from_fn(|_| vec![mask])).unwrap()
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn allows(&self, a: usize, b: usize, d: Direction) -> bool {
        self.allowed[d.index()][a] >> b & 1 == 1
    }

    fn full_mask(&self) -> u64 {
        if self.tiles.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.tiles.len()) - 1
        }
    }

    /// Union of the tiles allowed in direction `d` next to any tile of `mask`.
    fn support(&self, mask: u64, d: Direction) -> u64 {
        let mut out = 0;
        let mut m = mask;
        while m != 0 {
            let t = m.trailing_zeros() as usize;
            out |= self.allowed[d.index()][t];
            m &= m - 1;
        }
        out
    }
}

/// Collapsed grid of tile indices, x-fastest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TileGrid {
    pub dims: [usize; 3],
    pub cells: Vec<usize>,
}

impl TileGrid {
    pub fn get(&self, x: usize, y: usize, z: usize) -> usize {
        self.cells[x + self.dims[0] * (y + self.dims[1] * z)]
    }

    /// Adjacent pairs that break a rule.
    pub fn violations(&self, tiles: &TileSet) -> usize {
        let [nx, ny, nz] = self.dims;
        let mut bad = 0;
        for z in 0..nz {
            for y in 0..ny {
                for x in 0..nx {
                    let a = self.get(x, y, z);
                    if x + 1 < nx && !tiles.allows(a, self.get(x + 1, y, z), Direction::PosX) {
                        bad += 1;
                    }
                    if y + 1 < ny && !tiles.allows(a, self.get(x, y + 1, z), Direction::PosY) {
                        bad += 1;
                    }
                    if z + 1 < nz && !tiles.allows(a, self.get(x, y, z + 1), Direction::PosZ) {
                        bad += 1;
                    }
                }
            }
        }
        bad
    }
}

struct Wave<'a> {
    dims: [usize; 3],
    masks: Vec<u64>,
    tiles: &'a TileSet,
}

impl Wave<'_> {
    fn neighbor(&self, i: usize, d: Direction) -> Option<usize> {
        let [nx, ny, nz] = self.dims;
        let (x, y, z) = ((i % nx) as i64, ((i / nx) % ny) as i64, (i / (nx * ny)) as i64);
        let o = d.offset();
        let (a, b, c) = (x + o[0], y + o[1], z + o[2]);
        if a < 0 || b < 0 || c < 0 || a >= nx as i64 || b >= ny as i64 || c >= nz as i64 {
            return None;
        }
        Some(a as usize + nx * (b as usize + ny * c as usize))
    }

    /// Arc consistency from the queued cells; false on an emptied cell.
    fn propagate(&mut self, queue: &mut VecDeque<usize>) -> bool {
        while let Some(i) = queue.pop_front() {
            for d in Direction::ALL {
                let Some(j) = self.neighbor(i, d) else { continue };
                let narrowed = self.masks[j] & self.tiles.support(self.masks[i], d);
                if narrowed != self.masks[j] {
                    if narrowed == 0 {
                        return false;
                    }
                    self.masks[j] = narrowed;
                    queue.push_back(j);
                }
            }
        }
        true
    }

    fn run(&mut self, rng: &mut ChaCha8Rng) -> bool {
        let mut queue: VecDeque<usize> = (0..self.masks.len()).collect();
        if !self.propagate(&mut queue) {
            return false;
        }
        let mut lowest = Vec::new();
        loop {
            lowest.clear();
            let mut min_count = u32::MAX;
            for (i, m) in self.masks.iter().enumerate() {
                let c = m.count_ones();
                if c <= 1 {
                    continue;
                }
                if c < min_count {
                    min_count = c;
                    lowest.clear();
                }
                if c == min_count {
                    lowest.push(i);
                }
            }
            let Some(&cell) = lowest.choose(rng) else { return true };
            let options: Vec<u32> = (0..64).filter(|t| self.masks[cell] >> t & 1 == 1).collect();
            let pick = *options.choose(rng).expect("cell has at least two options");
            self.masks[cell] = 1 << pick;
            queue.push_back(cell);
            if !self.propagate(&mut queue) {
                return false;
            }
        }
    }
}

/// Fills `dims` with tiles so that every face-adjacent pair satisfies the
/// rules. Attempt `k` uses RNG stream `k` of `seed`; after `max_restarts`
/// failed restarts the tiling is reported unsatisfiable.
pub fn wfc_collapse(dims: [usize; 3], tiles: &TileSet, seed: u64, max_restarts: u32) -> Result<TileGrid, EnvError> {
    let n = dims.iter().product::<usize>();
    for attempt in 0..=max_restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt as u64);
        let mut wave = Wave { dims, masks: vec![tiles.full_mask(); n], tiles };
        if wave.run(&mut rng) {
            let cells = wave.masks.iter().map(|m| m.trailing_zeros() as usize).collect();
            return Ok(TileGrid { dims, cells });
        }
    }
    Err(EnvError::Unsatisfiable { attempts: max_restarts + 1 })
}

/// WFC-based environment settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WfcDescriptor {
    pub dims: [usize; 3],
    pub cell_size: f64,
    /// Inline tile set; `None` selects [`TileSet::struts`] with `strut_thickness`.
    pub tileset: Option<TileSetDocument>,
    pub strut_thickness: f64,
    pub max_restarts: u32,
}

impl Default for WfcDescriptor {
    fn default() -> Self {
        WfcDescriptor { dims: [10, 10, 10], cell_size: 2.0, tileset: None, strut_thickness: 0.25, max_restarts: DEFAULT_MAX_RESTARTS }
    }
}

impl WfcDescriptor {
    pub fn tile_set(&self) -> Result<TileSet, EnvError> {
        match &self.tileset {
            Some(doc) => TileSet::from_document(doc),
            None => Ok(TileSet::struts(self.strut_thickness)),
        }
    }
}

/// Collapses a tile grid and instantiates each tile's boxes in its cell.
/// The bounding cube has side `max(dims) * cell_size`.
pub fn wfc_environment(descriptor: &WfcDescriptor, seed: u64) -> Result<Environment, EnvError> {
    if !(descriptor.cell_size > 0.0) || descriptor.dims.contains(&0) {
        return Err(EnvError::InvalidSpec(format!("invalid WFC descriptor {descriptor:?}")));
    }
    let tiles = descriptor.tile_set()?;
    let grid = wfc_collapse(descriptor.dims, &tiles, seed, descriptor.max_restarts)?;
    let side = *descriptor.dims.iter().max().unwrap() as f64 * descriptor.cell_size;
    let cube = Aabb { min: Vec3::zeros(), max: Vec3::repeat(side) };
    let [nx, ny, _] = descriptor.dims;
    let mut boxes = Vec::new();
    for (i, &t) in grid.cells.iter().enumerate() {
        let cell = Vec3::new((i % nx) as f64, ((i / nx) % ny) as f64, (i / (nx * ny)) as f64);
        for [min, max] in &tiles.tiles()[t].boxes {
            let to_world = |u: &[f64; 3]| (cell + Vec3::from(*u)) * descriptor.cell_size;
            boxes.push(Aabb { min: to_world(min), max: to_world(max) });
        }
    }
    Environment::new(boxes, cube, Provenance::Wfc { descriptor: descriptor.clone(), seed })
}
