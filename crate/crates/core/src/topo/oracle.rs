use std::collections::HashMap;

use thiserror::Error;

use crate::raster::VoxelGrid;

use super::BettiTriple;

pub const ORACLE_MAX_RESOLUTION: usize = 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("grid resolution {0} exceeds the oracle limit of {ORACLE_MAX_RESOLUTION}")]
    TooLarge(usize),
}

/// Cells are keyed in doubled coordinates: a cell spans the odd axes of
/// its key, so its faces are obtained by moving one odd coordinate by ±1.
type Cell = [u32; 3];

fn dimension(c: &Cell) -> usize {
    c.iter().filter(|&&v| v % 2 == 1).count()
}

fn boundary(c: &Cell) -> Vec<Cell> {
    let mut out = Vec::with_capacity(6);
    for a in 0..3 {
        if c[a] % 2 == 1 {
            let mut lo = *c;
            lo[a] -= 1;
            let mut hi = *c;
            hi[a] += 1;
            out.push(lo);
            out.push(hi);
        }
    }
    out
}

/// Rank over GF(2) by standard column reduction on sorted sparse columns.
fn gf2_rank(mut columns: Vec<Vec<u32>>) -> usize {
    let mut pivot_of_low: HashMap<u32, usize> = HashMap::new();
    let mut rank = 0;
    for j in 0..columns.len() {
        let mut col = std::mem::take(&mut columns[j]);
        col.sort_unstable();
        while let Some(&low) = col.last() {
            let Some(&k) = pivot_of_low.get(&low) else { break };
            col = symmetric_difference(&col, &columns[k]);
        }
        if let Some(&low) = col.last() {
            pivot_of_low.insert(low, j);
            rank += 1;
        }
        columns[j] = col;
    }
    rank
}

fn symmetric_difference(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Betti numbers from the ranks of the cubical boundary maps over GF(2).
pub fn homology_oracle(grid: &VoxelGrid) -> Result<BettiTriple, OracleError> {
    let r = grid.resolution();
    if r > ORACLE_MAX_RESOLUTION {
        return Err(OracleError::TooLarge(r));
    }
    let mut cells: Vec<Cell> = Vec::new();
    for z in 0..r {
        for y in 0..r {
            for x in 0..r {
                if !grid.get(x, y, z) {
                    continue;
                }
                for dz in 0..3u32 {
                    for dy in 0..3u32 {
                        for dx in 0..3u32 {
                            cells.push([2 * x as u32 + dx, 2 * y as u32 + dy, 2 * z as u32 + dz]);
                        }
                    }
                }
            }
        }
    }
    cells.sort_unstable();
    cells.dedup();

    let mut by_dim: [Vec<Cell>; 4] = Default::default();
    for c in cells {
        by_dim[dimension(&c)].push(c);
    }
    let index: [HashMap<Cell, u32>; 4] =
        std::array::from_fn(|d| by_dim[d].iter().enumerate().map(|(i, c)| (*c, i as u32)).collect());

    let rank_of = |d: usize| -> usize {
        let columns = by_dim[d]
            .iter()
            .map(|c| boundary(c).iter().map(|f| index[d - 1][f]).collect())
            .collect();
        gf2_rank(columns)
    };
    let (r1, r2, r3) = (rank_of(1), rank_of(2), rank_of(3));
    let n = by_dim.each_ref().map(|v| v.len());
    let beta0 = n[0] - r1;
    let beta1 = n[1] - r1 - r2;
    let beta2 = n[2] - r2 - r3;
    debug_assert_eq!(n[3], r3, "cubical complex in R^3 has no 3-cycles");
    Ok(BettiTriple::new(beta0 as u64, beta1 as u64, beta2 as u64))
}
