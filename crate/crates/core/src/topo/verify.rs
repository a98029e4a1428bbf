use serde::{Deserialize, Serialize};

use crate::raster::VoxelGrid;

use super::{betti_voxel, BettiTriple};

/// Outcome of checking a voxel solid against its genus label. A solid
/// handlebody of genus g has Betti numbers (1, g, 0).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub expected: BettiTriple,
    pub actual: BettiTriple,
    pub chi: i64,
    pub beta0_pass: bool,
    pub beta1_pass: bool,
    pub beta2_pass: bool,
    pub pass: bool,
}

impl VerificationReport {
    pub fn compare(expected: BettiTriple, actual: BettiTriple) -> Self {
        let beta0_pass = expected.beta0 == actual.beta0;
        let beta1_pass = expected.beta1 == actual.beta1;
        let beta2_pass = expected.beta2 == actual.beta2;
        VerificationReport {
            expected,
            actual,
            chi: actual.chi,
            beta0_pass,
            beta1_pass,
            beta2_pass,
            pass: beta0_pass && beta1_pass && beta2_pass,
        }
    }
}

pub fn verify_sample(grid: &VoxelGrid, expected_genus: u32) -> VerificationReport {
    VerificationReport::compare(BettiTriple::new(1, expected_genus as u64, 0), betti_voxel(grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topo::fixtures::*;

    #[test]
    fn ring_passes_as_genus_one() {
        let r = verify_sample(&ring(), 1);
        assert!(r.pass);
        assert_eq!(r.actual, BettiTriple::new(1, 1, 0));
    }

    #[test]
    fn split_grid_fails_on_beta0() {
        let r = verify_sample(&two_blocks(), 0);
        assert!(!r.pass);
        assert!(!r.beta0_pass);
        assert_eq!(r.actual.beta0, 2);
    }

    #[test]
    fn empty_grid_fails() {
        let r = verify_sample(&VoxelGrid::new(8), 0);
        assert!(!r.pass);
        assert_eq!(r.actual.beta0, 0);
    }

    #[test]
    fn report_serializes() {
        let r = verify_sample(&ring(), 2);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"beta1_pass\":false"));
        let back: VerificationReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }
}
