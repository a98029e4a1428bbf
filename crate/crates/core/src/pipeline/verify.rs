use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::raster::VoxelGrid;
use crate::topo::{betti_voxel, BettiTriple, VerificationReport};

use super::manifest::read_manifest;
use super::{sha256_hex, PipelineError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissingFile {
    pub sample_id: String,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationMismatch {
    pub sample_id: String,
    pub file: String,
    pub reason: String,
}

/// Intended label against the Betti numbers measured from the files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BettiRow {
    pub sample_id: String,
    pub genus_label: u32,
    pub complexity_level: u32,
    pub intended: BettiTriple,
    pub pre_noise: Option<BettiTriple>,
    pub post_noise: Option<BettiTriple>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetVerification {
    pub entries: usize,
    pub missing: Vec<MissingFile>,
    pub mismatches: Vec<VerificationMismatch>,
    /// Entries whose files all exist and agree with the stored reports.
    pub consistent: usize,
    pub pre_noise_label_pass: usize,
    pub post_noise_label_pass: usize,
    pub rows: Vec<BettiRow>,
}

impl DatasetVerification {
    pub fn consistency_fraction(&self) -> f64 {
        self.consistent as f64 / self.entries.max(1) as f64
    }

    pub fn pre_noise_pass_fraction(&self) -> f64 {
        self.pre_noise_label_pass as f64 / self.entries.max(1) as f64
    }

    pub fn post_noise_pass_fraction(&self) -> f64 {
        self.post_noise_label_pass as f64 / self.entries.max(1) as f64
    }

    /// Every entry was re-measured at both stages.
    pub fn is_complete(&self) -> bool {
        self.rows.len() == self.entries && self.rows.iter().all(|r| r.pre_noise.is_some() && r.post_noise.is_some())
    }

    pub fn is_clean(&self) -> bool {
        self.missing.is_empty() && self.mismatches.is_empty()
    }
}

enum Check {
    Missing,
    Mismatch(String),
    Measured(BettiTriple),
}

fn check_volume(path: &Path, digest: &str, stored: &VerificationReport) -> Check {
    let Ok(bytes) = fs::read(path) else {
        return Check::Missing;
    };
    if sha256_hex(&bytes) != digest {
        return Check::Mismatch("sha256 differs from manifest".into());
    }
    let grid = match VoxelGrid::read_from(&bytes[..]) {
        Ok(g) => g,
        Err(e) => return Check::Mismatch(format!("unreadable: {e}")),
    };
    let measured = betti_voxel(&grid);
    if measured != stored.actual {
        return Check::Mismatch(format!("measured {measured}, manifest records {}", stored.actual));
    }
    Check::Measured(measured)
}

/// Recomputes Betti numbers of every volume named in the manifest and
/// compares them with the stored reports. Missing files are listed, not
/// fatal; only an unreadable manifest is an error.
pub fn verify_dataset(manifest: &Path) -> Result<DatasetVerification, PipelineError> {
    let root = manifest.parent().unwrap_or(Path::new("."));
    let entries = read_manifest(manifest)?;
    let mut report = DatasetVerification {
        entries: entries.len(),
        missing: Vec::new(),
        mismatches: Vec::new(),
        consistent: 0,
        pre_noise_label_pass: 0,
        post_noise_label_pass: 0,
        rows: Vec::new(),
    };
    for e in &entries {
        let intended = BettiTriple::new(1, e.genus_label as u64, 0);
        let mut measured = [None, None];
        let mut ok = true;
        let volumes = [
            (&e.files.voxels_pre_noise, &e.sha256.voxels_pre_noise, &e.verification.pre_noise),
            (&e.files.voxels, &e.sha256.voxels, &e.verification.post_noise),
        ];
        for (slot, (rel, digest, stored)) in volumes.into_iter().enumerate() {
            match check_volume(&root.join(rel), digest, stored) {
                Check::Missing => {
                    ok = false;
                    report.missing.push(MissingFile { sample_id: e.sample_id.clone(), path: rel.clone() });
                }
                Check::Mismatch(reason) => {
                    ok = false;
                    report.mismatches.push(VerificationMismatch {
                        sample_id: e.sample_id.clone(),
                        file: rel.clone(),
                        reason,
                    });
                }
                Check::Measured(b) => measured[slot] = Some(b),
            }
        }
        for rel in std::iter::once(&e.files.mesh).chain([&e.files.points]).chain(&e.files.slices) {
            if !root.join(rel).is_file() {
                ok = false;
                report.missing.push(MissingFile { sample_id: e.sample_id.clone(), path: rel.clone() });
            }
        }
        report.consistent += ok as usize;
        report.pre_noise_label_pass += (measured[0] == Some(intended)) as usize;
        report.post_noise_label_pass += (measured[1] == Some(intended)) as usize;
        report.rows.push(BettiRow {
            sample_id: e.sample_id.clone(),
            genus_label: e.genus_label,
            complexity_level: e.complexity_level,
            intended,
            pre_noise: measured[0],
            post_noise: measured[1],
        });
    }
    Ok(report)
}
