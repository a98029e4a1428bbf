use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::growth::GrowthStats;
use crate::topo::VerificationReport;

use super::{write_atomic, PipelineError};

pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const FAILURES_FILE: &str = "failures.jsonl";
pub const TIMINGS_FILE: &str = "timings.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// Paths relative to the manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleFiles {
    pub mesh: String,
    pub voxels_pre_noise: String,
    pub voxels: String,
    pub points: String,
    pub slices: Vec<String>,
    pub trace: String,
}

/// SHA-256 of the voxel files, hex encoded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigests {
    pub voxels_pre_noise: String,
    pub voxels: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageReports {
    pub pre_noise: VerificationReport,
    pub post_noise: VerificationReport,
}

/// Combinatorics and embedding of the exported (displaced) mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeshCheck {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub chi: i64,
    pub self_intersecting: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleManifestEntry {
    pub sample_id: String,
    pub genus_label: u32,
    pub sample_index: u32,
    pub complexity_level: u32,
    pub rng_subseed: u64,
    /// Restart count before this run succeeded.
    pub attempt: u32,
    pub area_ratio: f64,
    pub target_area_multiplier: f64,
    pub growth_iteration: usize,
    pub displacement_intensity: f64,
    pub voxel_resolution: usize,
    pub split: Split,
    pub files: SampleFiles,
    pub sha256: FileDigests,
    pub verification: StageReports,
    pub seed_mesh: MeshCheck,
    pub mesh: MeshCheck,
    pub growth: GrowthStats,
}

pub fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), PipelineError> {
    let mut text = String::new();
    for r in rows {
        text += &serde_json::to_string(r).map_err(|e| PipelineError::Artifact(e.to_string()))?;
        text.push('\n');
    }
    write_atomic(path, text.as_bytes())
}

pub fn read_manifest(path: &Path) -> Result<Vec<SampleManifestEntry>, PipelineError> {
    let file = fs::File::open(path).map_err(PipelineError::io(path))?;
    let mut entries = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(PipelineError::io(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let entry = serde_json::from_str(&line).map_err(|e| PipelineError::Manifest {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        entries.push(entry);
    }
    Ok(entries)
}
