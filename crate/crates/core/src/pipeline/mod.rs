//! Dataset orchestration: configuration, per-sample seeding, generation,
//! manifests, re-verification and view export.

mod config;
mod generate;
mod manifest;
mod verify;
mod views;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

pub use config::{DatasetConfig, DisplacementConfig, EnvironmentConfig};
pub use generate::{generate_dataset, generate_sample, GenerationSummary, SampleFailure, SampleRun, SampleTiming};
pub use manifest::{
    read_manifest, write_jsonl, FileDigests, MeshCheck, SampleFiles, SampleManifestEntry, Split, StageReports,
    FAILURES_FILE, MANIFEST_FILE, TIMINGS_FILE,
};
pub use verify::{verify_dataset, BettiRow, DatasetVerification, MissingFile, VerificationMismatch};
pub use views::{export_views, slice_indices, SLICE_COUNT};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("malformed manifest {path} line {line}: {message}")]
    Manifest { path: PathBuf, line: usize, message: String },
    #[error("unknown sample id {0}")]
    UnknownSample(String),
    #[error("{0}")]
    Artifact(String),
}

impl PipelineError {
    pub(crate) fn io(path: &Path) -> impl FnOnce(io::Error) -> PipelineError + '_ {
        move |source| PipelineError::Io { path: path.to_path_buf(), source }
    }
}

/// Independent random streams of one sample attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Environment,
    Placement,
    Growth,
    Displacement,
    Noise,
    Points,
}

impl Stage {
    fn tag(self) -> &'static [u8] {
        match self {
            Stage::Environment => b"environment",
            Stage::Placement => b"placement",
            Stage::Growth => b"growth",
            Stage::Displacement => b"displacement",
            Stage::Noise => b"noise",
            Stage::Points => b"points",
        }
    }
}

fn digest_u64(parts: &[&[u8]]) -> u64 {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    let out = h.finalize();
    u64::from_le_bytes(out[..8].try_into().expect("digest has 32 bytes"))
}

/// Root seed of sample `index` of class `genus`.
pub fn sample_subseed(master_seed: u64, genus: u32, index: u32) -> u64 {
    digest_u64(&[b"sample", &master_seed.to_le_bytes(), &genus.to_le_bytes(), &index.to_le_bytes()])
}

/// Seed of one stage of one attempt; `level` separates per-snapshot streams.
pub fn stage_seed(subseed: u64, attempt: u32, stage: Stage, level: u32) -> u64 {
    digest_u64(&[stage.tag(), &subseed.to_le_bytes(), &attempt.to_le_bytes(), &level.to_le_bytes()])
}

pub fn run_id(genus: u32, index: u32) -> String {
    format!("g{genus:02}-s{index:04}")
}

pub fn sample_id(genus: u32, index: u32, level: u32) -> String {
    format!("{}-l{level}", run_id(genus, index))
}

/// Uniform value in [0, 1) derived from a run id. All snapshots of one
/// run share it, so levels of the same shape never straddle the split.
pub fn split_key(run_id: &str) -> f64 {
    (digest_u64(&[b"split", run_id.as_bytes()]) >> 11) as f64 / (1u64 << 53) as f64
}

pub fn assign_split(run_id: &str, train_fraction: f64) -> Split {
    if split_key(run_id) < train_fraction {
        Split::Train
    } else {
        Split::Test
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes through a sibling temporary file and renames it into place.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let mut f = fs::File::create(&tmp).map_err(PipelineError::io(&tmp))?;
    f.write_all(bytes).map_err(PipelineError::io(&tmp))?;
    f.sync_all().map_err(PipelineError::io(&tmp))?;
    drop(f);
    fs::rename(&tmp, path).map_err(PipelineError::io(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_distinct_and_stable() {
        let s = sample_subseed(7, 3, 1);
        assert_eq!(s, sample_subseed(7, 3, 1));
        let mut all = vec![s, sample_subseed(8, 3, 1), sample_subseed(7, 4, 1), sample_subseed(7, 3, 2)];
        for stage in [Stage::Environment, Stage::Placement, Stage::Growth, Stage::Displacement, Stage::Noise, Stage::Points] {
            all.push(stage_seed(s, 0, stage, 0));
            all.push(stage_seed(s, 1, stage, 0));
            all.push(stage_seed(s, 0, stage, 1));
        }
        let n = all.len();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), n);
    }

    #[test]
    fn length_prefix_separates_fields() {
        assert_ne!(digest_u64(&[b"ab", b"c"]), digest_u64(&[b"a", b"bc"]));
    }

    #[test]
    fn ids_sort_in_generation_order() {
        assert_eq!(sample_id(3, 12, 4), "g03-s0012-l4");
        let mut ids = vec![sample_id(10, 0, 0), sample_id(2, 1, 5), sample_id(2, 1, 0), sample_id(2, 0, 3)];
        ids.sort();
        assert_eq!(ids, ["g02-s0000-l3", "g02-s0001-l0", "g02-s0001-l5", "g10-s0000-l0"]);
    }

    #[test]
    fn split_fraction_within_five_sigma() {
        let p = 0.8;
        for n in [200u32, 1000, 5000] {
            let train = (0..n).filter(|&i| assign_split(&run_id(i % 21, i), p) == Split::Train).count() as f64;
            let sigma = (n as f64 * p * (1.0 - p)).sqrt();
            assert!((train - p * n as f64).abs() < 5.0 * sigma, "n={n} train={train}");
        }
    }

    #[test]
    fn split_membership_is_stable_under_growth() {
        let small: Vec<Split> = (0..50).map(|i| assign_split(&run_id(1, i), 0.7)).collect();
        let large: Vec<Split> = (0..500).map(|i| assign_split(&run_id(1, i), 0.7)).collect();
        assert_eq!(&large[..50], &small[..]);
    }

    #[test]
    fn sha256_known_vector() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn atomic_write_leaves_no_temporary() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.bin");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
