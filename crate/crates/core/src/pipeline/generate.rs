use std::fs;
use std::path::Path;
use std::time::Instant;

use log::{error, info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::growth::{cellular_displacement, grow, place_seed_random, DisplacementParams, GrowthOutcome};
use crate::mesh::{io::write_obj, make_genus_g_seed, TriangleMesh};
use crate::raster::{
    apply_noise_octaves, extract_slice, fit_grid, gaussian_smooth_binarize, sample_point_cloud, voxelize_solid, Axis,
    VoxelGrid,
};
use crate::topo::verify_sample;

use super::manifest::{
    write_jsonl, FileDigests, MeshCheck, SampleFiles, SampleManifestEntry, StageReports, FAILURES_FILE, MANIFEST_FILE,
    TIMINGS_FILE,
};
use super::views::slice_indices;
use super::{
    assign_split, run_id, sample_id, sample_subseed, sha256_hex, stage_seed, write_atomic, DatasetConfig,
    PipelineError, Stage,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleTiming {
    pub run_id: String,
    pub attempts: u32,
    pub seconds: f64,
}

/// A sample whose every attempt failed; `reasons` has one line per attempt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleFailure {
    pub run_id: String,
    pub genus: u32,
    pub sample_index: u32,
    pub reasons: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SampleRun {
    pub entries: Vec<SampleManifestEntry>,
    pub timing: SampleTiming,
}

#[derive(Debug, Clone, Default)]
pub struct GenerationSummary {
    pub entries: Vec<SampleManifestEntry>,
    pub failures: Vec<SampleFailure>,
    pub timings: Vec<SampleTiming>,
    /// Classes in which no sample succeeded.
    pub failed_genera: Vec<u32>,
}

impl GenerationSummary {
    pub fn pre_noise_pass_fraction(&self) -> f64 {
        let n = self.entries.len().max(1) as f64;
        self.entries.iter().filter(|e| e.verification.pre_noise.pass).count() as f64 / n
    }
}

enum AttemptError {
    Retry(String),
    Fatal(PipelineError),
}

impl From<PipelineError> for AttemptError {
    fn from(e: PipelineError) -> Self {
        AttemptError::Fatal(e)
    }
}

fn retry<E: std::fmt::Display>(stage: &str) -> impl FnOnce(E) -> AttemptError + '_ {
    move |e| AttemptError::Retry(format!("{stage}: {e}"))
}

struct Level {
    mesh: TriangleMesh,
    pre: VoxelGrid,
    post: VoxelGrid,
    points: Vec<u8>,
    intensity: f64,
    area_ratio: f64,
    iteration: usize,
}

fn mesh_check(mesh: &TriangleMesh) -> MeshCheck {
    let t = mesh.topology();
    MeshCheck {
        vertices: t.vertex_count,
        edges: t.edge_count,
        faces: t.face_count,
        chi: t.euler_characteristic,
        self_intersecting: mesh.has_self_intersection(),
    }
}

fn grow_run(config: &DatasetConfig, genus: u32, subseed: u64, attempt: u32) -> Result<(TriangleMesh, GrowthOutcome), AttemptError> {
    let env = config
        .environment
        .build(stage_seed(subseed, attempt, Stage::Environment, 0))
        .map_err(retry("environment"))?;
    let seed = make_genus_g_seed(genus, &config.seed).map_err(|e| PipelineError::Artifact(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(stage_seed(subseed, attempt, Stage::Placement, 0));
    let (placed, _) = place_seed_random(&seed, &env, &mut rng, config.placement_attempts).map_err(retry("placement"))?;
    let outcome =
        grow(&placed, &env, &config.growth, stage_seed(subseed, attempt, Stage::Growth, 0)).map_err(retry("growth"))?;
    if !outcome.completed(&config.growth) {
        return Err(AttemptError::Retry(format!("growth: only {} snapshots", outcome.snapshots.len())));
    }
    Ok((seed, outcome))
}

fn process_level(
    config: &DatasetConfig,
    mesh: &TriangleMesh,
    subseed: u64,
    attempt: u32,
    level: u32,
) -> Result<(TriangleMesh, f64, VoxelGrid, VoxelGrid, Vec<u8>), AttemptError> {
    let res = config.voxel_resolution;
    let (_, voxel_size) = fit_grid(&mesh.bounds(), res).map_err(retry("voxel grid"))?;
    let d = &config.displacement;
    let params = DisplacementParams {
        intensity: d.intensity,
        feature_size: d.feature_size,
        max_attenuations: d.max_attenuations,
        min_clearance: d.min_clearance_voxels * voxel_size,
        max_crease_degrees: d.max_crease_degrees,
    };
    let displaced = cellular_displacement(mesh, &params, stage_seed(subseed, attempt, Stage::Displacement, level))
        .map_err(retry("displacement"))?;
    let pre = voxelize_solid(&displaced.mesh, res).map_err(retry("voxelization"))?;
    let noisy = apply_noise_octaves(&pre, &config.noise, stage_seed(subseed, attempt, Stage::Noise, level));
    let post = gaussian_smooth_binarize(&noisy, config.smoothing_sigma);
    let cloud = sample_point_cloud(&post, config.point_count, stage_seed(subseed, attempt, Stage::Points, level))
        .map_err(retry("point sampling"))?;
    let mut points = Vec::new();
    cloud.write_xyz(&mut points).map_err(|e| PipelineError::Artifact(e.to_string()))?;
    Ok((displaced.mesh, displaced.applied_intensity, pre, post, points))
}

fn run_attempt(
    config: &DatasetConfig,
    genus: u32,
    subseed: u64,
    attempt: u32,
) -> Result<(TriangleMesh, GrowthOutcome, Vec<Level>), AttemptError> {
    let (seed, outcome) = grow_run(config, genus, subseed, attempt)?;
    let mut levels = Vec::with_capacity(outcome.snapshots.len());
    for snap in &outcome.snapshots {
        let (mesh, intensity, pre, post, points) =
            process_level(config, &snap.mesh, subseed, attempt, snap.complexity_level)?;
        levels.push(Level { mesh, pre, post, points, intensity, area_ratio: snap.area_ratio, iteration: snap.iteration });
    }
    Ok((seed, outcome, levels))
}

fn encode_grid(grid: &VoxelGrid) -> Vec<u8> {
    let mut bytes = Vec::new();
    grid.write_to(&mut bytes).expect("writing to memory");
    bytes
}

fn write_file(root: &Path, rel: &str, bytes: &[u8]) -> Result<(), PipelineError> {
    let path = root.join(rel);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(PipelineError::io(parent))?;
    }
    write_atomic(&path, bytes)
}

#[allow(clippy::too_many_arguments)]
fn export_run(
    config: &DatasetConfig,
    out_dir: &Path,
    genus: u32,
    index: u32,
    subseed: u64,
    attempt: u32,
    seed: &TriangleMesh,
    outcome: &GrowthOutcome,
    levels: &[Level],
) -> Result<Vec<SampleManifestEntry>, PipelineError> {
    let run = run_id(genus, index);
    let trace = format!("runs/{run}/trace.csv");
    let mut csv = Vec::new();
    outcome.write_trace_csv(&mut csv).map_err(|e| PipelineError::Artifact(e.to_string()))?;
    write_file(out_dir, &trace, &csv)?;
    let split = assign_split(&run, config.train_test_split);
    let seed_check = mesh_check(seed);

    let mut entries = Vec::with_capacity(levels.len());
    for (snap, level) in outcome.snapshots.iter().zip(levels) {
        let id = sample_id(genus, index, snap.complexity_level);
        let dir = format!("samples/{id}");
        let mut obj = Vec::new();
        write_obj(&level.mesh, &mut obj).map_err(|e| PipelineError::Artifact(e.to_string()))?;
        let pre_bytes = encode_grid(&level.pre);
        let post_bytes = encode_grid(&level.post);
        let files = SampleFiles {
            mesh: format!("{dir}/mesh.obj"),
            voxels_pre_noise: format!("{dir}/voxels_pre_noise.tgv"),
            voxels: format!("{dir}/voxels.tgv"),
            points: format!("{dir}/points.xyz"),
            slices: slice_indices(config.voxel_resolution).iter().map(|k| format!("{dir}/slice_z{k:03}.pgm")).collect(),
            trace: trace.clone(),
        };
        write_file(out_dir, &files.mesh, &obj)?;
        write_file(out_dir, &files.voxels_pre_noise, &pre_bytes)?;
        write_file(out_dir, &files.voxels, &post_bytes)?;
        write_file(out_dir, &files.points, &level.points)?;
        for (k, rel) in slice_indices(config.voxel_resolution).into_iter().zip(&files.slices) {
            let mut pgm = Vec::new();
            let image = extract_slice(&level.post, Axis::Z, k).map_err(|e| PipelineError::Artifact(e.to_string()))?;
            image.write_pgm(&mut pgm).map_err(|e| PipelineError::Artifact(e.to_string()))?;
            write_file(out_dir, rel, &pgm)?;
        }
        entries.push(SampleManifestEntry {
            sample_id: id,
            genus_label: genus,
            sample_index: index,
            complexity_level: snap.complexity_level,
            rng_subseed: subseed,
            attempt,
            area_ratio: level.area_ratio,
            target_area_multiplier: outcome.target_area_multiplier,
            growth_iteration: level.iteration,
            displacement_intensity: level.intensity,
            voxel_resolution: config.voxel_resolution,
            split,
            files,
            sha256: FileDigests { voxels_pre_noise: sha256_hex(&pre_bytes), voxels: sha256_hex(&post_bytes) },
            verification: StageReports {
                pre_noise: verify_sample(&level.pre, genus),
                post_noise: verify_sample(&level.post, genus),
            },
            seed_mesh: seed_check,
            mesh: mesh_check(&level.mesh),
            growth: outcome.stats,
        });
    }
    Ok(entries)
}

/// Produces and writes every artifact of sample `index` of class `genus`.
/// The result depends only on the config and the pair `(genus, index)`.
/// Recoverable failures (placement, stalled growth, displacement) restart
/// the sample with fresh streams up to `sample_attempts` times.
pub fn generate_sample(
    config: &DatasetConfig,
    genus: u32,
    index: u32,
    out_dir: &Path,
) -> Result<Result<SampleRun, SampleFailure>, PipelineError> {
    let start = Instant::now();
    let subseed = sample_subseed(config.master_seed, genus, index);
    let run = run_id(genus, index);
    let mut reasons = Vec::new();
    for attempt in 0..config.sample_attempts {
        match run_attempt(config, genus, subseed, attempt) {
            Ok((seed, outcome, levels)) => {
                let entries = export_run(config, out_dir, genus, index, subseed, attempt, &seed, &outcome, &levels)?;
                let timing = SampleTiming { run_id: run.clone(), attempts: attempt + 1, seconds: start.elapsed().as_secs_f64() };
                info!("{run}: {} levels in {:.1} s (attempt {attempt})", entries.len(), timing.seconds);
                return Ok(Ok(SampleRun { entries, timing }));
            }
            Err(AttemptError::Retry(reason)) => {
                warn!("{run} attempt {attempt}: {reason}");
                reasons.push(reason);
            }
            Err(AttemptError::Fatal(e)) => return Err(e),
        }
    }
    Ok(Err(SampleFailure { run_id: run, genus, sample_index: index, reasons }))
}

/// Generates all samples on a pool of `jobs` workers (all cores when
/// `None`) and writes the manifest, failure log and timing log.
pub fn generate_dataset(
    config: &DatasetConfig,
    out_dir: &Path,
    jobs: Option<usize>,
) -> Result<GenerationSummary, PipelineError> {
    config.validate()?;
    fs::create_dir_all(out_dir).map_err(PipelineError::io(out_dir))?;
    let work: Vec<(u32, u32)> =
        config.genera().flat_map(|g| (0..config.samples_per_genus).map(move |i| (g, i))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| PipelineError::InvalidConfig(e.to_string()))?;
    let results: Vec<_> =
        pool.install(|| work.par_iter().map(|&(g, i)| generate_sample(config, g, i, out_dir)).collect());

    let mut summary = GenerationSummary::default();
    for r in results {
        match r? {
            Ok(run) => {
                summary.entries.extend(run.entries);
                summary.timings.push(run.timing);
            }
            Err(failure) => summary.failures.push(failure),
        }
    }
    for g in config.genera() {
        if !summary.entries.iter().any(|e| e.genus_label == g) {
            error!("every sample of genus {g} failed");
            summary.failed_genera.push(g);
        }
    }
    write_jsonl(&out_dir.join(MANIFEST_FILE), &summary.entries)?;
    write_jsonl(&out_dir.join(FAILURES_FILE), &summary.failures)?;
    write_jsonl(&out_dir.join(TIMINGS_FILE), &summary.timings)?;
    Ok(summary)
}
