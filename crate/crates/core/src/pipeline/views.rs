use std::fs;
use std::path::{Path, PathBuf};

use crate::raster::{extract_slice, Axis, VoxelGrid};

use super::manifest::read_manifest;
use super::{write_atomic, PipelineError};

pub const SLICE_COUNT: usize = 5;

/// `SLICE_COUNT` interior z indices splitting the grid into equal parts.
pub fn slice_indices(resolution: usize) -> Vec<usize> {
    (1..=SLICE_COUNT).map(|k| k * resolution / (SLICE_COUNT + 1)).collect()
}

/// Writes z slices of the sample's final volume and a copy of its mesh
/// into `views/<sample_id>/` beside the manifest. Returns the written paths.
pub fn export_views(manifest: &Path, sample_id: &str) -> Result<Vec<PathBuf>, PipelineError> {
    let root = manifest.parent().unwrap_or(Path::new("."));
    let entry = read_manifest(manifest)?
        .into_iter()
        .find(|e| e.sample_id == sample_id)
        .ok_or_else(|| PipelineError::UnknownSample(sample_id.to_string()))?;
    let voxel_path = root.join(&entry.files.voxels);
    let file = fs::File::open(&voxel_path).map_err(PipelineError::io(&voxel_path))?;
    let grid = VoxelGrid::read_from(std::io::BufReader::new(file))
        .map_err(|e| PipelineError::Artifact(format!("{}: {e}", voxel_path.display())))?;

    let out = root.join("views").join(sample_id);
    fs::create_dir_all(&out).map_err(PipelineError::io(&out))?;
    let mut written = Vec::new();
    for k in slice_indices(grid.resolution()) {
        let image = extract_slice(&grid, Axis::Z, k).map_err(|e| PipelineError::Artifact(e.to_string()))?;
        let mut bytes = Vec::new();
        image.write_pgm(&mut bytes).map_err(|e| PipelineError::Artifact(e.to_string()))?;
        let path = out.join(format!("slice_z{k:03}.pgm"));
        write_atomic(&path, &bytes)?;
        written.push(path);
    }
    let mesh_src = root.join(&entry.files.mesh);
    let mesh = fs::read(&mesh_src).map_err(PipelineError::io(&mesh_src))?;
    let path = out.join("mesh.obj");
    write_atomic(&path, &mesh)?;
    written.push(path);
    Ok(written)
}
