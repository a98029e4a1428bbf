use std::fs;
use std::path::Path;

use topogen::growth::GrowthConfig;
use topogen::pipeline::{
    export_views, generate_dataset, generate_sample, read_manifest, verify_dataset, DatasetConfig, PipelineError,
    MANIFEST_FILE, SLICE_COUNT,
};
use topogen::raster::{VoxelGrid, VOXEL_HEADER_LEN};
use topogen::topo::BettiTriple;

fn small_config(genus: [u32; 2], target: f64) -> DatasetConfig {
    DatasetConfig {
        genus_range: genus,
        samples_per_genus: 1,
        voxel_resolution: 32,
        point_count: 256,
        master_seed: 11,
        growth: GrowthConfig { target_area_multiplier: [target, target], ..Default::default() },
        ..Default::default()
    }
}

#[test]
fn unit_target_gives_one_verified_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let summary = generate_dataset(&small_config([0, 0], 1.0), dir.path(), Some(1)).unwrap();
    assert!(summary.failures.is_empty());
    assert_eq!(summary.entries.len(), 1);
    let e = &summary.entries[0];
    assert_eq!(e.complexity_level, 0);
    assert!(e.verification.pre_noise.pass);
    assert_eq!(e.verification.pre_noise.actual, BettiTriple::new(1, 0, 0));
    assert_eq!(read_manifest(&dir.path().join(MANIFEST_FILE)).unwrap(), summary.entries);
}

#[test]
fn entries_cover_every_level_with_unique_ids() {
    let dir = tempfile::tempdir().unwrap();
    let summary = generate_dataset(&small_config([1, 2], 1.5), dir.path(), None).unwrap();
    assert!(summary.failures.is_empty() && summary.failed_genera.is_empty());
    assert_eq!(summary.entries.len(), 2 * 6);
    let mut ids: Vec<&str> = summary.entries.iter().map(|e| e.sample_id.as_str()).collect();
    let sorted = {
        let mut s = ids.clone();
        s.sort();
        s
    };
    assert_eq!(ids, sorted);
    ids.dedup();
    assert_eq!(ids.len(), 12);
    for (k, e) in summary.entries.iter().enumerate() {
        assert_eq!(e.complexity_level as usize, k % 6);
        assert_eq!(e.files.slices.len(), SLICE_COUNT);
        assert_eq!(e.mesh.chi, e.seed_mesh.chi);
        assert!(!e.mesh.self_intersecting);
    }
    // all levels of one run share a split
    for run in summary.entries.chunks(6) {
        assert!(run.iter().all(|e| e.split == run[0].split));
    }
}

#[test]
fn single_sample_reproduces_in_isolation() {
    let config = small_config([1, 1], 1.4);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let full = generate_dataset(&config, a.path(), Some(1)).unwrap();
    let alone = generate_sample(&config, 1, 0, b.path()).unwrap().unwrap();
    assert_eq!(alone.entries, full.entries);
    for e in &full.entries {
        for rel in [&e.files.voxels, &e.files.voxels_pre_noise, &e.files.mesh, &e.files.points] {
            assert_eq!(fs::read(a.path().join(rel)).unwrap(), fs::read(b.path().join(rel)).unwrap());
        }
    }
}

fn flip_payload_bit(path: &Path) {
    let mut bytes = fs::read(path).unwrap();
    let i = VOXEL_HEADER_LEN + (bytes.len() - VOXEL_HEADER_LEN) / 2;
    bytes[i] ^= 0x10;
    fs::write(path, bytes).unwrap();
}

#[test]
fn verify_flags_bit_flip_and_lists_missing_files() {
    let dir = tempfile::tempdir().unwrap();
    let summary = generate_dataset(&small_config([0, 1], 1.3), dir.path(), None).unwrap();
    let manifest = dir.path().join(MANIFEST_FILE);
    let clean = verify_dataset(&manifest).unwrap();
    assert!(clean.is_clean() && clean.is_complete());
    assert_eq!(clean.consistency_fraction(), 1.0);
    assert_eq!(clean.pre_noise_pass_fraction(), 1.0);

    let flipped = &summary.entries[3];
    flip_payload_bit(&dir.path().join(&flipped.files.voxels_pre_noise));
    let gone = &summary.entries[8];
    fs::remove_file(dir.path().join(&gone.files.voxels)).unwrap();
    let report = verify_dataset(&manifest).unwrap();
    assert_eq!(report.mismatches.len(), 1);
    assert_eq!(report.mismatches[0].sample_id, flipped.sample_id);
    assert_eq!(report.missing.len(), 1);
    assert_eq!(report.missing[0].sample_id, gone.sample_id);
    assert_eq!(report.consistent, summary.entries.len() - 2);
    assert!(!report.is_complete());
}

#[test]
fn views_write_five_slices_and_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let summary = generate_dataset(&small_config([5, 5], 1.2), dir.path(), None).unwrap();
    let manifest = dir.path().join(MANIFEST_FILE);
    let e = summary.entries.last().unwrap();
    let paths = export_views(&manifest, &e.sample_id).unwrap();
    assert_eq!(paths.len(), SLICE_COUNT + 1);
    let r = e.voxel_resolution;
    for p in &paths[..SLICE_COUNT] {
        let bytes = fs::read(p).unwrap();
        let header = format!("P5\n{r} {r}\n255\n");
        assert!(bytes.starts_with(header.as_bytes()));
        assert_eq!(bytes.len() - header.len(), r * r);
    }
    assert_eq!(fs::read(&paths[SLICE_COUNT]).unwrap(), fs::read(dir.path().join(&e.files.mesh)).unwrap());
    assert!(matches!(export_views(&manifest, "g99-s0000-l0"), Err(PipelineError::UnknownSample(_))));
}

#[test]
fn empty_slice_is_all_background() {
    let dir = tempfile::tempdir().unwrap();
    let summary = generate_dataset(&small_config([0, 0], 1.0), dir.path(), None).unwrap();
    let e = &summary.entries[0];
    // replace the volume with an empty one of the same size
    let empty = VoxelGrid::new(e.voxel_resolution);
    let mut bytes = Vec::new();
    empty.write_to(&mut bytes).unwrap();
    fs::write(dir.path().join(&e.files.voxels), bytes).unwrap();
    let paths = export_views(&dir.path().join(MANIFEST_FILE), &e.sample_id).unwrap();
    for p in &paths[..SLICE_COUNT] {
        let bytes = fs::read(p).unwrap();
        assert!(bytes[bytes.len() - e.voxel_resolution * e.voxel_resolution..].iter().all(|&b| b == 0));
    }
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("occupied");
    fs::write(&file, b"x").unwrap();
    let err = generate_dataset(&small_config([0, 0], 1.0), &file, None).unwrap_err();
    assert!(matches!(err, PipelineError::Io { .. }), "{err}");
}

#[test]
fn invalid_config_is_rejected_before_work() {
    let dir = tempfile::tempdir().unwrap();
    let config = DatasetConfig { train_test_split: 0.0, ..small_config([0, 0], 1.0) };
    assert!(matches!(generate_dataset(&config, dir.path(), None), Err(PipelineError::InvalidConfig(_))));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}
