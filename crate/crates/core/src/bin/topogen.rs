use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use topogen::mesh::{io::write_obj, make_genus_g_seed, SeedParams};
use topogen::pipeline::{export_views, generate_dataset, verify_dataset, DatasetConfig, PipelineError, MANIFEST_FILE};

const EXIT_INVALID_CONFIG: u8 = 2;
const EXIT_GENERATION_FAILURES: u8 = 3;
const EXIT_VERIFICATION_MISMATCH: u8 = 4;

#[derive(Parser)]
#[command(name = "topogen", version, about = "Generate and verify topology-labeled 3D datasets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset from a JSON config.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Recompute Betti numbers for every volume in a manifest.
    Verify {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Export z slices and the mesh of one sample.
    Views {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        sample: String,
    },
    /// Write the genus-g seed frame as OBJ.
    SeedMesh {
        #[arg(long)]
        genus: u32,
        #[arg(long)]
        out: PathBuf,
    },
}

fn fail(e: impl std::fmt::Display, code: u8) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(code)
}

fn pipeline_fail(e: PipelineError) -> ExitCode {
    let code = if matches!(e, PipelineError::InvalidConfig(_)) { EXIT_INVALID_CONFIG } else { 1 };
    fail(e, code)
}

fn generate(config: PathBuf, out: Option<PathBuf>, jobs: Option<usize>) -> ExitCode {
    let text = match fs::read_to_string(&config) {
        Ok(t) => t,
        Err(e) => return fail(format!("{}: {e}", config.display()), EXIT_INVALID_CONFIG),
    };
    let config = match DatasetConfig::from_json(&text) {
        Ok(c) => c,
        Err(e) => return pipeline_fail(e),
    };
    let Some(out) = out.or_else(|| config.output_directory.clone()) else {
        return fail("no output directory given", EXIT_INVALID_CONFIG);
    };
    if jobs == Some(0) {
        return fail("--jobs must be positive", EXIT_INVALID_CONFIG);
    }
    let summary = match generate_dataset(&config, &out, jobs) {
        Ok(s) => s,
        Err(e) => return pipeline_fail(e),
    };
    println!(
        "{} entries, {} failed samples, pre-noise label pass {:.4}; manifest {}",
        summary.entries.len(),
        summary.failures.len(),
        summary.pre_noise_pass_fraction(),
        out.join(MANIFEST_FILE).display()
    );
    for g in &summary.failed_genera {
        eprintln!("genus {g}: every sample failed");
    }
    if summary.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_GENERATION_FAILURES)
    }
}

fn verify(manifest: PathBuf) -> ExitCode {
    let report = match verify_dataset(&manifest) {
        Ok(r) => r,
        Err(e) => return pipeline_fail(e),
    };
    println!("sample_id\tintended\tpre_noise\tpost_noise");
    let show = |b: &Option<topogen::topo::BettiTriple>| b.map_or("-".to_string(), |b| format!("{:?}", b.as_tuple()));
    for r in &report.rows {
        println!("{}\t{:?}\t{}\t{}", r.sample_id, r.intended.as_tuple(), show(&r.pre_noise), show(&r.post_noise));
    }
    for m in &report.missing {
        println!("missing {} {}", m.sample_id, m.path);
    }
    for m in &report.mismatches {
        println!("mismatch {} {}: {}", m.sample_id, m.file, m.reason);
    }
    println!(
        "{} entries, consistency {:.4}, label pass pre-noise {:.4} post-noise {:.4}",
        report.entries,
        report.consistency_fraction(),
        report.pre_noise_pass_fraction(),
        report.post_noise_pass_fraction()
    );
    if report.is_clean() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERIFICATION_MISMATCH)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Generate { config, out, jobs } => generate(config, out, jobs),
        Command::Verify { manifest } => verify(manifest),
        Command::Views { manifest, sample } => match export_views(&manifest, &sample) {
            Ok(paths) => {
                for p in paths {
                    println!("{}", p.display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => pipeline_fail(e),
        },
        Command::SeedMesh { genus, out } => {
            let mesh = match make_genus_g_seed(genus, &SeedParams::default()) {
                Ok(m) => m,
                Err(e) => return fail(e, EXIT_INVALID_CONFIG),
            };
            let written = fs::File::create(&out).and_then(|f| write_obj(&mesh, std::io::BufWriter::new(f)));
            match written {
                Ok(()) => {
                    let t = mesh.topology();
                    println!("genus {genus}: V={} E={} F={} chi={}", t.vertex_count, t.edge_count, t.face_count, t.euler_characteristic);
                    ExitCode::SUCCESS
                }
                Err(e) => fail(format!("{}: {e}", out.display()), 1),
            }
        }
    }
}
