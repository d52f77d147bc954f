//! `pansharp simulate` — render a synthetic urban scene to disk.
//!
//! Produces five files in the output directory: the high-resolution
//! reference (`hr_ms.bin`), the degraded multispectral input (`ms.bin`),
//! the panchromatic band (`pan.bin`), the per-pixel class labels
//! (`labels.bin`), and a CSV of training/evaluation samples drawn from the
//! labels (`samples.csv`).

use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use log::info;
use pansharp_core::classify::{sample_from_labels, save_samples_csv};
use pansharp_core::io::save_raster;
use pansharp_core::scene::{
    class_pixel_counts, make_ms, make_pan, synthesize_scene, SceneSpec, DEFAULT_PAN_WEIGHTS,
    RNG_ALGORITHM,
};

use crate::manifest::RunManifest;

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scene description as JSON; omitted fields take their defaults
    #[arg(long)]
    pub spec: Option<PathBuf>,

    /// Override the seed from the scene description (or its default)
    #[arg(long)]
    pub seed: Option<u64>,

    /// Labeled pixels to draw per class for samples.csv
    #[arg(long, default_value_t = 500)]
    pub samples_per_class: usize,

    /// Directory that receives the rendered files
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn run(args: &SimulateArgs) -> Result<()> {
    let mut spec = match &args.spec {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading scene spec {}", path.display()))?;
            serde_json::from_str::<SceneSpec>(&text)
                .with_context(|| format!("parsing scene spec {}", path.display()))?
        }
        None => SceneSpec::default(),
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    spec.validate()?;

    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating output directory {}", args.out_dir.display()))?;

    info!(
        "rendering {}x{} scene (ratio {}, seed {})",
        spec.width, spec.height, spec.ratio, spec.seed
    );
    let (hr_ms, labels) = synthesize_scene(&spec)?;
    let pan = make_pan(&hr_ms, &DEFAULT_PAN_WEIGHTS)?;
    let ms = make_ms(&hr_ms, spec.ratio)?;
    let samples = sample_from_labels(&labels, args.samples_per_class, spec.seed)?;

    let counts = class_pixel_counts(&labels)?;
    info!(
        "class pixel counts: BIS {} DIS {} VEG {} WAT {} BSS {} SHA {}",
        counts[0], counts[1], counts[2], counts[3], counts[4], counts[5]
    );

    let hr_path = args.out_dir.join("hr_ms.bin");
    let ms_path = args.out_dir.join("ms.bin");
    let pan_path = args.out_dir.join("pan.bin");
    let labels_path = args.out_dir.join("labels.bin");
    let samples_path = args.out_dir.join("samples.csv");

    save_raster(&hr_ms, &hr_path)?;
    save_raster(&ms, &ms_path)?;
    save_raster(&pan, &pan_path)?;
    save_raster(&labels, &labels_path)?;
    save_samples_csv(&samples_path, &samples)?;

    let mut manifest = RunManifest::new("simulate");
    if let Some(path) = &args.spec {
        manifest.input("spec", path);
    }
    manifest.params = serde_json::json!({
        "spec": spec,
        "rng_algorithm": RNG_ALGORITHM,
        "pan_weights": DEFAULT_PAN_WEIGHTS,
        "samples_per_class": args.samples_per_class,
    });
    manifest
        .output("hr_ms", &hr_path)
        .output("ms", &ms_path)
        .output("pan", &pan_path)
        .output("labels", &labels_path)
        .output("samples", &samples_path);
    manifest.save(&args.out_dir.join("manifest.json"))?;

    info!("scene written to {}", args.out_dir.display());
    Ok(())
}
