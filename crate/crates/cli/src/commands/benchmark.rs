//! `pansharp benchmark` — the full comparison on one scene.
//!
//! Reads a simulated scene directory, runs all five fusion methods, scores
//! every product against the high-resolution reference, then runs the
//! two-step classification protocol on the panchromatic band and on each
//! fused product. Prints the three comparison tables and writes every
//! product plus a consolidated JSON report.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Args;
use log::info;
use pansharp_core::classify::{
    binary_confusion_table, detail_confusion_table, load_samples_csv, sample_from_labels,
    two_step_classify, StepReport, TwoStepConfig,
};
use pansharp_core::composite::render_composite;
use pansharp_core::fusion::{fuse, resolution_ratio, unb_weights, FusionMethod};
use pansharp_core::io::{load_raster, save_raster};
use pansharp_core::metrics::{assess, report_table, QualityReport};
use pansharp_core::{RasterImage, ResampleKernel};

use crate::manifest::RunManifest;

/// Comparison order for the fusion products.
const METHODS: [(FusionMethod, &str); 5] = [
    (FusionMethod::Pca, "PCA"),
    (FusionMethod::Gs, "GS"),
    (FusionMethod::Ihs, "IHS"),
    (FusionMethod::Wavelet, "Wavelet"),
    (FusionMethod::Unb, "UNB"),
];

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// Scene directory produced by `simulate`
    #[arg(long)]
    pub scene_dir: PathBuf,

    /// Directory that receives products, tables, and the report
    #[arg(long)]
    pub out_dir: PathBuf,

    /// Interpolation kernel for the multispectral upsampling
    #[arg(long, default_value = "bicubic")]
    pub kernel: ResampleKernel,

    /// Seed for sampling, the train/test split, and the folds
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Cross-validation folds for the hyperparameter searches
    #[arg(long, default_value_t = 5)]
    pub folds: usize,

    /// Draw this many samples per class from labels.bin instead of using
    /// the scene's samples.csv (which is the default when present)
    #[arg(long)]
    pub samples_per_class: Option<usize>,
}

/// Classification outcome for one image in the comparison.
#[derive(serde::Serialize)]
struct ClassificationEntry {
    image: String,
    binary: StepReport,
    detail: StepReport,
}

/// What lands in `benchmark.json`.
#[derive(serde::Serialize)]
struct BenchmarkReport {
    ratio: usize,
    unb_weights: [f64; 4],
    unb_residual_rms: f64,
    quality: Vec<QualityReport>,
    classification: Vec<ClassificationEntry>,
    timings_s: BTreeMap<String, f64>,
}

pub fn run(args: &BenchmarkArgs) -> Result<()> {
    let ms_path = args.scene_dir.join("ms.bin");
    let pan_path = args.scene_dir.join("pan.bin");
    let hr_path = args.scene_dir.join("hr_ms.bin");

    let ms = load_raster(&ms_path)?;
    let pan = load_raster(&pan_path)?;
    let hr_ms = load_raster(&hr_path)?;
    let ratio = resolution_ratio(&ms, &pan)?;
    if hr_ms.width() != pan.width() || hr_ms.height() != pan.height() {
        bail!(
            "reference grid {}x{} does not match the panchromatic grid {}x{}",
            hr_ms.width(),
            hr_ms.height(),
            pan.width(),
            pan.height()
        );
    }

    let csv_path = args.scene_dir.join("samples.csv");
    let labels_path = args.scene_dir.join("labels.bin");
    let (samples, sample_source, sample_input) = if let Some(n) = args.samples_per_class {
        let labels = load_raster(&labels_path)?;
        (
            sample_from_labels(&labels, n, args.seed)?,
            format!("labels.bin ({n} per class)"),
            labels_path.clone(),
        )
    } else if csv_path.exists() {
        (load_samples_csv(&csv_path)?, "samples.csv".to_string(), csv_path.clone())
    } else {
        let labels = load_raster(&labels_path)?;
        (
            sample_from_labels(&labels, 500, args.seed)?,
            "labels.bin (500 per class)".to_string(),
            labels_path.clone(),
        )
    };
    info!("classification uses {} samples from {sample_source}", samples.len());

    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating output directory {}", args.out_dir.display()))?;

    let mut timings: BTreeMap<String, f64> = BTreeMap::new();
    let total_start = Instant::now();
    let w = unb_weights(&ms, &pan)?;

    // Fuse with every method and score against the reference.
    let mut fused_images: Vec<(String, RasterImage)> = Vec::with_capacity(METHODS.len());
    let mut quality: Vec<QualityReport> = Vec::with_capacity(METHODS.len());
    let mut manifest = RunManifest::new("benchmark");
    manifest.input("ms", &ms_path).input("pan", &pan_path).input("hr_ms", &hr_path);
    for (method, name) in METHODS {
        let start = Instant::now();
        let fused = fuse(&ms, &pan, method, args.kernel)?;
        timings.insert(format!("fuse_{}", method.name()), start.elapsed().as_secs_f64());

        let bin_path = args.out_dir.join(format!("fused_{}.bin", method.name()));
        let ppm_path = args.out_dir.join(format!("composite_{}.ppm", method.name()));
        save_raster(&fused, &bin_path)?;
        render_composite(&fused, (2, 1, 0), &ppm_path)?;
        manifest.output(&format!("fused:{name}"), &bin_path);
        manifest.output(&format!("composite:{name}"), &ppm_path);

        quality.push(assess(&hr_ms, &fused, 1.0 / ratio as f64)?.with_method(name));
        fused_images.push((name.to_string(), fused));
    }

    let quality_table = report_table(&quality);
    println!("Quality vs. reference (ratio {ratio})");
    print!("{quality_table}");

    // Classify the panchromatic band, then every fused product.
    let config = TwoStepConfig { folds: args.folds, seed: args.seed, ..TwoStepConfig::default() };
    let mut classification: Vec<ClassificationEntry> = Vec::with_capacity(1 + fused_images.len());
    let mut images: Vec<(String, &RasterImage)> = vec![("PAN".to_string(), &pan)];
    images.extend(fused_images.iter().map(|(n, img)| (n.clone(), img)));
    for (name, image) in images {
        let start = Instant::now();
        let outcome = two_step_classify(image, &samples, &config)?;
        timings.insert(format!("classify_{name}"), start.elapsed().as_secs_f64());
        info!(
            "{name}: binary {:.1}% (C {}, gamma {}), six-class {:.1}% (C {}, gamma {})",
            100.0 * outcome.binary.accuracy,
            outcome.binary.c,
            outcome.binary.gamma,
            100.0 * outcome.detail.accuracy,
            outcome.detail.c,
            outcome.detail.gamma
        );
        classification.push(ClassificationEntry {
            image: name,
            binary: outcome.binary,
            detail: outcome.detail,
        });
    }

    let binary_groups: Vec<(String, &pansharp_core::classify::ConfusionMatrix)> =
        classification.iter().map(|e| (e.image.clone(), &e.binary.confusion)).collect();
    let binary_table = binary_confusion_table(&binary_groups)?;
    println!("\nImpervious vs. non-impervious (held-out half)");
    print!("{binary_table}");

    let detail_groups: Vec<(String, &pansharp_core::classify::ConfusionMatrix)> = ["UNB", "PAN"]
        .iter()
        .filter_map(|want| {
            classification
                .iter()
                .find(|e| e.image == *want)
                .map(|e| (e.image.clone(), &e.detail.confusion))
        })
        .collect();
    let detail_table = detail_confusion_table(&detail_groups)?;
    println!("\nSix-class detail (held-out half)");
    print!("{detail_table}");

    timings.insert("total".to_string(), total_start.elapsed().as_secs_f64());

    let report = BenchmarkReport {
        ratio,
        unb_weights: w.weights,
        unb_residual_rms: w.residual_rms,
        quality,
        classification,
        timings_s: timings,
    };
    let report_path = args.out_dir.join("benchmark.json");
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    fs::write(&report_path, text)
        .with_context(|| format!("writing report {}", report_path.display()))?;

    let tables_path = args.out_dir.join("tables.txt");
    fs::write(&tables_path, format!("{quality_table}\n{binary_table}\n{detail_table}"))
        .with_context(|| format!("writing tables {}", tables_path.display()))?;

    manifest.input("samples", &sample_input);
    manifest.params = serde_json::json!({
        "kernel": args.kernel.name(),
        "seed": args.seed,
        "folds": args.folds,
        "ratio": ratio,
        "samples": sample_source,
        "sample_count": samples.len(),
    });
    manifest.output("report", &report_path).output("tables", &tables_path);
    manifest.save(&args.out_dir.join("manifest.json"))?;

    info!("benchmark written to {}", args.out_dir.display());
    Ok(())
}
