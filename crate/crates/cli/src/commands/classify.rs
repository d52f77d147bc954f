//! `pansharp classify` — train and evaluate the impervious-surface
//! classifier on one raster.
//!
//! Samples are split half/half per class into train and test. With
//! `--two-step` the full protocol runs: a binary impervious/non-impervious
//! step followed by the six-class detail step, each with its own
//! hyperparameter search. Without it only the six-class step runs. The
//! detail model then labels every pixel of the raster.

use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use log::info;
use pansharp_core::classify::{
    binary_confusion_table, classify_image, detail_confusion_table, evaluate_step,
    extract_features, load_samples_csv, two_step_classify, LandCoverClass, StepReport,
    TwoStepConfig,
};
use pansharp_core::io::{load_raster, save_raster};

use crate::manifest::RunManifest;

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Raster whose bands are the classification features
    #[arg(long)]
    pub image: PathBuf,

    /// Ground-truth sample CSV (columns x,y,label)
    #[arg(long)]
    pub samples: PathBuf,

    /// Run the binary impervious step before the six-class step
    #[arg(long)]
    pub two_step: bool,

    /// Seed for the train/test split and the cross-validation folds
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Cross-validation folds for the hyperparameter search
    #[arg(long, default_value_t = 5)]
    pub folds: usize,

    /// Directory that receives models, reports, and the label map
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// What lands in `report.json`.
#[derive(serde::Serialize)]
struct ClassifyReport {
    binary: Option<StepReport>,
    detail: StepReport,
}

pub fn run(args: &ClassifyArgs) -> Result<()> {
    let image = load_raster(&args.image)?;
    let samples = load_samples_csv(&args.samples)?;
    let config = TwoStepConfig { folds: args.folds, seed: args.seed, ..TwoStepConfig::default() };

    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating output directory {}", args.out_dir.display()))?;

    let title = args
        .image
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "image".into());

    let mut tables = String::new();
    let (report, detail_model) = if args.two_step {
        let outcome = two_step_classify(&image, &samples, &config)?;
        info!(
            "binary step: C {} gamma {} accuracy {:.1}%",
            outcome.binary.c,
            outcome.binary.gamma,
            100.0 * outcome.binary.accuracy
        );
        info!(
            "detail step: C {} gamma {} accuracy {:.1}%",
            outcome.detail.c,
            outcome.detail.gamma,
            100.0 * outcome.detail.accuracy
        );
        tables.push_str(&binary_confusion_table(&[(title.clone(), &outcome.binary.confusion)])?);
        tables.push('\n');
        tables.push_str(&detail_confusion_table(&[(title.clone(), &outcome.detail.confusion)])?);
        outcome.binary_model.save(&args.out_dir.join("binary_model.json"))?;
        (
            ClassifyReport { binary: Some(outcome.binary), detail: outcome.detail },
            outcome.detail_model,
        )
    } else {
        let (train, test) = samples.split_half(args.seed);
        let train_features = extract_features(&image, &train.samples)?;
        let test_features = extract_features(&image, &test.samples)?;
        let train_labels: Vec<usize> =
            train.samples.iter().map(|s| s.label.code() as usize).collect();
        let test_labels: Vec<usize> =
            test.samples.iter().map(|s| s.label.code() as usize).collect();
        let class_names: Vec<String> =
            LandCoverClass::ALL.iter().map(|c| c.mnemonic().into()).collect();
        let (detail, model) = evaluate_step(
            &train_features,
            &train_labels,
            &test_features,
            &test_labels,
            class_names,
            &config,
        )?;
        info!(
            "six-class step: C {} gamma {} accuracy {:.1}%",
            detail.c,
            detail.gamma,
            100.0 * detail.accuracy
        );
        tables.push_str(&detail_confusion_table(&[(title.clone(), &detail.confusion)])?);
        (ClassifyReport { binary: None, detail }, model)
    };

    print!("{tables}");

    let report_path = args.out_dir.join("report.json");
    let model_path = args.out_dir.join("model.json");
    let tables_path = args.out_dir.join("confusion.txt");
    let map_path = args.out_dir.join("label_map.bin");

    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    fs::write(&report_path, text)
        .with_context(|| format!("writing report {}", report_path.display()))?;
    detail_model.save(&model_path)?;
    fs::write(&tables_path, &tables)
        .with_context(|| format!("writing tables {}", tables_path.display()))?;

    info!("labeling every pixel of {title}");
    let label_map = classify_image(&detail_model, &image)?;
    save_raster(&label_map, &map_path)?;

    let mut manifest = RunManifest::new("classify");
    manifest.input("image", &args.image).input("samples", &args.samples);
    manifest.params = serde_json::json!({
        "two_step": args.two_step,
        "seed": args.seed,
        "folds": args.folds,
        "c_grid": config.c_grid,
        "gamma_grid": config.gamma_grid,
    });
    manifest
        .output("report", &report_path)
        .output("model", &model_path)
        .output("tables", &tables_path)
        .output("label_map", &map_path);
    if args.two_step {
        manifest.output("binary_model", &args.out_dir.join("binary_model.json"));
    }
    manifest.save(&args.out_dir.join("manifest.json"))?;

    Ok(())
}
