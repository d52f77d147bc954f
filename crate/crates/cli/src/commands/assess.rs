//! `pansharp assess` — score fused rasters against a reference.
//!
//! The reference is brought onto the fused grid first (upsampled with the
//! chosen kernel when it is coarser), then every fused raster is scored and
//! the comparison table is printed to stdout. Rows are labeled with the
//! fused file stems.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use pansharp_core::fusion::resolution_ratio;
use pansharp_core::io::load_raster;
use pansharp_core::metrics::{assess, report_table, QualityReport};
use pansharp_core::resample::upsample;
use pansharp_core::{RasterImage, ResampleKernel};

use crate::manifest::RunManifest;

#[derive(Debug, Args)]
pub struct AssessArgs {
    /// Reference raster (original multispectral or known truth)
    #[arg(long)]
    pub ms: PathBuf,

    /// Fused raster to score; repeat for several products
    #[arg(long, required = true)]
    pub fused: Vec<PathBuf>,

    /// Interpolation kernel used when the reference must be upsampled
    #[arg(long, default_value = "bicubic")]
    pub kernel: ResampleKernel,

    /// Resolution ratio for the scale-aware scores; defaults to the
    /// geometric ratio between the reference and the first fused raster
    #[arg(long)]
    pub ratio: Option<usize>,

    /// Optional path for the full per-band report as JSON
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "fused".into())
}

pub fn run(args: &AssessArgs) -> Result<()> {
    let ms = load_raster(&args.ms)?;
    let first = load_raster(&args.fused[0])?;
    let geometric = if ms.width() == first.width() && ms.height() == first.height() {
        1
    } else {
        resolution_ratio(&ms, &first)?
    };
    let ratio = args.ratio.unwrap_or(geometric);
    if ratio == 0 {
        bail!("--ratio must be positive");
    }
    let h_over_l = 1.0 / ratio as f64;

    let reference: RasterImage = if geometric == 1 {
        ms
    } else {
        upsample(&ms, geometric, args.kernel)?
    };

    let mut reports: Vec<QualityReport> = Vec::with_capacity(args.fused.len());
    for (i, path) in args.fused.iter().enumerate() {
        let fused = if i == 0 { first.clone() } else { load_raster(path)? };
        let report = assess(&reference, &fused, h_over_l)
            .with_context(|| format!("assessing {}", path.display()))?;
        reports.push(report.with_method(stem(path)));
    }

    print!("{}", report_table(&reports));

    if let Some(out) = &args.out {
        let mut text = serde_json::to_string_pretty(&reports)?;
        text.push('\n');
        fs::write(out, text).with_context(|| format!("writing report {}", out.display()))?;

        let mut manifest = RunManifest::new("assess");
        manifest.input("ms", &args.ms);
        for path in &args.fused {
            manifest.input(&format!("fused:{}", stem(path)), path);
        }
        manifest.params = serde_json::json!({
            "kernel": args.kernel.name(),
            "ratio": ratio,
            "h_over_l": h_over_l,
        });
        manifest.output("report", out);
        let manifest_path = out.with_file_name(format!(
            "{}.manifest.json",
            out.file_name().map(|n| n.to_string_lossy()).unwrap_or_default()
        ));
        manifest.save(&manifest_path)?;
    }
    Ok(())
}
