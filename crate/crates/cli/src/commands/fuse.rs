//! `pansharp fuse` — sharpen a multispectral raster with a panchromatic one.

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;
use log::info;
use pansharp_core::fusion::{
    fuse, resolution_ratio, unb_fuse, unb_weights, wavelet_fuse, wavelet_levels_for_ratio,
    FusionMethod,
};
use pansharp_core::io::{load_raster, save_raster};
use pansharp_core::resample::upsample;
use pansharp_core::ResampleKernel;

use crate::manifest::RunManifest;

#[derive(Debug, Args)]
pub struct FuseArgs {
    /// Low-resolution 4-band multispectral raster
    #[arg(long)]
    pub ms: PathBuf,

    /// High-resolution panchromatic raster
    #[arg(long)]
    pub pan: PathBuf,

    /// Fusion method: ihs, pca, gs, wavelet, or unb
    #[arg(long)]
    pub method: FusionMethod,

    /// Interpolation kernel for the multispectral upsampling
    #[arg(long, default_value = "bicubic")]
    pub kernel: ResampleKernel,

    /// Wavelet decomposition depth (wavelet method only; defaults to log2 of the ratio)
    #[arg(long)]
    pub levels: Option<usize>,

    /// Path for the fused raster
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &FuseArgs) -> Result<()> {
    if args.levels.is_some() && args.method != FusionMethod::Wavelet {
        bail!(
            "--levels only applies to the wavelet method, not {}",
            args.method
        );
    }

    let ms = load_raster(&args.ms)?;
    let pan = load_raster(&args.pan)?;
    let ratio = resolution_ratio(&ms, &pan)?;

    let mut params = serde_json::json!({
        "method": args.method.name(),
        "kernel": args.kernel.name(),
        "ratio": ratio,
    });
    let fused = match args.method {
        FusionMethod::Wavelet => {
            let levels = args.levels.unwrap_or_else(|| wavelet_levels_for_ratio(ratio));
            params["levels"] = serde_json::json!(levels);
            let ms_up = upsample(&ms, ratio, args.kernel)?;
            wavelet_fuse(&ms_up, &pan, levels)?
        }
        FusionMethod::Unb => {
            let w = unb_weights(&ms, &pan)?;
            info!(
                "fitted band weights [{:.6}, {:.6}, {:.6}, {:.6}] (residual rms {:.3e})",
                w.weights[0], w.weights[1], w.weights[2], w.weights[3], w.residual_rms
            );
            params["unb_weights"] = serde_json::json!(w.weights);
            params["unb_residual_rms"] = serde_json::json!(w.residual_rms);
            let ms_up = upsample(&ms, ratio, args.kernel)?;
            unb_fuse(&ms_up, &pan, &w)?
        }
        method => fuse(&ms, &pan, method, args.kernel)?,
    };

    save_raster(&fused, &args.out)?;

    let mut manifest = RunManifest::new("fuse");
    manifest.input("ms", &args.ms).input("pan", &args.pan);
    manifest.params = params;
    manifest.output("fused", &args.out);
    let manifest_path = args.out.with_file_name(format!(
        "{}.manifest.json",
        args.out.file_name().map(|n| n.to_string_lossy()).unwrap_or_default()
    ));
    manifest.save(&manifest_path)?;

    info!("{} fusion written to {}", args.method, args.out.display());
    Ok(())
}
