//! Pansharpening: five fusion methods behind one dispatcher.
//!
//! Every method takes a low-resolution multispectral raster and a
//! high-resolution panchromatic raster, upsamples the multispectral bands to
//! the panchromatic grid, injects spatial detail from a histogram-matched
//! panchromatic band, and clamps the result to [0, 1] as its final step.

mod atrous;
mod gs;
mod ihs;
mod linalg;
mod nnls;
mod pca;
mod unb;
mod wavelet;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::raster::RasterImage;
use crate::resample::{upsample, ResampleKernel};

pub use atrous::{atrous_decompose, AtrousStack};
pub use gs::{gs_fuse, gs_gains};
pub use ihs::{gihs_inject, ihs_fuse};
pub use nnls::nnls;
pub use pca::{pca_basis, pca_forward, pca_fuse, pca_inverse, PcaBasis};
pub use unb::{ratio_inject, unb_fuse, unb_weights, UnbWeights, INTENSITY_EPS};
pub use wavelet::{wavelet_fuse, wavelet_levels_for_ratio};

/// The available fusion methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FusionMethod {
    Ihs,
    Pca,
    Gs,
    Wavelet,
    Unb,
}

impl FusionMethod {
    pub const ALL: [FusionMethod; 5] = [
        FusionMethod::Ihs,
        FusionMethod::Pca,
        FusionMethod::Gs,
        FusionMethod::Wavelet,
        FusionMethod::Unb,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FusionMethod::Ihs => "ihs",
            FusionMethod::Pca => "pca",
            FusionMethod::Gs => "gs",
            FusionMethod::Wavelet => "wavelet",
            FusionMethod::Unb => "unb",
        }
    }
}

impl fmt::Display for FusionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FusionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ihs" => Ok(FusionMethod::Ihs),
            "pca" => Ok(FusionMethod::Pca),
            "gs" => Ok(FusionMethod::Gs),
            "wavelet" => Ok(FusionMethod::Wavelet),
            "unb" => Ok(FusionMethod::Unb),
            other => Err(Error::Parse(format!(
                "unknown fusion method `{other}` (expected one of: ihs, pca, gs, wavelet, unb)"
            ))),
        }
    }
}

/// Per-pixel mean of all bands: the intensity plane used by the IHS, GS and
/// wavelet methods (and as the GS simulated low-resolution panchromatic band).
pub(crate) fn mean_intensity(ms: &RasterImage) -> Vec<f64> {
    let n = ms.pixel_count();
    let norm = 1.0 / ms.bands() as f64;
    let mut out = vec![0.0; n];
    for b in 0..ms.bands() {
        let plane = ms.band(b);
        for (o, &v) in out.iter_mut().zip(plane) {
            *o += v;
        }
    }
    for o in &mut out {
        *o *= norm;
    }
    out
}

/// Integer resolution ratio between a low-resolution multispectral raster and
/// a high-resolution panchromatic raster. Both axes must share one integer
/// ratio, and the declared pixel sizes must agree with it.
pub fn resolution_ratio(ms: &RasterImage, pan: &RasterImage) -> Result<usize> {
    if pan.width() % ms.width() != 0 || pan.height() % ms.height() != 0 {
        return Err(Error::DimensionMismatch(format!(
            "panchromatic {}x{} is not an integer multiple of multispectral {}x{}",
            pan.width(),
            pan.height(),
            ms.width(),
            ms.height()
        )));
    }
    let rx = pan.width() / ms.width();
    let ry = pan.height() / ms.height();
    if rx != ry || rx < 2 {
        return Err(Error::DimensionMismatch(format!(
            "resolution ratio must be one integer >= 2 on both axes, got {rx}x{ry}"
        )));
    }
    let size_ratio = ms.pixel_size_m() / pan.pixel_size_m();
    if (size_ratio - rx as f64).abs() > 1e-6 * rx as f64 {
        return Err(Error::DimensionMismatch(format!(
            "pixel sizes {} m / {} m disagree with grid ratio {rx}",
            ms.pixel_size_m(),
            pan.pixel_size_m()
        )));
    }
    Ok(rx)
}

fn check_pan(pan: &RasterImage) -> Result<()> {
    if pan.bands() != 1 {
        return Err(Error::InvalidArgument(format!(
            "panchromatic input must have exactly 1 band, got {}",
            pan.bands()
        )));
    }
    Ok(())
}

/// Fuses a 4-band multispectral raster with a panchromatic raster using the
/// selected method. The multispectral bands are upsampled to the panchromatic
/// grid with `kernel` first; the output has the panchromatic geometry, four
/// bands, and samples clamped to [0, 1].
pub fn fuse(
    ms: &RasterImage,
    pan: &RasterImage,
    method: FusionMethod,
    kernel: ResampleKernel,
) -> Result<RasterImage> {
    if ms.bands() != 4 {
        return Err(Error::InvalidArgument(format!(
            "fusion expects a 4-band multispectral input, got {} bands",
            ms.bands()
        )));
    }
    check_pan(pan)?;
    let ratio = resolution_ratio(ms, pan)?;
    let ms_up = upsample(ms, ratio, kernel)?;
    match method {
        FusionMethod::Ihs => ihs_fuse(&ms_up, pan),
        FusionMethod::Pca => pca_fuse(&ms_up, pan),
        FusionMethod::Gs => gs_fuse(&ms_up, pan),
        FusionMethod::Wavelet => wavelet_fuse(&ms_up, pan, wavelet_levels_for_ratio(ratio)),
        FusionMethod::Unb => {
            let weights = unb_weights(ms, pan)?;
            unb_fuse(&ms_up, pan, &weights)
        }
    }
}

/// Shared entry validation for the per-method fuse functions: the upsampled
/// multispectral raster and the panchromatic raster must share a grid.
pub(crate) fn check_same_grid(ms_up: &RasterImage, pan: &RasterImage) -> Result<()> {
    check_pan(pan)?;
    if ms_up.width() != pan.width() || ms_up.height() != pan.height() {
        return Err(Error::DimensionMismatch(format!(
            "expected multispectral and panchromatic grids to match, got {}x{} vs {}x{}",
            ms_up.width(),
            ms_up.height(),
            pan.width(),
            pan.height()
        )));
    }
    Ok(())
}
