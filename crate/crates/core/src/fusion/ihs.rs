//! Generalised IHS fusion: additive injection of the difference between the
//! matched panchromatic band and the band-mean intensity.

use crate::error::Result;
use crate::raster::{band_stats, histogram_match, RasterImage};

use super::{check_same_grid, mean_intensity};

/// The injection step shared with tests: `F_k = MS_k + (P - I)` per pixel,
/// clamped to [0, 1].
pub fn gihs_inject(ms_up: &RasterImage, pan_matched: &[f64], intensity: &[f64]) -> RasterImage {
    let n = ms_up.pixel_count();
    debug_assert_eq!(pan_matched.len(), n);
    debug_assert_eq!(intensity.len(), n);
    let mut planes = Vec::with_capacity(ms_up.bands());
    for b in 0..ms_up.bands() {
        let band = ms_up.band(b);
        planes.push(
            (0..n)
                .map(|i| (band[i] + (pan_matched[i] - intensity[i])).clamp(0.0, 1.0))
                .collect::<Vec<f64>>(),
        );
    }
    RasterImage::from_bands(ms_up.width(), ms_up.height(), ms_up.pixel_size_m(), planes)
        .expect("injection preserves the grid")
}

/// Generalised IHS fusion on an already-upsampled multispectral raster.
///
/// The intensity is the per-pixel mean of the bands; the panchromatic band is
/// histogram-matched to the intensity's statistics before injection.
pub fn ihs_fuse(ms_up: &RasterImage, pan: &RasterImage) -> Result<RasterImage> {
    check_same_grid(ms_up, pan)?;
    let intensity = mean_intensity(ms_up);
    let target = band_stats(&intensity)?;
    let matched = histogram_match(pan.band(0), &target)?;
    Ok(gihs_inject(ms_up, &matched, &intensity))
}
