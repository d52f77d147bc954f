//! Additive wavelet fusion: à trous detail planes of the matched
//! panchromatic band are added to every upsampled multispectral band.

use crate::error::Result;
use crate::raster::{band_stats, histogram_match, RasterImage};

use super::atrous::atrous_decompose;
use super::{check_same_grid, mean_intensity};

/// Decomposition depth for a resolution ratio: one level per doubling,
/// so ratio 4 decomposes 2 levels. Non-power-of-two ratios round to the
/// nearest level count (at least 1).
pub fn wavelet_levels_for_ratio(ratio: usize) -> usize {
    ((ratio.max(2) as f64).log2().round() as usize).max(1)
}

/// Additive wavelet fusion on an already-upsampled multispectral raster:
/// the panchromatic band is matched to the band-mean intensity, decomposed
/// `levels` deep, and the summed detail planes are added to every band.
pub fn wavelet_fuse(ms_up: &RasterImage, pan: &RasterImage, levels: usize) -> Result<RasterImage> {
    check_same_grid(ms_up, pan)?;
    let intensity = mean_intensity(ms_up);
    let target = band_stats(&intensity)?;
    let matched = histogram_match(pan.band(0), &target)?;
    let stack = atrous_decompose(&matched, pan.width(), pan.height(), levels)?;
    let detail = stack.detail_sum();
    let n = ms_up.pixel_count();
    let mut planes = Vec::with_capacity(ms_up.bands());
    for b in 0..ms_up.bands() {
        let band = ms_up.band(b);
        planes.push(
            (0..n)
                .map(|i| (band[i] + detail[i]).clamp(0.0, 1.0))
                .collect::<Vec<f64>>(),
        );
    }
    RasterImage::from_bands(ms_up.width(), ms_up.height(), ms_up.pixel_size_m(), planes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::band_stats;
    use crate::resample::{degrade, upsample, ResampleKernel};
    use approx::assert_abs_diff_eq;

    #[test]
    fn level_count_follows_resolution_ratio() {
        assert_eq!(wavelet_levels_for_ratio(2), 1);
        assert_eq!(wavelet_levels_for_ratio(4), 2);
        assert_eq!(wavelet_levels_for_ratio(8), 3);
    }

    #[test]
    fn constant_inputs_pass_through() {
        // A constant panchromatic band has zero detail at every level, so
        // fusion returns the (constant) upsampled multispectral input.
        let ms_up = RasterImage::filled(8, 8, 4, 2.5, 0.45).unwrap();
        let pan = RasterImage::filled(8, 8, 1, 2.5, 0.45).unwrap();
        let fused = wavelet_fuse(&ms_up, &pan, 2).unwrap();
        for (a, b) in fused.data().iter().zip(ms_up.data()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn injected_detail_is_shared_across_bands() {
        let mut planes = Vec::new();
        for b in 0..4 {
            planes.push(
                (0..64)
                    .map(|i| 0.3 + 0.02 * ((i + b * 3) % 6) as f64)
                    .collect::<Vec<f64>>(),
            );
        }
        let ms_up = RasterImage::from_bands(8, 8, 2.5, planes).unwrap();
        let pan_vals: Vec<f64> = (0..64).map(|i| 0.3 + 0.05 * ((i * 5) % 7) as f64).collect();
        let pan = RasterImage::new(8, 8, 1, 2.5, pan_vals).unwrap();
        let fused = wavelet_fuse(&ms_up, &pan, 2).unwrap();
        // Away from the clamp, F_k - MS_k is the same plane for every k.
        let d0: Vec<f64> = fused
            .band(0)
            .iter()
            .zip(ms_up.band(0))
            .map(|(f, m)| f - m)
            .collect();
        for b in 1..4 {
            for (i, (f, m)) in fused.band(b).iter().zip(ms_up.band(b)).enumerate() {
                assert_abs_diff_eq!(f - m, d0[i], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn degraded_fusion_stays_close_to_the_low_resolution_input() {
        // Smooth scene: bilinear enlargement of a tiny random grid.
        let vals: Vec<f64> = (0..64)
            .map(|i| 0.3 + 0.4 * (((i * 2654435761usize) % 1000) as f64 / 1000.0))
            .collect();
        let seedling = RasterImage::new(8, 8, 1, 40.0, vals).unwrap();
        let smooth = upsample(&seedling, 8, ResampleKernel::Bilinear).unwrap();
        let ms = degrade(&smooth, 4).unwrap();
        let ms_up = upsample(&ms, 4, ResampleKernel::Bicubic).unwrap();
        let ms_up = RasterImage::from_bands(
            64,
            64,
            ms_up.pixel_size_m(),
            vec![ms_up.band(0).to_vec(); 4],
        )
        .unwrap();
        let pan = RasterImage::new(64, 64, 1, smooth.pixel_size_m(), smooth.band(0).to_vec())
            .unwrap();
        let fused = wavelet_fuse(&ms_up, &pan, 2).unwrap();
        let back = degrade(&fused, 4).unwrap();
        for b in 0..4 {
            let mean_back = band_stats(back.band(b)).unwrap().mean;
            let mean_ms = band_stats(ms.band(0)).unwrap().mean;
            assert!(
                (mean_back - mean_ms).abs() <= 1e-3,
                "band {b}: |{mean_back} - {mean_ms}| > 1e-3"
            );
        }
    }
}
