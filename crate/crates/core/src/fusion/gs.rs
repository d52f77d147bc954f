//! Gram-Schmidt fusion: per-band covariance gains against a simulated
//! low-resolution panchromatic band.

use crate::error::{Error, Result};
use crate::math::KahanSum;
use crate::raster::{band_stats, histogram_match, RasterImage};

use super::{check_same_grid, mean_intensity};

/// Per-band injection gains `g_k = cov(MS_k, LP) / var(LP)` against the
/// simulated low-resolution panchromatic plane `LP` (the band mean). Returns
/// the gains together with the `LP` plane.
pub fn gs_gains(ms_up: &RasterImage) -> Result<(Vec<f64>, Vec<f64>)> {
    let lp = mean_intensity(ms_up);
    let lp_stats = band_stats(&lp)?;
    if lp_stats.variance == 0.0 {
        return Err(Error::Degenerate(
            "simulated low-resolution panchromatic band has zero variance".into(),
        ));
    }
    let n = ms_up.pixel_count() as f64;
    let mut gains = Vec::with_capacity(ms_up.bands());
    for b in 0..ms_up.bands() {
        let band = ms_up.band(b);
        let mean_b = band_stats(band)?.mean;
        let mut acc = KahanSum::new();
        for (&v, &l) in band.iter().zip(&lp) {
            acc.add((v - mean_b) * (l - lp_stats.mean));
        }
        let cov = acc.value() / n;
        gains.push(cov / lp_stats.variance);
    }
    Ok((gains, lp))
}

/// Gram-Schmidt fusion on an already-upsampled multispectral raster:
/// `F_k = MS_k + g_k * (P - LP)` with the panchromatic band matched to `LP`'s
/// statistics, clamped to [0, 1].
pub fn gs_fuse(ms_up: &RasterImage, pan: &RasterImage) -> Result<RasterImage> {
    check_same_grid(ms_up, pan)?;
    let (gains, lp) = gs_gains(ms_up)?;
    let lp_stats = band_stats(&lp)?;
    let matched = histogram_match(pan.band(0), &lp_stats)?;
    let n = ms_up.pixel_count();
    let mut planes = Vec::with_capacity(ms_up.bands());
    for (b, &gain) in gains.iter().enumerate() {
        let band = ms_up.band(b);
        planes.push(
            (0..n)
                .map(|i| (band[i] + gain * (matched[i] - lp[i])).clamp(0.0, 1.0))
                .collect::<Vec<f64>>(),
        );
    }
    RasterImage::from_bands(ms_up.width(), ms_up.height(), ms_up.pixel_size_m(), planes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::ihs_fuse;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gains_match_hand_computed_covariances() {
        // Band 1 swings twice as far as LP, bands 2-4 a third as far:
        // LP = mean = [0, 1], cov(B1, LP) = 0.5, var(LP) = 0.25 -> g_1 = 2.
        let planes = vec![
            vec![0.0, 2.0],
            vec![0.0, 2.0 / 3.0],
            vec![0.0, 2.0 / 3.0],
            vec![0.0, 2.0 / 3.0],
        ];
        let ms = RasterImage::from_bands(2, 1, 2.5, planes).unwrap();
        let (gains, lp) = gs_gains(&ms).unwrap();
        assert_abs_diff_eq!(lp[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(lp[1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(gains[0], 2.0, epsilon = 1e-12);
        for &g in &gains[1..] {
            assert_abs_diff_eq!(g, 2.0 / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn band_with_doubled_gain_receives_doubled_injection() {
        // Band 1 swings +-0.2 around 0.3, bands 2-4 swing +-0.2/3, so LP
        // swings +-0.1 and the gains are 2 and 2/3 as in the test above.
        let planes = vec![
            vec![0.1, 0.5, 0.3],
            vec![0.3 - 0.2 / 3.0, 0.3 + 0.2 / 3.0, 0.3],
            vec![0.3 - 0.2 / 3.0, 0.3 + 0.2 / 3.0, 0.3],
            vec![0.3 - 0.2 / 3.0, 0.3 + 0.2 / 3.0, 0.3],
        ];
        let ms = RasterImage::from_bands(3, 1, 2.5, planes).unwrap();
        let (gains, lp) = gs_gains(&ms).unwrap();
        assert_abs_diff_eq!(gains[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(gains[1], 2.0 / 3.0, epsilon = 1e-12);
        let pan = RasterImage::new(3, 1, 1, 2.5, vec![0.25, 0.45, 0.2]).unwrap();
        let fused = gs_fuse(&ms, &pan).unwrap();
        let matched = histogram_match(pan.band(0), &band_stats(&lp).unwrap()).unwrap();
        for i in 0..3 {
            let injected_b0 = fused.band(0)[i] - ms.band(0)[i];
            let injected_b1 = fused.band(1)[i] - ms.band(1)[i];
            assert_abs_diff_eq!(injected_b0, 2.0 * (matched[i] - lp[i]), epsilon = 1e-12);
            assert_abs_diff_eq!(injected_b0, 3.0 * injected_b1, epsilon = 1e-12);
        }
    }

    #[test]
    fn pan_equal_to_lp_returns_upsampled_ms() {
        let mut planes = Vec::new();
        for b in 0..4 {
            planes.push(
                (0..25)
                    .map(|i| 0.2 + 0.07 * ((i + b) % 5) as f64)
                    .collect::<Vec<f64>>(),
            );
        }
        let ms = RasterImage::from_bands(5, 5, 2.5, planes).unwrap();
        let lp = mean_intensity(&ms);
        let pan = RasterImage::new(5, 5, 1, 2.5, lp).unwrap();
        let fused = gs_fuse(&ms, &pan).unwrap();
        for (a, b) in fused.data().iter().zip(ms.data()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn identical_bands_reduce_to_gihs() {
        let plane: Vec<f64> = (0..16).map(|i| 0.2 + 0.03 * (i % 4) as f64).collect();
        let ms = RasterImage::from_bands(4, 4, 2.5, vec![plane; 4]).unwrap();
        let pan_vals: Vec<f64> = (0..16).map(|i| 0.5 + 0.02 * ((i * 3) % 5) as f64).collect();
        let pan = RasterImage::new(4, 4, 1, 2.5, pan_vals).unwrap();
        let via_gs = gs_fuse(&ms, &pan).unwrap();
        let via_ihs = ihs_fuse(&ms, &pan).unwrap();
        for (a, b) in via_gs.data().iter().zip(via_ihs.data()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn constant_ms_is_degenerate() {
        let ms = RasterImage::filled(4, 4, 4, 2.5, 0.4).unwrap();
        let pan = RasterImage::filled(4, 4, 1, 2.5, 0.6).unwrap();
        assert!(matches!(gs_fuse(&ms, &pan), Err(Error::Degenerate(_))));
    }
}
