//! UNB-style fusion: a non-negative least-squares fit of the degraded
//! panchromatic band on the multispectral bands defines a synthetic intensity,
//! and detail is injected by the panchromatic-to-intensity ratio.

use log::warn;

use crate::error::{Error, Result};
use crate::math::KahanSum;
use crate::raster::{band_stats, histogram_match, RasterImage};
use crate::resample::degrade;

use super::nnls::nnls;
use super::{check_same_grid, resolution_ratio};

/// Floor applied to the synthetic intensity in the ratio to keep the division
/// well-defined.
pub const INTENSITY_EPS: f64 = 1e-6;

/// Band weights fitted by non-negative least squares, plus the root-mean-
/// square residual of the fit (per low-resolution pixel).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnbWeights {
    pub weights: [f64; 4],
    pub residual_rms: f64,
}

/// Fits `w = argmin_{w >= 0} || degrade(pan, r) - sum_k w_k MS_k ||^2` on the
/// low-resolution grid. Errors when the multispectral input is all zero or
/// when no weight comes out positive (the synthetic intensity would vanish).
pub fn unb_weights(ms: &RasterImage, pan: &RasterImage) -> Result<UnbWeights> {
    if ms.bands() != 4 {
        return Err(Error::InvalidArgument(format!(
            "UNB weights expect 4 bands, got {}",
            ms.bands()
        )));
    }
    let ratio = resolution_ratio(ms, pan)?;
    let pan_low = degrade(pan, ratio)?;
    let target = pan_low.band(0);
    let bands: Vec<&[f64]> = (0..4).map(|b| ms.band(b)).collect();
    if bands
        .iter()
        .all(|band| band.iter().all(|&v| v == 0.0))
    {
        return Err(Error::Degenerate(
            "multispectral input is identically zero".into(),
        ));
    }

    // Normal equations over the low-resolution pixels.
    let mut gram = vec![vec![0.0; 4]; 4];
    let mut rhs = vec![0.0; 4];
    for i in 0..4 {
        for j in i..4 {
            let mut acc = KahanSum::new();
            for (&a, &b) in bands[i].iter().zip(bands[j]) {
                acc.add(a * b);
            }
            gram[i][j] = acc.value();
            gram[j][i] = gram[i][j];
        }
        let mut acc = KahanSum::new();
        for (&a, &t) in bands[i].iter().zip(target) {
            acc.add(a * t);
        }
        rhs[i] = acc.value();
    }
    let w = nnls(&gram, &rhs, 128)?;
    if w.iter().all(|&v| v == 0.0) {
        return Err(Error::Degenerate(
            "non-negative fit produced no positive weight".into(),
        ));
    }

    let mut residual = KahanSum::new();
    for (i, &t) in target.iter().enumerate() {
        let model: f64 = (0..4).map(|k| w[k] * bands[k][i]).sum();
        let r = t - model;
        residual.add(r * r);
    }
    let residual_rms = (residual.value() / target.len() as f64).max(0.0).sqrt();
    Ok(UnbWeights {
        weights: [w[0], w[1], w[2], w[3]],
        residual_rms,
    })
}

/// The ratio injection step shared with tests:
/// `F_k = MS_k * P / max(I, eps)` per pixel, clamped to [0, 1].
pub fn ratio_inject(
    ms_up: &RasterImage,
    pan_matched: &[f64],
    intensity: &[f64],
    eps: f64,
) -> RasterImage {
    let n = ms_up.pixel_count();
    debug_assert_eq!(pan_matched.len(), n);
    debug_assert_eq!(intensity.len(), n);
    let mut planes = Vec::with_capacity(ms_up.bands());
    for b in 0..ms_up.bands() {
        let band = ms_up.band(b);
        planes.push(
            (0..n)
                .map(|i| (band[i] * pan_matched[i] / intensity[i].max(eps)).clamp(0.0, 1.0))
                .collect::<Vec<f64>>(),
        );
    }
    RasterImage::from_bands(ms_up.width(), ms_up.height(), ms_up.pixel_size_m(), planes)
        .expect("injection preserves the grid")
}

/// UNB fusion on an already-upsampled multispectral raster with precomputed
/// weights: synthetic intensity `I = sum_k w_k MS_k`, panchromatic band
/// matched to `I`'s statistics, ratio injection, clamp.
///
/// A synthetic intensity that is non-positive over more than 1% of pixels
/// logs a degenerate-intensity warning but still produces output.
pub fn unb_fuse(ms_up: &RasterImage, pan: &RasterImage, w: &UnbWeights) -> Result<RasterImage> {
    check_same_grid(ms_up, pan)?;
    if ms_up.bands() != 4 {
        return Err(Error::InvalidArgument(format!(
            "UNB fusion expects 4 bands, got {}",
            ms_up.bands()
        )));
    }
    if w.weights.iter().any(|&v| !(v.is_finite() && v >= 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "UNB weights must be finite and non-negative, got {:?}",
            w.weights
        )));
    }
    let n = ms_up.pixel_count();
    let mut intensity = vec![0.0; n];
    for (k, &wk) in w.weights.iter().enumerate() {
        if wk == 0.0 {
            continue;
        }
        for (o, &v) in intensity.iter_mut().zip(ms_up.band(k)) {
            *o += wk * v;
        }
    }
    let nonpositive = intensity.iter().filter(|&&v| v <= 0.0).count();
    if nonpositive * 100 > n {
        warn!(
            "synthetic intensity is non-positive over {nonpositive}/{n} pixels; \
             ratio injection will be dominated by the epsilon floor"
        );
    }
    let target = band_stats(&intensity)?;
    let matched = histogram_match(pan.band(0), &target)?;
    Ok(ratio_inject(ms_up, &matched, &intensity, INTENSITY_EPS))
}
