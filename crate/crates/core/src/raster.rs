//! In-memory raster container and per-band statistics.
//!
//! Samples are stored band-sequential (full plane of band 0, then band 1, ...)
//! and row-major within each band. Values are kept as `f64` in memory; the
//! on-disk payload is 32-bit float (see [`crate::io`]).

use crate::error::{Error, Result};
use crate::math::KahanSum;

/// A small in-memory raster: `width x height` pixels by `bands` planes plus a
/// ground pixel size in metres. Every sample is finite by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    bands: usize,
    pixel_size_m: f64,
    data: Vec<f64>,
}

impl RasterImage {
    /// Wraps band-sequential samples, validating dimensions, pixel size and
    /// finiteness.
    pub fn new(
        width: usize,
        height: usize,
        bands: usize,
        pixel_size_m: f64,
        data: Vec<f64>,
    ) -> Result<Self> {
        if width == 0 || height == 0 || bands == 0 {
            return Err(Error::InvalidRaster(format!(
                "dimensions must be positive, got {width}x{height}x{bands}"
            )));
        }
        if !(pixel_size_m.is_finite() && pixel_size_m > 0.0) {
            return Err(Error::InvalidRaster(format!(
                "pixel size must be positive and finite, got {pixel_size_m}"
            )));
        }
        let expected = width * height * bands;
        if data.len() != expected {
            return Err(Error::InvalidRaster(format!(
                "expected {expected} samples for {width}x{height}x{bands}, got {}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidRaster(format!(
                "non-finite sample at flat index {pos}"
            )));
        }
        Ok(Self {
            width,
            height,
            bands,
            pixel_size_m,
            data,
        })
    }

    /// A raster filled with one value.
    pub fn filled(
        width: usize,
        height: usize,
        bands: usize,
        pixel_size_m: f64,
        value: f64,
    ) -> Result<Self> {
        Self::new(
            width,
            height,
            bands,
            pixel_size_m,
            vec![value; width * height * bands],
        )
    }

    /// Assembles a raster from per-band planes (each `width * height` long).
    pub fn from_bands(
        width: usize,
        height: usize,
        pixel_size_m: f64,
        planes: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let bands = planes.len();
        let mut data = Vec::with_capacity(width * height * bands);
        for (k, plane) in planes.into_iter().enumerate() {
            if plane.len() != width * height {
                return Err(Error::InvalidRaster(format!(
                    "band {k} has {} samples, expected {}",
                    plane.len(),
                    width * height
                )));
            }
            data.extend_from_slice(&plane);
        }
        Self::new(width, height, bands, pixel_size_m, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn pixel_size_m(&self) -> f64 {
        self.pixel_size_m
    }

    /// Pixels per band.
    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    /// Full band-sequential sample buffer.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// One band plane, row-major.
    pub fn band(&self, band: usize) -> &[f64] {
        assert!(band < self.bands, "band {band} out of {}", self.bands);
        let n = self.pixel_count();
        &self.data[band * n..(band + 1) * n]
    }

    pub fn band_mut(&mut self, band: usize) -> &mut [f64] {
        assert!(band < self.bands, "band {band} out of {}", self.bands);
        let n = self.pixel_count();
        &mut self.data[band * n..(band + 1) * n]
    }

    #[inline]
    pub fn sample(&self, x: usize, y: usize, band: usize) -> f64 {
        debug_assert!(x < self.width && y < self.height && band < self.bands);
        self.data[band * self.pixel_count() + y * self.width + x]
    }

    #[inline]
    pub fn set_sample(&mut self, x: usize, y: usize, band: usize, value: f64) {
        debug_assert!(x < self.width && y < self.height && band < self.bands);
        let n = self.pixel_count();
        self.data[band * n + y * self.width + x] = value;
    }

    /// Clamps every sample into [0, 1]. Fusion methods apply this as their
    /// final step.
    pub fn clamp_unit(&mut self) {
        for v in &mut self.data {
            *v = v.clamp(0.0, 1.0);
        }
    }

    /// Returns a copy with a different pixel size (dimensions untouched).
    pub fn with_pixel_size(mut self, pixel_size_m: f64) -> Result<Self> {
        if !(pixel_size_m.is_finite() && pixel_size_m > 0.0) {
            return Err(Error::InvalidRaster(format!(
                "pixel size must be positive and finite, got {pixel_size_m}"
            )));
        }
        self.pixel_size_m = pixel_size_m;
        Ok(self)
    }
}

/// First-order statistics of one band. `variance` uses the population
/// divisor `n`, as does every statistic in this crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandStats {
    pub mean: f64,
    pub variance: f64,
    pub min: f64,
    pub max: f64,
}

impl BandStats {
    pub fn std(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Mean, population variance, min and max of a sample slice. Two-pass with
/// compensated sums, so results hold to ~1e-14 even on large planes.
pub fn band_stats(samples: &[f64]) -> Result<BandStats> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("band_stats of empty input".into()));
    }
    let n = samples.len() as f64;
    let mut sum = KahanSum::new();
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &v in samples {
        sum.add(v);
        min = min.min(v);
        max = max.max(v);
    }
    let mean = sum.value() / n;
    let mut sq = KahanSum::new();
    for &v in samples {
        let d = v - mean;
        sq.add(d * d);
    }
    // The two-pass estimator can produce a tiny negative residue for constant
    // input; clamp it away so callers can rely on variance >= 0.
    let variance = (sq.value() / n).max(0.0);
    Ok(BandStats {
        mean,
        variance,
        min,
        max,
    })
}

/// Rescales `src` so its mean and standard deviation equal the target's:
/// `out = (src - mean_src) * (std_target / std_src) + mean_target`.
///
/// A zero-variance source is only representable when the target variance is
/// also zero (the output is then constant at the target mean); otherwise it is
/// a degenerate-source error.
pub fn histogram_match(src: &[f64], target: &BandStats) -> Result<Vec<f64>> {
    let stats = band_stats(src)?;
    if stats.variance == 0.0 {
        if target.variance == 0.0 {
            return Ok(vec![target.mean; src.len()]);
        }
        return Err(Error::Degenerate(
            "histogram_match: source has zero variance but target does not".into(),
        ));
    }
    let scale = target.std() / stats.std();
    Ok(src
        .iter()
        .map(|&v| (v - stats.mean) * scale + target.mean)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn new_rejects_bad_shapes() {
        assert!(RasterImage::new(0, 2, 1, 1.0, vec![]).is_err());
        assert!(RasterImage::new(2, 2, 1, 0.0, vec![0.0; 4]).is_err());
        assert!(RasterImage::new(2, 2, 1, 1.0, vec![0.0; 3]).is_err());
        assert!(RasterImage::new(2, 2, 1, 1.0, vec![0.0, 1.0, f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn band_views_are_band_sequential() {
        let img = RasterImage::new(2, 1, 2, 1.0, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(img.band(0), &[1.0, 2.0]);
        assert_eq!(img.band(1), &[3.0, 4.0]);
        assert_eq!(img.sample(1, 0, 1), 4.0);
    }

    #[test]
    fn stats_constant_band() {
        let s = band_stats(&[5.0, 5.0, 5.0]).unwrap();
        assert_eq!(s.mean, 5.0);
        assert_eq!(s.variance, 0.0);
        assert_eq!(s.min, 5.0);
        assert_eq!(s.max, 5.0);
    }

    #[test]
    fn stats_simple_band() {
        let s = band_stats(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_abs_diff_eq!(s.mean, 2.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.variance, 1.25, epsilon = 1e-15);
        assert_eq!((s.min, s.max), (1.0, 4.0));
    }

    #[test]
    fn stats_two_point_band() {
        let s = band_stats(&[0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(s.mean, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.variance, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn stats_empty_is_error() {
        assert!(band_stats(&[]).is_err());
    }

    #[test]
    fn histogram_match_to_own_stats_is_identity() {
        let src = [0.1, 0.5, 0.9, 0.3];
        let target = band_stats(&src).unwrap();
        let out = histogram_match(&src, &target).unwrap();
        for (a, b) in src.iter().zip(&out) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn histogram_match_scales_and_shifts() {
        // src mean 1, std 1; target mean 10, std 2 -> [8, 12].
        let out = histogram_match(&[0.0, 2.0], &BandStats {
            mean: 10.0,
            variance: 4.0,
            min: 0.0,
            max: 0.0,
        })
        .unwrap();
        assert_abs_diff_eq!(out[0], 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out[1], 12.0, epsilon = 1e-12);
    }

    #[test]
    fn histogram_match_constant_source_to_constant_target() {
        let out = histogram_match(&[3.0, 3.0], &BandStats {
            mean: 7.0,
            variance: 0.0,
            min: 7.0,
            max: 7.0,
        })
        .unwrap();
        assert_eq!(out, vec![7.0, 7.0]);
    }

    #[test]
    fn histogram_match_constant_source_to_spread_target_is_error() {
        let err = histogram_match(&[3.0, 3.0], &BandStats {
            mean: 0.0,
            variance: 1.0,
            min: 0.0,
            max: 0.0,
        });
        assert!(err.is_err());
    }

    #[test]
    fn matched_output_hits_target_stats() {
        let src: Vec<f64> = (0..257).map(|i| (i as f64 * 0.37).sin() * 0.4 + 0.5).collect();
        let target = BandStats {
            mean: 0.25,
            variance: 0.01,
            min: 0.0,
            max: 0.0,
        };
        let out = histogram_match(&src, &target).unwrap();
        let s = band_stats(&out).unwrap();
        assert_abs_diff_eq!(s.mean, 0.25, epsilon = 1e-9);
        assert_abs_diff_eq!(s.variance, 0.01, epsilon = 1e-9);
    }
}
