//! Deterministic synthetic urban scenes with per-pixel ground truth.
//!
//! A scene is rasterized at the panchromatic grid in painter's order — bare
//! soil everywhere, then a water body, vegetation patches, roads, rooftops,
//! and finally shadow strips cast east of each rooftop — so later primitives
//! overwrite earlier ones. Every pixel's spectrum is its class mean plus
//! seeded Gaussian noise, clamped to [0, 1]. The same spec and seed always
//! regenerate bit-identical rasters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::classify::LandCoverClass;
use crate::error::{Error, Result};
use crate::raster::RasterImage;
use crate::resample::degrade;

/// Panchromatic simulation weights for the four bands (Blue, Green, Red,
/// NIR): the wide visible passband overlaps the first three bands strongly
/// and the NIR band only marginally.
pub const DEFAULT_PAN_WEIGHTS: [f64; 4] = [0.3, 0.3, 0.3, 0.1];

/// Label value for pixels carrying no class (never produced by the
/// generator, which labels every pixel, but reserved in the encoding).
pub const UNLABELED: f64 = 255.0;

/// Identifier of the pseudo-random generator backing scene synthesis,
/// recorded in manifests so a scene is reproducible from (spec, seed).
pub const RNG_ALGORITHM: &str = "chacha8";

/// Mean reflectance per band plus the per-band Gaussian noise deviation for
/// one land-cover class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassSpectrum {
    pub mean: [f64; 4],
    pub noise_std: f64,
}

fn default_spectra() -> [ClassSpectrum; 6] {
    const STD: f64 = 0.02;
    // Indexed by class code: BIS, DIS, VEG, WAT, BSS, SHA. Vegetation gets
    // the NIR plateau, water the NIR absorption, shadow sits near zero and
    // deliberately close to dark impervious.
    [
        ClassSpectrum { mean: [0.55, 0.55, 0.55, 0.50], noise_std: STD },
        ClassSpectrum { mean: [0.12, 0.12, 0.12, 0.10], noise_std: STD },
        ClassSpectrum { mean: [0.06, 0.12, 0.07, 0.50], noise_std: STD },
        ClassSpectrum { mean: [0.08, 0.07, 0.05, 0.02], noise_std: STD },
        ClassSpectrum { mean: [0.30, 0.35, 0.40, 0.45], noise_std: STD },
        ClassSpectrum { mean: [0.04, 0.04, 0.04, 0.03], noise_std: STD },
    ]
}

/// Generator configuration: scene geometry at the PAN grid, the PAN/MS
/// resolution ratio, the RNG seed, class spectra, and target area fractions
/// for each primitive layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub ratio: usize,
    pub seed: u64,
    pub pan_pixel_size_m: f64,
    pub spectra: [ClassSpectrum; 6],
    pub road_fraction: f64,
    pub building_fraction: f64,
    pub water_fraction: f64,
    pub vegetation_fraction: f64,
    pub shadow_fraction: f64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            width: 512,
            height: 512,
            ratio: 4,
            seed: 0,
            pan_pixel_size_m: 2.5,
            spectra: default_spectra(),
            road_fraction: 0.10,
            building_fraction: 0.08,
            water_fraction: 0.08,
            vegetation_fraction: 0.15,
            shadow_fraction: 0.02,
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidArgument("scene dimensions must be positive".into()));
        }
        if self.ratio < 2 {
            return Err(Error::InvalidArgument(format!(
                "resolution ratio must be at least 2, got {}",
                self.ratio
            )));
        }
        if self.width % self.ratio != 0 || self.height % self.ratio != 0 {
            return Err(Error::InvalidArgument(format!(
                "scene {}x{} is not divisible by the ratio {}",
                self.width, self.height, self.ratio
            )));
        }
        if !(self.pan_pixel_size_m.is_finite() && self.pan_pixel_size_m > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "pan pixel size must be positive, got {}",
                self.pan_pixel_size_m
            )));
        }
        let fractions = [
            self.road_fraction,
            self.building_fraction,
            self.water_fraction,
            self.vegetation_fraction,
            self.shadow_fraction,
        ];
        if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(Error::InvalidArgument("layer fractions must lie in [0, 1]".into()));
        }
        if fractions.iter().sum::<f64>() > 1.0 {
            return Err(Error::InvalidArgument("layer fractions must sum to at most 1".into()));
        }
        for (i, s) in self.spectra.iter().enumerate() {
            if s.mean.iter().any(|m| !(0.0..=1.0).contains(m)) {
                return Err(Error::InvalidArgument(format!(
                    "class {i} mean reflectances must lie in [0, 1]"
                )));
            }
            if !(s.noise_std.is_finite() && s.noise_std >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "class {i} noise deviation must be non-negative"
                )));
            }
        }
        Ok(())
    }
}

struct Layout<'a> {
    width: usize,
    height: usize,
    codes: &'a mut [u8],
}

impl Layout<'_> {
    /// Paints a clamped half-open rectangle; returns how many pixels changed
    /// class.
    fn rect(&mut self, x0: isize, y0: isize, x1: isize, y1: isize, class: LandCoverClass) -> usize {
        let xs = x0.max(0) as usize..(x1.max(0) as usize).min(self.width);
        let ys = y0.max(0) as usize..(y1.max(0) as usize).min(self.height);
        let mut painted = 0;
        for y in ys {
            for x in xs.clone() {
                let p = &mut self.codes[y * self.width + x];
                if *p != class.code() {
                    *p = class.code();
                    painted += 1;
                }
            }
        }
        painted
    }

    /// Paints an axis-aligned ellipse; pixel centers inside count.
    fn ellipse(&mut self, cx: f64, cy: f64, a: f64, b: f64, class: LandCoverClass) {
        let y0 = ((cy - b).floor().max(0.0)) as usize;
        let y1 = ((cy + b).ceil().min(self.height as f64)) as usize;
        let x0 = ((cx - a).floor().max(0.0)) as usize;
        let x1 = ((cx + a).ceil().min(self.width as f64)) as usize;
        for y in y0..y1 {
            for x in x0..x1 {
                let dx = (x as f64 + 0.5 - cx) / a;
                let dy = (y as f64 + 0.5 - cy) / b;
                if dx * dx + dy * dy <= 1.0 {
                    self.codes[y * self.width + x] = class.code();
                }
            }
        }
    }
}

/// A rooftop footprint, kept so the shadow pass can find its east edge.
struct Building {
    x0: usize,
    y0: usize,
    w: usize,
    h: usize,
}

fn jitter(rng: &mut ChaCha8Rng, scale: f64) -> f64 {
    (rng.gen::<f64>() - 0.5) * 2.0 * scale
}

fn paint_layout(spec: &SceneSpec, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let (w, h) = (spec.width, spec.height);
    let total = (w * h) as f64;
    let mut codes = vec![LandCoverClass::BareSoil.code(); w * h];
    let mut layout = Layout { width: w, height: h, codes: &mut codes };

    // Water body: one ellipse anchored in the upper-right quadrant.
    if spec.water_fraction > 0.0 {
        let area = spec.water_fraction * total;
        let aspect = 1.3 + 0.4 * rng.gen::<f64>();
        let a = (area * aspect / std::f64::consts::PI).sqrt();
        let b = area / (std::f64::consts::PI * a);
        let cx = w as f64 * 0.72 + jitter(rng, 0.05 * w as f64);
        let cy = h as f64 * 0.24 + jitter(rng, 0.05 * h as f64);
        layout.ellipse(cx, cy, a, b, LandCoverClass::Water);
    }

    // Vegetation: three patches anchored away from the water body.
    if spec.vegetation_fraction > 0.0 {
        let area = spec.vegetation_fraction * total / 3.0;
        for &(ax, ay) in &[(0.22, 0.75), (0.28, 0.28), (0.76, 0.74)] {
            let aspect = 1.2 + 0.6 * rng.gen::<f64>();
            let a = (area * aspect / std::f64::consts::PI).sqrt();
            let b = area / (std::f64::consts::PI * a);
            let cx = w as f64 * ax + jitter(rng, 0.06 * w as f64);
            let cy = h as f64 * ay + jitter(rng, 0.06 * h as f64);
            layout.ellipse(cx, cy, a, b, LandCoverClass::Vegetation);
        }
    }

    // Road grid: full-width and full-height strips at jittered positions.
    if spec.road_fraction > 0.0 {
        let strip = ((w.min(h) / 64).max(2)) as isize;
        let target = spec.road_fraction * total / 2.0;
        let n_h = (target / (w as isize * strip) as f64).ceil().max(1.0) as usize;
        let n_v = (target / (h as isize * strip) as f64).ceil().max(1.0) as usize;
        for i in 0..n_h {
            let base = h as f64 * (i + 1) as f64 / (n_h + 1) as f64;
            let yc = (base + jitter(rng, h as f64 / (4.0 * (n_h + 1) as f64))) as isize;
            layout.rect(0, yc - strip / 2, w as isize, yc - strip / 2 + strip, LandCoverClass::DarkImpervious);
        }
        for i in 0..n_v {
            let base = w as f64 * (i + 1) as f64 / (n_v + 1) as f64;
            let xc = (base + jitter(rng, w as f64 / (4.0 * (n_v + 1) as f64))) as isize;
            layout.rect(xc - strip / 2, 0, xc - strip / 2 + strip, h as isize, LandCoverClass::DarkImpervious);
        }
    }

    // Rooftops: random rectangles until the bright-impervious area target is
    // met (bounded attempts keep generation finite on crowded layouts).
    let mut buildings = Vec::new();
    if spec.building_fraction > 0.0 {
        let m = w.min(h);
        let lo = (m / 32).max(2);
        let hi = (m / 16).max(lo + 1);
        let target = (spec.building_fraction * total) as usize;
        let mut painted = 0usize;
        let max_attempts = 64 + 8 * target / (lo * lo);
        for _ in 0..max_attempts {
            if painted >= target {
                break;
            }
            let bw = rng.gen_range(lo..=hi);
            let bh = rng.gen_range(lo..=hi);
            let x0 = rng.gen_range(0..=w.saturating_sub(bw));
            let y0 = rng.gen_range(0..=h.saturating_sub(bh));
            painted += layout.rect(
                x0 as isize,
                y0 as isize,
                (x0 + bw) as isize,
                (y0 + bh) as isize,
                LandCoverClass::BrightImpervious,
            );
            buildings.push(Building { x0, y0, w: bw, h: bh });
        }
    }

    // Shadows: a strip east of every rooftop, never overwriting rooftops.
    if spec.shadow_fraction > 0.0 && !buildings.is_empty() {
        let total_edge: usize = buildings.iter().map(|b| b.h).sum();
        let len = ((spec.shadow_fraction * total / total_edge as f64).round() as usize).max(2);
        for b in &buildings {
            let x_start = b.x0 + b.w;
            for y in b.y0..(b.y0 + b.h).min(h) {
                for x in x_start..(x_start + len).min(w) {
                    let p = &mut layout.codes[y * w + x];
                    if *p != LandCoverClass::BrightImpervious.code() {
                        *p = LandCoverClass::Shadow.code();
                    }
                }
            }
        }
    }

    codes
}

/// Generates the high-resolution 4-band scene and its pixel-aligned label
/// raster (class codes stored as floating-point values).
pub fn synthesize_scene(spec: &SceneSpec) -> Result<(RasterImage, RasterImage)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let codes = paint_layout(spec, &mut rng);

    let n = spec.width * spec.height;
    let mut bands = vec![vec![0.0f64; n]; 4];
    for (p, &code) in codes.iter().enumerate() {
        let spectrum = &spec.spectra[code as usize];
        for (b, plane) in bands.iter_mut().enumerate() {
            let noise: f64 = rng.sample(StandardNormal);
            plane[p] = (spectrum.mean[b] + spectrum.noise_std * noise).clamp(0.0, 1.0);
        }
    }

    let hr_ms = RasterImage::from_bands(spec.width, spec.height, spec.pan_pixel_size_m, bands)?;
    let labels = RasterImage::from_bands(
        spec.width,
        spec.height,
        spec.pan_pixel_size_m,
        vec![codes.into_iter().map(f64::from).collect()],
    )?;
    Ok((hr_ms, labels))
}

/// Simulates a panchromatic band as a weighted sum of the four bands.
pub fn make_pan(hr_ms: &RasterImage, weights: &[f64; 4]) -> Result<RasterImage> {
    if hr_ms.bands() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "panchromatic simulation needs 4 bands, got {}",
            hr_ms.bands()
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "panchromatic weights must be non-negative, got {weights:?}"
        )));
    }
    let n = hr_ms.pixel_count();
    let mut pan = vec![0.0f64; n];
    for (b, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for (dst, &src) in pan.iter_mut().zip(hr_ms.band(b)) {
            *dst += w * src;
        }
    }
    RasterImage::from_bands(hr_ms.width(), hr_ms.height(), hr_ms.pixel_size_m(), vec![pan])
}

/// Simulates the low-resolution multispectral observation by block-mean
/// degradation of the high-resolution scene.
pub fn make_ms(hr_ms: &RasterImage, ratio: usize) -> Result<RasterImage> {
    degrade(hr_ms, ratio)
}

/// Pixel counts per class code in a label raster.
pub fn class_pixel_counts(labels: &RasterImage) -> Result<[usize; 6]> {
    if labels.bands() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "label rasters have exactly 1 band, got {}",
            labels.bands()
        )));
    }
    let mut counts = [0usize; 6];
    for &v in labels.band(0) {
        if let Some(class) = LandCoverClass::from_code_value(v) {
            counts[class.code() as usize] += 1;
        }
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn same_spec_and_seed_regenerate_identical_rasters() {
        let spec = SceneSpec { width: 64, height: 64, seed: 42, ..SceneSpec::default() };
        let (a_ms, a_labels) = synthesize_scene(&spec).unwrap();
        let (b_ms, b_labels) = synthesize_scene(&spec).unwrap();
        assert_eq!(a_ms.data(), b_ms.data());
        assert_eq!(a_labels.data(), b_labels.data());
    }

    #[test]
    fn different_seeds_differ() {
        let base = SceneSpec { width: 64, height: 64, ..SceneSpec::default() };
        let (a, _) = synthesize_scene(&base).unwrap();
        let (b, _) = synthesize_scene(&SceneSpec { seed: 1, ..base }).unwrap();
        assert_ne!(a.data(), b.data());
    }

    #[test]
    fn zero_noise_pixels_sit_exactly_on_class_means() {
        let mut spec = SceneSpec { width: 48, height: 48, seed: 3, ..SceneSpec::default() };
        for s in &mut spec.spectra {
            s.noise_std = 0.0;
        }
        let (hr_ms, labels) = synthesize_scene(&spec).unwrap();
        for p in 0..hr_ms.pixel_count() {
            let class = labels.band(0)[p] as usize;
            for b in 0..4 {
                assert_eq!(hr_ms.band(b)[p], spec.spectra[class].mean[b]);
            }
        }
    }

    #[test]
    fn default_scene_covers_every_class_generously() {
        let (_, labels) = synthesize_scene(&SceneSpec::default()).unwrap();
        let counts = class_pixel_counts(&labels).unwrap();
        for (code, count) in counts.iter().enumerate() {
            assert!(
                *count >= 600,
                "class code {code} has only {count} pixels in the default scene"
            );
        }
        assert_eq!(counts.iter().sum::<usize>(), 512 * 512);
    }

    #[test]
    fn small_scene_still_covers_every_class() {
        let spec = SceneSpec { width: 96, height: 96, seed: 7, ..SceneSpec::default() };
        let (_, labels) = synthesize_scene(&spec).unwrap();
        let counts = class_pixel_counts(&labels).unwrap();
        for (code, count) in counts.iter().enumerate() {
            assert!(*count >= 60, "class code {code} has only {count} pixels at 96x96");
        }
    }

    #[test]
    fn pan_weights_mix_bands_as_a_dot_product() {
        let hr = RasterImage::from_bands(
            1,
            1,
            2.5,
            vec![vec![0.2], vec![0.4], vec![0.6], vec![0.8]],
        )
        .unwrap();
        let pan = make_pan(&hr, &DEFAULT_PAN_WEIGHTS).unwrap();
        assert_abs_diff_eq!(pan.band(0)[0], 0.44, epsilon = 1e-12);

        let blue_only = make_pan(&hr, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(blue_only.band(0), hr.band(0));
    }

    #[test]
    fn negative_pan_weights_are_rejected() {
        let hr = RasterImage::filled(4, 4, 4, 2.5, 0.5).unwrap();
        assert!(make_pan(&hr, &[0.5, 0.5, 0.5, -0.1]).is_err());
        assert!(make_pan(&RasterImage::filled(4, 4, 3, 2.5, 0.5).unwrap(), &DEFAULT_PAN_WEIGHTS).is_err());
    }

    #[test]
    fn constant_scene_degrades_to_constant_ms() {
        let hr = RasterImage::filled(16, 16, 4, 2.5, 0.37).unwrap();
        let ms = make_ms(&hr, 4).unwrap();
        assert_eq!((ms.width(), ms.height()), (4, 4));
        assert!(ms.data().iter().all(|&v| (v - 0.37).abs() < 1e-12));
        let pan = make_pan(&hr, &DEFAULT_PAN_WEIGHTS).unwrap();
        assert!(pan.data().iter().all(|&v| (v - 0.37).abs() < 1e-12));
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let valid = SceneSpec { width: 64, height: 64, ..SceneSpec::default() };
        assert!(valid.validate().is_ok());
        assert!(SceneSpec { width: 0, ..valid.clone() }.validate().is_err());
        assert!(SceneSpec { width: 65, ..valid.clone() }.validate().is_err());
        assert!(SceneSpec { ratio: 1, ..valid.clone() }.validate().is_err());
        assert!(SceneSpec { road_fraction: 1.2, ..valid.clone() }.validate().is_err());
        assert!(
            SceneSpec { road_fraction: 0.5, water_fraction: 0.6, ..valid.clone() }
                .validate()
                .is_err()
        );
        let mut bad_spectrum = valid.clone();
        bad_spectrum.spectra[0].mean[2] = 1.4;
        assert!(bad_spectrum.validate().is_err());
        let mut bad_noise = valid;
        bad_noise.spectra[3].noise_std = -0.1;
        assert!(bad_noise.validate().is_err());
    }

    #[test]
    fn labels_use_class_codes_only() {
        let spec = SceneSpec { width: 64, height: 64, seed: 9, ..SceneSpec::default() };
        let (_, labels) = synthesize_scene(&spec).unwrap();
        assert!(labels
            .band(0)
            .iter()
            .all(|&v| LandCoverClass::from_code_value(v).is_some()));
    }
}
