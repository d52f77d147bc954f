//! Fusion quality metrics and the per-method quality report.
//!
//! Every statistic uses the population divisor `n`. Per-band metrics compare
//! one fused band against the corresponding band of the reference (the
//! original multispectral raster upsampled to the fused grid); ERGAS and RASE
//! summarise all bands at once.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::KahanSum;
use crate::raster::RasterImage;

/// Joint first- and second-order moments of two equally long slices.
struct Moments {
    mean_a: f64,
    mean_b: f64,
    var_a: f64,
    var_b: f64,
    cov: f64,
}

fn moments(a: &[f64], b: &[f64]) -> Result<Moments> {
    if a.is_empty() || a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "metric inputs must be equally long and non-empty, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len() as f64;
    let (mut sa, mut sb) = (KahanSum::new(), KahanSum::new());
    for (&x, &y) in a.iter().zip(b) {
        sa.add(x);
        sb.add(y);
    }
    let mean_a = sa.value() / n;
    let mean_b = sb.value() / n;
    let (mut va, mut vb, mut cab) = (KahanSum::new(), KahanSum::new(), KahanSum::new());
    for (&x, &y) in a.iter().zip(b) {
        let dx = x - mean_a;
        let dy = y - mean_b;
        va.add(dx * dx);
        vb.add(dy * dy);
        cab.add(dx * dy);
    }
    Ok(Moments {
        mean_a,
        mean_b,
        var_a: (va.value() / n).max(0.0),
        var_b: (vb.value() / n).max(0.0),
        cov: cab.value() / n,
    })
}

/// Relative mean shift `(mean_ref - mean_fused) / mean_ref`. Ideal 0.
pub fn bias(reference: &[f64], fused: &[f64]) -> Result<f64> {
    let m = moments(reference, fused)?;
    if m.mean_a == 0.0 {
        return Err(Error::Degenerate("bias: reference mean is zero".into()));
    }
    Ok((m.mean_a - m.mean_b) / m.mean_a)
}

/// Relative variance shift `(var_ref - var_fused) / var_ref`. Ideal 0.
pub fn div(reference: &[f64], fused: &[f64]) -> Result<f64> {
    let m = moments(reference, fused)?;
    if m.var_a == 0.0 {
        return Err(Error::Degenerate("div: reference variance is zero".into()));
    }
    Ok((m.var_a - m.var_b) / m.var_a)
}

/// Pearson correlation coefficient. Ideal 1; always in [-1, 1].
pub fn cc(reference: &[f64], fused: &[f64]) -> Result<f64> {
    let m = moments(reference, fused)?;
    if m.var_a == 0.0 || m.var_b == 0.0 {
        return Err(Error::Degenerate(
            "cc: an input has zero variance".into(),
        ));
    }
    Ok((m.cov / (m.var_a.sqrt() * m.var_b.sqrt())).clamp(-1.0, 1.0))
}

/// Root-mean-square error. Ideal 0.
pub fn rmse(reference: &[f64], fused: &[f64]) -> Result<f64> {
    if reference.is_empty() || reference.len() != fused.len() {
        return Err(Error::DimensionMismatch(format!(
            "metric inputs must be equally long and non-empty, got {} and {}",
            reference.len(),
            fused.len()
        )));
    }
    let mut acc = KahanSum::new();
    for (&x, &y) in reference.iter().zip(fused) {
        let d = x - y;
        acc.add(d * d);
    }
    Ok((acc.value() / reference.len() as f64).max(0.0).sqrt())
}

/// Universal image quality index over a single global window:
/// `4 * cov * mean_x * mean_y / ((var_x + var_y) * (mean_x^2 + mean_y^2))`.
/// Ideal 1; always in [-1, 1].
pub fn uiqi(reference: &[f64], fused: &[f64]) -> Result<f64> {
    let m = moments(reference, fused)?;
    let spread = m.var_a + m.var_b;
    let luminance = m.mean_a * m.mean_a + m.mean_b * m.mean_b;
    if spread == 0.0 || luminance == 0.0 {
        return Err(Error::Degenerate(
            "uiqi: zero denominator (constant inputs or both means zero)".into(),
        ));
    }
    Ok((4.0 * m.cov * m.mean_a * m.mean_b / (spread * luminance)).clamp(-1.0, 1.0))
}

/// Shannon entropy (bits) of a band histogram. Samples are clipped to [0, 1]
/// and binned uniformly; empty bins contribute nothing.
pub fn entropy(band: &[f64], bins: usize) -> Result<f64> {
    if band.is_empty() {
        return Err(Error::InvalidArgument("entropy of empty input".into()));
    }
    if bins < 2 {
        return Err(Error::InvalidArgument(format!(
            "entropy needs at least 2 bins, got {bins}"
        )));
    }
    let mut counts = vec![0u64; bins];
    for &v in band {
        let clipped = v.clamp(0.0, 1.0);
        let bin = ((clipped * bins as f64) as usize).min(bins - 1);
        counts[bin] += 1;
    }
    let n = band.len() as f64;
    let mut h = 0.0;
    for &c in &counts {
        if c > 0 {
            let p = c as f64 / n;
            h -= p * p.log2();
        }
    }
    Ok(h)
}

/// Per-band relative dimensionless global error:
/// `100 * (h/l) * sqrt(mean_k((RMSE_k / mean_k)^2))` where `h/l` is the
/// high-to-low resolution ratio (0.25 for a 2.5 m / 10 m pair).
pub fn ergas(reference: &RasterImage, fused: &RasterImage, h_over_l: f64) -> Result<f64> {
    check_pair(reference, fused)?;
    if !(h_over_l.is_finite() && h_over_l > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "h_over_l must be positive, got {h_over_l}"
        )));
    }
    let mut acc = 0.0;
    for b in 0..reference.bands() {
        let mean = moments(reference.band(b), fused.band(b))?.mean_a;
        if mean == 0.0 {
            return Err(Error::Degenerate(format!(
                "ergas: reference band {b} has zero mean"
            )));
        }
        let r = rmse(reference.band(b), fused.band(b))?;
        acc += (r / mean) * (r / mean);
    }
    Ok(100.0 * h_over_l * (acc / reference.bands() as f64).sqrt())
}

/// Relative average spectral error:
/// `(100 / M) * sqrt(mean_k(RMSE_k^2))` with `M` the mean of the reference
/// band means.
pub fn rase(reference: &RasterImage, fused: &RasterImage) -> Result<f64> {
    check_pair(reference, fused)?;
    let mut mean_acc = 0.0;
    let mut rmse_acc = 0.0;
    for b in 0..reference.bands() {
        mean_acc += moments(reference.band(b), fused.band(b))?.mean_a;
        let r = rmse(reference.band(b), fused.band(b))?;
        rmse_acc += r * r;
    }
    let m = mean_acc / reference.bands() as f64;
    if m == 0.0 {
        return Err(Error::Degenerate(
            "rase: mean of reference band means is zero".into(),
        ));
    }
    Ok(100.0 / m * (rmse_acc / reference.bands() as f64).sqrt())
}

fn check_pair(reference: &RasterImage, fused: &RasterImage) -> Result<()> {
    if reference.width() != fused.width()
        || reference.height() != fused.height()
        || reference.bands() != fused.bands()
    {
        return Err(Error::DimensionMismatch(format!(
            "reference {}x{}x{} and fused {}x{}x{} must share a shape",
            reference.width(),
            reference.height(),
            reference.bands(),
            fused.width(),
            fused.height(),
            fused.bands()
        )));
    }
    Ok(())
}

/// Histogram resolution used for reported entropies.
pub const ENTROPY_BINS: usize = 256;

/// Metrics for one band pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BandMetrics {
    pub band: usize,
    pub bias: f64,
    pub div: f64,
    pub cc: f64,
    pub rmse: f64,
    pub uiqi: f64,
    pub entropy_ref: f64,
    pub entropy_fused: f64,
}

/// Band-averaged metrics plus the whole-image ERGAS and RASE. Entropies are
/// reported for information only and never enter comparisons.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AggregateMetrics {
    pub bias: f64,
    pub div: f64,
    pub cc: f64,
    pub ergas: f64,
    pub rase: f64,
    pub uiqi: f64,
    pub rmse: f64,
    pub entropy_ref: f64,
    pub entropy_fused: f64,
}

/// Quality assessment of one fused raster against its reference.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QualityReport {
    pub method: Option<String>,
    pub h_over_l: f64,
    pub per_band: Vec<BandMetrics>,
    pub aggregate: AggregateMetrics,
}

impl QualityReport {
    pub fn with_method(mut self, method: impl Into<String>) -> Self {
        self.method = Some(method.into());
        self
    }
}

/// Assesses `fused` against `reference` (already on the same grid).
pub fn assess(reference: &RasterImage, fused: &RasterImage, h_over_l: f64) -> Result<QualityReport> {
    check_pair(reference, fused)?;
    let mut per_band = Vec::with_capacity(reference.bands());
    for b in 0..reference.bands() {
        let (r, f) = (reference.band(b), fused.band(b));
        per_band.push(BandMetrics {
            band: b,
            bias: bias(r, f)?,
            div: div(r, f)?,
            cc: cc(r, f)?,
            rmse: rmse(r, f)?,
            uiqi: uiqi(r, f)?,
            entropy_ref: entropy(r, ENTROPY_BINS)?,
            entropy_fused: entropy(f, ENTROPY_BINS)?,
        });
    }
    let nb = per_band.len() as f64;
    let mean_of = |f: fn(&BandMetrics) -> f64| per_band.iter().map(f).sum::<f64>() / nb;
    let aggregate = AggregateMetrics {
        bias: mean_of(|m| m.bias),
        div: mean_of(|m| m.div),
        cc: mean_of(|m| m.cc),
        ergas: ergas(reference, fused, h_over_l)?,
        rase: rase(reference, fused)?,
        uiqi: mean_of(|m| m.uiqi),
        rmse: mean_of(|m| m.rmse),
        entropy_ref: mean_of(|m| m.entropy_ref),
        entropy_fused: mean_of(|m| m.entropy_fused),
    };
    Ok(QualityReport {
        method: None,
        h_over_l,
        per_band,
        aggregate,
    })
}

/// Column headers of the comparison table, in report order.
pub const TABLE_COLUMNS: [&str; 7] = ["Bias", "DIV", "CC", "ERGA", "RASE", "UIQI", "RMSE"];

/// Renders one comparison row per report: method name plus the aggregate
/// metrics in the fixed column order Bias, DIV, CC, ERGA, RASE, UIQI, RMSE.
pub fn report_table(reports: &[QualityReport]) -> String {
    let mut out = String::new();
    out.push_str(&format!("{:<10}", "Method"));
    for col in TABLE_COLUMNS {
        out.push_str(&format!("{col:>10}"));
    }
    out.push('\n');
    for report in reports {
        let name = report.method.as_deref().unwrap_or("-");
        let a = &report.aggregate;
        out.push_str(&format!(
            "{:<10}{:>10.4}{:>10.4}{:>10.4}{:>10.4}{:>10.4}{:>10.4}{:>10.4}\n",
            name, a.bias, a.div, a.cc, a.ergas, a.rase, a.uiqi, a.rmse
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn plane(seed: usize, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| 0.1 + 0.8 * (((i * 2654435761 + seed * 97) % 1009) as f64 / 1009.0))
            .collect()
    }

    #[test]
    fn bias_matches_hand_value() {
        // means 10 and 9 -> (10 - 9) / 10 = 0.1.
        let r = [9.0, 10.0, 11.0];
        let f = [8.0, 9.0, 10.0];
        assert_abs_diff_eq!(bias(&r, &f).unwrap(), 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(bias(&r, &r).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn bias_zero_reference_mean_is_error() {
        assert!(bias(&[-1.0, 1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn div_matches_hand_value() {
        // var_ref 4 (values +-2 around 5), var_fused 5 (engineered below).
        let r = [3.0, 7.0]; // mean 5, var 4
        let s = 5.0f64.sqrt();
        let f = [5.0 - s, 5.0 + s]; // var 5
        assert_abs_diff_eq!(div(&r, &f).unwrap(), -0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(div(&r, &r).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn div_constant_reference_is_error() {
        assert!(div(&[2.0, 2.0], &[1.0, 3.0]).is_err());
    }

    #[test]
    fn cc_detects_sign_and_perfection() {
        let r = [1.0, 2.0, 3.0, 4.0];
        let up = [2.0, 4.0, 6.0, 8.0];
        let down = [8.0, 6.0, 4.0, 2.0];
        assert_abs_diff_eq!(cc(&r, &up).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cc(&r, &down).unwrap(), -1.0, epsilon = 1e-12);
        assert!(cc(&r, &[5.0, 5.0, 5.0, 5.0]).is_err());
    }

    #[test]
    fn cc_is_affine_invariant() {
        let a = plane(1, 200);
        let b = plane(2, 200);
        let scaled: Vec<f64> = b.iter().map(|&v| 3.0 * v + 0.7).collect();
        assert_abs_diff_eq!(
            cc(&a, &b).unwrap(),
            cc(&a, &scaled).unwrap(),
            epsilon = 1e-9
        );
    }

    #[test]
    fn rmse_matches_hand_value() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        // Differences (1, 1, 2): sqrt((1 + 1 + 4) / 3) = sqrt(2).
        let v = rmse(&[1.0, 2.0, 5.0], &[2.0, 3.0, 3.0]).unwrap();
        assert_abs_diff_eq!(v, 2.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn uiqi_matches_hand_value() {
        // x = 1..4, y = 2x: Q = 125 / 195.3125 = 0.64.
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [2.0, 4.0, 6.0, 8.0];
        assert_abs_diff_eq!(uiqi(&x, &y).unwrap(), 0.64, epsilon = 1e-12);
        assert_abs_diff_eq!(uiqi(&x, &x).unwrap(), 1.0, epsilon = 1e-15);
        assert!(uiqi(&[1.0, 1.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn entropy_matches_hand_values() {
        assert_eq!(entropy(&[0.4; 10], 256).unwrap(), 0.0);
        // Two distinct bins, equal frequency: 1 bit.
        let two: Vec<f64> = (0..10).map(|i| if i % 2 == 0 { 0.1 } else { 0.9 }).collect();
        assert_abs_diff_eq!(entropy(&two, 256).unwrap(), 1.0, epsilon = 1e-12);
        // All 256 bins hit once: 8 bits.
        let all: Vec<f64> = (0..256).map(|i| (i as f64 + 0.5) / 256.0).collect();
        assert_abs_diff_eq!(entropy(&all, 256).unwrap(), 8.0, epsilon = 1e-12);
    }

    #[test]
    fn entropy_clips_out_of_range_samples() {
        let h = entropy(&[-3.0, 5.0], 256).unwrap();
        assert_abs_diff_eq!(h, 1.0, epsilon = 1e-12);
    }

    fn image_from(planes: Vec<Vec<f64>>, w: usize, h: usize) -> RasterImage {
        RasterImage::from_bands(w, h, 2.5, planes).unwrap()
    }

    #[test]
    fn ergas_and_rase_match_hand_formulas() {
        let r = image_from(vec![plane(3, 64), plane(4, 64)], 8, 8);
        let f = image_from(vec![plane(5, 64), plane(6, 64)], 8, 8);
        let r0 = rmse(r.band(0), f.band(0)).unwrap();
        let r1 = rmse(r.band(1), f.band(1)).unwrap();
        let m0 = moments(r.band(0), f.band(0)).unwrap().mean_a;
        let m1 = moments(r.band(1), f.band(1)).unwrap().mean_a;
        let expected_ergas =
            100.0 * 0.25 * (((r0 / m0).powi(2) + (r1 / m1).powi(2)) / 2.0).sqrt();
        assert_abs_diff_eq!(ergas(&r, &f, 0.25).unwrap(), expected_ergas, epsilon = 1e-12);
        let m = (m0 + m1) / 2.0;
        let expected_rase = 100.0 / m * ((r0 * r0 + r1 * r1) / 2.0).sqrt();
        assert_abs_diff_eq!(rase(&r, &f).unwrap(), expected_rase, epsilon = 1e-12);
    }

    #[test]
    fn ergas_scales_with_resolution_ratio() {
        let r = image_from(vec![plane(3, 64)], 8, 8);
        let f = image_from(vec![plane(5, 64)], 8, 8);
        let quarter = ergas(&r, &f, 0.25).unwrap();
        let half = ergas(&r, &f, 0.5).unwrap();
        assert_abs_diff_eq!(half, 2.0 * quarter, epsilon = 1e-12);
    }

    #[test]
    fn rase_is_invariant_to_common_rescaling() {
        let r = image_from(vec![plane(3, 64), plane(4, 64)], 8, 8);
        let f = image_from(vec![plane(5, 64), plane(6, 64)], 8, 8);
        let scale = 3.7;
        let r2 = image_from(
            vec![
                r.band(0).iter().map(|v| v * scale).collect(),
                r.band(1).iter().map(|v| v * scale).collect(),
            ],
            8,
            8,
        );
        let f2 = image_from(
            vec![
                f.band(0).iter().map(|v| v * scale).collect(),
                f.band(1).iter().map(|v| v * scale).collect(),
            ],
            8,
            8,
        );
        assert_abs_diff_eq!(rase(&r, &f).unwrap(), rase(&r2, &f2).unwrap(), epsilon = 1e-9);
    }

    #[test]
    fn self_assessment_is_ideal() {
        let img = image_from(vec![plane(7, 100), plane(8, 100), plane(9, 100)], 10, 10);
        let report = assess(&img, &img, 0.25).unwrap();
        let a = &report.aggregate;
        for (value, ideal) in [
            (a.bias, 0.0),
            (a.div, 0.0),
            (a.cc, 1.0),
            (a.ergas, 0.0),
            (a.rase, 0.0),
            (a.uiqi, 1.0),
            (a.rmse, 0.0),
        ] {
            assert_abs_diff_eq!(value, ideal, epsilon = 1e-9);
        }
    }

    #[test]
    fn symmetry_relations_hold_via_formulas() {
        let a = plane(11, 120);
        let b = plane(12, 120);
        // cc, uiqi and rmse are symmetric.
        assert_abs_diff_eq!(cc(&a, &b).unwrap(), cc(&b, &a).unwrap(), epsilon = 1e-12);
        assert_abs_diff_eq!(uiqi(&a, &b).unwrap(), uiqi(&b, &a).unwrap(), epsilon = 1e-12);
        assert_abs_diff_eq!(rmse(&a, &b).unwrap(), rmse(&b, &a).unwrap(), epsilon = 1e-12);
        // bias is anti-symmetric only after unnormalising by the means.
        let ma = moments(&a, &b).unwrap().mean_a;
        let mb = moments(&b, &a).unwrap().mean_a;
        assert_abs_diff_eq!(
            bias(&a, &b).unwrap() * ma,
            -(bias(&b, &a).unwrap() * mb),
            epsilon = 1e-12
        );
    }

    #[test]
    fn table_has_fixed_column_order() {
        let img = image_from(vec![plane(7, 64), plane(8, 64)], 8, 8);
        let report = assess(&img, &img, 0.25).unwrap().with_method("pca");
        let table = report_table(&[report]);
        let header = table.lines().next().unwrap();
        let cols: Vec<&str> = header.split_whitespace().collect();
        assert_eq!(cols, ["Method", "Bias", "DIV", "CC", "ERGA", "RASE", "UIQI", "RMSE"]);
        assert!(table.lines().nth(1).unwrap().starts_with("pca"));
    }

    #[test]
    fn assessment_against_brute_force_oracle() {
        // Independent naive double-loop implementations of every metric.
        let r = image_from(vec![plane(20, 144), plane(21, 144)], 12, 12);
        let f = image_from(vec![plane(22, 144), plane(23, 144)], 12, 12);
        for b in 0..2 {
            let (x, y) = (r.band(b), f.band(b));
            let n = x.len() as f64;
            let mx: f64 = x.iter().sum::<f64>() / n;
            let my: f64 = y.iter().sum::<f64>() / n;
            let vx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum::<f64>() / n;
            let vy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum::<f64>() / n;
            let cxy: f64 = x
                .iter()
                .zip(y)
                .map(|(a, b)| (a - mx) * (b - my))
                .sum::<f64>()
                / n;
            let se: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n;
            assert_abs_diff_eq!(bias(x, y).unwrap(), (mx - my) / mx, epsilon = 1e-9);
            assert_abs_diff_eq!(div(x, y).unwrap(), (vx - vy) / vx, epsilon = 1e-9);
            assert_abs_diff_eq!(cc(x, y).unwrap(), cxy / (vx * vy).sqrt(), epsilon = 1e-9);
            assert_abs_diff_eq!(rmse(x, y).unwrap(), se.sqrt(), epsilon = 1e-9);
            assert_abs_diff_eq!(
                uiqi(x, y).unwrap(),
                4.0 * cxy * mx * my / ((vx + vy) * (mx * mx + my * my)),
                epsilon = 1e-9
            );
        }
    }
}
