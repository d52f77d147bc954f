//! PCA fusion: the first principal component of the four multispectral bands
//! is replaced by the histogram-matched panchromatic band and the transform
//! is inverted.

use log::warn;

use crate::error::{Error, Result};
use crate::math::KahanSum;
use crate::raster::{band_stats, histogram_match, RasterImage};

use super::check_same_grid;
use super::linalg::symmetric_eigen_4x4;

/// Centred orthogonal basis of a 4-band raster: band means, eigenvectors of
/// the band covariance (rows, descending eigenvalue) and the eigenvalues.
#[derive(Debug, Clone)]
pub struct PcaBasis {
    pub mean: [f64; 4],
    pub components: [[f64; 4]; 4],
    pub eigenvalues: [f64; 4],
}

/// Builds the PCA basis from the population covariance of the four bands.
///
/// The leading eigenvector's sign is fixed so that its coefficient sum is
/// positive; the remaining vectors get a deterministic sign as well. A
/// non-dominant first eigenvalue only warns; zero total variance is an error.
pub fn pca_basis(ms_up: &RasterImage) -> Result<PcaBasis> {
    if ms_up.bands() != 4 {
        return Err(Error::InvalidArgument(format!(
            "PCA expects 4 bands, got {}",
            ms_up.bands()
        )));
    }
    let n = ms_up.pixel_count() as f64;
    let mut mean = [0.0; 4];
    for (b, m) in mean.iter_mut().enumerate() {
        *m = band_stats(ms_up.band(b))?.mean;
    }
    let mut cov = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in i..4 {
            let (bi, bj) = (ms_up.band(i), ms_up.band(j));
            let mut acc = KahanSum::new();
            for (a, b) in bi.iter().zip(bj) {
                acc.add((a - mean[i]) * (b - mean[j]));
            }
            cov[i][j] = acc.value() / n;
            cov[j][i] = cov[i][j];
        }
    }
    let total_variance: f64 = (0..4).map(|i| cov[i][i]).sum();
    if total_variance <= 0.0 {
        return Err(Error::Degenerate(
            "PCA input has zero variance in every band".into(),
        ));
    }
    let (eigenvalues, mut components) = symmetric_eigen_4x4(&cov);
    if eigenvalues[0] - eigenvalues[1] <= 1e-12 * eigenvalues[0].abs() {
        warn!(
            "first principal component is not strictly dominant (lambda1 = {:.6e}, lambda2 = {:.6e})",
            eigenvalues[0], eigenvalues[1]
        );
    }
    // Leading vector: coefficient sum positive. Others: largest-magnitude
    // coefficient positive, purely to make the basis deterministic.
    if components[0].iter().sum::<f64>() < 0.0 {
        for c in &mut components[0] {
            *c = -*c;
        }
    }
    for comp in components.iter_mut().skip(1) {
        let lead = comp
            .iter()
            .cloned()
            .max_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap())
            .unwrap();
        if lead < 0.0 {
            for c in comp.iter_mut() {
                *c = -*c;
            }
        }
    }
    Ok(PcaBasis {
        mean,
        components,
        eigenvalues,
    })
}

/// Projects the four bands onto the basis: plane `i` holds component scores
/// `e_i . (x - mean)` per pixel.
pub fn pca_forward(basis: &PcaBasis, ms_up: &RasterImage) -> Vec<Vec<f64>> {
    let n = ms_up.pixel_count();
    let bands: Vec<&[f64]> = (0..4).map(|b| ms_up.band(b)).collect();
    let mut planes = vec![vec![0.0; n]; 4];
    for i in 0..n {
        let centred = [
            bands[0][i] - basis.mean[0],
            bands[1][i] - basis.mean[1],
            bands[2][i] - basis.mean[2],
            bands[3][i] - basis.mean[3],
        ];
        for (c, plane) in planes.iter_mut().enumerate() {
            let e = &basis.components[c];
            plane[i] = e[0] * centred[0] + e[1] * centred[1] + e[2] * centred[2] + e[3] * centred[3];
        }
    }
    planes
}

/// Reverses [`pca_forward`]: `x = mean + sum_i e_i * score_i`. No clamping;
/// the fusion entry point clamps as its final step.
pub fn pca_inverse(
    basis: &PcaBasis,
    planes: &[Vec<f64>],
    width: usize,
    height: usize,
    pixel_size_m: f64,
) -> Result<RasterImage> {
    if planes.len() != 4 {
        return Err(Error::InvalidArgument(format!(
            "expected 4 component planes, got {}",
            planes.len()
        )));
    }
    let n = width * height;
    let mut bands = vec![vec![0.0; n]; 4];
    for i in 0..n {
        for (b, band) in bands.iter_mut().enumerate() {
            let mut acc = basis.mean[b];
            for c in 0..4 {
                acc += basis.components[c][b] * planes[c][i];
            }
            band[i] = acc;
        }
    }
    RasterImage::from_bands(width, height, pixel_size_m, bands)
}

/// PCA fusion on an already-upsampled multispectral raster: replace the first
/// component scores with the matched panchromatic band, invert, clamp.
pub fn pca_fuse(ms_up: &RasterImage, pan: &RasterImage) -> Result<RasterImage> {
    check_same_grid(ms_up, pan)?;
    let basis = pca_basis(ms_up)?;
    let mut planes = pca_forward(&basis, ms_up);
    let pc1_stats = band_stats(&planes[0])?;
    planes[0] = histogram_match(pan.band(0), &pc1_stats)?;
    let mut fused = pca_inverse(
        &basis,
        &planes,
        ms_up.width(),
        ms_up.height(),
        ms_up.pixel_size_m(),
    )?;
    fused.clamp_unit();
    Ok(fused)
}
