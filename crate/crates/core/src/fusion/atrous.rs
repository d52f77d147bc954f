//! Undecimated (à trous) wavelet decomposition with the separable B3-spline
//! kernel [1, 4, 6, 4, 1] / 16.
//!
//! Level `j` smooths with taps spread `2^(j-1)` samples apart; the detail
//! plane at level `j` is the difference between consecutive approximations.
//! Summing the final approximation and every detail plane reconstructs the
//! input exactly (a telescoping sum), independent of boundary handling.

use crate::error::{Error, Result};
use crate::math::mirror_index;

const B3: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];

/// Result of an à trous decomposition: the coarsest approximation plus one
/// detail plane per level (finest first).
#[derive(Debug, Clone)]
pub struct AtrousStack {
    pub width: usize,
    pub height: usize,
    pub approximation: Vec<f64>,
    pub details: Vec<Vec<f64>>,
}

impl AtrousStack {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    /// Adds the approximation and all detail planes back together.
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut out = self.approximation.clone();
        for detail in &self.details {
            for (o, &d) in out.iter_mut().zip(detail) {
                *o += d;
            }
        }
        out
    }

    /// Sum of the detail planes only (the injected high-frequency content).
    pub fn detail_sum(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.width * self.height];
        for detail in &self.details {
            for (o, &d) in out.iter_mut().zip(detail) {
                *o += d;
            }
        }
        out
    }
}

/// One separable B3 smoothing pass with taps `step` samples apart and
/// mirrored boundary extension.
fn b3_smooth(input: &[f64], width: usize, height: usize, step: usize) -> Vec<f64> {
    let s = step as isize;
    // Horizontal pass.
    let mut horiz = vec![0.0; input.len()];
    for y in 0..height {
        let row = &input[y * width..(y + 1) * width];
        for x in 0..width {
            let mut acc = 0.0;
            for (t, &w) in B3.iter().enumerate() {
                let off = (t as isize - 2) * s;
                acc += w * row[mirror_index(x as isize + off, width)];
            }
            horiz[y * width + x] = acc;
        }
    }
    // Vertical pass.
    let mut out = vec![0.0; input.len()];
    for y in 0..height {
        for x in 0..width {
            let mut acc = 0.0;
            for (t, &w) in B3.iter().enumerate() {
                let off = (t as isize - 2) * s;
                acc += w * horiz[mirror_index(y as isize + off, height) * width + x];
            }
            out[y * width + x] = acc;
        }
    }
    out
}

/// Decomposes one band plane into `levels` detail planes plus a residual
/// approximation. The plane must be at least 2x2 and `levels >= 1`.
pub fn atrous_decompose(
    band: &[f64],
    width: usize,
    height: usize,
    levels: usize,
) -> Result<AtrousStack> {
    if width * height != band.len() {
        return Err(Error::DimensionMismatch(format!(
            "plane length {} does not match {width}x{height}",
            band.len()
        )));
    }
    if width < 2 || height < 2 {
        return Err(Error::InvalidArgument(format!(
            "decomposition needs at least a 2x2 plane, got {width}x{height}"
        )));
    }
    if levels == 0 {
        return Err(Error::InvalidArgument("levels must be >= 1".into()));
    }
    let mut approx = band.to_vec();
    let mut details = Vec::with_capacity(levels);
    for level in 1..=levels {
        let step = 1usize << (level - 1);
        let next = b3_smooth(&approx, width, height, step);
        details.push(
            approx
                .iter()
                .zip(&next)
                .map(|(a, n)| a - n)
                .collect::<Vec<f64>>(),
        );
        approx = next;
    }
    Ok(AtrousStack {
        width,
        height,
        approximation: approx,
        details,
    })
}
