//! Quick-look rendering: three selected bands to an 8-bit binary PPM (P6)
//! with a per-band 2%-98% percentile stretch.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::math::percentile;
use crate::raster::RasterImage;

/// Linear stretch bounds for one band: values at the 2nd and 98th percentile.
fn stretch_bounds(band: &[f64]) -> (f64, f64) {
    let mut sorted = band.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    (percentile(&sorted, 2.0), percentile(&sorted, 98.0))
}

#[inline]
fn stretch_to_u8(v: f64, lo: f64, hi: f64) -> u8 {
    let t = if hi > lo {
        ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
    } else {
        // Degenerate stretch (constant band): fall back to the raw value so a
        // constant image renders as a uniform grey.
        v.clamp(0.0, 1.0)
    };
    (t * 255.0).round() as u8
}

/// Renders bands `(r, g, b)` of `ms` as a binary PPM at `path`. Each band is
/// independently stretched between its 2nd and 98th percentiles.
pub fn render_composite(ms: &RasterImage, rgb: (usize, usize, usize), path: &Path) -> Result<()> {
    let (r, g, b) = rgb;
    for idx in [r, g, b] {
        if idx >= ms.bands() {
            return Err(Error::InvalidArgument(format!(
                "composite band index {idx} out of range for {} bands",
                ms.bands()
            )));
        }
    }
    let planes = [ms.band(r), ms.band(g), ms.band(b)];
    let bounds: Vec<(f64, f64)> = planes.iter().map(|p| stretch_bounds(p)).collect();

    let file = fs::File::create(path)?;
    let mut out = BufWriter::new(file);
    write!(out, "P6\n{} {}\n255\n", ms.width(), ms.height())?;
    let mut row = Vec::with_capacity(ms.width() * 3);
    for y in 0..ms.height() {
        row.clear();
        for x in 0..ms.width() {
            let i = y * ms.width() + x;
            for (plane, &(lo, hi)) in planes.iter().zip(&bounds) {
                row.push(stretch_to_u8(plane[i], lo, hi));
            }
        }
        out.write_all(&row)?;
    }
    out.flush()?;
    Ok(())
}
