//! Integer-factor resampling: upsampling with selectable kernels and
//! block-mean degradation.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::raster::RasterImage;

/// Interpolation kernel used by [`upsample`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResampleKernel {
    Nearest,
    Bilinear,
    /// Catmull-Rom cubic (a = -0.5), the default for fusion.
    Bicubic,
}

impl ResampleKernel {
    pub const ALL: [ResampleKernel; 3] = [
        ResampleKernel::Nearest,
        ResampleKernel::Bilinear,
        ResampleKernel::Bicubic,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ResampleKernel::Nearest => "nearest",
            ResampleKernel::Bilinear => "bilinear",
            ResampleKernel::Bicubic => "bicubic",
        }
    }
}

impl Default for ResampleKernel {
    fn default() -> Self {
        ResampleKernel::Bicubic
    }
}

impl fmt::Display for ResampleKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ResampleKernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nearest" => Ok(ResampleKernel::Nearest),
            "bilinear" => Ok(ResampleKernel::Bilinear),
            "bicubic" => Ok(ResampleKernel::Bicubic),
            other => Err(Error::Parse(format!(
                "unknown resample kernel `{other}` (expected one of: nearest, bilinear, bicubic)"
            ))),
        }
    }
}

/// Source coordinate for an output pixel: centres are aligned so the output
/// grid covers the same footprint as the input grid.
#[inline]
fn src_coord(dst: usize, factor: usize) -> f64 {
    (dst as f64 + 0.5) / factor as f64 - 0.5
}

#[inline]
fn clamp_idx(i: isize, len: usize) -> usize {
    i.clamp(0, len as isize - 1) as usize
}

/// Catmull-Rom weights for fractional offset `t` in [0, 1), taps at -1..=2.
#[inline]
fn catmull_rom(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}

/// Enlarges a raster by an integer factor (>= 2). The pixel size shrinks by
/// the same factor. All kernels reproduce constants exactly; `Nearest`
/// replicates each source pixel into a `factor x factor` block.
pub fn upsample(image: &RasterImage, factor: usize, kernel: ResampleKernel) -> Result<RasterImage> {
    if factor < 2 {
        return Err(Error::InvalidArgument(format!(
            "upsample factor must be >= 2, got {factor}"
        )));
    }
    let (w, h) = (image.width(), image.height());
    let (ow, oh) = (w * factor, h * factor);
    let mut planes = Vec::with_capacity(image.bands());
    for b in 0..image.bands() {
        let src = image.band(b);
        let mut out = vec![0.0; ow * oh];
        match kernel {
            ResampleKernel::Nearest => {
                for y in 0..oh {
                    let sy = clamp_idx(src_coord(y, factor).round() as isize, h);
                    for x in 0..ow {
                        let sx = clamp_idx(src_coord(x, factor).round() as isize, w);
                        out[y * ow + x] = src[sy * w + sx];
                    }
                }
            }
            ResampleKernel::Bilinear => {
                for y in 0..oh {
                    let ys = src_coord(y, factor);
                    let y0 = ys.floor();
                    let ty = ys - y0;
                    let r0 = clamp_idx(y0 as isize, h);
                    let r1 = clamp_idx(y0 as isize + 1, h);
                    for x in 0..ow {
                        let xs = src_coord(x, factor);
                        let x0 = xs.floor();
                        let tx = xs - x0;
                        let c0 = clamp_idx(x0 as isize, w);
                        let c1 = clamp_idx(x0 as isize + 1, w);
                        let top = src[r0 * w + c0] * (1.0 - tx) + src[r0 * w + c1] * tx;
                        let bot = src[r1 * w + c0] * (1.0 - tx) + src[r1 * w + c1] * tx;
                        out[y * ow + x] = top * (1.0 - ty) + bot * ty;
                    }
                }
            }
            ResampleKernel::Bicubic => {
                for y in 0..oh {
                    let ys = src_coord(y, factor);
                    let y0 = ys.floor();
                    let wy = catmull_rom(ys - y0);
                    let rows: [usize; 4] = std::array::from_fn(|j| {
                        clamp_idx(y0 as isize + j as isize - 1, h)
                    });
                    for x in 0..ow {
                        let xs = src_coord(x, factor);
                        let x0 = xs.floor();
                        let wx = catmull_rom(xs - x0);
                        let cols: [usize; 4] = std::array::from_fn(|i| {
                            clamp_idx(x0 as isize + i as isize - 1, w)
                        });
                        let mut acc = 0.0;
                        for (j, &r) in rows.iter().enumerate() {
                            let mut row_acc = 0.0;
                            for (i, &c) in cols.iter().enumerate() {
                                row_acc += wx[i] * src[r * w + c];
                            }
                            acc += wy[j] * row_acc;
                        }
                        out[y * ow + x] = acc;
                    }
                }
            }
        }
        planes.push(out);
    }
    RasterImage::from_bands(ow, oh, image.pixel_size_m() / factor as f64, planes)
}

/// Reduces resolution by an integer factor using the block mean (each output
/// pixel is the mean of a `factor x factor` input block). Dimensions must be
/// divisible by the factor; the pixel size grows by the factor.
pub fn degrade(image: &RasterImage, factor: usize) -> Result<RasterImage> {
    if factor < 2 {
        return Err(Error::InvalidArgument(format!(
            "degrade factor must be >= 2, got {factor}"
        )));
    }
    let (w, h) = (image.width(), image.height());
    if w % factor != 0 || h % factor != 0 {
        return Err(Error::DimensionMismatch(format!(
            "degrade factor {factor} does not divide {w}x{h}"
        )));
    }
    let (ow, oh) = (w / factor, h / factor);
    let norm = 1.0 / (factor * factor) as f64;
    let mut planes = Vec::with_capacity(image.bands());
    for b in 0..image.bands() {
        let src = image.band(b);
        let mut out = vec![0.0; ow * oh];
        for oy in 0..oh {
            for ox in 0..ow {
                let mut sum = 0.0;
                for dy in 0..factor {
                    let row = (oy * factor + dy) * w + ox * factor;
                    for dx in 0..factor {
                        sum += src[row + dx];
                    }
                }
                out[oy * ow + ox] = sum * norm;
            }
        }
        planes.push(out);
    }
    RasterImage::from_bands(ow, oh, image.pixel_size_m() * factor as f64, planes)
}
