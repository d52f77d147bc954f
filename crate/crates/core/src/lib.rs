//! Pansharpening laboratory core: rasters, resampling, five fusion
//! algorithms, quality metrics, an SVM land-cover classifier, and a
//! deterministic synthetic-scene generator.
//!
//! The library fuses a low-resolution 4-band multispectral image with a
//! high-resolution panchromatic band (component substitution via intensity,
//! principal components, or Gram-Schmidt-style gains; additive stationary
//! wavelet detail injection; and a non-negative least-squares ratio method),
//! then measures how faithfully each result preserves the original spectra
//! and how well an impervious-surface classifier performs on it. Synthetic
//! scenes with per-pixel ground truth make the whole pipeline reproducible
//! from a seed.
//!
//! Conventions used throughout:
//! - samples are `f64` in memory and 32-bit floats on disk;
//! - image values are reflectance-like and clamped to [0, 1] by fusion;
//! - statistics use the population divisor `n`;
//! - every random process takes an explicit 64-bit seed.

pub mod classify;
pub mod composite;
pub mod error;
pub mod fusion;
pub mod io;
pub mod math;
pub mod metrics;
pub mod raster;
pub mod resample;
pub mod scene;

pub use error::{Error, Result};
pub use raster::{BandStats, RasterImage};
pub use resample::ResampleKernel;
