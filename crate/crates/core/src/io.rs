//! Raster persistence.
//!
//! A raster on disk is a flat little-endian 32-bit float payload
//! (band-sequential, row-major within each band) plus a JSON sidecar named
//! `<payload>.json` describing `width`, `height`, `bands` and `pixel_size_m`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::RasterImage;

#[derive(Debug, Serialize, Deserialize)]
struct RasterHeader {
    width: usize,
    height: usize,
    bands: usize,
    pixel_size_m: f64,
}

/// Sidecar path for a payload path: the full file name with `.json` appended.
pub fn sidecar_path(payload: &Path) -> PathBuf {
    let mut name = payload.as_os_str().to_os_string();
    name.push(".json");
    PathBuf::from(name)
}

/// Writes the payload at `path` and the JSON sidecar at `path.json`.
///
/// Samples are narrowed to `f32`; a value that overflows the `f32` range is
/// rejected rather than silently written as infinity.
pub fn save_raster(image: &RasterImage, path: &Path) -> Result<()> {
    let header = RasterHeader {
        width: image.width(),
        height: image.height(),
        bands: image.bands(),
        pixel_size_m: image.pixel_size_m(),
    };
    let file = fs::File::create(path)?;
    let mut out = BufWriter::new(file);
    for (i, &v) in image.data().iter().enumerate() {
        let narrow = v as f32;
        if !narrow.is_finite() {
            return Err(Error::InvalidRaster(format!(
                "sample {v} at flat index {i} does not fit a 32-bit float"
            )));
        }
        out.write_all(&narrow.to_le_bytes())?;
    }
    out.flush()?;
    fs::write(
        sidecar_path(path),
        serde_json::to_string_pretty(&header)? + "\n",
    )?;
    Ok(())
}

/// Loads a raster written by [`save_raster`], validating the sidecar, the
/// payload length and sample finiteness.
pub fn load_raster(path: &Path) -> Result<RasterImage> {
    let sidecar = sidecar_path(path);
    let header_text = fs::read_to_string(&sidecar).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("reading sidecar {}: {e}", sidecar.display()),
        ))
    })?;
    let header: RasterHeader = serde_json::from_str(&header_text)?;
    let payload = fs::read(path)?;
    let expected = header
        .width
        .checked_mul(header.height)
        .and_then(|n| n.checked_mul(header.bands))
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::InvalidRaster("header dimensions overflow".into()))?;
    if payload.len() != expected {
        return Err(Error::SizeMismatch {
            expected,
            actual: payload.len(),
        });
    }
    let mut data = Vec::with_capacity(payload.len() / 4);
    for (i, chunk) in payload.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
        if !v.is_finite() {
            return Err(Error::InvalidRaster(format!(
                "non-finite sample at flat index {i}"
            )));
        }
        data.push(v as f64);
    }
    RasterImage::new(
        header.width,
        header.height,
        header.bands,
        header.pixel_size_m,
        data,
    )
}
