//! Ground-truth sample persistence and extraction from label rasters.
//!
//! Samples travel as a small CSV with the header `x,y,label`, where `label`
//! is one of the six class mnemonics.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::raster::RasterImage;

use super::{LabeledSample, LabeledSampleSet, LandCoverClass};

const CSV_HEADER: &str = "x,y,label";

/// Writes a sample set as `x,y,label` CSV.
pub fn save_samples_csv(path: &Path, set: &LabeledSampleSet) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    writeln!(writer, "{CSV_HEADER}")?;
    for s in &set.samples {
        writeln!(writer, "{},{},{}", s.x, s.y, s.label.mnemonic())?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads an `x,y,label` CSV written by [`save_samples_csv`] (or by hand).
pub fn load_samples_csv(path: &Path) -> Result<LabeledSampleSet> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    match lines.next() {
        Some(line) => {
            let header = line?;
            if header.trim() != CSV_HEADER {
                return Err(Error::Parse(format!(
                    "expected header '{CSV_HEADER}', found '{}'",
                    header.trim()
                )));
            }
        }
        None => return Err(Error::Parse("empty samples file".into())),
    }
    let mut samples = Vec::new();
    for (number, line) in lines.enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let fields: Vec<&str> = text.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse(format!(
                "line {}: expected 3 fields, found {}",
                number + 2,
                fields.len()
            )));
        }
        let x: usize = fields[0].trim().parse().map_err(|_| {
            Error::Parse(format!("line {}: bad x coordinate '{}'", number + 2, fields[0]))
        })?;
        let y: usize = fields[1].trim().parse().map_err(|_| {
            Error::Parse(format!("line {}: bad y coordinate '{}'", number + 2, fields[1]))
        })?;
        let label = LandCoverClass::from_mnemonic(fields[2]).ok_or_else(|| {
            Error::Parse(format!(
                "line {}: unknown class mnemonic '{}'",
                number + 2,
                fields[2].trim()
            ))
        })?;
        samples.push(LabeledSample { x, y, label });
    }
    Ok(LabeledSampleSet::new(samples))
}

/// Draws `per_class` pixels of every class from a label raster, shuffling
/// each class's pixels with the seeded generator before taking the front.
pub fn sample_from_labels(
    labels: &RasterImage,
    per_class: usize,
    seed: u64,
) -> Result<LabeledSampleSet> {
    if labels.bands() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "label rasters have exactly 1 band, got {}",
            labels.bands()
        )));
    }
    if per_class == 0 {
        return Err(Error::InvalidArgument("per-class sample count must be positive".into()));
    }
    let width = labels.width();
    let mut positions: Vec<Vec<(usize, usize)>> = vec![Vec::new(); 6];
    for (p, &v) in labels.band(0).iter().enumerate() {
        if let Some(class) = LandCoverClass::from_code_value(v) {
            positions[class.code() as usize].push((p % width, p / width));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(6 * per_class);
    for class in LandCoverClass::ALL {
        let pool = &mut positions[class.code() as usize];
        if pool.len() < per_class {
            return Err(Error::InvalidArgument(format!(
                "class {} has only {} labeled pixels, need {per_class}",
                class.mnemonic(),
                pool.len()
            )));
        }
        pool.shuffle(&mut rng);
        samples.extend(
            pool[..per_class].iter().map(|&(x, y)| LabeledSample { x, y, label: class }),
        );
    }
    Ok(LabeledSampleSet::new(samples))
}
