//! Land-cover classification: labeled samples, a soft-margin RBF SVM trained
//! from scratch, hyperparameter grid search, one-vs-one multiclass voting,
//! and the two-step impervious-surface protocol with confusion-matrix
//! reporting.

pub mod grid;
pub mod multiclass;
pub mod samples;
pub mod smo;

pub use grid::{default_c_grid, default_gamma_grid, grid_search, stratified_folds, GridSearchOutcome};
pub use multiclass::{svm_train_multiclass, FeatureScaler, PairwiseMachine, SvmModel};
pub use samples::{load_samples_csv, sample_from_labels, save_samples_csv};
pub use smo::{rbf_kernel, smo_solve, svm_train_binary, BinarySvm, SmoParams, TrainOutcome};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::RasterImage;

/// The six land-cover classes, in canonical order. The numeric codes below
/// are also the label-raster encoding and every tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LandCoverClass {
    #[serde(rename = "BIS")]
    BrightImpervious,
    #[serde(rename = "DIS")]
    DarkImpervious,
    #[serde(rename = "VEG")]
    Vegetation,
    #[serde(rename = "WAT")]
    Water,
    #[serde(rename = "BSS")]
    BareSoil,
    #[serde(rename = "SHA")]
    Shadow,
}

/// The two-way grouping used by the first classification step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SurfaceGroup {
    #[serde(rename = "IS")]
    Impervious,
    #[serde(rename = "NIS")]
    NonImpervious,
}

impl LandCoverClass {
    pub const ALL: [LandCoverClass; 6] = [
        LandCoverClass::BrightImpervious,
        LandCoverClass::DarkImpervious,
        LandCoverClass::Vegetation,
        LandCoverClass::Water,
        LandCoverClass::BareSoil,
        LandCoverClass::Shadow,
    ];

    pub fn code(self) -> u8 {
        match self {
            LandCoverClass::BrightImpervious => 0,
            LandCoverClass::DarkImpervious => 1,
            LandCoverClass::Vegetation => 2,
            LandCoverClass::Water => 3,
            LandCoverClass::BareSoil => 4,
            LandCoverClass::Shadow => 5,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    /// Decodes a label-raster sample: the value must be exactly one of the
    /// integer class codes.
    pub fn from_code_value(value: f64) -> Option<Self> {
        if value.fract() != 0.0 || !(0.0..6.0).contains(&value) {
            return None;
        }
        Self::from_code(value as u8)
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            LandCoverClass::BrightImpervious => "BIS",
            LandCoverClass::DarkImpervious => "DIS",
            LandCoverClass::Vegetation => "VEG",
            LandCoverClass::Water => "WAT",
            LandCoverClass::BareSoil => "BSS",
            LandCoverClass::Shadow => "SHA",
        }
    }

    pub fn from_mnemonic(text: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.mnemonic().eq_ignore_ascii_case(text.trim()))
    }

    pub fn group(self) -> SurfaceGroup {
        match self {
            LandCoverClass::BrightImpervious | LandCoverClass::DarkImpervious => {
                SurfaceGroup::Impervious
            }
            _ => SurfaceGroup::NonImpervious,
        }
    }
}

impl std::fmt::Display for LandCoverClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.mnemonic())
    }
}

impl SurfaceGroup {
    pub const ALL: [SurfaceGroup; 2] = [SurfaceGroup::Impervious, SurfaceGroup::NonImpervious];

    pub fn index(self) -> usize {
        match self {
            SurfaceGroup::Impervious => 0,
            SurfaceGroup::NonImpervious => 1,
        }
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            SurfaceGroup::Impervious => "IS",
            SurfaceGroup::NonImpervious => "NIS",
        }
    }
}

impl std::fmt::Display for SurfaceGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.mnemonic())
    }
}

/// One ground-truth pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub x: usize,
    pub y: usize,
    pub label: LandCoverClass,
}

/// A collection of ground-truth pixels.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSampleSet {
    pub samples: Vec<LabeledSample>,
}

impl LabeledSampleSet {
    pub fn new(samples: Vec<LabeledSample>) -> Self {
        Self { samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn class_counts(&self) -> [usize; 6] {
        let mut counts = [0usize; 6];
        for s in &self.samples {
            counts[s.label.code() as usize] += 1;
        }
        counts
    }

    /// Splits every class half/half into (train, test) after a seeded
    /// per-class shuffle; with an odd class count the extra sample tests.
    pub fn split_half(&self, seed: u64) -> (Self, Self) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut train = Vec::new();
        let mut test = Vec::new();
        for class in LandCoverClass::ALL {
            let mut members: Vec<&LabeledSample> =
                self.samples.iter().filter(|s| s.label == class).collect();
            members.shuffle(&mut rng);
            let cut = members.len() / 2;
            train.extend(members[..cut].iter().copied().copied());
            test.extend(members[cut..].iter().copied().copied());
        }
        (Self::new(train), Self::new(test))
    }
}

/// Reads one feature row (all band values) per sample pixel.
pub fn extract_features(image: &RasterImage, samples: &[LabeledSample]) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::with_capacity(samples.len());
    for s in samples {
        if s.x >= image.width() || s.y >= image.height() {
            return Err(Error::InvalidArgument(format!(
                "sample ({}, {}) lies outside the {}x{} image",
                s.x,
                s.y,
                image.width(),
                image.height()
            )));
        }
        let p = s.y * image.width() + s.x;
        rows.push((0..image.bands()).map(|b| image.band(b)[p]).collect());
    }
    Ok(rows)
}

/// Reference-by-row, prediction-by-column count table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(classes: Vec<String>) -> Self {
        let n = classes.len();
        Self { classes, counts: vec![vec![0; n]; n] }
    }

    pub fn record(&mut self, truth: usize, predicted: usize) {
        self.counts[truth][predicted] += 1;
    }

    pub fn from_pairs(classes: Vec<String>, truth: &[usize], predicted: &[usize]) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} reference labels vs {} predictions",
                truth.len(),
                predicted.len()
            )));
        }
        let mut cm = Self::new(classes);
        for (&t, &p) in truth.iter().zip(predicted) {
            if t >= cm.classes.len() || p >= cm.classes.len() {
                return Err(Error::InvalidArgument(format!(
                    "label index out of range for {} classes",
                    cm.classes.len()
                )));
            }
            cm.record(t, p);
        }
        Ok(cm)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|row| row.iter().sum()).collect()
    }

    /// Overall accuracy: trace divided by total count.
    pub fn accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        self.trace() as f64 / total as f64
    }
}

/// Builds the confusion matrix of `predicted` against `truth` (as indices
/// into `classes`) and returns it with the overall accuracy.
pub fn confusion_and_accuracy(
    truth: &[usize],
    predicted: &[usize],
    classes: Vec<String>,
) -> Result<(ConfusionMatrix, f64)> {
    let cm = ConfusionMatrix::from_pairs(classes, truth, predicted)?;
    let accuracy = cm.accuracy();
    Ok((cm, accuracy))
}

fn grouped_table(
    row_labels: &[String],
    groups: &[(String, &ConfusionMatrix)],
    col_width: usize,
    accuracy_row: bool,
) -> Result<String> {
    let first = groups
        .first()
        .ok_or_else(|| Error::InvalidArgument("confusion table needs at least one group".into()))?;
    let classes = &first.1.classes;
    for (name, cm) in groups {
        if cm.classes != *classes {
            return Err(Error::InvalidArgument(format!(
                "confusion group '{name}' uses a different class list"
            )));
        }
        if cm.classes.len() != row_labels.len() {
            return Err(Error::InvalidArgument(format!(
                "confusion group '{name}' has {} classes but {} row labels",
                cm.classes.len(),
                row_labels.len()
            )));
        }
    }
    let label_width = row_labels
        .iter()
        .map(|l| l.len())
        .chain(std::iter::once("Accuracy (%)".len()))
        .max()
        .unwrap()
        + 2;
    let group_width = col_width * classes.len();
    let mut lines = Vec::new();

    let mut header = " ".repeat(label_width);
    for (name, _) in groups {
        header.push_str(&format!("{name:^group_width$}"));
    }
    lines.push(header);

    let mut subheader = " ".repeat(label_width);
    for _ in groups {
        for class in classes {
            subheader.push_str(&format!("{class:>col_width$}"));
        }
    }
    lines.push(subheader);

    for (row, label) in row_labels.iter().enumerate() {
        let mut line = format!("{label:<label_width$}");
        for (_, cm) in groups {
            for col in 0..classes.len() {
                line.push_str(&format!("{:>col_width$}", cm.counts[row][col]));
            }
        }
        lines.push(line);
    }

    if accuracy_row {
        let mut line = format!("{:<label_width$}", "Accuracy (%)");
        for (_, cm) in groups {
            line.push_str(&format!("{:>col_width$}", format!("{:.1}", 100.0 * cm.accuracy())));
            line.push_str(&" ".repeat(group_width - col_width));
        }
        lines.push(line);
    }

    let mut out = String::new();
    for line in lines {
        out.push_str(line.trim_end());
        out.push('\n');
    }
    Ok(out)
}

/// Renders 2x2 impervious/non-impervious matrices side by side, one column
/// group per image, with per-group overall accuracy.
pub fn binary_confusion_table(groups: &[(String, &ConfusionMatrix)]) -> Result<String> {
    let labels = vec!["IS (# pixels)".to_string(), "NIS (# pixels)".to_string()];
    grouped_table(&labels, groups, 8, true)
}

/// Renders 6x6 detail matrices side by side, one column group per image.
pub fn detail_confusion_table(groups: &[(String, &ConfusionMatrix)]) -> Result<String> {
    let labels: Vec<String> = groups
        .first()
        .map(|(_, cm)| cm.classes.clone())
        .unwrap_or_default();
    grouped_table(&labels, groups, 6, false)
}

/// Predicts every pixel of `image` with `model`, returning a label raster
/// of class codes. Pixels are independent, so prediction runs in parallel;
/// the result does not depend on the thread count.
pub fn classify_image(model: &SvmModel, image: &RasterImage) -> Result<RasterImage> {
    if image.bands() != model.feature_dim() {
        return Err(Error::DimensionMismatch(format!(
            "model expects {} features but the image has {} bands",
            model.feature_dim(),
            image.bands()
        )));
    }
    let n = image.pixel_count();
    let codes: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|p| {
            let features: Vec<f64> = (0..image.bands()).map(|b| image.band(b)[p]).collect();
            model.predict(&features) as f64
        })
        .collect();
    RasterImage::from_bands(image.width(), image.height(), image.pixel_size_m(), vec![codes])
}

/// Hyperparameter search configuration shared by both protocol steps.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoStepConfig {
    pub c_grid: Vec<f64>,
    pub gamma_grid: Vec<f64>,
    pub folds: usize,
    pub seed: u64,
}

impl Default for TwoStepConfig {
    fn default() -> Self {
        Self {
            c_grid: default_c_grid(),
            gamma_grid: default_gamma_grid(),
            folds: 5,
            seed: 0,
        }
    }
}

/// Outcome of one protocol step: the searched hyperparameters, the trained
/// model's held-out confusion matrix, and its overall accuracy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepReport {
    pub class_names: Vec<String>,
    pub c: f64,
    pub gamma: f64,
    pub cv_accuracy: f64,
    pub train_count: usize,
    pub test_count: usize,
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
}

/// Result of the two-step protocol: a binary impervious/non-impervious step
/// followed by a six-class detail step, each with its own grid search.
#[derive(Debug, Clone)]
pub struct TwoStepOutcome {
    pub binary: StepReport,
    pub detail: StepReport,
    pub binary_model: SvmModel,
    pub detail_model: SvmModel,
}

/// Grid-searches, trains, and evaluates one classification step on an
/// already extracted train/test feature split.
pub fn evaluate_step(
    train_features: &[Vec<f64>],
    train_labels: &[usize],
    test_features: &[Vec<f64>],
    test_labels: &[usize],
    class_names: Vec<String>,
    config: &TwoStepConfig,
) -> Result<(StepReport, SvmModel)> {
    let search = grid_search(
        train_features,
        train_labels,
        &config.c_grid,
        &config.gamma_grid,
        config.folds,
        config.seed,
    )?;
    let model = svm_train_multiclass(
        train_features,
        train_labels,
        class_names.clone(),
        search.c,
        search.gamma,
    )?;
    let predicted: Vec<usize> = test_features.iter().map(|row| model.predict(row)).collect();
    let (confusion, accuracy) = confusion_and_accuracy(test_labels, &predicted, class_names.clone())?;
    Ok((
        StepReport {
            class_names,
            c: search.c,
            gamma: search.gamma,
            cv_accuracy: search.cv_accuracy,
            train_count: train_features.len(),
            test_count: test_features.len(),
            confusion,
            accuracy,
        },
        model,
    ))
}

/// Runs the two-step protocol on one image: samples are split half/half per
/// class, step one trains impervious vs non-impervious on the grouped
/// labels, step two trains the six-class detail model, and both are
/// evaluated on the held-out half.
pub fn two_step_classify(
    image: &RasterImage,
    samples: &LabeledSampleSet,
    config: &TwoStepConfig,
) -> Result<TwoStepOutcome> {
    let (train, test) = samples.split_half(config.seed);
    if train.is_empty() || test.is_empty() {
        return Err(Error::InvalidArgument(
            "two-step protocol needs a non-empty train and test split".into(),
        ));
    }
    let train_features = extract_features(image, &train.samples)?;
    let test_features = extract_features(image, &test.samples)?;

    let group_names: Vec<String> = SurfaceGroup::ALL.iter().map(|g| g.mnemonic().into()).collect();
    let train_groups: Vec<usize> = train.samples.iter().map(|s| s.label.group().index()).collect();
    let test_groups: Vec<usize> = test.samples.iter().map(|s| s.label.group().index()).collect();
    let (binary, binary_model) = evaluate_step(
        &train_features,
        &train_groups,
        &test_features,
        &test_groups,
        group_names,
        config,
    )?;

    let class_names: Vec<String> = LandCoverClass::ALL.iter().map(|c| c.mnemonic().into()).collect();
    let train_detail: Vec<usize> = train.samples.iter().map(|s| s.label.code() as usize).collect();
    let test_detail: Vec<usize> = test.samples.iter().map(|s| s.label.code() as usize).collect();
    let (detail, detail_model) = evaluate_step(
        &train_features,
        &train_detail,
        &test_features,
        &test_detail,
        class_names,
        config,
    )?;

    Ok(TwoStepOutcome { binary, detail, binary_model, detail_model })
}
