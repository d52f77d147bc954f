//! One-vs-one multiclass SVM with per-feature standardization.
//!
//! One binary machine is trained per unordered pair of classes present in
//! the training data; prediction standardizes the query with the training
//! statistics, lets every machine vote, and returns the class with the most
//! votes (ties go to the class earliest in the model's class list).

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::smo::{svm_train_binary, BinarySvm, SmoParams};

/// Per-feature affine standardization fitted on training data only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaler {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl FeatureScaler {
    /// Fits population means and standard deviations; features with zero
    /// spread keep a unit scale so they pass through centered.
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidArgument("cannot fit a scaler on no rows".into()));
        }
        let dim = rows[0].len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch("inconsistent feature dimensions".into()));
        }
        let mut means = vec![0.0f64; dim];
        for row in rows {
            for (m, &v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n as f64;
        }
        let mut stds = vec![0.0f64; dim];
        for row in rows {
            for (s, (&v, &m)) in stds.iter_mut().zip(row.iter().zip(&means)) {
                let d = v - m;
                *s += d * d;
            }
        }
        for s in &mut stds {
            *s = (*s / n as f64).sqrt();
            if *s == 0.0 {
                *s = 1.0;
            }
        }
        Ok(Self { means, stds })
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    /// Standardizes one row. The row length must match the fitted dimension.
    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        assert_eq!(row.len(), self.dim(), "feature dimension mismatch");
        row.iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(&v, (&m, &s))| (v - m) / s)
            .collect()
    }
}

/// One binary machine voting between two class indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseMachine {
    /// Class voted for when the decision value is positive.
    pub positive: usize,
    /// Class voted for otherwise.
    pub negative: usize,
    pub svm: BinarySvm,
}

/// A trained multiclass model: the class list, hyperparameters, the feature
/// scaler, and one machine per class pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub class_names: Vec<String>,
    pub c: f64,
    pub gamma: f64,
    pub scaler: FeatureScaler,
    pub machines: Vec<PairwiseMachine>,
}

impl SvmModel {
    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.scaler.dim()
    }

    /// Predicts the class index of one raw (unscaled) feature row.
    pub fn predict(&self, features: &[f64]) -> usize {
        let scaled = self.scaler.transform(features);
        let mut votes = vec![0u32; self.n_classes()];
        for machine in &self.machines {
            if machine.svm.decision(&scaled) > 0.0 {
                votes[machine.positive] += 1;
            } else {
                votes[machine.negative] += 1;
            }
        }
        let mut winner = 0;
        for (idx, &v) in votes.iter().enumerate() {
            if v > votes[winner] {
                winner = idx;
            }
        }
        winner
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut writer = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut writer, self)?;
        writer.write_all(b"\n")?;
        writer.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let reader = BufReader::new(File::open(path)?);
        Ok(serde_json::from_reader(reader)?)
    }
}

/// Trains a one-vs-one model. `labels` are indices into `class_names`; at
/// least two distinct classes must be present.
pub fn svm_train_multiclass(
    features: &[Vec<f64>],
    labels: &[usize],
    class_names: Vec<String>,
    c: f64,
    gamma: f64,
) -> Result<SvmModel> {
    if features.len() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} feature rows vs {} labels",
            features.len(),
            labels.len()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
        return Err(Error::InvalidArgument(format!(
            "label index {bad} out of range for {} classes",
            class_names.len()
        )));
    }
    let scaler = FeatureScaler::fit(features)?;
    let scaled: Vec<Vec<f64>> = features.iter().map(|r| scaler.transform(r)).collect();

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); class_names.len()];
    for (idx, &label) in labels.iter().enumerate() {
        members[label].push(idx);
    }
    let present: Vec<usize> =
        (0..class_names.len()).filter(|&cl| !members[cl].is_empty()).collect();
    if present.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "multiclass training needs at least 2 classes present, got {}",
            present.len()
        )));
    }

    let params = SmoParams::new(c);
    let mut machines = Vec::new();
    for (ai, &a) in present.iter().enumerate() {
        for &b in &present[ai + 1..] {
            let mut pair_features = Vec::with_capacity(members[a].len() + members[b].len());
            let mut pair_y = Vec::with_capacity(pair_features.capacity());
            for &idx in &members[a] {
                pair_features.push(scaled[idx].clone());
                pair_y.push(1.0);
            }
            for &idx in &members[b] {
                pair_features.push(scaled[idx].clone());
                pair_y.push(-1.0);
            }
            let svm = svm_train_binary(&pair_features, &pair_y, gamma, &params)?;
            machines.push(PairwiseMachine { positive: a, negative: b, svm });
        }
    }
    Ok(SvmModel { class_names, c, gamma, scaler, machines })
}
