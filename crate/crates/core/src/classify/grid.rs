//! Stratified cross-validated hyperparameter search for the RBF SVM.
//!
//! The search is organized to reuse work: squared-distance matrices between
//! fold-train and fold-validation rows are computed once per fold, each
//! gamma turns them into kernel tables with one exponential pass, and every
//! C trains its one-vs-one machines against those shared tables. Cells are
//! independent, so they may run in parallel; accuracies are exact integer
//! counts, making the outcome independent of scheduling.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::multiclass::FeatureScaler;
use super::smo::{smo_solve, SmoParams};

/// Conventional coarse search range for the penalty parameter:
/// 2⁻⁵, 2⁻³, …, 2¹⁵.
pub fn default_c_grid() -> Vec<f64> {
    (-5..=15).step_by(2).map(|e| (e as f64).exp2()).collect()
}

/// Conventional coarse search range for the kernel width:
/// 2⁻¹⁵, 2⁻¹³, …, 2³.
pub fn default_gamma_grid() -> Vec<f64> {
    (-15..=3).step_by(2).map(|e| (e as f64).exp2()).collect()
}

/// The selected cell and its cross-validation accuracy.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridSearchOutcome {
    pub c: f64,
    pub gamma: f64,
    pub cv_accuracy: f64,
}

/// Assigns one fold index per sample so every class is spread evenly over
/// the folds: class members are shuffled with the seeded generator and
/// dealt round-robin.
pub fn stratified_folds(labels: &[usize], folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 folds, got {folds}")));
    }
    if labels.is_empty() {
        return Err(Error::InvalidArgument("no samples to fold".into()));
    }
    let n_classes = labels.iter().max().unwrap() + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; labels.len()];
    for class in 0..n_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < folds {
            return Err(Error::InvalidArgument(format!(
                "class {class} has {} samples, fewer than the {folds} folds",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        for (pos, &idx) in members.iter().enumerate() {
            assignment[idx] = pos % folds;
        }
    }
    Ok(assignment)
}

/// Flat row-major matrix of squared Euclidean distances between two row
/// sets.
fn squared_distances(rows: &[Vec<f64>], cols: &[Vec<f64>]) -> Vec<f64> {
    let width = cols.len();
    let mut out = vec![0.0f64; rows.len() * width];
    out.par_chunks_mut(width).enumerate().for_each(|(r, chunk)| {
        for (cell, col) in chunk.iter_mut().zip(cols) {
            let mut acc = 0.0;
            for (&a, &b) in rows[r].iter().zip(col) {
                let d = a - b;
                acc += d * d;
            }
            *cell = acc;
        }
    });
    out
}

fn kernel_table(distances: &[f64], gamma: f64) -> Vec<f64> {
    let mut out = vec![0.0f64; distances.len()];
    out.par_chunks_mut(4096)
        .zip(distances.par_chunks(4096))
        .for_each(|(dst, src)| {
            for (o, &d) in dst.iter_mut().zip(src) {
                *o = (-gamma * d).exp();
            }
        });
    out
}

/// A fold-local pair machine: positions into the fold-train row set plus the
/// solved multipliers.
struct FoldMachine {
    positive: usize,
    negative: usize,
    positions: Vec<usize>,
    signed_alphas: Vec<f64>,
    rho: f64,
}

/// Trains one-vs-one machines for every class pair against a cached kernel
/// table and counts correct validation votes.
fn evaluate_cell(
    c: f64,
    members: &[Vec<usize>],
    val_labels: &[usize],
    k_tt: &[f64],
    k_vt: &[f64],
    n_train: usize,
) -> Result<u64> {
    let n_classes = members.len();
    let mut machines = Vec::new();
    for a in 0..n_classes {
        for b in (a + 1)..n_classes {
            let positions: Vec<usize> =
                members[a].iter().chain(&members[b]).copied().collect();
            let y: Vec<f64> = members[a]
                .iter()
                .map(|_| 1.0)
                .chain(members[b].iter().map(|_| -1.0))
                .collect();
            // Cross-validation only ranks cells, so cap the iteration budget
            // well below the final-training bound.
            let params =
                SmoParams { c, tol: 1e-3, max_iter: 10_000.max(20 * positions.len()) };
            let outcome = smo_solve(
                positions.len(),
                |i, j| k_tt[positions[i] * n_train + positions[j]],
                &y,
                &params,
            )?;
            let signed_alphas: Vec<f64> =
                outcome.alphas.iter().zip(&y).map(|(&a, &s)| a * s).collect();
            machines.push(FoldMachine { positive: a, negative: b, positions, signed_alphas, rho: outcome.rho });
        }
    }

    let mut correct = 0u64;
    for (v, &truth) in val_labels.iter().enumerate() {
        let mut votes = vec![0u32; n_classes];
        for m in &machines {
            let mut decision = -m.rho;
            for (&pos, &coeff) in m.positions.iter().zip(&m.signed_alphas) {
                if coeff != 0.0 {
                    decision += coeff * k_vt[v * n_train + pos];
                }
            }
            if decision > 0.0 {
                votes[m.positive] += 1;
            } else {
                votes[m.negative] += 1;
            }
        }
        let mut winner = 0;
        for (idx, &count) in votes.iter().enumerate() {
            if count > votes[winner] {
                winner = idx;
            }
        }
        if winner == truth {
            correct += 1;
        }
    }
    Ok(correct)
}

/// Searches (C, gamma) by stratified k-fold cross-validation and returns the
/// most accurate cell; exact ties prefer the smaller C, then the smaller
/// gamma. Deterministic for a fixed seed.
pub fn grid_search(
    features: &[Vec<f64>],
    labels: &[usize],
    c_grid: &[f64],
    gamma_grid: &[f64],
    folds: usize,
    seed: u64,
) -> Result<GridSearchOutcome> {
    if c_grid.is_empty() || gamma_grid.is_empty() {
        return Err(Error::InvalidArgument("empty hyperparameter grid".into()));
    }
    for &v in c_grid.iter().chain(gamma_grid) {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grid values must be positive, got {v}"
            )));
        }
    }
    if features.len() != labels.len() || features.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "{} feature rows vs {} labels",
            features.len(),
            labels.len()
        )));
    }
    let assignment = stratified_folds(labels, folds, seed)?;
    let n_classes = labels.iter().max().unwrap() + 1;
    if n_classes < 2 {
        return Err(Error::InvalidArgument("grid search needs at least 2 classes".into()));
    }

    let mut correct = vec![vec![0u64; gamma_grid.len()]; c_grid.len()];
    for fold in 0..folds {
        let train_idx: Vec<usize> =
            (0..labels.len()).filter(|&i| assignment[i] != fold).collect();
        let val_idx: Vec<usize> = (0..labels.len()).filter(|&i| assignment[i] == fold).collect();

        let train_rows: Vec<Vec<f64>> = train_idx.iter().map(|&i| features[i].clone()).collect();
        let scaler = FeatureScaler::fit(&train_rows)?;
        let scaled_train: Vec<Vec<f64>> = train_rows.iter().map(|r| scaler.transform(r)).collect();
        let scaled_val: Vec<Vec<f64>> =
            val_idx.iter().map(|&i| scaler.transform(&features[i])).collect();
        let val_labels: Vec<usize> = val_idx.iter().map(|&i| labels[i]).collect();

        let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
        for (local, &global) in train_idx.iter().enumerate() {
            members[labels[global]].push(local);
        }

        let n_train = scaled_train.len();
        let d_tt = squared_distances(&scaled_train, &scaled_train);
        let d_vt = squared_distances(&scaled_val, &scaled_train);

        for (gi, &gamma) in gamma_grid.iter().enumerate() {
            let k_tt = kernel_table(&d_tt, gamma);
            let k_vt = kernel_table(&d_vt, gamma);
            let counts: Result<Vec<u64>> = c_grid
                .par_iter()
                .map(|&c| evaluate_cell(c, &members, &val_labels, &k_tt, &k_vt, n_train))
                .collect();
            for (ci, count) in counts?.into_iter().enumerate() {
                correct[ci][gi] += count;
            }
        }
    }

    let total = labels.len() as f64;
    let mut best: Option<GridSearchOutcome> = None;
    let mut best_count = 0u64;
    for (ci, &c) in c_grid.iter().enumerate() {
        for (gi, &gamma) in gamma_grid.iter().enumerate() {
            let count = correct[ci][gi];
            let better = match &best {
                None => true,
                Some(b) => {
                    count > best_count
                        || (count == best_count && (c < b.c || (c == b.c && gamma < b.gamma)))
                }
            };
            if better {
                best_count = count;
                best = Some(GridSearchOutcome { c, gamma, cv_accuracy: count as f64 / total });
            }
        }
    }
    Ok(best.expect("grids are non-empty"))
}
