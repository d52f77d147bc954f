//! Sequential minimal optimization for the soft-margin SVM dual problem.
//!
//! The solver minimizes `0.5 aᵀQa - Σa` subject to `0 ≤ a_i ≤ C` and
//! `Σ y_i a_i = 0`, where `Q_ij = y_i y_j K(i, j)`. Each iteration picks the
//! maximal violating pair (ties resolved to the smallest index so runs are
//! reproducible), solves the two-variable subproblem analytically, and
//! updates the gradient. The kernel is supplied as a closure over sample
//! indices, so callers can back it with a cached matrix or compute entries
//! on the fly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Floor for the two-variable quadratic coefficient, guarding indefinite or
/// numerically flat directions.
const TAU: f64 = 1e-12;

/// Solver configuration. `max_iter = 0` selects an automatic bound scaled
/// with the training-set size.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SmoParams {
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl SmoParams {
    pub fn new(c: f64) -> Self {
        Self { c, tol: 1e-3, max_iter: 0 }
    }
}

/// Raw solver output over the full training set.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// One multiplier per training sample, each in [0, C].
    pub alphas: Vec<f64>,
    /// Decision threshold; the decision function is `Σ a_i y_i K(x_i, x) - rho`.
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Gaussian radial basis kernel `exp(-gamma * ||a - b||²)`.
pub fn rbf_kernel(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut dist = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        let d = x - y;
        dist += d * d;
    }
    (-gamma * dist).exp()
}

/// Runs SMO over `n` samples with labels `y` (each exactly +1 or -1) and the
/// kernel closure `kernel(i, j) = K(x_i, x_j)`.
pub fn smo_solve<K>(n: usize, kernel: K, y: &[f64], params: &SmoParams) -> Result<TrainOutcome>
where
    K: Fn(usize, usize) -> f64,
{
    if n == 0 || y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for {} samples",
            y.len(),
            n
        )));
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::InvalidArgument("labels must be exactly +1 or -1".into()));
    }
    if !y.contains(&1.0) || !y.contains(&-1.0) {
        return Err(Error::InvalidArgument("training set must contain both classes".into()));
    }
    if !(params.c.is_finite() && params.c > 0.0) {
        return Err(Error::InvalidArgument(format!("C must be positive, got {}", params.c)));
    }
    if !(params.tol.is_finite() && params.tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {}",
            params.tol
        )));
    }
    let c = params.c;
    let max_iter = if params.max_iter == 0 {
        100_000.max(100 * n)
    } else {
        params.max_iter
    };

    let mut alpha = vec![0.0f64; n];
    // Gradient of the dual objective; all alphas start at zero.
    let mut g = vec![-1.0f64; n];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iter {
        // Maximal violating pair: i maximizes -y·G over samples whose alpha
        // can still grow along +y, j minimizes it over samples whose alpha
        // can shrink along -y.
        let mut i = usize::MAX;
        let mut m_up = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut m_low = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * g[t];
            let in_up = (y[t] > 0.0 && alpha[t] < c) || (y[t] < 0.0 && alpha[t] > 0.0);
            let in_low = (y[t] > 0.0 && alpha[t] > 0.0) || (y[t] < 0.0 && alpha[t] < c);
            if in_up && v > m_up {
                m_up = v;
                i = t;
            }
            if in_low && v < m_low {
                m_low = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || m_up - m_low <= params.tol {
            converged = true;
            break;
        }

        let k_ii = kernel(i, i);
        let k_jj = kernel(j, j);
        let k_ij = kernel(i, j);
        let quad = (k_ii + k_jj - 2.0 * k_ij).max(TAU);
        let old_ai = alpha[i];
        let old_aj = alpha[j];

        if y[i] != y[j] {
            let delta = (-g[i] - g[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (g[i] - g[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let d_ai = alpha[i] - old_ai;
        let d_aj = alpha[j] - old_aj;
        if d_ai != 0.0 || d_aj != 0.0 {
            for t in 0..n {
                g[t] += y[t] * (y[i] * kernel(i, t) * d_ai + y[j] * kernel(j, t) * d_aj);
            }
        }
        iterations += 1;
    }

    if !converged {
        log::warn!(
            "SMO stopped after {iterations} iterations without meeting the \
             {} stopping tolerance",
            params.tol
        );
    }

    // Threshold from free multipliers when any exist, otherwise the midpoint
    // of the bound-derived bracket.
    let mut upper = f64::INFINITY;
    let mut lower = f64::NEG_INFINITY;
    let mut free_sum = 0.0;
    let mut free_count = 0usize;
    for t in 0..n {
        let yg = y[t] * g[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else {
            free_sum += yg;
            free_count += 1;
        }
    }
    let rho = if free_count > 0 {
        free_sum / free_count as f64
    } else {
        (upper + lower) / 2.0
    };

    Ok(TrainOutcome { alphas: alpha, rho, iterations, converged })
}

/// A trained binary machine: the retained support vectors, their signed
/// dual coefficients `a_i·y_i`, and the decision threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySvm {
    pub c: f64,
    pub gamma: f64,
    pub bias: f64,
    pub support_vectors: Vec<Vec<f64>>,
    pub coefficients: Vec<f64>,
}

impl BinarySvm {
    /// Decision value `Σ coeff_i K(sv_i, x) + bias`; the predicted label is
    /// its sign.
    pub fn decision(&self, x: &[f64]) -> f64 {
        let mut acc = self.bias;
        for (sv, &coeff) in self.support_vectors.iter().zip(&self.coefficients) {
            acc += coeff * rbf_kernel(sv, x, self.gamma);
        }
        acc
    }
}

/// Trains one binary machine on already standardized features with the RBF
/// kernel; `y` entries must be +1 or -1.
pub fn svm_train_binary(
    features: &[Vec<f64>],
    y: &[f64],
    gamma: f64,
    params: &SmoParams,
) -> Result<BinarySvm> {
    let n = features.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    let dim = features[0].len();
    if dim == 0 || features.iter().any(|row| row.len() != dim) {
        return Err(Error::DimensionMismatch("inconsistent feature dimensions".into()));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    let mut matrix = vec![0.0f64; n * n];
    for i in 0..n {
        for j in i..n {
            let k = rbf_kernel(&features[i], &features[j], gamma);
            matrix[i * n + j] = k;
            matrix[j * n + i] = k;
        }
    }
    let outcome = smo_solve(n, |i, j| matrix[i * n + j], y, params)?;

    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    for (idx, &a) in outcome.alphas.iter().enumerate() {
        if a > 0.0 {
            support_vectors.push(features[idx].clone());
            coefficients.push(a * y[idx]);
        }
    }
    Ok(BinarySvm {
        c: params.c,
        gamma,
        bias: -outcome.rho,
        support_vectors,
        coefficients,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn training_accuracy(svm: &BinarySvm, features: &[Vec<f64>], y: &[f64]) -> f64 {
        let correct = features
            .iter()
            .zip(y)
            .filter(|(row, &label)| svm.decision(row) * label > 0.0)
            .count();
        correct as f64 / y.len() as f64
    }

    #[test]
    fn separable_one_dimensional_problem_is_learned_perfectly() {
        let features = vec![vec![0.0], vec![0.1], vec![0.9], vec![1.0]];
        let y = vec![-1.0, -1.0, 1.0, 1.0];
        let svm = svm_train_binary(&features, &y, 1.0, &SmoParams::new(1.0)).unwrap();
        assert_eq!(training_accuracy(&svm, &features, &y), 1.0);
    }

    #[test]
    fn xor_is_separated_by_the_rbf_kernel() {
        let features = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]];
        let y = vec![1.0, 1.0, -1.0, -1.0];
        let svm = svm_train_binary(&features, &y, 1.0, &SmoParams::new(10.0)).unwrap();
        assert_eq!(training_accuracy(&svm, &features, &y), 1.0);
    }

    #[test]
    fn conflicting_duplicates_do_not_crash() {
        let features = vec![vec![0.5], vec![0.5]];
        let y = vec![1.0, -1.0];
        let svm = svm_train_binary(&features, &y, 1.0, &SmoParams::new(5.0)).unwrap();
        let correct = features
            .iter()
            .zip(&y)
            .filter(|(row, &label)| svm.decision(row) * label > 0.0)
            .count();
        assert!(correct <= 1);
    }

    fn random_problem(seed: u64, n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut features = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let label = if i % 2 == 0 { 1.0 } else { -1.0 };
            let center = if label > 0.0 { 0.8 } else { 0.2 };
            features.push(vec![
                center + 0.3 * (rng.gen::<f64>() - 0.5),
                center + 0.3 * (rng.gen::<f64>() - 0.5),
            ]);
            y.push(label);
        }
        (features, y)
    }

    #[test]
    fn solution_satisfies_the_optimality_conditions() {
        let (features, y) = random_problem(5, 60);
        let params = SmoParams::new(4.0);
        let gamma = 0.7;
        let matrix: Vec<f64> = (0..60 * 60)
            .map(|p| rbf_kernel(&features[p / 60], &features[p % 60], gamma))
            .collect();
        let outcome = smo_solve(60, |i, j| matrix[i * 60 + j], &y, &params).unwrap();
        assert!(outcome.converged);

        // Multipliers stay boxed and balance the two classes.
        let mut balance = 0.0;
        for (&a, &label) in outcome.alphas.iter().zip(&y) {
            assert!((0.0..=params.c).contains(&a));
            balance += a * label;
        }
        assert!(balance.abs() <= 1e-9, "class balance violated: {balance}");

        // Margin conditions per multiplier regime.
        for i in 0..60 {
            let u: f64 = (0..60)
                .map(|j| outcome.alphas[j] * y[j] * matrix[i * 60 + j])
                .sum();
            let yf = y[i] * (u - outcome.rho);
            let a = outcome.alphas[i];
            if a <= 0.0 {
                assert!(yf >= 1.0 - 2.0 * params.tol, "zero multiplier but margin {yf}");
            } else if a >= params.c {
                assert!(yf <= 1.0 + 2.0 * params.tol, "bound multiplier but margin {yf}");
            } else {
                assert!((yf - 1.0).abs() <= 2.0 * params.tol, "free multiplier margin {yf}");
            }
        }
    }

    #[test]
    fn training_is_bit_reproducible() {
        let (features, y) = random_problem(9, 40);
        let params = SmoParams::new(2.0);
        let a = svm_train_binary(&features, &y, 0.5, &params).unwrap();
        let b = svm_train_binary(&features, &y, 0.5, &params).unwrap();
        assert_eq!(a.bias.to_bits(), b.bias.to_bits());
        assert_eq!(a.coefficients.len(), b.coefficients.len());
        for (x, z) in a.coefficients.iter().zip(&b.coefficients) {
            assert_eq!(x.to_bits(), z.to_bits());
        }
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let features = vec![vec![0.0], vec![1.0]];
        assert!(svm_train_binary(&features, &[1.0, 1.0], 1.0, &SmoParams::new(1.0)).is_err());
        assert!(svm_train_binary(&features, &[1.0, 0.5], 1.0, &SmoParams::new(1.0)).is_err());
        assert!(svm_train_binary(&features, &[1.0, -1.0], -1.0, &SmoParams::new(1.0)).is_err());
        assert!(svm_train_binary(&features, &[1.0, -1.0], 1.0, &SmoParams::new(0.0)).is_err());
        assert!(svm_train_binary(&[], &[], 1.0, &SmoParams::new(1.0)).is_err());
    }
}
