//! Non-negative least squares by the Lawson-Hanson active-set method,
//! formulated on the normal equations. The systems here are tiny (one
//! unknown per multispectral band), so the passive-set solves use dense
//! Gaussian elimination.

use crate::error::{Error, Result};

use super::linalg::solve_dense;

/// Minimises `||A w - b||^2` subject to `w >= 0`, given the Gram matrix
/// `gram = A^T A` and right-hand side `rhs = A^T b`.
///
/// The active set starts empty and admits one variable per outer iteration
/// (the most positive gradient of the unconstrained objective, ties broken by
/// the lowest index); an inner loop walks back towards feasibility whenever
/// an unconstrained subproblem turns a passive variable negative. The solver
/// is deterministic and terminates in at most `max_iter` outer iterations.
pub fn nnls(gram: &[Vec<f64>], rhs: &[f64], max_iter: usize) -> Result<Vec<f64>> {
    let n = rhs.len();
    if gram.len() != n || gram.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidArgument(
            "gram matrix shape does not match right-hand side".into(),
        ));
    }
    let scale = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let tol = 1e-12 * scale;

    let mut w = vec![0.0; n];
    let mut passive = vec![false; n];

    for _outer in 0..max_iter {
        // Gradient of -0.5 * objective: rhs - gram * w.
        let mut grad = vec![0.0; n];
        for i in 0..n {
            let mut acc = rhs[i];
            for j in 0..n {
                acc -= gram[i][j] * w[j];
            }
            grad[i] = acc;
        }
        // Most promising zero-set variable.
        let mut candidate = None;
        for i in 0..n {
            if !passive[i] && grad[i] > tol {
                let better = match candidate {
                    Some((_, best)) => grad[i] > best,
                    None => true,
                };
                if better {
                    candidate = Some((i, grad[i]));
                }
            }
        }
        let Some((enter, _)) = candidate else {
            return Ok(w); // KKT satisfied: all zero-set gradients <= 0.
        };
        passive[enter] = true;

        // Inner loop: solve on the passive set, clip back if infeasible.
        loop {
            let idx: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
            let mut sub = idx
                .iter()
                .map(|&i| idx.iter().map(|&j| gram[i][j]).collect::<Vec<f64>>())
                .collect::<Vec<_>>();
            let mut sub_rhs = idx.iter().map(|&i| rhs[i]).collect::<Vec<f64>>();
            let z = match solve_dense(&mut sub, &mut sub_rhs) {
                Ok(z) => z,
                Err(_) => {
                    // Collinear column: drop the variable we just admitted and
                    // treat the previous iterate as final for it.
                    passive[enter] = false;
                    break;
                }
            };
            if z.iter().all(|&v| v > tol) {
                for (&i, &v) in idx.iter().zip(&z) {
                    w[i] = v;
                }
                break;
            }
            // Step from w towards z only as far as feasibility allows, then
            // retire every variable that hit zero.
            let mut alpha = f64::INFINITY;
            for (&i, &zi) in idx.iter().zip(&z) {
                if zi <= tol {
                    let denom = w[i] - zi;
                    if denom > 0.0 {
                        alpha = alpha.min(w[i] / denom);
                    }
                }
            }
            if !alpha.is_finite() {
                passive[enter] = false;
                break;
            }
            for (&i, &zi) in idx.iter().zip(&z) {
                w[i] += alpha * (zi - w[i]);
                if w[i] <= tol {
                    w[i] = 0.0;
                    passive[i] = false;
                }
            }
        }
    }
    Err(Error::NonConvergence(format!(
        "active-set NNLS did not settle in {max_iter} iterations"
    )))
}
