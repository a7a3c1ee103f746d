//! Misclassification error under the best label correspondence.

use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;

use crate::error::{MshError, Result};

/// Percentage of points whose label disagrees with the ground truth after
/// optimally matching predicted structures to true ones.
///
/// Label 0 is the outlier class on both sides and only matches itself. Each
/// remaining label is matched one-to-one; unmatched labels count as errors.
///
/// ```
/// use msh_core::bench::misclassification_error;
/// let err = misclassification_error(&[1, 1, 1, 2, 0], &[1, 1, 2, 2, 0]).unwrap();
/// assert!((err - 20.0).abs() < 1e-12);
/// ```
pub fn misclassification_error(predicted: &[usize], ground_truth: &[usize]) -> Result<f64> {
    if predicted.len() != ground_truth.len() {
        return Err(MshError::LengthMismatch(predicted.len(), ground_truth.len()));
    }
    let n = predicted.len();
    if n == 0 {
        return Ok(0.0);
    }
    let correct = best_agreement(predicted, ground_truth);
    Ok((n - correct) as f64 / n as f64 * 100.0)
}

fn best_agreement(predicted: &[usize], ground_truth: &[usize]) -> usize {
    let rows = predicted.iter().copied().max().unwrap_or(0);
    let cols = ground_truth.iter().copied().max().unwrap_or(0);
    let mut overlap = vec![vec![0i64; cols]; rows];
    let mut outliers = 0;
    for (&p, &g) in predicted.iter().zip(ground_truth) {
        match (p, g) {
            (0, 0) => outliers += 1,
            (0, _) | (_, 0) => {}
            (p, g) => overlap[p - 1][g - 1] += 1,
        }
    }
    if rows == 0 || cols == 0 {
        return outliers;
    }
    let overlap = if rows <= cols { overlap } else { transpose(&overlap) };
    let matrix = Matrix::from_rows(overlap).expect("rectangular overlap table");
    let (matched, _) = kuhn_munkres(&matrix);
    outliers + matched as usize
}

fn transpose(m: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let cols = m[0].len();
    (0..cols).map(|j| m.iter().map(|row| row[j]).collect()).collect()
}
