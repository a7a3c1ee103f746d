//! Iterative K-th ordered scale estimation (IKOSE).

use serde::{Deserialize, Serialize};

use crate::error::{MshError, Result};

/// Cap on inlier-count refinements.
pub const MAX_ITERATIONS: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleEstimate {
    pub scale: f64,
    /// Converged inlier count, residuals within `E * scale`.
    pub inlier_count: usize,
    pub iterations: usize,
}

/// Estimates the inlier noise scale from unsorted nonnegative residuals.
///
/// The K-th smallest residual is normalized by the Gaussian quantile
/// `Φ⁻¹((1 + K/ν)/2)`; ν starts at the residual count and is replaced by the
/// number of residuals within `threshold * scale` until it stops changing.
pub fn ikose(residuals: &[f64], k: usize, threshold: f64) -> Result<ScaleEstimate> {
    if k == 0 || k > residuals.len() {
        return Err(MshError::InvalidConfig(format!("IKOSE needs 1 <= K <= {}, got K = {k}", residuals.len())));
    }
    if !(threshold > 0.0) {
        return Err(MshError::InvalidConfig("IKOSE threshold must be positive".into()));
    }

    let mut scratch = residuals.to_vec();
    let (_, kth, _) = scratch.select_nth_unstable_by(k - 1, f64::total_cmp);
    let kth = *kth;
    if !(kth > 0.0) {
        return Err(MshError::DegenerateScale("K-th smallest residual is zero"));
    }

    let mut inliers = residuals.len();
    let mut scale = 0.0;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        scale = kth / inverse_normal_cdf((1.0 + k as f64 / inliers as f64) / 2.0);
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(MshError::DegenerateScale("inlier count collapsed to K"));
        }
        let cutoff = threshold * scale;
        let next = residuals.iter().filter(|&&r| r <= cutoff).count();
        if next < k {
            return Err(MshError::DegenerateScale("inlier count fell below K"));
        }
        if next == inliers {
            break;
        }
        inliers = next;
    }

    Ok(ScaleEstimate { scale, inlier_count: inliers, iterations })
}

/// Standard normal quantile function.
///
/// Rational approximation (P. J. Acklam) with relative error below 1.2e-9 over
/// the open unit interval; returns ±∞ at 0 and 1.
pub fn inverse_normal_cdf(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383_577_518_672_69e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00, 3.754408661907416e+00];
    const P_LOW: f64 = 0.02425;

    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}
