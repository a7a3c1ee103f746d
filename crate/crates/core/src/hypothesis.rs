//! Proximity sampling of minimal subsets and hypothesis generation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MshError, Result};
use crate::geometry::{bounding_diagonal, check_dimension, fit_minimal, DataPoint, ModelKind, ModelParams};

/// Hypotheses generated per independently seeded sub-stream.
pub const PARTITION_SIZE: usize = 256;

/// Fraction of the bounding-box diagonal used as the default proximity sigma.
pub const DEFAULT_SIGMA_FRACTION: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub hypothesis_count: usize,
    pub proximity_sigma: f64,
    pub rng_seed: u64,
    pub max_resample_attempts: usize,
}

impl SamplerConfig {
    /// Uses the default sigma of a tenth of the data's bounding-box diagonal.
    pub fn for_points(points: &[DataPoint], hypothesis_count: usize, rng_seed: u64) -> Self {
        Self {
            hypothesis_count,
            proximity_sigma: default_proximity_sigma(points),
            rng_seed,
            max_resample_attempts: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hypothesis_count == 0 {
            return Err(MshError::InvalidConfig("hypothesis_count must be at least 1".into()));
        }
        if !(self.proximity_sigma > 0.0) || !self.proximity_sigma.is_finite() {
            return Err(MshError::InvalidConfig("proximity_sigma must be positive".into()));
        }
        if self.max_resample_attempts == 0 {
            return Err(MshError::InvalidConfig("max_resample_attempts must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn default_proximity_sigma(points: &[DataPoint]) -> f64 {
    let diag = bounding_diagonal(points);
    if diag > 0.0 {
        DEFAULT_SIGMA_FRACTION * diag
    } else {
        1.0
    }
}

/// Draws `m` distinct indices: the first uniformly, the rest without
/// replacement with probability proportional to `exp(-d²/σ²)`, `d` being the
/// distance to the first pick.
pub fn proximity_sample<R: Rng + ?Sized>(
    points: &[DataPoint],
    m: usize,
    sigma: f64,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let n = points.len();
    if m > n {
        return Err(MshError::InsufficientPoints { needed: m, available: n });
    }
    if m == n {
        return Ok((0..n).collect());
    }
    if m == 0 {
        return Ok(Vec::new());
    }

    let first = rng.random_range(0..n);
    let anchor = &points[first];
    let inv_var = 1.0 / (sigma * sigma);
    // Log-weights; taken points are marked with -inf.
    let mut log_w: Vec<f64> = points.iter().map(|p| -p.distance_squared(anchor) * inv_var).collect();
    log_w[first] = f64::NEG_INFINITY;

    let mut picked = Vec::with_capacity(m);
    picked.push(first);
    let mut weights = vec![0.0; n];
    while picked.len() < m {
        let top = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for (w, &lw) in weights.iter_mut().zip(&log_w) {
            *w = (lw - top).exp();
            total += *w;
        }
        let mut target = rng.random::<f64>() * total;
        let mut choice = None;
        for (i, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            choice = Some(i);
            if target < w {
                break;
            }
            target -= w;
        }
        let choice = choice.expect("at least one point remains");
        log_w[choice] = f64::NEG_INFINITY;
        picked.push(choice);
    }
    Ok(picked)
}

/// Generates exactly `config.hypothesis_count` non-degenerate hypotheses.
///
/// Work is split into fixed partitions of [`PARTITION_SIZE`] hypotheses, each
/// with its own ChaCha stream derived from the seed, so the output does not
/// depend on the number of worker threads.
pub fn generate_hypotheses(points: &[DataPoint], kind: ModelKind, config: &SamplerConfig) -> Result<Vec<ModelParams>> {
    config.validate()?;
    check_dimension(kind, points)?;
    let m = kind.minimal_size();
    if points.len() < m {
        return Err(MshError::InsufficientPoints { needed: m, available: points.len() });
    }

    let partitions = config.hypothesis_count.div_ceil(PARTITION_SIZE);
    let chunks: Vec<Vec<ModelParams>> = (0..partitions)
        .into_par_iter()
        .map(|part| {
            let quota = PARTITION_SIZE.min(config.hypothesis_count - part * PARTITION_SIZE);
            let mut rng = partition_rng(config.rng_seed, part as u64);
            generate_partition(points, kind, config, quota, &mut rng)
        })
        .collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

fn partition_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn generate_partition(
    points: &[DataPoint],
    kind: ModelKind,
    config: &SamplerConfig,
    quota: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<ModelParams>> {
    let m = kind.minimal_size();
    let mut out = Vec::with_capacity(quota);
    let mut subset = Vec::with_capacity(m);
    let mut failures = 0;
    while out.len() < quota {
        let idx = proximity_sample(points, m, config.proximity_sigma, rng)?;
        subset.clear();
        subset.extend(idx.iter().map(|&i| points[i]));
        match fit_minimal(kind, &subset) {
            Ok(params) => {
                failures = 0;
                out.push(params);
            }
            Err(MshError::Degenerate { .. }) => {
                failures += 1;
                if failures >= config.max_resample_attempts {
                    return Err(MshError::GenerationExhausted { attempts: failures });
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
