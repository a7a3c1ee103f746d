//! Mode seeking on the hypergraph.
//!
//! Every sampled vertex gets a minimum T-distance (MTD): its Tanimoto distance
//! to the closest vertex of strictly higher weight. Vertices that are both
//! heavy and far from any heavier vertex are authority peaks; they are
//! separated from the rest at the largest drop of the sorted MTD sequence.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MshError, Result};
use crate::geometry::{check_dimension, fit_least_squares, DataPoint, ModelKind, ModelParams};
use crate::hypergraph::{build_hypergraph, Hypergraph};
use crate::hypothesis::{default_proximity_sigma, generate_hypotheses, SamplerConfig};

/// ChaCha stream reserved for weight-aware sampling; hypothesis partitions
/// use the low stream numbers.
const WAS_STREAM: u64 = u64::MAX;

/// Soft inlier affinities of one vertex over all hyperedges, stored sparsely.
///
/// Entry `e` is `exp(-r_e / ŝ)` for incident hyperedges and zero elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct PreferenceVector {
    len: usize,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl PreferenceVector {
    /// Builds a vector from dense entries, dropping zeros.
    pub fn from_dense(values: &[f64]) -> Self {
        let len = values.len();
        let (indices, values) =
            values.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(i, &v)| (i as u32, v)).unzip();
        Self { len, indices, values }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.len];
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            dense[i as usize] = v;
        }
        dense
    }

    pub fn norm_squared(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn dot(&self, other: &PreferenceVector) -> f64 {
        let (mut i, mut j) = (0, 0);
        let mut acc = 0.0;
        while i < self.indices.len() && j < other.indices.len() {
            match self.indices[i].cmp(&other.indices[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.values[i] * other.values[j];
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }
}

pub fn preference_vector(graph: &Hypergraph, v: usize) -> PreferenceVector {
    let vertex = graph.vertex(v);
    PreferenceVector {
        len: graph.n_edges(),
        indices: vertex.edges().to_vec(),
        values: vertex.residuals().iter().map(|r| (-r / vertex.scale).exp()).collect(),
    }
}

/// Tanimoto distance `1 - <p,q> / (|p|² + |q|² - <p,q>)`.
pub fn tanimoto(p: &PreferenceVector, q: &PreferenceVector) -> Result<f64> {
    let pp = p.norm_squared();
    let qq = q.norm_squared();
    if pp == 0.0 || qq == 0.0 {
        return Err(MshError::ZeroVector);
    }
    Ok(tanimoto_from_parts(p.dot(q), pp, qq))
}

#[inline]
fn tanimoto_from_parts(pq: f64, pp: f64, qq: f64) -> f64 {
    (1.0 - pq / (pp + qq - pq)).clamp(0.0, 1.0)
}

/// Samples `m` distinct vertices, each draw proportional to the weights of
/// the vertices not yet taken.
pub fn weight_aware_sample<R: Rng + ?Sized>(graph: &Hypergraph, m: usize, rng: &mut R) -> Result<Vec<usize>> {
    sample_by_weight(&graph.weights(), m, rng)
}

pub(crate) fn sample_by_weight<R: Rng + ?Sized>(weights: &[f64], m: usize, rng: &mut R) -> Result<Vec<usize>> {
    if m == 0 || m > weights.len() {
        return Err(MshError::InvalidConfig(format!("sample size {m} outside 1..={}", weights.len())));
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(MshError::AllZeroWeights);
    }
    if m == weights.len() {
        return Ok((0..m).collect());
    }

    let mut remaining = weights.to_vec();
    let mut taken = vec![false; weights.len()];
    let mut picked = Vec::with_capacity(m);
    while picked.len() < m {
        let total: f64 = remaining.iter().sum();
        if !(total > 0.0) {
            // Only zero-weight vertices are left; take them in index order.
            picked.extend((0..weights.len()).filter(|&i| !taken[i]).take(m - picked.len()));
            break;
        }
        let mut target = rng.random::<f64>() * total;
        let mut choice = None;
        for (i, &w) in remaining.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            choice = Some(i);
            if target < w {
                break;
            }
            target -= w;
        }
        let choice = choice.expect("positive total implies a positive weight");
        remaining[choice] = 0.0;
        taken[choice] = true;
        picked.push(choice);
    }
    Ok(picked)
}

/// One row of the MTD trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MtdEntry {
    /// Vertex index in the hypergraph.
    pub vertex: usize,
    pub eta: f64,
    pub weight: f64,
}

/// Minimum T-distance of every sampled vertex, restricted to the sample.
///
/// A vertex with no strictly heavier sampled vertex (the maximum-weight
/// vertex) takes its largest distance to any other sampled vertex instead,
/// or 0 when it is alone. Output follows the order of `sampled`.
pub fn minimum_t_distances(graph: &Hypergraph, sampled: &[usize]) -> Vec<MtdEntry> {
    let prefs: Vec<PreferenceVector> = sampled.iter().map(|&v| preference_vector(graph, v)).collect();
    let norms: Vec<f64> = prefs.iter().map(PreferenceVector::norm_squared).collect();
    let weights: Vec<f64> = sampled.iter().map(|&v| graph.vertex(v).weight).collect();

    // Positions sorted by decreasing weight; the heavier set of any vertex is
    // a prefix of this order.
    let mut order: Vec<usize> = (0..sampled.len()).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    let mut rank = vec![0; sampled.len()];
    for (r, &pos) in order.iter().enumerate() {
        rank[pos] = r;
    }

    let n = graph.n_edges();
    (0..sampled.len())
        .into_par_iter()
        .map_init(
            || vec![0.0f64; n],
            |dense, pos| {
                let p = &prefs[pos];
                for (&i, &v) in p.indices.iter().zip(&p.values) {
                    dense[i as usize] = v;
                }
                let distance = |other: usize| {
                    let q = &prefs[other];
                    let pq: f64 = q.indices.iter().zip(&q.values).map(|(&i, &v)| dense[i as usize] * v).sum();
                    tanimoto_from_parts(pq, norms[pos], norms[other])
                };

                let w = weights[pos];
                let heavier = order[..rank[pos]].iter().copied().take_while(|&o| weights[o] > w);
                let mut eta = f64::INFINITY;
                let mut any = false;
                for other in heavier {
                    any = true;
                    eta = eta.min(distance(other));
                }
                if !any {
                    eta = (0..sampled.len()).filter(|&o| o != pos).map(distance).fold(0.0, f64::max);
                }

                for &i in &p.indices {
                    dense[i as usize] = 0.0;
                }
                MtdEntry { vertex: sampled[pos], eta, weight: w }
            },
        )
        .collect()
}

/// Selected authority peaks and the sorted trace they were cut from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSet {
    pub modes: Vec<MtdEntry>,
    /// All MTD entries, sorted by decreasing η (ties: heavier first).
    pub mtd_trace: Vec<MtdEntry>,
    /// 0-based trace position just above the largest drop.
    pub cut_index: usize,
}

/// Keeps every vertex whose MTD is at least the value just above the largest
/// drop among the first `window` gaps of the sorted trace.
pub fn select_modes(mtd: &[MtdEntry], window: usize) -> Result<ModeSet> {
    if mtd.len() < 2 {
        return Err(MshError::TooFewVertices(mtd.len()));
    }
    let mut trace = mtd.to_vec();
    trace.sort_by(|a, b| b.eta.total_cmp(&a.eta).then(b.weight.total_cmp(&a.weight)).then(a.vertex.cmp(&b.vertex)));

    let gaps = window.max(1).min(trace.len() - 1);
    let mut cut = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..gaps {
        let drop = trace[i].eta - trace[i + 1].eta;
        if drop > best {
            best = drop;
            cut = i;
        }
    }
    let floor = trace[cut].eta;
    let modes = trace.iter().copied().filter(|e| e.eta >= floor).collect();
    Ok(ModeSet { modes, mtd_trace: trace, cut_index: cut })
}

/// Assigns each hyperedge to the incident mode with the smallest normalized
/// residual `r / ŝ`; 0 marks outliers and ties go to the earlier mode.
pub fn label_points(graph: &Hypergraph, modes: &[usize]) -> Vec<usize> {
    let mut labels = vec![0usize; graph.n_edges()];
    let mut best = vec![f64::INFINITY; graph.n_edges()];
    for (k, &v) in modes.iter().enumerate() {
        let vertex = graph.vertex(v);
        for (&e, &r) in vertex.edges().iter().zip(vertex.residuals()) {
            let score = r / vertex.scale;
            if score < best[e as usize] {
                best[e as usize] = score;
                labels[e as usize] = k + 1;
            }
        }
    }
    labels
}

/// Labels points against explicit models, each with its own inlier scale.
fn label_with_models(points: &[DataPoint], models: &[(ModelParams, f64)], threshold: f64) -> Vec<usize> {
    points
        .iter()
        .map(|p| {
            let mut label = 0;
            let mut best = f64::INFINITY;
            for (k, (params, scale)) in models.iter().enumerate() {
                let r = params.residual(p);
                if r <= threshold * scale && r / scale < best {
                    best = r / scale;
                    label = k + 1;
                }
            }
            label
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MshConfig {
    pub kind: ModelKind,
    pub hypotheses: usize,
    /// K for the IKOSE scale estimator.
    pub k: usize,
    /// Inlier gate E in units of the estimated scale.
    pub threshold: f64,
    /// Fraction of vertices drawn by weight-aware sampling.
    pub was_fraction: f64,
    /// When false, mode seeking runs on every vertex.
    pub use_was: bool,
    /// Number of leading gaps searched for the largest drop.
    pub drop_window: usize,
    /// Proximity sampling sigma; a tenth of the bounding-box diagonal if unset.
    pub proximity_sigma: Option<f64>,
    pub max_resample_attempts: usize,
    pub seed: u64,
    /// Refit each mode to its labeled inliers by least squares.
    pub refine: bool,
}

impl MshConfig {
    pub fn new(kind: ModelKind) -> Self {
        Self {
            kind,
            hypotheses: kind.default_hypotheses(),
            k: 10,
            threshold: 2.5,
            was_fraction: 0.15,
            use_was: true,
            drop_window: 100,
            proximity_sigma: None,
            max_resample_attempts: 100,
            seed: 0,
            refine: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(MshError::InvalidConfig(msg.to_string()));
        if self.hypotheses == 0 {
            return fail("hypotheses must be at least 1");
        }
        if self.k == 0 {
            return fail("K must be at least 1");
        }
        if !(self.threshold > 0.0) {
            return fail("threshold E must be positive");
        }
        if !(self.was_fraction > 0.0 && self.was_fraction <= 1.0) {
            return fail("was_fraction must lie in (0, 1]");
        }
        if self.was_fraction * (self.hypotheses as f64) < 2.0 {
            return fail("was_fraction * hypotheses must be at least 2");
        }
        if self.drop_window == 0 {
            return fail("drop_window must be at least 1");
        }
        if let Some(s) = self.proximity_sigma {
            if !(s > 0.0) {
                return fail("proximity_sigma must be positive");
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedMode {
    pub params: ModelParams,
    pub refined: bool,
    pub vertex: usize,
    /// Index of the originating hypothesis.
    pub hypothesis: usize,
    pub scale: f64,
    pub weight: f64,
    pub eta: f64,
    pub inliers: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Timing {
    pub hypotheses: Duration,
    pub hypergraph: Duration,
    pub sampling: Duration,
    pub mtd: Duration,
    pub total: Duration,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittingResult {
    pub modes: Vec<FittedMode>,
    /// One label per data point: 0 for outliers, k for the k-th mode.
    pub labels: Vec<usize>,
    pub mtd_trace: Vec<MtdEntry>,
    pub cut_index: usize,
    pub vertex_count: usize,
    pub sampled_count: usize,
    pub config: MshConfig,
    pub seed: u64,
    #[serde(skip)]
    pub timing: Timing,
}

impl FittingResult {
    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }
}

/// Drops repeats of an identical parameter vector, which arise when the same
/// minimal subset is drawn twice. Returns the survivors and their original
/// indices.
fn distinct_hypotheses(hypotheses: Vec<ModelParams>) -> (Vec<ModelParams>, Vec<usize>) {
    let mut seen = HashSet::with_capacity(hypotheses.len());
    let mut origin = Vec::with_capacity(hypotheses.len());
    let kept = hypotheses
        .into_iter()
        .enumerate()
        .filter(|(i, h)| {
            let fresh = seen.insert(h.theta().iter().map(|t| t.to_bits()).collect::<Vec<u64>>());
            if fresh {
                origin.push(*i);
            }
            fresh
        })
        .map(|(_, h)| h)
        .collect();
    (kept, origin)
}

/// Runs the whole pipeline: hypotheses, hypergraph, weight-aware sampling,
/// MTDs, largest-drop selection and labeling.
pub fn msh_fit(points: &[DataPoint], config: &MshConfig) -> Result<FittingResult> {
    msh_fit_with_graph(points, config).map(|(result, _)| result)
}

/// [`msh_fit`] that also hands back the hypergraph the modes were sought on.
pub fn msh_fit_with_graph(points: &[DataPoint], config: &MshConfig) -> Result<(FittingResult, Hypergraph)> {
    let start = Instant::now();
    config.validate()?;
    let kind = config.kind;
    check_dimension(kind, points)?;
    if points.len() < kind.minimal_size() {
        return Err(MshError::InsufficientPoints { needed: kind.minimal_size(), available: points.len() });
    }

    let sampler = SamplerConfig {
        hypothesis_count: config.hypotheses,
        proximity_sigma: config.proximity_sigma.unwrap_or_else(|| default_proximity_sigma(points)),
        rng_seed: config.seed,
        max_resample_attempts: config.max_resample_attempts,
    };
    let mut timing = Timing::default();
    let t = Instant::now();
    let (hypotheses, origin) = distinct_hypotheses(generate_hypotheses(points, kind, &sampler)?);
    timing.hypotheses = t.elapsed();

    let t = Instant::now();
    let mut graph = build_hypergraph(points, &hypotheses, config.k.min(points.len()), config.threshold)?;
    graph.remap_hypotheses(&origin);
    timing.hypergraph = t.elapsed();

    let t = Instant::now();
    let sampled = if config.use_was {
        let m = ((config.was_fraction * graph.len() as f64).ceil() as usize).clamp(2.min(graph.len()), graph.len());
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(WAS_STREAM);
        weight_aware_sample(&graph, m, &mut rng)?
    } else {
        if !(graph.weights().iter().sum::<f64>() > 0.0) {
            return Err(MshError::AllZeroWeights);
        }
        (0..graph.len()).collect()
    };
    timing.sampling = t.elapsed();

    let t = Instant::now();
    let mtd = minimum_t_distances(&graph, &sampled);
    timing.mtd = t.elapsed();

    let selection = select_modes(&mtd, config.drop_window)?;
    let mode_vertices: Vec<usize> = selection.modes.iter().map(|m| m.vertex).collect();
    let mut labels = label_points(&graph, &mode_vertices);

    let mut modes: Vec<FittedMode> = selection
        .modes
        .iter()
        .map(|m| {
            let v = graph.vertex(m.vertex);
            FittedMode {
                params: v.params.clone(),
                refined: false,
                vertex: m.vertex,
                hypothesis: v.hypothesis,
                scale: v.scale,
                weight: v.weight,
                eta: m.eta,
                inliers: 0,
            }
        })
        .collect();

    if config.refine {
        for (k, mode) in modes.iter_mut().enumerate() {
            let members: Vec<DataPoint> =
                points.iter().zip(&labels).filter(|(_, &l)| l == k + 1).map(|(p, _)| *p).collect();
            if let Ok(params) = fit_least_squares(kind, &members) {
                mode.params = params;
                mode.refined = true;
            }
        }
        let models: Vec<(ModelParams, f64)> = modes.iter().map(|m| (m.params.clone(), m.scale)).collect();
        labels = label_with_models(points, &models, config.threshold);
    }

    for (k, mode) in modes.iter_mut().enumerate() {
        mode.inliers = labels.iter().filter(|&&l| l == k + 1).count();
    }
    timing.total = start.elapsed();

    let result = FittingResult {
        modes,
        labels,
        mtd_trace: selection.mtd_trace,
        cut_index: selection.cut_index,
        vertex_count: graph.len(),
        sampled_count: sampled.len(),
        config: config.clone(),
        seed: config.seed,
        timing,
    };
    Ok((result, graph))
}
