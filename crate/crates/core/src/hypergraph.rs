//! Hypotheses as weighted vertices, data points as hyperedges.
//!
//! A vertex is incident with every point it counts as an inlier, i.e. every
//! point whose residual is within `E` times the vertex's IKOSE scale. Only the
//! incident residuals are retained.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{MshError, Result};
use crate::geometry::{check_dimension, DataPoint, ModelKind, ModelParams};
use crate::scale::ikose;

/// Roughness `∫K²` of the Epanechnikov kernel.
const KERNEL_ROUGHNESS: f64 = 3.0 / 5.0;
/// Second moment `∫u²K(u)du` of the Epanechnikov kernel.
const KERNEL_SECOND_MOMENT: f64 = 1.0 / 5.0;

pub fn epanechnikov(x: f64) -> f64 {
    if x.abs() <= 1.0 {
        0.75 * (1.0 - x * x)
    } else {
        0.0
    }
}

/// Plug-in kernel bandwidth for `n` samples, proportional to `scale`.
pub fn bandwidth(scale: f64, n: usize) -> f64 {
    let factor = 243.0 * KERNEL_ROUGHNESS / (35.0 * KERNEL_SECOND_MOMENT.powi(2) * n as f64);
    factor.powf(0.2) * scale
}

/// Weighting score of a vertex from its incident residuals only: the kernel
/// density is averaged over the vertex degree.
pub fn vertex_weight(scale: f64, bandwidth: f64, incident_residuals: &[f64]) -> f64 {
    if incident_residuals.is_empty() {
        return 0.0;
    }
    let sum: f64 = incident_residuals.iter().map(|r| epanechnikov(r / bandwidth)).sum();
    sum / (scale * bandwidth) / incident_residuals.len() as f64
}

/// Density score averaged over every data point, not only incident ones.
///
/// This is the outlier-sensitive precursor of [`vertex_weight`]; the pipeline
/// never uses it.
pub fn density_score(scale: f64, bandwidth: f64, all_residuals: &[f64]) -> f64 {
    if all_residuals.is_empty() {
        return 0.0;
    }
    let sum: f64 = all_residuals.iter().map(|r| epanechnikov(r / bandwidth)).sum();
    sum / (scale * bandwidth) / all_residuals.len() as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct Vertex {
    /// Position of the originating hypothesis in the input list.
    pub hypothesis: usize,
    pub params: ModelParams,
    pub scale: f64,
    pub degree: usize,
    pub bandwidth: f64,
    pub weight: f64,
    edges: Vec<u32>,
    residuals: Vec<f64>,
}

impl Vertex {
    /// Incident hyperedges in increasing order.
    pub fn edges(&self) -> &[u32] {
        &self.edges
    }

    /// Residuals of the incident hyperedges, parallel to [`Vertex::edges`].
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn is_incident(&self, edge: usize) -> bool {
        self.edges.binary_search(&(edge as u32)).is_ok()
    }
}

#[derive(Clone, Debug)]
pub struct Hypergraph {
    kind: ModelKind,
    n_edges: usize,
    threshold: f64,
    vertices: Vec<Vertex>,
}

impl Hypergraph {
    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    /// Inlier gate `E`.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> &Vertex {
        &self.vertices[v]
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.vertices.iter().map(|v| v.weight).collect()
    }

    /// Restricts the graph to the listed vertices, in the given order.
    pub fn subgraph(&self, keep: &[usize]) -> Hypergraph {
        Hypergraph {
            kind: self.kind,
            n_edges: self.n_edges,
            threshold: self.threshold,
            vertices: keep.iter().map(|&v| self.vertices[v].clone()).collect(),
        }
    }

    /// Rewrites each vertex's hypothesis index through `origin`.
    pub(crate) fn remap_hypotheses(&mut self, origin: &[usize]) {
        for v in &mut self.vertices {
            v.hypothesis = origin[v.hypothesis];
        }
    }

    /// Writes vertices (θ, ŝ, δ, b, w) and incidence lists as JSON.
    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        #[derive(Serialize)]
        struct VertexDump<'a> {
            hypothesis: usize,
            theta: Vec<f64>,
            scale: f64,
            degree: usize,
            bandwidth: f64,
            weight: f64,
            edges: &'a [u32],
        }
        #[derive(Serialize)]
        struct Dump<'a> {
            kind: ModelKind,
            n_edges: usize,
            threshold: f64,
            vertices: Vec<VertexDump<'a>>,
        }
        let dump = Dump {
            kind: self.kind,
            n_edges: self.n_edges,
            threshold: self.threshold,
            vertices: self
                .vertices
                .iter()
                .map(|v| VertexDump {
                    hypothesis: v.hypothesis,
                    theta: v.params.theta(),
                    scale: v.scale,
                    degree: v.degree,
                    bandwidth: v.bandwidth,
                    weight: v.weight,
                    edges: &v.edges,
                })
                .collect(),
        };
        serde_json::to_writer_pretty(writer, &dump)?;
        Ok(())
    }
}

/// Builds the weighted hypergraph.
///
/// Hypotheses whose scale estimate is degenerate, or whose degree falls
/// below the minimal subset size, are dropped. Surviving vertices keep the
/// input order.
pub fn build_hypergraph(
    points: &[DataPoint],
    hypotheses: &[ModelParams],
    k: usize,
    threshold: f64,
) -> Result<Hypergraph> {
    let Some(first) = hypotheses.first() else {
        return Err(MshError::EmptyHypergraph);
    };
    let kind = first.kind();
    if hypotheses.iter().any(|h| h.kind() != kind) {
        return Err(MshError::InvalidConfig("hypotheses of mixed model kinds".into()));
    }
    check_dimension(kind, points)?;
    let n = points.len();
    if n < kind.minimal_size() {
        return Err(MshError::InsufficientPoints { needed: kind.minimal_size(), available: n });
    }
    if k == 0 || k > n {
        return Err(MshError::InvalidConfig(format!("K = {k} must lie in 1..={n}")));
    }
    if !(threshold > 0.0) {
        return Err(MshError::InvalidConfig("threshold E must be positive".into()));
    }

    let vertices: Vec<Vertex> = hypotheses
        .par_iter()
        .enumerate()
        .map_init(
            || Vec::with_capacity(n),
            |all, (index, params)| {
                all.clear();
                all.extend(points.iter().map(|p| params.residual(p)));
                build_vertex(index, params, all, k, threshold, kind.minimal_size())
            },
        )
        .collect::<Vec<Option<Vertex>>>()
        .into_iter()
        .flatten()
        .collect();

    if vertices.is_empty() {
        return Err(MshError::EmptyHypergraph);
    }
    Ok(Hypergraph { kind, n_edges: n, threshold, vertices })
}

fn build_vertex(
    index: usize,
    params: &ModelParams,
    all: &[f64],
    k: usize,
    threshold: f64,
    min_degree: usize,
) -> Option<Vertex> {
    let est = ikose(all, k, threshold).ok()?;
    let cutoff = threshold * est.scale;
    let (edges, residuals): (Vec<u32>, Vec<f64>) =
        all.iter().enumerate().filter(|(_, &r)| r <= cutoff).map(|(e, &r)| (e as u32, r)).unzip();
    if edges.len() < min_degree {
        return None;
    }
    let b = bandwidth(est.scale, all.len());
    let weight = vertex_weight(est.scale, b, &residuals);
    Some(Vertex {
        hypothesis: index,
        params: params.clone(),
        scale: est.scale,
        degree: edges.len(),
        bandwidth: b,
        weight,
        edges,
        residuals,
    })
}
