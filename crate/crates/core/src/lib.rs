//! Robust multi-structure geometric model fitting by mode seeking on
//! hypergraphs.
//!
//! Model hypotheses generated from minimal subsets become weighted vertices;
//! data points become hyperedges joining every hypothesis that treats them as
//! inliers. Model instances are the authority peaks of the vertex weights,
//! found through minimum Tanimoto distances between preference vectors.
//!
//! ```
//! use msh_core::{msh_fit, DataPoint, ModelKind, MshConfig};
//!
//! let mut points = Vec::new();
//! for i in 0..60 {
//!     let t = i as f64;
//!     let wobble = ((i * 37) % 11) as f64 * 0.01 - 0.05;
//!     points.push(DataPoint::planar(t, 0.5 * t + 3.0 + wobble));
//! }
//! let mut config = MshConfig::new(ModelKind::Line2D).with_seed(7);
//! config.hypotheses = 300;
//! let result = msh_fit(&points, &config).unwrap();
//! assert!(result.mode_count() >= 1);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod error;
pub mod geometry;
pub mod hypergraph;
pub mod hypothesis;
pub mod modeseek;
pub mod scale;

pub use error::{MshError, Result};
pub use geometry::{fit_least_squares, fit_minimal, residual, DataPoint, ModelKind, ModelParams};
pub use hypergraph::{build_hypergraph, Hypergraph, Vertex};
pub use hypothesis::{generate_hypotheses, proximity_sample, SamplerConfig};
pub use modeseek::{
    label_points, minimum_t_distances, msh_fit, msh_fit_with_graph, preference_vector, select_modes, tanimoto,
    weight_aware_sample, FittedMode, FittingResult, ModeSet, MshConfig, MtdEntry, PreferenceVector,
};
pub use scale::{ikose, ScaleEstimate};
