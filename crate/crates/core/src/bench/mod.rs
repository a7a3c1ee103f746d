//! Synthetic data, dataset I/O, the misclassification metric and repeated
//! experiments.

pub mod dataset;
pub mod experiment;
pub mod metric;
pub mod presets;
pub mod synth;

pub use dataset::{load_dataset, load_labels, read_dataset, read_labels, write_dataset, write_labels, LabeledDataset};
pub use experiment::{
    run_experiment, write_summary_table, ExperimentInput, ExperimentSummary, Generator, RepeatRecord,
};
pub use metric::misclassification_error;
pub use presets::Preset;
pub use synth::{gen_circles, gen_lines, gen_planar_scene, Layout, SyntheticSpec};
