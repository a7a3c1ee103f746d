//! Repeated fitting runs and their summary statistics.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bench::dataset::LabeledDataset;
use crate::bench::metric::misclassification_error;
use crate::bench::synth::{gen_circles, gen_lines, gen_planar_scene, SyntheticSpec};
use crate::error::{MshError, Result};
use crate::modeseek::{msh_fit, MshConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    Lines { dim: usize },
    Circles,
    PlanarScene,
}

impl Generator {
    pub fn generate(self, spec: &SyntheticSpec) -> Result<LabeledDataset> {
        match self {
            Generator::Lines { dim } => gen_lines(spec, dim),
            Generator::Circles => gen_circles(spec),
            Generator::PlanarScene => gen_planar_scene(spec),
        }
    }
}

#[derive(Clone, Debug)]
pub enum ExperimentInput {
    /// Fresh data is drawn for every repeat.
    Synthetic { generator: Generator, spec: SyntheticSpec },
    /// The same data is refit with a different fitting seed each repeat.
    Dataset(LabeledDataset),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepeatRecord {
    pub repeat: usize,
    pub data_seed: Option<u64>,
    pub fit_seed: u64,
    /// `None` when the fit itself failed.
    pub error: Option<f64>,
    pub mode_count: usize,
    pub true_count: usize,
    pub runtime_ms: f64,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub name: String,
    pub repeats: usize,
    pub master_seed: u64,
    pub errors: Vec<f64>,
    pub avg: f64,
    /// Population standard deviation.
    pub std: f64,
    pub min: f64,
    pub mode_counts: BTreeMap<usize, usize>,
    /// Fraction of repeats recovering exactly the true number of structures.
    pub correct_count_rate: f64,
    pub failures: usize,
    pub mean_runtime_ms: f64,
    pub records: Vec<RepeatRecord>,
}

/// Per-repeat seeds: `(data_seed, fit_seed)`.
fn repeat_seeds(master_seed: u64, repeat: usize) -> (u64, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(repeat as u64);
    (rng.next_u64(), rng.next_u64())
}

pub fn run_experiment(
    name: impl Into<String>,
    input: &ExperimentInput,
    config: &MshConfig,
    repeats: usize,
    master_seed: u64,
) -> Result<ExperimentSummary> {
    if repeats == 0 {
        return Err(MshError::InvalidConfig("repeats must be at least 1".into()));
    }
    config.validate()?;
    if let ExperimentInput::Dataset(ds) = input {
        if ds.gt_labels.is_none() {
            return Err(MshError::InvalidConfig("dataset has no ground-truth labels".into()));
        }
    }

    let records: Vec<RepeatRecord> =
        (0..repeats).into_par_iter().map(|r| run_repeat(input, config, r, master_seed)).collect::<Result<_>>()?;
    Ok(summarize(name.into(), master_seed, records))
}

fn run_repeat(input: &ExperimentInput, config: &MshConfig, repeat: usize, master_seed: u64) -> Result<RepeatRecord> {
    let (data_seed, fit_seed) = repeat_seeds(master_seed, repeat);
    let generated;
    let (dataset, data_seed) = match input {
        ExperimentInput::Synthetic { generator, spec } => {
            generated = generator.generate(&spec.clone().with_seed(data_seed))?;
            (&generated, Some(data_seed))
        }
        ExperimentInput::Dataset(ds) => (ds, None),
    };
    let gt = dataset.gt_labels.as_deref().expect("checked by caller");
    let true_count = dataset.structure_count().unwrap_or(0);
    let cfg = config.clone().with_seed(fit_seed);

    let mut record = RepeatRecord {
        repeat,
        data_seed,
        fit_seed,
        error: None,
        mode_count: 0,
        true_count,
        runtime_ms: 0.0,
        failure: None,
    };
    match msh_fit(&dataset.points, &cfg) {
        Ok(fit) => {
            record.error = Some(misclassification_error(&fit.labels, gt)?);
            record.mode_count = fit.mode_count();
            record.runtime_ms = fit.timing.total.as_secs_f64() * 1e3;
        }
        Err(e) => record.failure = Some(e.to_string()),
    }
    Ok(record)
}

fn summarize(name: String, master_seed: u64, records: Vec<RepeatRecord>) -> ExperimentSummary {
    let errors: Vec<f64> = records.iter().filter_map(|r| r.error).collect();
    let failures = records.len() - errors.len();
    let (avg, std, min) = if errors.is_empty() {
        (f64::NAN, f64::NAN, f64::NAN)
    } else {
        let n = errors.len() as f64;
        let avg = errors.iter().sum::<f64>() / n;
        let var = errors.iter().map(|e| (e - avg).powi(2)).sum::<f64>() / n;
        (avg, var.sqrt(), errors.iter().copied().fold(f64::INFINITY, f64::min))
    };
    let mut mode_counts = BTreeMap::new();
    for r in records.iter().filter(|r| r.error.is_some()) {
        *mode_counts.entry(r.mode_count).or_insert(0) += 1;
    }
    let correct = records.iter().filter(|r| r.error.is_some() && r.mode_count == r.true_count).count();
    let ok: Vec<f64> = records.iter().filter(|r| r.error.is_some()).map(|r| r.runtime_ms).collect();
    let mean_runtime_ms = if ok.is_empty() { 0.0 } else { ok.iter().sum::<f64>() / ok.len() as f64 };

    ExperimentSummary {
        name,
        repeats: records.len(),
        master_seed,
        errors,
        avg,
        std,
        min,
        mode_counts,
        correct_count_rate: correct as f64 / records.len() as f64,
        failures,
        mean_runtime_ms,
        records,
    }
}

/// Wide table: one `Std.`, `Avg.` and `Min.` column per experiment.
pub fn write_summary_table<W: Write>(summaries: &[ExperimentSummary], method: &str, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec!["method".to_string()];
    let mut row = vec![method.to_string()];
    for s in summaries {
        for (label, value) in [("Std.", s.std), ("Avg.", s.avg), ("Min.", s.min)] {
            header.push(format!("{} {label}", s.name));
            row.push(format!("{value:.2}"));
        }
    }
    wtr.write_record(&header).map_err(|e| MshError::Parse { line: 0, message: e.to_string() })?;
    wtr.write_record(&row).map_err(|e| MshError::Parse { line: 0, message: e.to_string() })?;
    wtr.flush()?;
    Ok(())
}
