//! Benchmark datasets paired with the fitting settings tuned for them.
//!
//! The library defaults (`K = 10`, sampler sigma at a tenth of the bounding
//! diagonal) are kept generic; these presets raise `K` toward the expected
//! per-structure inlier count, which stabilizes the scale estimates on
//! outlier-heavy data.

use crate::bench::experiment::{ExperimentInput, Generator};
use crate::bench::synth::SyntheticSpec;
use crate::geometry::ModelKind;
use crate::modeseek::MshConfig;

#[derive(Clone, Debug)]
pub struct Preset {
    pub name: String,
    pub input: ExperimentInput,
    pub config: MshConfig,
}

/// 3D lines with 100 inliers each among 400 outliers.
pub fn lines3d(lines: usize) -> Preset {
    let mut config = MshConfig::new(ModelKind::Line3D);
    config.k = 50;
    config.was_fraction = 0.2;
    Preset {
        name: format!("{lines} lines"),
        input: ExperimentInput::Synthetic {
            generator: Generator::Lines { dim: 3 },
            spec: SyntheticSpec::lines3d(lines, 0),
        },
        config,
    }
}

/// The four line counts of the 3D line table.
pub fn lines3d_table() -> Vec<Preset> {
    (3..=6).map(lines3d).collect()
}

/// Five concurrent planar lines.
pub fn star5() -> Preset {
    let spec = SyntheticSpec::star5(0);
    let mut config = MshConfig::new(ModelKind::Line2D);
    config.k = 45;
    config.was_fraction = 0.1;
    config.proximity_sigma = Some(0.3 * domain_diagonal(&spec));
    Preset {
        name: "star5".into(),
        input: ExperimentInput::Synthetic { generator: Generator::Lines { dim: 2 }, spec },
        config,
    }
}

/// Three planes under distinct homographies.
pub fn planar_scene() -> Preset {
    let mut config = MshConfig::new(ModelKind::Homography);
    config.k = 50;
    Preset {
        name: "planar scene".into(),
        input: ExperimentInput::Synthetic { generator: Generator::PlanarScene, spec: SyntheticSpec::planar_scene(0) },
        config,
    }
}

fn domain_diagonal(spec: &SyntheticSpec) -> f64 {
    spec.domain.iter().map(|(lo, hi)| (hi - lo).powi(2)).sum::<f64>().sqrt()
}
