//! Synthetic multi-structure data with ground-truth labels.

use nalgebra::{Matrix3, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, UnitCircle, UnitSphere};
use serde::{Deserialize, Serialize};

use crate::bench::dataset::LabeledDataset;
use crate::error::{MshError, Result};
use crate::geometry::DataPoint;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// Structures placed independently at random.
    Random,
    /// All structures pass through one common point.
    Star,
    /// Structures cross in pairs; an odd one out is placed at random.
    Intersecting,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub structure_count: usize,
    pub inliers_per_structure: usize,
    /// Per-structure inlier counts; overrides `inliers_per_structure`.
    pub inlier_counts: Option<Vec<usize>>,
    pub outlier_count: usize,
    pub inlier_sigma: f64,
    /// `(min, max)` per axis.
    pub domain: Vec<(f64, f64)>,
    pub layout: Layout,
    pub rng_seed: u64,
}

impl SyntheticSpec {
    /// 3D lines with 100 inliers each, 400 uniform outliers and unit noise in
    /// a 200-unit cube. Three lines are independent, four share one point,
    /// five and six cross pairwise.
    pub fn lines3d(lines: usize, seed: u64) -> Self {
        let layout = match lines {
            4 => Layout::Star,
            0..=3 => Layout::Random,
            _ => Layout::Intersecting,
        };
        Self {
            structure_count: lines,
            inliers_per_structure: 100,
            inlier_counts: None,
            outlier_count: 400,
            inlier_sigma: 1.0,
            domain: vec![(0.0, 200.0); 3],
            layout,
            rng_seed: seed,
        }
    }

    /// Five planar lines through a common centre.
    pub fn star5(seed: u64) -> Self {
        Self {
            structure_count: 5,
            inliers_per_structure: 50,
            inlier_counts: None,
            outlier_count: 200,
            inlier_sigma: 0.5,
            domain: vec![(0.0, 100.0); 2],
            layout: Layout::Star,
            rng_seed: seed,
        }
    }

    /// Three planes seen under distinct homographies in a 640x480 image pair.
    pub fn planar_scene(seed: u64) -> Self {
        Self {
            structure_count: 3,
            inliers_per_structure: 80,
            inlier_counts: None,
            outlier_count: 120,
            inlier_sigma: 0.5,
            domain: vec![(0.0, 640.0), (0.0, 480.0)],
            layout: Layout::Random,
            rng_seed: seed,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn counts(&self) -> Vec<usize> {
        self.inlier_counts.clone().unwrap_or_else(|| vec![self.inliers_per_structure; self.structure_count])
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.inlier_sigma > 0.0) {
            return Err(MshError::InvalidConfig("inlier_sigma must be positive".into()));
        }
        if let Some(c) = &self.inlier_counts {
            if c.len() != self.structure_count {
                return Err(MshError::InvalidConfig(format!(
                    "{} inlier counts given for {} structures",
                    c.len(),
                    self.structure_count
                )));
            }
        }
        if self.domain.len() != dim {
            return Err(MshError::DimensionMismatch { expected: dim, found: self.domain.len() });
        }
        if self.domain.iter().any(|&(lo, hi)| !(hi > lo)) {
            return Err(MshError::InvalidConfig("empty domain axis".into()));
        }
        Ok(())
    }
}

struct BoxDomain {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxDomain {
    fn new(domain: &[(f64, f64)]) -> Self {
        Self { lo: domain.iter().map(|d| d.0).collect(), hi: domain.iter().map(|d| d.1).collect() }
    }

    fn min_side(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).fold(f64::INFINITY, f64::min)
    }

    /// Uniform point of the sub-box that keeps `margin` (fraction of each
    /// side) clear of every face.
    fn sample<R: Rng>(&self, margin: f64, rng: &mut R) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&l, &h)| {
                let pad = margin * (h - l);
                rng.random_range(l + pad..=h - pad)
            })
            .collect()
    }

    fn centre(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| 0.5 * (l + h)).collect()
    }
}

fn random_direction<R: Rng>(dim: usize, rng: &mut R) -> Vec<f64> {
    if dim == 2 {
        let d: [f64; 2] = UnitCircle.sample(rng);
        d.to_vec()
    } else {
        let d: [f64; 3] = UnitSphere.sample(rng);
        d.to_vec()
    }
}

fn abs_cos(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>().abs()
}

/// A direction at least `min_angle` radians away from every one in `taken`.
fn spread_direction<R: Rng>(dim: usize, taken: &[Vec<f64>], min_angle: f64, rng: &mut R) -> Vec<f64> {
    let limit = min_angle.cos();
    let mut best = random_direction(dim, rng);
    for _ in 0..1000 {
        if taken.iter().all(|t| abs_cos(t, &best) <= limit) {
            break;
        }
        best = random_direction(dim, rng);
    }
    best
}

/// Segment endpoints `(a, b)`.
type Segment = (Vec<f64>, Vec<f64>);

fn segment_through(centre: &[f64], dir: &[f64], half: f64) -> Segment {
    let a = centre.iter().zip(dir).map(|(c, d)| c - half * d).collect();
    let b = centre.iter().zip(dir).map(|(c, d)| c + half * d).collect();
    (a, b)
}

fn line_segments<R: Rng>(spec: &SyntheticSpec, bx: &BoxDomain, dim: usize, rng: &mut R) -> Vec<Segment> {
    let side = bx.min_side();
    let count = spec.structure_count;
    let min_angle = 20f64.to_radians();
    let random_segment = |rng: &mut R, taken: &[Vec<f64>]| {
        let centre = bx.sample(0.3, rng);
        let dir = spread_direction(dim, taken, min_angle, rng);
        (segment_through(&centre, &dir, 0.3 * side), dir)
    };

    let mut segments = Vec::with_capacity(count);
    let mut dirs: Vec<Vec<f64>> = Vec::with_capacity(count);
    match spec.layout {
        Layout::Star => {
            let mut centre = bx.centre();
            for c in centre.iter_mut() {
                *c += rng.random_range(-0.05..=0.05) * side;
            }
            let offset = rng.random_range(0.0..std::f64::consts::PI);
            for k in 0..count {
                let dir = if dim == 2 {
                    let angle = offset + k as f64 * std::f64::consts::PI / count as f64;
                    vec![angle.cos(), angle.sin()]
                } else {
                    spread_direction(dim, &dirs, min_angle, rng)
                };
                segments.push(segment_through(&centre, &dir, 0.4 * side));
                dirs.push(dir);
            }
        }
        Layout::Random => {
            for _ in 0..count {
                let (seg, dir) = random_segment(rng, &dirs);
                segments.push(seg);
                dirs.push(dir);
            }
        }
        Layout::Intersecting => {
            let mut k = 0;
            while k < count {
                if k + 1 < count {
                    let crossing = bx.sample(0.3, rng);
                    for _ in 0..2 {
                        let dir = spread_direction(dim, &dirs, min_angle, rng);
                        segments.push(segment_through(&crossing, &dir, 0.3 * side));
                        dirs.push(dir);
                    }
                    k += 2;
                } else {
                    let (seg, dir) = random_segment(rng, &dirs);
                    segments.push(seg);
                    dirs.push(dir);
                    k += 1;
                }
            }
        }
    }
    segments
}

fn uniform_outliers<R: Rng>(bx: &BoxDomain, count: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..count).map(|_| bx.sample(0.0, rng)).collect()
}

fn finish(coords: Vec<Vec<f64>>, labels: Vec<usize>, provenance: String) -> Result<LabeledDataset> {
    let points = coords.iter().map(|c| DataPoint::new(c)).collect::<Result<Vec<_>>>()?;
    Ok(LabeledDataset { points, gt_labels: Some(labels), provenance })
}

/// Lines in the plane (`dim = 2`) or in space (`dim = 3`).
///
/// Inliers are spread uniformly along each segment with isotropic Gaussian
/// noise; outliers are uniform in the domain box. Inliers come first,
/// structure by structure, followed by the outliers.
pub fn gen_lines(spec: &SyntheticSpec, dim: usize) -> Result<LabeledDataset> {
    if dim != 2 && dim != 3 {
        return Err(MshError::InvalidConfig(format!("lines are generated in 2 or 3 dimensions, not {dim}")));
    }
    spec.validate(dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let bx = BoxDomain::new(&spec.domain);
    let noise = Normal::new(0.0, spec.inlier_sigma).expect("positive sigma");
    let segments = line_segments(spec, &bx, dim, &mut rng);

    let mut coords = Vec::new();
    let mut labels = Vec::new();
    for (k, ((a, b), &count)) in segments.iter().zip(&spec.counts()).enumerate() {
        for _ in 0..count {
            let t: f64 = rng.random();
            coords.push((0..dim).map(|i| a[i] + t * (b[i] - a[i]) + noise.sample(&mut rng)).collect());
            labels.push(k + 1);
        }
    }
    coords.extend(uniform_outliers(&bx, spec.outlier_count, &mut rng));
    labels.extend(std::iter::repeat_n(0, spec.outlier_count));
    finish(coords, labels, format!("synthetic lines{dim}d seed={}", spec.rng_seed))
}

/// Planar circles that fit inside the domain and do not overlap (when room
/// allows). Supports unbalanced per-structure inlier counts.
pub fn gen_circles(spec: &SyntheticSpec) -> Result<LabeledDataset> {
    spec.validate(2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let bx = BoxDomain::new(&spec.domain);
    let noise = Normal::new(0.0, spec.inlier_sigma).expect("positive sigma");
    let side = bx.min_side();

    let mut circles: Vec<(Vector2<f64>, f64)> = Vec::new();
    for _ in 0..spec.structure_count {
        let mut candidate = None;
        for _ in 0..1000 {
            let r = rng.random_range(0.08..=0.2) * side;
            let cx = rng.random_range(bx.lo[0] + r..=bx.hi[0] - r);
            let cy = rng.random_range(bx.lo[1] + r..=bx.hi[1] - r);
            let c = Vector2::new(cx, cy);
            candidate = Some((c, r));
            if circles.iter().all(|(o, ro)| (o - c).norm() > r + ro + 4.0 * spec.inlier_sigma) {
                break;
            }
        }
        circles.push(candidate.expect("at least one attempt"));
    }

    let mut coords = Vec::new();
    let mut labels = Vec::new();
    for (k, ((c, r), &count)) in circles.iter().zip(&spec.counts()).enumerate() {
        for _ in 0..count {
            let angle = rng.random_range(0.0..std::f64::consts::TAU);
            coords.push(vec![
                c.x + r * angle.cos() + noise.sample(&mut rng),
                c.y + r * angle.sin() + noise.sample(&mut rng),
            ]);
            labels.push(k + 1);
        }
    }
    coords.extend(uniform_outliers(&bx, spec.outlier_count, &mut rng));
    labels.extend(std::iter::repeat_n(0, spec.outlier_count));
    finish(coords, labels, format!("synthetic circles seed={}", spec.rng_seed))
}

/// Correspondences from planar regions moved by distinct homographies.
///
/// `domain` is the image rectangle. Structure `k` occupies the `k`-th
/// vertical band of the source image; its target points are mapped by a
/// random similarity with a mild projective component and perturbed by
/// Gaussian noise. Outliers pair uniform source and target points.
pub fn gen_planar_scene(spec: &SyntheticSpec) -> Result<LabeledDataset> {
    spec.validate(2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let bx = BoxDomain::new(&spec.domain);
    let noise = Normal::new(0.0, spec.inlier_sigma).expect("positive sigma");
    let (w, h) = (bx.hi[0] - bx.lo[0], bx.hi[1] - bx.lo[1]);
    let bands = spec.structure_count.max(1) as f64;

    let mut coords = Vec::new();
    let mut labels = Vec::new();
    for (k, &count) in spec.counts().iter().enumerate() {
        let hom = random_homography(&mut rng, w, h);
        let x0 = bx.lo[0] + w * (k as f64 + 0.1) / bands;
        let x1 = bx.lo[0] + w * (k as f64 + 0.9) / bands;
        let mut produced = 0;
        while produced < count {
            let src =
                Vector3::new(rng.random_range(x0..x1), rng.random_range(bx.lo[1] + 0.05 * h..bx.hi[1] - 0.05 * h), 1.0);
            let dst = hom * src;
            if dst.z.abs() < 1e-9 {
                continue;
            }
            coords.push(vec![
                src.x + noise.sample(&mut rng),
                src.y + noise.sample(&mut rng),
                dst.x / dst.z + noise.sample(&mut rng),
                dst.y / dst.z + noise.sample(&mut rng),
            ]);
            labels.push(k + 1);
            produced += 1;
        }
    }
    for _ in 0..spec.outlier_count {
        let s = bx.sample(0.0, &mut rng);
        let t = bx.sample(0.0, &mut rng);
        coords.push(vec![s[0], s[1], t[0], t[1]]);
        labels.push(0);
    }
    finish(coords, labels, format!("synthetic planar scene seed={}", spec.rng_seed))
}

fn random_homography<R: Rng>(rng: &mut R, w: f64, h: f64) -> Matrix3<f64> {
    let angle: f64 = rng.random_range(-0.2..0.2);
    let s = rng.random_range(0.85..1.15);
    let sign = |rng: &mut R| if rng.random::<bool>() { 1.0 } else { -1.0 };
    let tx = sign(rng) * rng.random_range(0.03..0.12) * w;
    let ty = sign(rng) * rng.random_range(0.03..0.12) * h;
    let (c, si) = (angle.cos() * s, angle.sin() * s);
    let p1 = rng.random_range(-2e-4..2e-4);
    let p2 = rng.random_range(-2e-4..2e-4);
    Matrix3::new(c, -si, tx, si, c, ty, p1, p2, 1.0)
}
