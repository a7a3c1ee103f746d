//! Geometric model families, their minimal-subset solvers and residuals.
//!
//! Five families are supported: planar lines, planar circles, spatial lines,
//! homographies and fundamental matrices. Correspondences are stored as
//! `(x, y, x', y')` with the first pair in the source image.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, Matrix2, Matrix3, SVector, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{MshError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Line2D,
    Circle2D,
    Line3D,
    Homography,
    Fundamental,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] =
        [ModelKind::Line2D, ModelKind::Circle2D, ModelKind::Line3D, ModelKind::Homography, ModelKind::Fundamental];

    /// Number of points that determine one hypothesis.
    pub const fn minimal_size(self) -> usize {
        match self {
            ModelKind::Line2D => 2,
            ModelKind::Circle2D => 3,
            ModelKind::Line3D => 2,
            ModelKind::Homography => 4,
            ModelKind::Fundamental => 8,
        }
    }

    /// Coordinate count of a data point for this family.
    pub const fn ambient_dim(self) -> usize {
        match self {
            ModelKind::Line2D | ModelKind::Circle2D => 2,
            ModelKind::Line3D => 3,
            ModelKind::Homography | ModelKind::Fundamental => 4,
        }
    }

    /// Hypothesis budget used when none is given explicitly.
    pub const fn default_hypotheses(self) -> usize {
        match self {
            ModelKind::Line2D | ModelKind::Circle2D | ModelKind::Line3D => 5_000,
            ModelKind::Homography => 10_000,
            ModelKind::Fundamental => 20_000,
        }
    }

    pub const fn theta_len(self) -> usize {
        match self {
            ModelKind::Line2D | ModelKind::Circle2D => 3,
            ModelKind::Line3D => 6,
            ModelKind::Homography | ModelKind::Fundamental => 9,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ModelKind::Line2D => "line2d",
            ModelKind::Circle2D => "circle",
            ModelKind::Line3D => "line3d",
            ModelKind::Homography => "homography",
            ModelKind::Fundamental => "fundamental",
        };
        f.write_str(name)
    }
}

impl FromStr for ModelKind {
    type Err = MshError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "line" | "line2d" => Ok(ModelKind::Line2D),
            "circle" | "circle2d" => Ok(ModelKind::Circle2D),
            "line3d" => Ok(ModelKind::Line3D),
            "homography" => Ok(ModelKind::Homography),
            "fundamental" => Ok(ModelKind::Fundamental),
            other => Err(MshError::InvalidConfig(format!("unknown model kind `{other}`"))),
        }
    }
}

/// A planar point, a spatial point or a two-view correspondence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DataPoint {
    coords: [f64; 4],
    dim: u8,
}

impl DataPoint {
    pub fn new(coords: &[f64]) -> Result<Self> {
        if !(2..=4).contains(&coords.len()) {
            return Err(MshError::InvalidConfig(format!(
                "a data point has 2, 3 or 4 coordinates, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(MshError::InvalidConfig("non-finite coordinate".into()));
        }
        let mut buf = [0.0; 4];
        buf[..coords.len()].copy_from_slice(coords);
        Ok(Self { coords: buf, dim: coords.len() as u8 })
    }

    pub fn planar(x: f64, y: f64) -> Self {
        Self { coords: [x, y, 0.0, 0.0], dim: 2 }
    }

    pub fn spatial(x: f64, y: f64, z: f64) -> Self {
        Self { coords: [x, y, z, 0.0], dim: 3 }
    }

    pub fn correspondence(x: f64, y: f64, xp: f64, yp: f64) -> Self {
        Self { coords: [x, y, xp, yp], dim: 4 }
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim as usize]
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn distance_squared(&self, other: &DataPoint) -> f64 {
        self.coords().iter().zip(other.coords()).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    fn xy(&self) -> Vector2<f64> {
        Vector2::new(self.coords[0], self.coords[1])
    }

    fn xyz(&self) -> Vector3<f64> {
        Vector3::new(self.coords[0], self.coords[1], self.coords[2])
    }

    fn source(&self) -> Vector2<f64> {
        self.xy()
    }

    fn target(&self) -> Vector2<f64> {
        Vector2::new(self.coords[2], self.coords[3])
    }
}

/// Checks that every point carries the coordinate count `kind` expects.
pub fn check_dimension(kind: ModelKind, points: &[DataPoint]) -> Result<()> {
    let expected = kind.ambient_dim();
    match points.iter().find(|p| p.dim() != expected) {
        Some(p) => Err(MshError::DimensionMismatch { expected, found: p.dim() }),
        None => Ok(()),
    }
}

/// Length of the diagonal of the axis-aligned bounding box of `points`.
pub fn bounding_diagonal(points: &[DataPoint]) -> f64 {
    let Some(first) = points.first() else {
        return 0.0;
    };
    let dim = first.dim();
    let mut lo = [f64::INFINITY; 4];
    let mut hi = [f64::NEG_INFINITY; 4];
    for p in points {
        for (axis, &c) in p.coords().iter().enumerate() {
            lo[axis] = lo[axis].min(c);
            hi[axis] = hi[axis].max(c);
        }
    }
    (0..dim).map(|a| (hi[a] - lo[a]).powi(2)).sum::<f64>().sqrt()
}

/// Parameters of one model hypothesis.
///
/// Lines are stored with unit normal/direction, homographies and fundamental
/// matrices with unit Frobenius norm, and the largest-magnitude entry of a
/// 3x3 matrix is kept positive so equal models compare equal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "ModelRecord", try_from = "ModelRecord")]
pub enum ModelParams {
    /// `a x + b y + c = 0` with `a² + b² = 1`.
    Line2D {
        a: f64,
        b: f64,
        c: f64,
    },
    Circle2D {
        cx: f64,
        cy: f64,
        r: f64,
    },
    /// `point` is the foot of the perpendicular from the origin.
    Line3D {
        point: Vector3<f64>,
        direction: Vector3<f64>,
    },
    Homography(Matrix3<f64>),
    Fundamental(Matrix3<f64>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ModelRecord {
    kind: ModelKind,
    theta: Vec<f64>,
}

impl From<ModelParams> for ModelRecord {
    fn from(m: ModelParams) -> Self {
        ModelRecord { kind: m.kind(), theta: m.theta() }
    }
}

impl TryFrom<ModelRecord> for ModelParams {
    type Error = MshError;

    fn try_from(r: ModelRecord) -> Result<Self> {
        ModelParams::from_theta(r.kind, &r.theta)
    }
}

impl ModelParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Line2D { .. } => ModelKind::Line2D,
            ModelParams::Circle2D { .. } => ModelKind::Circle2D,
            ModelParams::Line3D { .. } => ModelKind::Line3D,
            ModelParams::Homography(_) => ModelKind::Homography,
            ModelParams::Fundamental(_) => ModelKind::Fundamental,
        }
    }

    /// Flat parameter vector; 3x3 matrices are emitted row-major.
    pub fn theta(&self) -> Vec<f64> {
        match self {
            ModelParams::Line2D { a, b, c } => vec![*a, *b, *c],
            ModelParams::Circle2D { cx, cy, r } => vec![*cx, *cy, *r],
            ModelParams::Line3D { point, direction } => point.iter().chain(direction.iter()).copied().collect(),
            ModelParams::Homography(m) | ModelParams::Fundamental(m) => {
                (0..3).flat_map(|i| (0..3).map(move |j| m[(i, j)])).collect()
            }
        }
    }

    pub fn from_theta(kind: ModelKind, theta: &[f64]) -> Result<Self> {
        if theta.len() != kind.theta_len() {
            return Err(MshError::DimensionMismatch { expected: kind.theta_len(), found: theta.len() });
        }
        let t = theta;
        let params = match kind {
            ModelKind::Line2D => ModelParams::Line2D { a: t[0], b: t[1], c: t[2] },
            ModelKind::Circle2D => ModelParams::Circle2D { cx: t[0], cy: t[1], r: t[2] },
            ModelKind::Line3D => {
                ModelParams::Line3D { point: Vector3::new(t[0], t[1], t[2]), direction: Vector3::new(t[3], t[4], t[5]) }
            }
            ModelKind::Homography => ModelParams::Homography(Matrix3::from_row_slice(t)),
            ModelKind::Fundamental => ModelParams::Fundamental(Matrix3::from_row_slice(t)),
        };
        Ok(params)
    }

    /// Whether the stored parameters satisfy the family's normalization.
    pub fn is_normalized(&self, tol: f64) -> bool {
        match self {
            ModelParams::Line2D { a, b, c } => (a * a + b * b - 1.0).abs() <= tol && c.is_finite(),
            ModelParams::Circle2D { cx, cy, r } => cx.is_finite() && cy.is_finite() && *r > 0.0,
            ModelParams::Line3D { point, direction } => {
                (direction.norm() - 1.0).abs() <= tol && point.iter().all(|c| c.is_finite())
            }
            ModelParams::Homography(h) => (h.norm() - 1.0).abs() <= tol,
            ModelParams::Fundamental(f) => (f.norm() - 1.0).abs() <= tol && f.determinant().abs() <= tol,
        }
    }

    /// Geometric residual of `point` with respect to this model.
    ///
    /// Orthogonal distance for lines, radial deviation for circles and a
    /// Sampson-type distance for the two-view models.
    pub fn residual(&self, point: &DataPoint) -> f64 {
        match self {
            ModelParams::Line2D { a, b, c } => {
                let p = point.xy();
                (a * p.x + b * p.y + c).abs()
            }
            ModelParams::Circle2D { cx, cy, r } => {
                let p = point.xy();
                ((p.x - cx).hypot(p.y - cy) - r).abs()
            }
            ModelParams::Line3D { point: origin, direction } => (point.xyz() - origin).cross(direction).norm(),
            ModelParams::Homography(h) => homography_sampson(h, point),
            ModelParams::Fundamental(f) => fundamental_sampson(f, point),
        }
    }
}

/// Free-function form of [`ModelParams::residual`].
pub fn residual(params: &ModelParams, point: &DataPoint) -> f64 {
    params.residual(point)
}

fn fundamental_sampson(f: &Matrix3<f64>, p: &DataPoint) -> f64 {
    let x = p.source().push(1.0);
    let xp = p.target().push(1.0);
    let fx = f * x;
    let ftxp = f.transpose() * xp;
    let algebraic = xp.dot(&fx);
    let denom = fx.x * fx.x + fx.y * fx.y + ftxp.x * ftxp.x + ftxp.y * ftxp.y;
    ratio_or_inf(algebraic, denom.sqrt())
}

/// Root-sum-square of the two algebraic transfer constraints, each divided
/// by the norm of its gradient with respect to `(x, y, x', y')`.
fn homography_sampson(h: &Matrix3<f64>, p: &DataPoint) -> f64 {
    let (x, y) = (p.coords[0], p.coords[1]);
    let (xp, yp) = (p.coords[2], p.coords[3]);
    let u = h[(0, 0)] * x + h[(0, 1)] * y + h[(0, 2)];
    let v = h[(1, 0)] * x + h[(1, 1)] * y + h[(1, 2)];
    let w = h[(2, 0)] * x + h[(2, 1)] * y + h[(2, 2)];

    let e1 = yp * w - v;
    let g1 = (-h[(1, 0)] + yp * h[(2, 0)]).powi(2) + (-h[(1, 1)] + yp * h[(2, 1)]).powi(2) + w * w;
    let e2 = u - xp * w;
    let g2 = (h[(0, 0)] - xp * h[(2, 0)]).powi(2) + (h[(0, 1)] - xp * h[(2, 1)]).powi(2) + w * w;

    let t1 = ratio_or_inf(e1, g1.sqrt());
    let t2 = ratio_or_inf(e2, g2.sqrt());
    t1.hypot(t2)
}

fn ratio_or_inf(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num.abs() / den
    } else if num == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Fits a model to exactly `kind.minimal_size()` points.
pub fn fit_minimal(kind: ModelKind, subset: &[DataPoint]) -> Result<ModelParams> {
    check_dimension(kind, subset)?;
    if subset.len() != kind.minimal_size() {
        return Err(MshError::InsufficientPoints { needed: kind.minimal_size(), available: subset.len() });
    }
    match kind {
        ModelKind::Line2D => line2d_through(subset[0].xy(), subset[1].xy()),
        ModelKind::Circle2D => circle_through(subset[0].xy(), subset[1].xy(), subset[2].xy()),
        ModelKind::Line3D => line3d_through(subset[0].xyz(), subset[1].xyz()),
        ModelKind::Homography => {
            reject_collinear_triples(kind, subset.iter().map(DataPoint::source))?;
            reject_collinear_triples(kind, subset.iter().map(DataPoint::target))?;
            homography_dlt(subset)
        }
        ModelKind::Fundamental => eight_point(subset),
    }
}

/// Least-squares fit to any number (at least the minimal size) of points.
///
/// Lines use total least squares, circles the algebraic (Kasa) fit, and the
/// two-view models the normalized linear solvers.
pub fn fit_least_squares(kind: ModelKind, points: &[DataPoint]) -> Result<ModelParams> {
    check_dimension(kind, points)?;
    if points.len() < kind.minimal_size() {
        return Err(MshError::InsufficientPoints { needed: kind.minimal_size(), available: points.len() });
    }
    match kind {
        ModelKind::Line2D => {
            let n = points.len() as f64;
            let mean = points.iter().map(DataPoint::xy).sum::<Vector2<f64>>() / n;
            let scatter = points.iter().fold(Matrix2::zeros(), |acc, p| {
                let d = p.xy() - mean;
                acc + d * d.transpose()
            });
            let eig = scatter.symmetric_eigen();
            let normal_idx = if eig.eigenvalues[0] <= eig.eigenvalues[1] { 0 } else { 1 };
            let normal = eig.eigenvectors.column(normal_idx).into_owned();
            let direction = Vector2::new(-normal.y, normal.x);
            line2d_through(mean, mean + direction)
        }
        ModelKind::Line3D => {
            let n = points.len() as f64;
            let mean = points.iter().map(DataPoint::xyz).sum::<Vector3<f64>>() / n;
            let scatter = points.iter().fold(Matrix3::zeros(), |acc, p| {
                let d = p.xyz() - mean;
                acc + d * d.transpose()
            });
            let eig = scatter.symmetric_eigen();
            let major = eig.eigenvalues.imax();
            let direction = eig.eigenvectors.column(major).into_owned();
            line3d_through(mean, mean + direction)
        }
        ModelKind::Circle2D => kasa_circle(points),
        ModelKind::Homography => homography_dlt(points),
        ModelKind::Fundamental => eight_point(points),
    }
}

fn degenerate(kind: ModelKind, reason: &'static str) -> MshError {
    MshError::Degenerate { kind, reason }
}

fn line2d_through(p: Vector2<f64>, q: Vector2<f64>) -> Result<ModelParams> {
    let d = q - p;
    let len = d.norm();
    if len <= 1e-12 * (1.0 + p.norm().max(q.norm())) {
        return Err(degenerate(ModelKind::Line2D, "coincident points"));
    }
    let (mut a, mut b) = (-d.y / len, d.x / len);
    if a < 0.0 || (a == 0.0 && b < 0.0) {
        a = -a;
        b = -b;
    }
    let c = -(a * p.x + b * p.y);
    Ok(ModelParams::Line2D { a, b, c })
}

fn line3d_through(p: Vector3<f64>, q: Vector3<f64>) -> Result<ModelParams> {
    let d = q - p;
    let len = d.norm();
    if len <= 1e-12 * (1.0 + p.norm().max(q.norm())) {
        return Err(degenerate(ModelKind::Line3D, "coincident points"));
    }
    let mut direction = d / len;
    if direction[direction.iamax()] < 0.0 {
        direction = -direction;
    }
    let point = p - direction * p.dot(&direction);
    Ok(ModelParams::Line3D { point, direction })
}

fn circle_through(a: Vector2<f64>, b: Vector2<f64>, c: Vector2<f64>) -> Result<ModelParams> {
    let ab = b - a;
    let ac = c - a;
    let cross = ab.x * ac.y - ab.y * ac.x;
    if cross.abs() <= 1e-10 * ab.norm() * ac.norm() || ab.norm() == 0.0 || ac.norm() == 0.0 {
        return Err(degenerate(ModelKind::Circle2D, "collinear triple"));
    }
    let ab2 = ab.norm_squared();
    let ac2 = ac.norm_squared();
    let ux = (ac.y * ab2 - ab.y * ac2) / (2.0 * cross);
    let uy = (ab.x * ac2 - ac.x * ab2) / (2.0 * cross);
    let r = ux.hypot(uy);
    Ok(ModelParams::Circle2D { cx: a.x + ux, cy: a.y + uy, r })
}

fn kasa_circle(points: &[DataPoint]) -> Result<ModelParams> {
    if points.len() == 3 {
        return circle_through(points[0].xy(), points[1].xy(), points[2].xy());
    }
    let mut design = DMatrix::zeros(points.len(), 3);
    let mut rhs = nalgebra::DVector::zeros(points.len());
    for (i, p) in points.iter().enumerate() {
        let q = p.xy();
        design[(i, 0)] = q.x;
        design[(i, 1)] = q.y;
        design[(i, 2)] = 1.0;
        rhs[i] = -(q.x * q.x + q.y * q.y);
    }
    let svd = design.svd(true, true);
    let smax = svd.singular_values.max();
    let sol = svd.solve(&rhs, 1e-12 * smax).map_err(|_| degenerate(ModelKind::Circle2D, "singular design"))?;
    if svd.singular_values.min() <= 1e-12 * smax {
        return Err(degenerate(ModelKind::Circle2D, "collinear points"));
    }
    let (cx, cy) = (-sol[0] / 2.0, -sol[1] / 2.0);
    let r2 = cx * cx + cy * cy - sol[2];
    if !(r2 > 0.0) {
        return Err(degenerate(ModelKind::Circle2D, "non-positive radius"));
    }
    Ok(ModelParams::Circle2D { cx, cy, r: r2.sqrt() })
}

fn reject_collinear_triples(kind: ModelKind, pts: impl Iterator<Item = Vector2<f64>>) -> Result<()> {
    let pts: Vec<Vector2<f64>> = pts.collect();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            for k in j + 1..pts.len() {
                let u = pts[j] - pts[i];
                let v = pts[k] - pts[i];
                let cross = u.x * v.y - u.y * v.x;
                if cross.abs() <= 1e-9 * u.norm() * v.norm() || u.norm() == 0.0 || v.norm() == 0.0 {
                    return Err(degenerate(kind, "three collinear points"));
                }
            }
        }
    }
    Ok(())
}

/// Similarity transform sending the centroid to the origin with mean
/// distance sqrt(2).
fn hartley_normalizer(pts: &[Vector2<f64>]) -> Option<Matrix3<f64>> {
    let n = pts.len() as f64;
    let mean = pts.iter().sum::<Vector2<f64>>() / n;
    let spread = pts.iter().map(|p| (p - mean).norm()).sum::<f64>() / n;
    if !(spread > 0.0) || !spread.is_finite() {
        return None;
    }
    let s = std::f64::consts::SQRT_2 / spread;
    Some(Matrix3::new(s, 0.0, -s * mean.x, 0.0, s, -s * mean.y, 0.0, 0.0, 1.0))
}

fn apply(t: &Matrix3<f64>, p: Vector2<f64>) -> Vector2<f64> {
    let q = t * p.push(1.0);
    Vector2::new(q.x / q.z, q.y / q.z)
}

/// Right null vector of a design matrix with 9 columns.
///
/// Rows are zero-padded up to 9 so the thin SVD exposes the null space. Fails
/// when the null space is more than one-dimensional.
fn null_vector(kind: ModelKind, rows: &DMatrix<f64>) -> Result<SVector<f64, 9>> {
    let design = if rows.nrows() < 9 {
        let mut padded = DMatrix::zeros(9, 9);
        padded.view_mut((0, 0), (rows.nrows(), 9)).copy_from(rows);
        padded
    } else {
        rows.clone()
    };
    let svd = design.svd(false, true);
    let v_t = svd.v_t.as_ref().ok_or_else(|| degenerate(kind, "svd failed"))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let smallest = order[0];
    let second = svd.singular_values[order[1]];
    let largest = svd.singular_values[*order.last().unwrap()];
    if !(largest > 0.0) || second <= 1e-10 * largest {
        return Err(degenerate(kind, "rank-deficient design matrix"));
    }
    Ok(SVector::<f64, 9>::from_iterator(v_t.row(smallest).iter().copied()))
}

fn unit_frobenius(mut m: Matrix3<f64>) -> Matrix3<f64> {
    m /= m.norm();
    if m[m.iamax_full()] < 0.0 {
        m = -m;
    }
    m
}

fn homography_dlt(points: &[DataPoint]) -> Result<ModelParams> {
    let kind = ModelKind::Homography;
    let src: Vec<_> = points.iter().map(DataPoint::source).collect();
    let dst: Vec<_> = points.iter().map(DataPoint::target).collect();
    let t1 = hartley_normalizer(&src).ok_or_else(|| degenerate(kind, "coincident source points"))?;
    let t2 = hartley_normalizer(&dst).ok_or_else(|| degenerate(kind, "coincident target points"))?;

    let mut design = DMatrix::zeros(2 * points.len(), 9);
    for (i, (s, d)) in src.iter().zip(&dst).enumerate() {
        let p = apply(&t1, *s);
        let q = apply(&t2, *d);
        let r = 2 * i;
        design.row_mut(r).copy_from_slice(&[0.0, 0.0, 0.0, -p.x, -p.y, -1.0, q.y * p.x, q.y * p.y, q.y]);
        design.row_mut(r + 1).copy_from_slice(&[p.x, p.y, 1.0, 0.0, 0.0, 0.0, -q.x * p.x, -q.x * p.y, -q.x]);
    }
    let h = null_vector(kind, &design)?;
    let normalized = Matrix3::from_row_slice(h.as_slice());
    let t2_inv = t2.try_inverse().ok_or_else(|| degenerate(kind, "singular normalizer"))?;
    let h = unit_frobenius(t2_inv * normalized * t1);
    if !h.iter().all(|v| v.is_finite()) || h.determinant().abs() <= 1e-12 {
        return Err(degenerate(kind, "singular homography"));
    }
    Ok(ModelParams::Homography(h))
}

fn eight_point(points: &[DataPoint]) -> Result<ModelParams> {
    let kind = ModelKind::Fundamental;
    let src: Vec<_> = points.iter().map(DataPoint::source).collect();
    let dst: Vec<_> = points.iter().map(DataPoint::target).collect();
    let t1 = hartley_normalizer(&src).ok_or_else(|| degenerate(kind, "coincident source points"))?;
    let t2 = hartley_normalizer(&dst).ok_or_else(|| degenerate(kind, "coincident target points"))?;

    let mut design = DMatrix::zeros(points.len(), 9);
    for (i, (s, d)) in src.iter().zip(&dst).enumerate() {
        let p = apply(&t1, *s);
        let q = apply(&t2, *d);
        design.row_mut(i).copy_from_slice(&[q.x * p.x, q.x * p.y, q.x, q.y * p.x, q.y * p.y, q.y, p.x, p.y, 1.0]);
    }
    let f = null_vector(kind, &design)?;
    let f = Matrix3::from_row_slice(f.as_slice());

    let mut svd = f.svd(true, true);
    let weakest = svd.singular_values.imin();
    svd.singular_values[weakest] = 0.0;
    let rank2 = svd.recompose().map_err(|_| degenerate(kind, "svd recomposition failed"))?;

    let f = unit_frobenius(t2.transpose() * rank2 * t1);
    if !f.iter().all(|v| v.is_finite()) {
        return Err(degenerate(kind, "non-finite fundamental matrix"));
    }
    Ok(ModelParams::Fundamental(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn line_through_axis_points() {
        let m = fit_minimal(ModelKind::Line2D, &[DataPoint::planar(0.0, 0.0), DataPoint::planar(1.0, 0.0)]).unwrap();
        assert_eq!(m.theta(), vec![0.0, 1.0, 0.0]);
        assert_abs_diff_eq!(m.residual(&DataPoint::planar(3.0, 2.0)), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn unit_circle_from_three_points() {
        let pts = [DataPoint::planar(1.0, 0.0), DataPoint::planar(0.0, 1.0), DataPoint::planar(-1.0, 0.0)];
        let ModelParams::Circle2D { cx, cy, r } = fit_minimal(ModelKind::Circle2D, &pts).unwrap() else {
            panic!("wrong family");
        };
        assert_abs_diff_eq!(cx, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cy, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r, 1.0, epsilon = 1e-12);
        let m = ModelParams::Circle2D { cx: 0.0, cy: 0.0, r: 1.0 };
        assert_abs_diff_eq!(m.residual(&DataPoint::planar(2.0, 0.0)), 1.0);
    }

    #[test]
    fn identity_homography() {
        let pts: Vec<_> = [(0.0, 0.0), (10.0, 0.0), (10.0, 7.0), (1.0, 9.0)]
            .iter()
            .map(|&(x, y)| DataPoint::correspondence(x, y, x, y))
            .collect();
        let ModelParams::Homography(h) = fit_minimal(ModelKind::Homography, &pts).unwrap() else {
            panic!("wrong family");
        };
        let expected = Matrix3::identity() / 3f64.sqrt();
        assert!((h - expected).norm() < 1e-10, "{h}");
    }

    #[test]
    fn degenerate_subsets_are_rejected() {
        let same = [DataPoint::planar(1.0, 1.0), DataPoint::planar(1.0, 1.0)];
        assert!(matches!(fit_minimal(ModelKind::Line2D, &same), Err(MshError::Degenerate { .. })));
        let same3 = [DataPoint::spatial(1.0, 2.0, 3.0), DataPoint::spatial(1.0, 2.0, 3.0)];
        assert!(matches!(fit_minimal(ModelKind::Line3D, &same3), Err(MshError::Degenerate { .. })));

        let collinear = [DataPoint::planar(0.0, 0.0), DataPoint::planar(1.0, 1.0), DataPoint::planar(2.0, 2.0)];
        assert!(matches!(fit_minimal(ModelKind::Circle2D, &collinear), Err(MshError::Degenerate { .. })));

        let h_bad: Vec<_> = [(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (0.0, 5.0)]
            .iter()
            .map(|&(x, y)| DataPoint::correspondence(x, y, x + 1.0, y))
            .collect();
        assert!(matches!(fit_minimal(ModelKind::Homography, &h_bad), Err(MshError::Degenerate { .. })));

        // All eight correspondences related by the identity: design rank is 6.
        let f_bad: Vec<_> = (0..8)
            .map(|i| {
                let (x, y) = ((i as f64 * 1.7).sin() * 50.0, (i as f64 * 2.3).cos() * 40.0);
                DataPoint::correspondence(x, y, x, y)
            })
            .collect();
        assert!(matches!(fit_minimal(ModelKind::Fundamental, &f_bad), Err(MshError::Degenerate { .. })));
    }

    #[test]
    fn wrong_dimension_is_reported() {
        let pts = [DataPoint::planar(0.0, 0.0), DataPoint::planar(1.0, 0.0)];
        assert!(matches!(
            fit_minimal(ModelKind::Line3D, &pts),
            Err(MshError::DimensionMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn spatial_line_residual() {
        let m = fit_minimal(ModelKind::Line3D, &[DataPoint::spatial(0.0, 0.0, 5.0), DataPoint::spatial(0.0, 0.0, 9.0)])
            .unwrap();
        assert_abs_diff_eq!(m.residual(&DataPoint::spatial(3.0, 4.0, -2.0)), 5.0, epsilon = 1e-12);
        assert!(m.is_normalized(1e-12));
    }

    #[test]
    fn theta_roundtrip_through_serde() {
        let m = fit_minimal(
            ModelKind::Circle2D,
            &[DataPoint::planar(3.0, 0.0), DataPoint::planar(0.0, 2.0), DataPoint::planar(-1.0, 0.5)],
        )
        .unwrap();
        let json = serde_json::to_string(&m).unwrap();
        let back: ModelParams = serde_json::from_str(&json).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn least_squares_recovers_line_and_circle() {
        let line: Vec<_> = (0..20).map(|i| DataPoint::planar(i as f64, 2.0 * i as f64 + 1.0)).collect();
        let m = fit_least_squares(ModelKind::Line2D, &line).unwrap();
        assert!(line.iter().all(|p| m.residual(p) < 1e-9));

        let circle: Vec<_> = (0..12)
            .map(|i| {
                let t = i as f64 * 0.5;
                DataPoint::planar(4.0 + 3.0 * t.cos(), -1.0 + 3.0 * t.sin())
            })
            .collect();
        let m = fit_least_squares(ModelKind::Circle2D, &circle).unwrap();
        assert!(circle.iter().all(|p| m.residual(p) < 1e-9));
    }
}
