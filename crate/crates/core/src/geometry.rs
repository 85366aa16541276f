//! Two-view geometry primitives: the fundamental matrix type, cameras,
//! homogeneous points and the epipolar constraint.
//!
//! A fundamental matrix is composed from intrinsics and relative pose as
//! `F = K2^-T [t]x R K1^-1`, where `R = Rx(rx) Ry(ry) Rz(rz)` and
//! `K = [[gamma, 0, cx], [0, gamma, cy], [0, 0, 1]]`. A true correspondence
//! `p <-> q` satisfies `q^T F p = 0`.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::linalg;

pub type Mat3 = Matrix3<f64>;
pub type Vec3 = Vector3<f64>;

/// Relative threshold on `sigma3 / sigma1` below which a matrix counts as
/// rank two.
pub const RANK2_TOLERANCE: f64 = 1e-9;

/// Homogeneous 3x3 fundamental matrix.
///
/// Constructed either from a parametrization (rank two by construction) or
/// from a raw matrix, in which case nothing is validated beyond finiteness.
/// Use [`FMat::is_rank2`] to check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FMat(Mat3);

impl FMat {
    pub fn new(m: Mat3) -> Self {
        debug_assert!(m.iter().all(|v| v.is_finite()), "non-finite F entry");
        FMat(m)
    }

    /// Build from nine entries in row-major order `f11 .. f33`.
    pub fn from_row_major(entries: &[f64; 9]) -> Self {
        FMat::new(Mat3::from_row_slice(entries))
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn into_matrix(self) -> Mat3 {
        self.0
    }

    pub fn to_row_major(&self) -> [f64; 9] {
        linalg::vec_row_major(&self.0)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// Singular values, largest first.
    pub fn singular_values(&self) -> Vec3 {
        linalg::singular_values3(&self.0)
    }

    /// `sigma3 / sigma1`; zero for the zero matrix.
    pub fn rank_ratio(&self) -> f64 {
        let s = self.singular_values();
        if s[0] == 0.0 {
            0.0
        } else {
            s[2] / s[0]
        }
    }

    pub fn is_rank2(&self) -> bool {
        self.rank_ratio() <= RANK2_TOLERANCE
    }

    pub fn scaled(&self, s: f64) -> FMat {
        FMat(self.0 * s)
    }

    /// Canonical representative of the projective ray: unit Frobenius norm,
    /// largest-magnitude entry positive (first in row-major order on ties).
    pub fn canonical(&self) -> Result<FMat> {
        let n = self.frobenius_norm();
        if n == 0.0 {
            return Err(Error::ZeroMatrix);
        }
        let unit = self.0 / n;
        let entries = linalg::vec_row_major(&unit);
        let i = linalg::argmax_abs(entries.iter()).expect("nine entries");
        Ok(FMat(if entries[i] < 0.0 { -unit } else { unit }))
    }

    /// Project onto the nearest (Frobenius) matrix of rank at most two.
    pub fn rank2_projection(&self) -> FMat {
        let (u, mut s, v) = linalg::svd3(&self.0);
        s[2] = 0.0;
        FMat(u * Mat3::from_diagonal(&s) * v.transpose())
    }
}

/// Camera calibration with square pixels and zero skew.
///
/// `gamma` is the diagonal entry of `K`. Whether it is read as a focal
/// length or an inverse focal length is left to the caller; the algebra is
/// the same.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    pub gamma: f64,
    pub cx: f64,
    pub cy: f64,
}

impl CameraIntrinsics {
    pub fn new(gamma: f64, cx: f64, cy: f64) -> Result<Self> {
        let k = CameraIntrinsics { gamma, cx, cy };
        k.validate()?;
        Ok(k)
    }

    pub fn identity() -> Self {
        CameraIntrinsics { gamma: 1.0, cx: 0.0, cy: 0.0 }
    }

    fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::NonPositiveFocal(self.gamma));
        }
        Ok(())
    }

    /// Closed-form inverse of the upper-triangular calibration matrix.
    pub fn inverse_matrix(&self) -> Result<Mat3> {
        self.validate()?;
        let g = self.gamma;
        Ok(Mat3::new(
            1.0 / g,
            0.0,
            -self.cx / g,
            0.0,
            1.0 / g,
            -self.cy / g,
            0.0,
            0.0,
            1.0,
        ))
    }
}

/// Relative pose of camera 2 with respect to camera 1: a point `X1` in the
/// first camera frame maps to `X2 = R X1 + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativePose {
    pub t: Vec3,
    /// Euler angles `(rx, ry, rz)` in radians.
    pub r: Vec3,
}

impl RelativePose {
    pub fn new(t: Vec3, r: Vec3) -> Self {
        RelativePose { t, r }
    }

    pub fn rotation(&self) -> Mat3 {
        rotation_from_euler(self.r[0], self.r[1], self.r[2])
    }
}

/// Homogeneous image point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomoPoint {
    pub x: f64,
    pub y: f64,
    pub w: f64,
}

impl HomoPoint {
    /// Point from pixel coordinates, `w = 1`.
    pub fn from_pixel(x: f64, y: f64) -> Self {
        HomoPoint { x, y, w: 1.0 }
    }

    pub fn new(x: f64, y: f64, w: f64) -> Self {
        HomoPoint { x, y, w }
    }

    pub fn to_vector(&self) -> Vec3 {
        Vec3::new(self.x, self.y, self.w)
    }

    /// Dehomogenize a 3-vector.
    pub fn from_vector(v: &Vec3) -> Self {
        HomoPoint::from_pixel(v[0] / v[2], v[1] / v[2])
    }
}

/// Ordered point correspondences between image 1 (`p`) and image 2 (`q`),
/// optionally labelled as inliers (`true`) or outliers.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrSet {
    pairs: Vec<(HomoPoint, HomoPoint)>,
    labels: Option<Vec<bool>>,
}

impl CorrSet {
    pub fn new(pairs: Vec<(HomoPoint, HomoPoint)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InsufficientCorrespondences { needed: 1, got: 0 });
        }
        Ok(CorrSet { pairs, labels: None })
    }

    pub fn with_labels(pairs: Vec<(HomoPoint, HomoPoint)>, labels: Vec<bool>) -> Result<Self> {
        if labels.len() != pairs.len() {
            return Err(Error::InvalidConfig(format!(
                "{} labels for {} pairs",
                labels.len(),
                pairs.len()
            )));
        }
        let mut c = CorrSet::new(pairs)?;
        c.labels = Some(labels);
        Ok(c)
    }

    /// Convenience constructor from `(x1, y1, x2, y2)` pixel rows.
    pub fn from_pixels(rows: &[[f64; 4]]) -> Result<Self> {
        CorrSet::new(
            rows.iter()
                .map(|r| (HomoPoint::from_pixel(r[0], r[1]), HomoPoint::from_pixel(r[2], r[3])))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(HomoPoint, HomoPoint)] {
        &self.pairs
    }

    pub fn labels(&self) -> Option<&[bool]> {
        self.labels.as_deref()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(HomoPoint, HomoPoint)> {
        self.pairs.iter()
    }

    pub fn first_points(&self) -> Vec<HomoPoint> {
        self.pairs.iter().map(|(p, _)| *p).collect()
    }

    pub fn second_points(&self) -> Vec<HomoPoint> {
        self.pairs.iter().map(|(_, q)| *q).collect()
    }

    /// Pairs at the given indices, labels carried along.
    pub fn subset(&self, indices: &[usize]) -> Result<CorrSet> {
        let pairs = indices.iter().map(|&i| self.pairs[i]).collect();
        match &self.labels {
            Some(l) => CorrSet::with_labels(pairs, indices.iter().map(|&i| l[i]).collect()),
            None => CorrSet::new(pairs),
        }
    }

    /// Same pairs without labels.
    pub fn unlabeled(&self) -> CorrSet {
        CorrSet { pairs: self.pairs.clone(), labels: None }
    }
}

/// Cross-product matrix: `skew(t) * v = t x v`.
pub fn skew(t: &Vec3) -> Mat3 {
    Mat3::new(0.0, -t[2], t[1], t[2], 0.0, -t[0], -t[1], t[0], 0.0)
}

pub fn rotation_x(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

pub fn rotation_y(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

pub fn rotation_z(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// `Rx(rx) * Ry(ry) * Rz(rz)`, right-handed, radians.
pub fn rotation_from_euler(rx: f64, ry: f64, rz: f64) -> Mat3 {
    rotation_x(rx) * rotation_y(ry) * rotation_z(rz)
}

pub fn intrinsics_matrix(k: &CameraIntrinsics) -> Result<Mat3> {
    k.validate()?;
    Ok(Mat3::new(k.gamma, 0.0, k.cx, 0.0, k.gamma, k.cy, 0.0, 0.0, 1.0))
}

/// Smallest translation norm accepted by [`compose_fundamental`].
pub const MIN_TRANSLATION_NORM: f64 = 1e-12;

/// `F = K2^-T [t]x R K1^-1`.
pub fn compose_fundamental(
    k1: &CameraIntrinsics,
    k2: &CameraIntrinsics,
    pose: &RelativePose,
) -> Result<FMat> {
    let k1_inv = k1.inverse_matrix()?;
    let k2_inv = k2.inverse_matrix()?;
    let tn = pose.t.norm();
    if !(tn >= MIN_TRANSLATION_NORM) {
        return Err(Error::DegenerateTranslation(tn));
    }
    Ok(FMat(k2_inv.transpose() * skew(&pose.t) * pose.rotation() * k1_inv))
}

/// The scalar `q^T F p`.
pub fn epipolar_residual(f: &FMat, p: &HomoPoint, q: &HomoPoint) -> f64 {
    q.to_vector().dot(&(f.0 * p.to_vector()))
}

/// Unit generator of the right null space (`F e = 0`), sign fixed so the
/// largest-magnitude component is positive.
pub fn right_epipole(f: &FMat) -> Result<Vec3> {
    let (_, s, v) = linalg::svd3(&f.0);
    if s[0] == 0.0 || s[1] <= RANK2_TOLERANCE * s[0] {
        return Err(Error::RankDeficient);
    }
    if s[2] > 1e-6 * s[0] {
        return Err(Error::FullRank(s[2] / s[0]));
    }
    Ok(linalg::canonical_sign3(v.column(2).into_owned()))
}

/// Unit generator of the left null space (`e'^T F = 0`).
pub fn left_epipole(f: &FMat) -> Result<Vec3> {
    right_epipole(&FMat(f.0.transpose()))
}
