//! Linear estimators built on the design matrix `A f = 0`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{CorrSet, FMat, HomoPoint, Mat3};
use crate::linalg::{self, full_svd};

/// Two smallest singular values of `A` closer than this (relative to the
/// largest) mean the null vector is not unique.
pub const NULLSPACE_GAP: f64 = 1e-9;

/// `n x 9` matrix whose rows are `(x'x, x'y, x', y'x, y'y, y', x, y, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix(pub DMatrix<f64>);

impl DesignMatrix {
    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// `A vec(F)` with `vec` in row-major order.
    pub fn apply(&self, f: &FMat) -> nalgebra::DVector<f64> {
        &self.0 * nalgebra::DVector::from_row_slice(&f.to_row_major())
    }
}

fn dehomogenize(p: &HomoPoint) -> (f64, f64) {
    (p.x / p.w, p.y / p.w)
}

pub fn design_matrix(corrs: &CorrSet) -> DesignMatrix {
    let mut a = DMatrix::zeros(corrs.len(), 9);
    for (i, (p, q)) in corrs.iter().enumerate() {
        let (x, y) = dehomogenize(p);
        let (xp, yp) = dehomogenize(q);
        let row = [xp * x, xp * y, xp, yp * x, yp * y, yp, x, y, 1.0];
        for (j, v) in row.into_iter().enumerate() {
            a[(i, j)] = v;
        }
    }
    DesignMatrix(a)
}

/// Right singular vector of the smallest singular value, refusing when the
/// null space is not one-dimensional.
fn unique_null_vector(a: &DMatrix<f64>) -> Result<[f64; 9]> {
    let d = full_svd(a);
    let s = &d.s;
    if s[0] == 0.0 {
        return Err(Error::DegenerateConfiguration("design matrix is zero".into()));
    }
    if s[7] - s[8] <= NULLSPACE_GAP * s[0] {
        return Err(Error::DegenerateConfiguration(format!(
            "null space of the design matrix is not unique (sigma8/sigma1 = {:e})",
            s[7] / s[0]
        )));
    }
    let mut f = [0.0; 9];
    f.copy_from_slice(d.v.column(8).as_slice());
    Ok(f)
}

/// Unnormalized eight-point algorithm: least-squares null vector of `A`,
/// then the closest rank-two matrix in Frobenius norm.
pub fn eight_point(corrs: &CorrSet) -> Result<FMat> {
    if corrs.len() < 8 {
        return Err(Error::InsufficientCorrespondences { needed: 8, got: corrs.len() });
    }
    let f = unique_null_vector(design_matrix(corrs).matrix())?;
    FMat::from_row_major(&f).rank2_projection().canonical()
}

/// Similarity transform moving the centroid to the origin and the mean
/// distance from it to `sqrt(2)`, with the transformed points.
pub fn hartley_normalize(points: &[HomoPoint]) -> Result<(Mat3, Vec<HomoPoint>)> {
    if points.len() < 2 {
        return Err(Error::DegeneratePoints);
    }
    let xy: Vec<(f64, f64)> = points.iter().map(dehomogenize).collect();
    let n = xy.len() as f64;
    let cx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let cy = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let mean_dist = xy.iter().map(|p| (p.0 - cx).hypot(p.1 - cy)).sum::<f64>() / n;
    if !(mean_dist > f64::EPSILON * (1.0 + cx.abs() + cy.abs())) {
        return Err(Error::DegeneratePoints);
    }
    let s = std::f64::consts::SQRT_2 / mean_dist;
    let t = Mat3::new(s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0);
    let out = xy
        .iter()
        .map(|&(x, y)| HomoPoint::from_pixel(s * (x - cx), s * (y - cy)))
        .collect();
    Ok((t, out))
}

/// Conditioned copies of the correspondences and the two transforms.
pub(crate) fn normalize_pairs(corrs: &CorrSet) -> Result<(Mat3, Mat3, CorrSet)> {
    let (t1, p) = hartley_normalize(&corrs.first_points())?;
    let (t2, q) = hartley_normalize(&corrs.second_points())?;
    Ok((t1, t2, CorrSet::new(p.into_iter().zip(q).collect())?))
}

/// Undo the conditioning: `F = T2^T F_hat T1`.
pub(crate) fn denormalize(f_hat: &FMat, t1: &Mat3, t2: &Mat3) -> FMat {
    FMat::new(t2.transpose() * f_hat.matrix() * t1)
}

/// Eight-point algorithm on Hartley-conditioned coordinates.
pub fn normalized_eight_point(corrs: &CorrSet) -> Result<FMat> {
    if corrs.len() < 8 {
        return Err(Error::InsufficientCorrespondences { needed: 8, got: corrs.len() });
    }
    let (t1, t2, normalized) = normalize_pairs(corrs)?;
    let f_hat = eight_point(&normalized)?;
    denormalize(&f_hat, &t1, &t2).canonical()
}

/// Row-major 9-vector to matrix.
pub(crate) fn reshape(f: &[f64]) -> Mat3 {
    linalg::mat_from_row_major(f)
}
