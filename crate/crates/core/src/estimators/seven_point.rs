//! Minimal seven-correspondence solver.
//!
//! The design matrix of seven pairs has a two-dimensional null space spanned
//! by `F1, F2`. The rank constraint `det(lambda F1 + (1 - lambda) F2) = 0` is
//! a cubic in `lambda`; each real root gives a candidate.

use crate::error::{Error, Result};
use crate::estimators::linear::{denormalize, design_matrix, normalize_pairs, reshape};
use crate::geometry::{CorrSet, FMat, Mat3};
use crate::linalg::full_svd;
use crate::poly;

/// A seventh singular value below this fraction of the first means the
/// null space has more than two dimensions.
pub const NULLSPACE_RANK_TOLERANCE: f64 = 1e-9;

fn adjugate(m: &Mat3) -> Mat3 {
    let c = |r0: usize, r1: usize, c0: usize, c1: usize| {
        m[(r0, c0)] * m[(r1, c1)] - m[(r0, c1)] * m[(r1, c0)]
    };
    Mat3::new(
        c(1, 2, 1, 2),
        -c(0, 2, 1, 2),
        c(0, 1, 1, 2),
        -c(1, 2, 0, 2),
        c(0, 2, 0, 2),
        -c(0, 1, 0, 2),
        c(1, 2, 0, 1),
        -c(0, 2, 0, 1),
        c(0, 1, 0, 1),
    )
}

/// Coefficients (highest degree first) of `det(a + lambda b)`.
pub(crate) fn determinant_cubic(a: &Mat3, b: &Mat3) -> [f64; 4] {
    [
        b.determinant(),
        (a * adjugate(b)).trace(),
        (adjugate(a) * b).trace(),
        a.determinant(),
    ]
}

pub fn seven_point(corrs: &CorrSet) -> Result<Vec<FMat>> {
    if corrs.len() != 7 {
        return Err(Error::WrongSampleSize(corrs.len()));
    }
    let (t1, t2, normalized) = normalize_pairs(corrs)?;
    let d = full_svd(design_matrix(&normalized).matrix());
    if d.s[0] == 0.0 || d.s[6] <= NULLSPACE_RANK_TOLERANCE * d.s[0] {
        return Err(Error::DegenerateConfiguration(
            "seven-point null space has more than two dimensions".into(),
        ));
    }
    let f1 = reshape(d.v.column(7).as_slice());
    let f2 = reshape(d.v.column(8).as_slice());
    let diff = f1 - f2;

    // det(F2 + lambda (F1 - F2))
    let cubic = determinant_cubic(&f2, &diff);
    let mut candidates: Vec<Mat3> =
        poly::real_roots(&cubic).into_iter().map(|l| f2 + diff * l).collect();
    let scale = cubic.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if cubic[0].abs() <= 1e-12 * scale {
        // root at infinity: the direction itself is singular
        candidates.push(diff);
    }

    candidates
        .iter()
        .filter(|m| m.norm() > 0.0)
        .map(|m| denormalize(&FMat::new(*m), &t1, &t2).canonical())
        .collect()
}
