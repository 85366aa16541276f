//! Epipolar parametrization: the first two columns of F plus coefficients
//! `(alpha, beta)` with `f3 = alpha f1 + beta f2`.
//!
//! The right null vector of the result is `(alpha, beta, -1)`.

use nalgebra::{DMatrix, DVector, Matrix3x2};

use crate::error::{Error, Result};
use crate::geometry::{FMat, Mat3, Vec3};
use crate::linalg::full_svd;

/// Columns are treated as dependent when `sigma_min / sigma_max` of
/// `[f1 f2]` falls to this ratio or below.
pub const DEPENDENT_COLUMNS_RATIO: f64 = 1e-8;

/// `(f1 (3), f2 (3), alpha, beta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpiParams(pub [f64; 8]);

impl EpiParams {
    pub fn new(f1: Vec3, f2: Vec3, alpha: f64, beta: f64) -> Self {
        EpiParams([f1[0], f1[1], f1[2], f2[0], f2[1], f2[2], alpha, beta])
    }

    pub fn first_column(&self) -> Vec3 {
        Vec3::new(self.0[0], self.0[1], self.0[2])
    }

    pub fn second_column(&self) -> Vec3 {
        Vec3::new(self.0[3], self.0[4], self.0[5])
    }

    pub fn alpha(&self) -> f64 {
        self.0[6]
    }

    pub fn beta(&self) -> f64 {
        self.0[7]
    }

    /// Read the columns off a rank-two matrix and solve the third column for
    /// `(alpha, beta)` in the least-squares sense.
    pub fn from_fmat(f: &FMat) -> Result<Self> {
        let m = f.matrix();
        let f1: Vec3 = m.column(0).into_owned();
        let f2: Vec3 = m.column(1).into_owned();
        let basis = Matrix3x2::from_columns(&[f1, f2]);
        check_independent(&basis)?;
        let d = full_svd(&DMatrix::from_column_slice(3, 2, basis.as_slice()));
        let rhs = DVector::from_column_slice(m.column(2).as_slice());
        let mut coeffs = DVector::zeros(2);
        for k in 0..2 {
            coeffs += d.v.column(k) * (d.u.column(k).dot(&rhs) / d.s[k]);
        }
        Ok(EpiParams::new(f1, f2, coeffs[0], coeffs[1]))
    }

    pub fn check(&self) -> Result<()> {
        check_independent(&Matrix3x2::from_columns(&[self.first_column(), self.second_column()]))
    }
}

fn check_independent(basis: &Matrix3x2<f64>) -> Result<()> {
    let s = full_svd(&DMatrix::from_column_slice(3, 2, basis.as_slice())).s;
    let (hi, lo) = (s[0], s[1]);
    let ratio = if hi == 0.0 { 0.0 } else { lo / hi };
    if ratio <= DEPENDENT_COLUMNS_RATIO {
        return Err(Error::DependentColumns(ratio));
    }
    Ok(())
}

pub fn epi_forward(v: &EpiParams) -> Result<FMat> {
    v.check()?;
    let (f1, f2) = (v.first_column(), v.second_column());
    let f3 = f1 * v.alpha() + f2 * v.beta();
    Ok(FMat::new(Mat3::from_columns(&[f1, f2, f3])))
}

pub fn epi_backward(v: &EpiParams, upstream: &Mat3) -> Result<[f64; 8]> {
    v.check()?;
    let g3: Vec3 = upstream.column(2).into_owned();
    let d1 = upstream.column(0) + g3 * v.alpha();
    let d2 = upstream.column(1) + g3 * v.beta();
    Ok([
        d1[0],
        d1[1],
        d1[2],
        d2[0],
        d2[1],
        d2[2],
        v.first_column().dot(&g3),
        v.second_column().dot(&g3),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_coefficients_leave_third_column_empty() {
        let v = EpiParams::new(Vec3::x(), Vec3::y(), 0.0, 0.0);
        let f = epi_forward(&v).unwrap();
        assert_eq!(*f.matrix(), Mat3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn dependent_columns_rejected() {
        let v = EpiParams::new(Vec3::new(1.0, 2.0, 3.0), Vec3::new(2.0, 4.0, 6.0), 0.5, 0.5);
        assert!(matches!(epi_forward(&v), Err(Error::DependentColumns(_))));
        assert!(matches!(epi_backward(&v, &Mat3::identity()), Err(Error::DependentColumns(_))));
        let zero = EpiParams([0.0; 8]);
        assert!(matches!(epi_forward(&zero), Err(Error::DependentColumns(_))));
    }

    #[test]
    fn determinant_vanishes() {
        let v = EpiParams::new(Vec3::new(1.0, 2.0, 3.0), Vec3::new(4.0, 5.0, 6.5), 0.7, -1.3);
        let f = epi_forward(&v).unwrap();
        let scale = f.matrix().amax().powi(3);
        assert!(f.matrix().determinant().abs() <= 1e-12 * scale);
        let e = Vec3::new(v.alpha(), v.beta(), -1.0);
        assert!((f.matrix() * e).norm() <= 1e-12 * f.frobenius_norm());
    }

    #[test]
    fn backward_examples() {
        let v = EpiParams::new(Vec3::new(1.0, 2.0, 3.0), Vec3::new(4.0, 5.0, 6.5), 0.7, -1.3);
        assert_eq!(epi_backward(&v, &Mat3::zeros()).unwrap(), [0.0; 8]);
        let mut e33 = Mat3::zeros();
        e33[(2, 2)] = 1.0;
        let g = epi_backward(&v, &e33).unwrap();
        assert_eq!(g[6], v.first_column()[2]);
        assert_eq!(g[7], v.second_column()[2]);
    }

    #[test]
    fn from_fmat_round_trips() {
        let v = EpiParams::new(Vec3::new(1.0, -2.0, 0.5), Vec3::new(0.3, 0.2, 1.0), 0.25, -4.0);
        let f = epi_forward(&v).unwrap();
        let w = EpiParams::from_fmat(&f).unwrap();
        for (a, b) in v.0.iter().zip(w.0.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
