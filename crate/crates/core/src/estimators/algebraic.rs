//! Algebraic-error minimization over singular matrices `F = M [e]x`.
//!
//! Each iteration reads the epipole `e` off the current estimate, solves
//! `min |A E m|` subject to `|E m| = 1` on an orthonormal basis of
//! `range(E)`, then holds `M` fixed and solves the same problem for `e`
//! (the product is linear in either factor). Both half-steps are exact
//! constrained minimizers started from a feasible point, so the objective
//! never increases.

use nalgebra::{DMatrix, DVector, SMatrix};

use crate::error::{Error, Result};
use crate::estimators::linear::{design_matrix, reshape, DesignMatrix, NULLSPACE_GAP};
use crate::geometry::{right_epipole, skew, CorrSet, FMat, Mat3, Vec3};
use crate::linalg::{full_svd, vec_row_major};

pub const MAX_ITERATIONS: usize = 100;
pub const RELATIVE_DECREASE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraicFit {
    pub f: FMat,
    /// `|A vec(F)|` with `|vec(F)| = 1`: the initial value followed by one
    /// entry per accepted iteration.
    pub trace: Vec<f64>,
    /// Unit-norm matrix behind each `trace` entry.
    pub iterates: Vec<FMat>,
    pub iterations: usize,
}

pub fn algebraic_objective(a: &DesignMatrix, f: &FMat) -> f64 {
    a.apply(f).norm() / f.frobenius_norm()
}

/// `E` with `vec(M [e]x) = E vec(M)`, row-major vectorization.
fn epipole_operator(e: &Vec3) -> SMatrix<f64, 9, 9> {
    let s = skew(e);
    let mut op = SMatrix::<f64, 9, 9>::zeros();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                op[(3 * i + j, 3 * i + k)] = s[(k, j)];
            }
        }
    }
    op
}

/// Minimize `|A B z|` over unit `z`, where `B` has orthonormal columns.
/// Returns the minimizer and whether it is unique.
fn constrained_min(a: &DMatrix<f64>, basis: &DMatrix<f64>) -> (DVector<f64>, bool) {
    let d = full_svd(&(a * basis));
    let k = d.s.len();
    let unique = d.s[k - 2] - d.s[k - 1] > NULLSPACE_GAP * d.s[0];
    (d.v.column(k - 1).into_owned(), unique)
}

fn unit(f: Mat3) -> FMat {
    FMat::new(f / f.norm())
}

/// M-step: best `F` sharing the epipole `e`, plus a factor `M` with
/// `F = M [e]x`.
fn solve_for_m(a: &DMatrix<f64>, e: &Vec3) -> Result<(FMat, Mat3)> {
    let op = epipole_operator(e);
    let op_d = DMatrix::from_column_slice(9, 9, op.as_slice());
    let d = full_svd(&op_d);
    let rank = 6;
    let u = d.u.columns(0, rank).into_owned();
    let (y, unique) = constrained_min(a, &u);
    if !unique {
        return Err(Error::DegenerateConfiguration(
            "algebraic minimization has no unique solution for this epipole".into(),
        ));
    }
    let f = &u * &y;
    // minimum-norm M through the pseudo-inverse of E
    let mut m = DVector::<f64>::zeros(9);
    for c in 0..rank {
        let coeff = d.u.column(c).dot(&f) / d.s[c];
        m += d.v.column(c) * coeff;
    }
    Ok((unit(reshape(f.as_slice())), reshape(m.as_slice())))
}

/// e-step: best `F = M [e]x` over the epipole with `M` held fixed.
fn solve_for_e(a: &DMatrix<f64>, m: &Mat3) -> Option<FMat> {
    let mut b = DMatrix::<f64>::zeros(9, 3);
    for k in 0..3 {
        let col = vec_row_major(&(m * skew(&Vec3::ith(k, 1.0))));
        b.column_mut(k).copy_from_slice(&col);
    }
    let qr = b.qr();
    let r = qr.r();
    let diag_min = (0..3).map(|i| r[(i, i)].abs()).fold(f64::INFINITY, f64::min);
    let diag_max = (0..3).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if !(diag_min > 1e-12 * diag_max) {
        return None;
    }
    let q = qr.q();
    let (z, _) = constrained_min(a, &q);
    Some(unit(reshape((&q * &z).as_slice())))
}

pub fn algebraic_minimization(corrs: &CorrSet, f_init: &FMat) -> Result<AlgebraicFit> {
    if corrs.len() < 8 {
        return Err(Error::InsufficientCorrespondences { needed: 8, got: corrs.len() });
    }
    let s = f_init.singular_values();
    if !(s[0] > 0.0) || s[1] <= 1e-9 * s[0] || s[2] > 1e-6 * s[0] {
        return Err(Error::RankDeficientInit);
    }
    let design = design_matrix(corrs);
    let a = design.matrix();
    let floor = 1e-15 * a.norm();

    let mut f = unit(*f_init.matrix());
    let mut obj = algebraic_objective(&design, &f);
    let mut trace = vec![obj];
    let mut iterates = vec![f];
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let e = right_epipole(&f).map_err(|_| Error::RankDeficientInit)?;
        let (f_m, m) = solve_for_m(a, &e)?;
        let mut next = f_m;
        let mut next_obj = algebraic_objective(&design, &f_m);
        if let Some(f_e) = solve_for_e(a, &m) {
            let o = algebraic_objective(&design, &f_e);
            if o <= next_obj {
                next = f_e;
                next_obj = o;
            }
        }
        if next_obj > obj {
            break;
        }
        let decrease = obj - next_obj;
        f = next;
        obj = next_obj;
        trace.push(obj);
        iterates.push(f);
        if decrease <= RELATIVE_DECREASE_TOLERANCE * trace[trace.len() - 2] || obj <= floor {
            break;
        }
    }
    Ok(AlgebraicFit { f: f.canonical()?, trace, iterates, iterations })
}
