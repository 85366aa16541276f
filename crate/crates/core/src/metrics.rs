//! Epipolar-constraint metrics and distances.
//!
//! EPI-ABS and EPI-SQR are the sums of absolute and squared algebraic
//! residuals `q^T F p`; they scale with F, so compare them only between
//! matrices normalized the same way. The symmetric epipolar distance is
//! scale-free and drives inlier scoring and high-confidence selection.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{epipolar_residual, CorrSet, FMat, HomoPoint};

/// Default cut-off (px^2) on the symmetric epipolar distance under the
/// ground-truth matrix for a correspondence to count as high-confidence.
pub const HIGH_CONFIDENCE_THRESHOLD: f64 = 2.0;

pub fn residuals(f: &FMat, corrs: &CorrSet) -> Vec<f64> {
    corrs.iter().map(|(p, q)| epipolar_residual(f, p, q)).collect()
}

pub fn epi_abs(f: &FMat, corrs: &CorrSet) -> f64 {
    corrs.iter().map(|(p, q)| epipolar_residual(f, p, q).abs()).sum()
}

pub fn epi_sqr(f: &FMat, corrs: &CorrSet) -> f64 {
    corrs.iter().map(|(p, q)| epipolar_residual(f, p, q).powi(2)).sum()
}

/// Both metrics, as sums and as per-point means.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub epi_abs: f64,
    pub epi_sqr: f64,
    pub mean_abs: f64,
    pub mean_sqr: f64,
    pub n_points: usize,
    pub per_point: Option<Vec<f64>>,
}

impl MetricReport {
    pub fn compute(f: &FMat, corrs: &CorrSet, keep_residuals: bool) -> Self {
        let r = residuals(f, corrs);
        let n = r.len();
        let epi_abs: f64 = r.iter().map(|v| v.abs()).sum();
        let epi_sqr: f64 = r.iter().map(|v| v * v).sum();
        MetricReport {
            epi_abs,
            epi_sqr,
            mean_abs: epi_abs / n as f64,
            mean_sqr: epi_sqr / n as f64,
            n_points: n,
            per_point: keep_residuals.then_some(r),
        }
    }

    /// `key: value` lines.
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        writeln!(s, "n_points: {}", self.n_points).unwrap();
        writeln!(s, "epi_abs: {:.16e}", self.epi_abs).unwrap();
        writeln!(s, "epi_sqr: {:.16e}", self.epi_sqr).unwrap();
        writeln!(s, "epi_abs_mean: {:.16e}", self.mean_abs).unwrap();
        writeln!(s, "epi_sqr_mean: {:.16e}", self.mean_sqr).unwrap();
        s
    }

    pub const CSV_HEADER: &'static str = "n_points,epi_abs,epi_sqr,epi_abs_mean,epi_sqr_mean";

    pub fn to_csv_record(&self) -> String {
        format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.n_points, self.epi_abs, self.epi_sqr, self.mean_abs, self.mean_sqr
        )
    }
}

/// `r^2 (1 / |(Fp)_12|^2 + 1 / |(F^T q)_12|^2)` with `r = q^T F p`: the sum
/// of squared point-to-epipolar-line distances in both images, in px^2.
///
/// A side whose epipolar line has a vanishing normal contributes nothing;
/// if both vanish the distance is undefined.
pub fn symmetric_epipolar_distance(f: &FMat, p: &HomoPoint, q: &HomoPoint) -> Result<f64> {
    let (pv, qv) = (p.to_vector(), q.to_vector());
    let l2 = f.matrix() * pv;
    let l1 = f.matrix().transpose() * qv;
    let r = qv.dot(&l2);
    let n2 = l2[0] * l2[0] + l2[1] * l2[1];
    let n1 = l1[0] * l1[0] + l1[1] * l1[1];
    if n1 == 0.0 && n2 == 0.0 {
        return Err(Error::DegenerateLine);
    }
    let term = |n: f64| if n > 0.0 { r * r / n } else { 0.0 };
    Ok(term(n2) + term(n1))
}

/// Indices (in order) of pairs whose symmetric epipolar distance under
/// `f_gt` is below `threshold`. Pairs sitting on both epipoles are skipped.
pub fn high_confidence_indices(corrs: &CorrSet, f_gt: &FMat, threshold: f64) -> Vec<usize> {
    corrs
        .iter()
        .enumerate()
        .filter(|(_, (p, q))| {
            symmetric_epipolar_distance(f_gt, p, q).is_ok_and(|d| d < threshold)
        })
        .map(|(i, _)| i)
        .collect()
}

pub fn select_high_confidence(corrs: &CorrSet, f_gt: &FMat, threshold: f64) -> Result<CorrSet> {
    let keep = high_confidence_indices(corrs, f_gt, threshold);
    if keep.is_empty() {
        return Err(Error::EmptySelection);
    }
    corrs.subset(&keep)
}

/// Up-to-scale distance: Frobenius norm between canonical representatives.
pub fn fmat_distance(a: &FMat, b: &FMat) -> Result<f64> {
    let (ca, cb) = (a.canonical()?, b.canonical()?);
    Ok((ca.matrix() - cb.matrix()).norm())
}
