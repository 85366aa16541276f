//! Small dense linear-algebra helpers shared by the estimators.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

/// Singular value decomposition with singular values sorted in descending
/// order and a complete set of right singular vectors (columns of `v`).
pub(crate) struct SortedSvd {
    pub u: DMatrix<f64>,
    pub s: DVector<f64>,
    pub v: DMatrix<f64>,
}

/// SVD of an arbitrary `m x n` matrix with all `n` right singular vectors.
/// When `m < n` the trailing singular values are reported as zero.
///
/// The decomposition itself comes from faer; nalgebra's implicit-shift SVD
/// can lose several digits in the singular vectors of small matrices with
/// clustered singular values, which is exactly where null vectors live.
pub(crate) fn full_svd(a: &DMatrix<f64>) -> SortedSvd {
    let (m, n) = a.shape();
    let fa = faer::Mat::<f64>::from_fn(m, n, |i, j| a[(i, j)]);
    let svd = if m >= n { fa.thin_svd() } else { fa.svd() }.expect("SVD of a finite matrix");
    let (fu, fs, fv) = (svd.U(), svd.S().column_vector(), svd.V());
    let k = fs.nrows();
    let mut s = DVector::zeros(n);
    for i in 0..k.min(n) {
        s[i] = fs[i];
    }
    SortedSvd {
        u: DMatrix::from_fn(m, fu.ncols(), |r, c| fu[(r, c)]),
        s,
        v: DMatrix::from_fn(n, n, |r, c| fv[(r, c)]),
    }
}

/// Singular values of a 3x3 matrix in descending order.
pub(crate) fn singular_values3(m: &Matrix3<f64>) -> Vector3<f64> {
    let s = full_svd(&DMatrix::from_column_slice(3, 3, m.as_slice())).s;
    Vector3::new(s[0], s[1], s[2])
}

/// Full SVD of a 3x3 matrix, singular values descending.
pub(crate) fn svd3(m: &Matrix3<f64>) -> (Matrix3<f64>, Vector3<f64>, Matrix3<f64>) {
    let d = full_svd(&DMatrix::from_column_slice(3, 3, m.as_slice()));
    let u = Matrix3::from_fn(|r, c| d.u[(r, c)]);
    let v = Matrix3::from_fn(|r, c| d.v[(r, c)]);
    (u, Vector3::new(d.s[0], d.s[1], d.s[2]), v)
}

/// Index of the largest-magnitude entry, first one in iteration order on ties.
pub(crate) fn argmax_abs<'a>(values: impl IntoIterator<Item = &'a f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.into_iter().enumerate() {
        match best {
            Some((_, b)) if v.abs() <= b => {}
            _ => best = Some((i, v.abs())),
        }
    }
    best.map(|(i, _)| i)
}

/// Flip the sign of a 3-vector so that its largest-magnitude component is
/// positive.
pub(crate) fn canonical_sign3(v: Vector3<f64>) -> Vector3<f64> {
    match argmax_abs(v.iter()) {
        Some(i) if v[i] < 0.0 => -v,
        _ => v,
    }
}

/// Row-major 9-vector of a 3x3 matrix.
pub(crate) fn vec_row_major(m: &Matrix3<f64>) -> [f64; 9] {
    let mut out = [0.0; 9];
    for r in 0..3 {
        for c in 0..3 {
            out[3 * r + c] = m[(r, c)];
        }
    }
    out
}

/// Inverse of [`vec_row_major`].
pub(crate) fn mat_from_row_major<'a>(v: impl IntoIterator<Item = &'a f64>) -> Matrix3<f64> {
    let vals: Vec<f64> = v.into_iter().copied().collect();
    Matrix3::from_row_slice(&vals[..9])
}
