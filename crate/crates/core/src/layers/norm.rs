//! Scale-fixing normalization layers.
//!
//! - ETR: divide by the last entry `f33`.
//! - FBN: divide by the Frobenius norm.
//! - ABS: divide by the largest absolute entry.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{FMat, Mat3};
use crate::linalg;

/// Guard threshold for the ETR divisor.
pub const ETR_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum NormKind {
    Etr,
    Fbn,
    Abs,
}

impl NormKind {
    pub const ALL: [NormKind; 3] = [NormKind::Etr, NormKind::Fbn, NormKind::Abs];
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormKind::Etr => "ETR",
            NormKind::Fbn => "FBN",
            NormKind::Abs => "ABS",
        })
    }
}

impl FromStr for NormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().trim_end_matches("-NORM") {
            "ETR" => Ok(NormKind::Etr),
            "FBN" => Ok(NormKind::Fbn),
            "ABS" => Ok(NormKind::Abs),
            _ => Err(Error::Parse(format!("unknown normalization `{s}`"))),
        }
    }
}

/// Row/column of the first entry (row-major) with the largest magnitude.
pub fn abs_argmax(f: &Mat3) -> (usize, usize) {
    let i = linalg::argmax_abs(linalg::vec_row_major(f).iter()).expect("nine entries");
    (i / 3, i % 3)
}

/// True when another entry's magnitude is within `rel_tol` of the maximum.
pub fn has_abs_tie(f: &Mat3, rel_tol: f64) -> bool {
    let (r, c) = abs_argmax(f);
    let top = f[(r, c)].abs();
    f.iter().filter(|v| top - v.abs() <= rel_tol * top).count() > 1
}

/// The positive-or-signed scalar each kind divides by.
fn divisor(f: &Mat3, kind: NormKind) -> Result<f64> {
    match kind {
        NormKind::Etr => {
            let d = f[(2, 2)];
            if d.abs() <= ETR_EPSILON {
                return Err(Error::NearZeroDivisor(d));
            }
            Ok(d)
        }
        NormKind::Fbn => {
            let n = f.norm();
            if n == 0.0 {
                return Err(Error::ZeroMatrix);
            }
            Ok(n)
        }
        NormKind::Abs => {
            let (r, c) = abs_argmax(f);
            let m = f[(r, c)].abs();
            if m == 0.0 {
                return Err(Error::ZeroMatrix);
            }
            Ok(m)
        }
    }
}

pub fn normalize(f: &FMat, kind: NormKind) -> Result<FMat> {
    let m = f.matrix();
    let d = divisor(m, kind)?;
    let mut out = m / d;
    if kind == NormKind::Etr {
        out[(2, 2)] = 1.0;
    }
    Ok(FMat::new(out))
}

/// Vector-Jacobian product of [`normalize`].
///
/// With `N = F / d(F)`, the gradient is `(G - <G, N> grad d) / d`, where
/// `grad d` is `e33` for ETR, `N` for FBN and `sign(f_ab) e_ab` for ABS
/// (`(a, b)` the first maximizer, a valid subgradient at ties).
pub fn normalize_backward(f: &FMat, kind: NormKind, upstream: &Mat3) -> Result<Mat3> {
    let m = f.matrix();
    let d = divisor(m, kind)?;
    let n = normalize(f, kind)?.into_matrix();
    let proj = upstream.component_mul(&n).sum();
    let mut g = *upstream;
    match kind {
        NormKind::Etr => g[(2, 2)] -= proj,
        NormKind::Fbn => g -= n * proj,
        NormKind::Abs => {
            let (r, c) = abs_argmax(m);
            g[(r, c)] -= proj * m[(r, c)].signum();
        }
    }
    Ok(g / d)
}
