//! Combined L1 + L2 training loss between normalized matrices.

use crate::error::{Error, Result};
use crate::geometry::{FMat, Mat3};
use crate::layers::norm::{normalize, NormKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub l1: f64,
    pub l2: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights { l1: 1.0, l2: 1.0 }
    }
}

/// A matrix tagged with the normalization that produced it (`None` for a
/// raw, unnormalized matrix).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalized {
    pub kind: Option<NormKind>,
    pub mat: FMat,
}

impl Normalized {
    pub fn new(f: &FMat, kind: NormKind) -> Result<Self> {
        Ok(Normalized { kind: Some(kind), mat: normalize(f, kind)? })
    }

    pub fn raw(f: FMat) -> Self {
        Normalized { kind: None, mat: f }
    }
}

fn label(kind: Option<NormKind>) -> String {
    kind.map_or_else(|| "none".to_string(), |k| k.to_string())
}

/// `sign` with `sign(0) = 0`.
fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `w1 * sum|D| + w2 * sum D^2` with `D = pred - target`, and its gradient
/// with respect to `pred`.
pub fn loss(pred: &Normalized, target: &Normalized, weights: LossWeights) -> Result<(f64, Mat3)> {
    if pred.kind != target.kind {
        return Err(Error::MixedNormalization { pred: label(pred.kind), target: label(target.kind) });
    }
    let delta = pred.mat.matrix() - target.mat.matrix();
    let value = weights.l1 * delta.iter().map(|d| d.abs()).sum::<f64>()
        + weights.l2 * delta.iter().map(|d| d * d).sum::<f64>();
    let grad = delta.map(|d| weights.l1 * sign(d) + 2.0 * weights.l2 * d);
    Ok((value, grad))
}
