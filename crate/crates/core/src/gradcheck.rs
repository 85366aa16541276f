//! Analytic backward passes against central finite differences.
//!
//! Each trial draws a random input `x` and a random upstream matrix `G`, and
//! compares the analytic gradient of `L(x) = <G, layer(x)>` with central
//! differences using `h = 1e-6 (1 + |x_k|)`. The error is
//! `max_k |a_k - n_k| / max(|a|_inf, |n|_inf, 1e-12)`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{FMat, Mat3, Vec3};
use crate::layers::norm::{abs_argmax, has_abs_tie};
use crate::layers::{
    epi_backward, epi_forward, loss, normalize, normalize_backward,
    reconstruct_backward, reconstruct_forward, EpiParams, LossWeights, NormKind, Normalized,
    PrincipalPoints, ReconParams,
};

pub const GRADCHECK_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layer {
    Recon,
    Epi,
    Norm(NormKind),
    Loss,
}

impl Layer {
    pub const ALL: [Layer; 6] = [
        Layer::Recon,
        Layer::Epi,
        Layer::Norm(NormKind::Etr),
        Layer::Norm(NormKind::Fbn),
        Layer::Norm(NormKind::Abs),
        Layer::Loss,
    ];
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Layer::Recon => write!(f, "recon"),
            Layer::Epi => write!(f, "epi"),
            Layer::Norm(k) => write!(f, "norm-{}", k.to_string().to_lowercase()),
            Layer::Loss => write!(f, "loss"),
        }
    }
}

impl FromStr for Layer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Layer::ALL
            .into_iter()
            .find(|l| l.to_string() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidConfig(format!("unknown layer {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradcheckReport {
    pub layer: Layer,
    pub trials: usize,
    pub failures: usize,
    pub worst_error: f64,
    pub worst_point: Vec<f64>,
    /// Trials at a tie or kink, checked against a one-sided branch or a
    /// subgradient interval instead of plain differences.
    pub ties: usize,
}

impl GradcheckReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl fmt::Display for GradcheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let point: Vec<String> = self.worst_point.iter().map(|v| format!("{v:.6e}")).collect();
        writeln!(f, "layer: {}", self.layer)?;
        writeln!(f, "trials: {}", self.trials)?;
        writeln!(f, "failures: {}", self.failures)?;
        writeln!(f, "excluded_ties: {}", self.ties)?;
        writeln!(f, "worst_relative_error: {:.6e}", self.worst_error)?;
        writeln!(f, "worst_point: [{}]", point.join(", "))?;
        write!(f, "status: {}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

/// Relative gradient error used throughout.
pub fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let inf = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let diff = analytic.iter().zip(numeric).fold(0.0f64, |m, (a, n)| m.max((a - n).abs()));
    diff / inf(analytic).max(inf(numeric)).max(1e-12)
}

/// Central differences of a scalar function.
pub fn numeric_gradient(x: &[f64], mut f: impl FnMut(&[f64]) -> Result<f64>) -> Result<Vec<f64>> {
    let mut g = vec![0.0; x.len()];
    let mut probe = x.to_vec();
    for k in 0..x.len() {
        let h = 1e-6 * (1.0 + x[k].abs());
        probe[k] = x[k] + h;
        let up = f(&probe)?;
        probe[k] = x[k] - h;
        let down = f(&probe)?;
        probe[k] = x[k];
        g[k] = (up - down) / (2.0 * h);
    }
    Ok(g)
}

fn inner(g: &Mat3, f: &Mat3) -> f64 {
    g.component_mul(f).sum()
}

fn mat(x: &[f64]) -> Mat3 {
    Mat3::from_row_slice(x)
}

fn grad_vec(g: &Mat3) -> Vec<f64> {
    g.transpose().as_slice().to_vec()
}

fn random_mat(rng: &mut ChaCha8Rng) -> Mat3 {
    Mat3::from_fn(|_, _| rng.random_range(-1.0..1.0))
}

struct Outcome {
    error: f64,
    point: Vec<f64>,
    passed: bool,
    tie: bool,
}

fn smooth(point: Vec<f64>, analytic: Vec<f64>, numeric: Vec<f64>) -> Outcome {
    let error = relative_error(&analytic, &numeric);
    Outcome { error, point, passed: error < GRADCHECK_TOLERANCE, tie: false }
}

fn recon_trial(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let principal: PrincipalPoints =
        [(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)), (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))];
    let mut t = Vec3::zeros();
    while t.norm() < 0.1 {
        t = Vec3::from_fn(|_, _| rng.random_range(-1.0..1.0));
    }
    let r = Vec3::from_fn(|_, _| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI));
    let theta = ReconParams::new(rng.random_range(0.5..2.0), rng.random_range(0.5..2.0), t, r);
    let g = random_mat(rng);
    let analytic = reconstruct_backward(&theta, &principal, &g)?.to_vec();
    let numeric = numeric_gradient(&theta.0, |x| {
        let p = ReconParams(x.try_into().expect("eight values"));
        Ok(inner(&g, reconstruct_forward(&p, &principal)?.matrix()))
    })?;
    Ok(smooth(theta.0.to_vec(), analytic, numeric))
}

fn epi_trial(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let v = loop {
        let v = EpiParams(std::array::from_fn(|k| {
            if k < 6 {
                rng.random_range(-1.0..1.0)
            } else {
                rng.random_range(-2.0..2.0)
            }
        }));
        if v.check().is_ok() {
            break v;
        }
    };
    let g = random_mat(rng);
    let analytic = epi_backward(&v, &g)?.to_vec();
    let numeric = numeric_gradient(&v.0, |x| {
        let p = EpiParams(x.try_into().expect("eight values"));
        Ok(inner(&g, epi_forward(&p)?.matrix()))
    })?;
    Ok(smooth(v.0.to_vec(), analytic, numeric))
}

/// Random input for a normalization layer, away from its singular set.
fn norm_input(rng: &mut ChaCha8Rng, kind: NormKind) -> Mat3 {
    loop {
        let m = random_mat(rng);
        let ok = match kind {
            NormKind::Etr => m[(2, 2)].abs() > 0.1,
            NormKind::Fbn => m.norm() > 0.1,
            // keep the maximizer unique well beyond the difference step
            NormKind::Abs => !has_abs_tie(&m, 1e-3),
        };
        if ok {
            return m;
        }
    }
}

/// Two entries of equal largest magnitude, opposite signs.
fn abs_tie_input(rng: &mut ChaCha8Rng) -> Mat3 {
    let mut m = Mat3::from_fn(|_, _| rng.random_range(-0.5..0.5));
    let v = rng.random_range(0.8..1.0);
    m[(0, 1)] = v;
    m[(2, 0)] = -v;
    m
}

fn norm_trial(rng: &mut ChaCha8Rng, kind: NormKind, tie: bool) -> Result<Outcome> {
    let at_tie = tie && kind == NormKind::Abs;
    let m = if at_tie { abs_tie_input(rng) } else { norm_input(rng, kind) };
    let g = random_mat(rng);
    let f = FMat::new(m);
    let analytic = grad_vec(&normalize_backward(&f, kind, &g)?);
    let x = f.to_row_major();
    let numeric = if at_tie {
        // one-sided branch: the divisor stays pinned to the first maximizer
        let (a, b) = abs_argmax(&m);
        numeric_gradient(&x, |v| {
            let p = mat(v);
            Ok(inner(&g, &(p / p[(a, b)].abs())))
        })?
    } else {
        numeric_gradient(&x, |v| Ok(inner(&g, normalize(&FMat::new(mat(v)), kind)?.matrix())))?
    };
    let mut out = smooth(x.to_vec(), analytic, numeric);
    out.tie = at_tie;
    Ok(out)
}

fn loss_trial(rng: &mut ChaCha8Rng, tie: bool) -> Result<Outcome> {
    let target = random_mat(rng);
    let mut pred = random_mat(rng);
    let mut kinks = [false; 9];
    if tie {
        // put a few entries exactly on the L1 kink
        for k in [0usize, 4, 8] {
            pred[(k / 3, k % 3)] = target[(k / 3, k % 3)];
            kinks[k] = true;
        }
    }
    let target_n = Normalized::raw(FMat::new(target));
    let x = FMat::new(pred).to_row_major();
    let mut worst = 0.0f64;
    let mut passed = true;
    for weights in [LossWeights { l1: 1.0, l2: 0.0 }, LossWeights { l1: 0.0, l2: 1.0 }, LossWeights::default()] {
        let (_, g) = loss(&Normalized::raw(FMat::new(pred)), &target_n, weights)?;
        let analytic = grad_vec(&g);
        let numeric = numeric_gradient(&x, |v| Ok(loss(&Normalized::raw(FMat::new(mat(v))), &target_n, weights)?.0))?;
        // kink entries: the analytic value must lie in the subdifferential
        // [-w1, w1]; smooth entries are compared as usual
        let (mut a, mut n) = (Vec::new(), Vec::new());
        for k in 0..9 {
            if kinks[k] {
                passed &= analytic[k].abs() <= weights.l1 + 1e-15;
            } else {
                a.push(analytic[k]);
                n.push(numeric[k]);
            }
        }
        worst = worst.max(relative_error(&a, &n));
    }
    passed &= worst < GRADCHECK_TOLERANCE;
    Ok(Outcome { error: worst, point: x.to_vec(), passed, tie })
}

/// Run `trials` seeded checks of one layer. With `tie`, ABS normalization is
/// checked at constructed ties and the loss at L1 kinks.
pub fn gradcheck(layer: Layer, trials: usize, seed: u64, tie: bool) -> Result<GradcheckReport> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    let mut report = GradcheckReport {
        layer,
        trials,
        failures: 0,
        worst_error: 0.0,
        worst_point: Vec::new(),
        ties: 0,
    };
    for i in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let out = match layer {
            Layer::Recon => recon_trial(&mut rng)?,
            Layer::Epi => epi_trial(&mut rng)?,
            Layer::Norm(k) => norm_trial(&mut rng, k, tie)?,
            Layer::Loss => loss_trial(&mut rng, tie)?,
        };
        if !out.passed {
            report.failures += 1;
        }
        if out.tie {
            report.ties += 1;
        }
        if report.worst_point.is_empty() || out.error > report.worst_error {
            report.worst_error = out.error;
            report.worst_point = out.point;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layer_names_round_trip() {
        for l in Layer::ALL {
            assert_eq!(l.to_string().parse::<Layer>().unwrap(), l);
        }
        assert!("norm-xyz".parse::<Layer>().is_err());
    }

    #[test]
    fn relative_error_examples() {
        assert_eq!(relative_error(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert!((relative_error(&[1.0, 2.0], &[1.0, 2.2]) - 0.2 / 2.2).abs() < 1e-15);
        assert_eq!(relative_error(&[0.0], &[0.0]), 0.0);
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(matches!(gradcheck(Layer::Recon, 0, 1, false), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn every_layer_passes() {
        for layer in Layer::ALL {
            for tie in [false, true] {
                let r = gradcheck(layer, 100, 3, tie).unwrap();
                assert!(r.passed(), "{r}");
            }
        }
        assert_eq!(gradcheck(Layer::Norm(NormKind::Abs), 5, 1, true).unwrap().ties, 5);
        assert_eq!(gradcheck(Layer::Norm(NormKind::Abs), 5, 1, false).unwrap().ties, 0);
    }
}
