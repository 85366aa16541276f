//! Gradient-descent fitting of fundamental matrices through the
//! differentiable layers.
//!
//! By default the gradient is preconditioned with the damped Gauss-Newton
//! matrix `J^T J` of the current iterate, so focal lengths of a few hundred
//! pixels and angles of a few hundredths of a radian move at comparable
//! rates. With `precondition` off the raw gradient is used. Either way the
//! line search only accepts steps that strictly lower the objective.

use nalgebra::{DMatrix, SMatrix, SVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::design_matrix;
use crate::geometry::{CorrSet, FMat, HomoPoint, Mat3};
use crate::io::{fmt_f64, format_fmat};
use crate::layers::{
    epi_backward, epi_forward, loss, normalize, normalize_backward, reconstruct_backward,
    reconstruct_forward, EpiParams, LossWeights, NormKind, Normalized, PrincipalPoints,
    ReconParams,
};

pub const MAX_HALVINGS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parametrization {
    Recon,
    Epi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// `sum_i (q_i^T F p_i)^2` over correspondences.
    EpiSqr,
    /// L1 + L2 distance to a target matrix.
    Supervised,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub parametrization: Parametrization,
    /// Applied to `F(theta)` (and to the target) before the objective.
    pub norm: Option<NormKind>,
    pub objective: Objective,
    pub step_size: f64,
    pub max_steps: usize,
    pub grad_tolerance: f64,
    pub seed: u64,
    pub weights: LossWeights,
    /// Principal points for the reconstruction layer.
    pub principal: PrincipalPoints,
    /// Precondition the gradient with the Gauss-Newton matrix of the
    /// current iterate.
    pub precondition: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            parametrization: Parametrization::Recon,
            norm: Some(NormKind::Fbn),
            objective: Objective::EpiSqr,
            step_size: 1e-2,
            max_steps: 2000,
            grad_tolerance: 1e-10,
            seed: 0,
            weights: LossWeights::default(),
            principal: [(0.0, 0.0); 2],
            precondition: true,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0) {
            return Err(Error::InvalidConfig("step_size must be positive".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be at least 1".into()));
        }
        if !(self.grad_tolerance >= 0.0) {
            return Err(Error::InvalidConfig("grad_tolerance must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Params {
    Recon(ReconParams),
    Epi(EpiParams),
}

impl Params {
    pub fn values(&self) -> [f64; 8] {
        match self {
            Params::Recon(p) => p.0,
            Params::Epi(p) => p.0,
        }
    }

    pub fn with_values(&self, v: [f64; 8]) -> Params {
        match self {
            Params::Recon(_) => Params::Recon(ReconParams(v)),
            Params::Epi(_) => Params::Epi(EpiParams(v)),
        }
    }

    pub fn parametrization(&self) -> Parametrization {
        match self {
            Params::Recon(_) => Parametrization::Recon,
            Params::Epi(_) => Parametrization::Epi,
        }
    }

    /// The raw (unnormalized) fundamental matrix.
    pub fn forward(&self, principal: &PrincipalPoints) -> Result<FMat> {
        match self {
            Params::Recon(p) => reconstruct_forward(p, principal),
            Params::Epi(p) => epi_forward(p),
        }
    }

    fn backward(&self, principal: &PrincipalPoints, upstream: &Mat3) -> Result<[f64; 8]> {
        match self {
            Params::Recon(p) => reconstruct_backward(p, principal, upstream),
            Params::Epi(p) => epi_backward(p, upstream),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum FitData<'a> {
    Corrs(&'a CorrSet),
    Target(&'a FMat),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxSteps,
    LineSearchFailed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitTrace {
    /// Objective at the start and after every accepted step.
    pub objectives: Vec<f64>,
    pub params: Params,
    /// Final matrix, normalized as configured.
    pub f: FMat,
    pub converged: bool,
    pub steps: usize,
    pub stop: StopReason,
}

impl FitTrace {
    pub fn final_objective(&self) -> f64 {
        *self.objectives.last().expect("trace holds the initial objective")
    }

    /// `step,objective` rows, a blank line, then the final matrix.
    pub fn to_text(&self) -> String {
        let mut out = String::from("step,objective\n");
        for (i, v) in self.objectives.iter().enumerate() {
            out.push_str(&format!("{i},{}\n", fmt_f64(*v)));
        }
        out.push('\n');
        out.push_str(&format_fmat(&self.f));
        out
    }
}

fn apply_norm(f: &FMat, norm: Option<NormKind>) -> Result<FMat> {
    match norm {
        Some(k) => normalize(f, k),
        None => Ok(*f),
    }
}

fn check_parametrization(params: &Params, cfg: &FitConfig) -> Result<()> {
    if params.parametrization() != cfg.parametrization {
        return Err(Error::InvalidConfig("parameters do not match the configured parametrization".into()));
    }
    Ok(())
}

fn data_for<'a>(cfg: &FitConfig, data: FitData<'a>) -> Result<FitData<'a>> {
    match (cfg.objective, data) {
        (Objective::EpiSqr, FitData::Corrs(_)) | (Objective::Supervised, FitData::Target(_)) => Ok(data),
        (Objective::EpiSqr, _) => Err(Error::InvalidConfig("EPI_SQR objective needs correspondences".into())),
        (Objective::Supervised, _) => Err(Error::InvalidConfig("supervised objective needs a target F".into())),
    }
}

fn homog(p: &HomoPoint) -> nalgebra::Vector3<f64> {
    p.to_vector()
}

pub fn objective_and_gradient(params: &Params, cfg: &FitConfig, data: FitData) -> Result<(f64, [f64; 8])> {
    check_parametrization(params, cfg)?;
    let f = params.forward(&cfg.principal)?;
    let n = apply_norm(&f, cfg.norm)?;
    let (value, dn) = match data_for(cfg, data)? {
        FitData::Corrs(c) => {
            let mut value = 0.0;
            let mut g = Mat3::zeros();
            for (p, q) in c.iter() {
                let (pv, qv) = (homog(p), homog(q));
                let r = qv.dot(&(n.matrix() * pv));
                value += r * r;
                g += qv * pv.transpose() * (2.0 * r);
            }
            (value, g)
        }
        FitData::Target(t) => {
            let (pred, target) = match cfg.norm {
                Some(k) => (Normalized::new(&f, k)?, Normalized::new(t, k)?),
                None => (Normalized::raw(f), Normalized::raw(*t)),
            };
            loss(&pred, &target, cfg.weights)?
        }
    };
    let df = match cfg.norm {
        Some(k) => normalize_backward(&f, k, &dn)?,
        None => dn,
    };
    Ok((value, params.backward(&cfg.principal, &df)?))
}

fn objective(params: &Params, cfg: &FitConfig, data: FitData) -> Result<f64> {
    let f = apply_norm(&params.forward(&cfg.principal)?, cfg.norm)?;
    Ok(match data {
        FitData::Corrs(c) => c
            .iter()
            .map(|(p, q)| homog(q).dot(&(f.matrix() * homog(p))).powi(2))
            .sum(),
        FitData::Target(t) => {
            let target = apply_norm(t, cfg.norm)?;
            let pred = Normalized { kind: cfg.norm, mat: f };
            loss(&pred, &Normalized { kind: cfg.norm, mat: target }, cfg.weights)?.0
        }
    })
}

/// Relative damping added to the Jacobi-scaled Gauss-Newton matrix. It only
/// matters along gauge directions (such as the length of `t`) that leave
/// the normalized matrix unchanged.
const METRIC_DAMPING: f64 = 1e-8;

type Mat8 = SMatrix<f64, 8, 8>;

/// Jacobian of the normalized matrix (row-major entries) with respect to
/// the parameters, one backward pass per entry.
fn output_jacobian(params: &Params, cfg: &FitConfig) -> Result<SMatrix<f64, 9, 8>> {
    let f = params.forward(&cfg.principal)?;
    let mut jac = SMatrix::<f64, 9, 8>::zeros();
    for e in 0..9 {
        let mut up = Mat3::zeros();
        up[(e / 3, e % 3)] = 1.0;
        let df = match cfg.norm {
            Some(k) => normalize_backward(&f, k, &up)?,
            None => up,
        };
        let row = params.backward(&cfg.principal, &df)?;
        for (k, v) in row.iter().enumerate() {
            jac[(e, k)] = *v;
        }
    }
    Ok(jac)
}

/// Inverse metric `(J^T J + damping)^-1` at `params`, where `J` is the
/// Jacobian of the residual vector (EPI_SQR) or of the normalized matrix
/// (supervised).
fn inverse_metric(params: &Params, cfg: &FitConfig, data: FitData) -> Result<Mat8> {
    let out = output_jacobian(params, cfg)?;
    let jac = match data {
        FitData::Corrs(c) => design_matrix(c).matrix() * DMatrix::from_column_slice(9, 8, out.as_slice()),
        FitData::Target(_) => DMatrix::from_column_slice(9, 8, out.as_slice()),
    };
    // Jacobi scaling first so the damping is relative per parameter
    let scale = SVector::<f64, 8>::from_fn(|k, _| {
        let n = jac.column(k).norm();
        if n > 0.0 && n.is_finite() {
            1.0 / n
        } else {
            1.0
        }
    });
    let jt = jac.transpose() * &jac;
    let mut h = Mat8::from_fn(|r, c| jt[(r, c)] * scale[r] * scale[c]);
    for k in 0..8 {
        h[(k, k)] += METRIC_DAMPING;
    }
    let h_inv = h.cholesky().map(|c| c.inverse()).unwrap_or_else(Mat8::identity);
    Ok(Mat8::from_fn(|r, c| scale[r] * h_inv[(r, c)] * scale[c]))
}

fn norm8(v: &[f64; 8]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Descent with a halving line search. The trial step doubles after
/// every accepted step (up to 1 when preconditioned) and halves (at most [`MAX_HALVINGS`] times) until the
/// objective strictly decreases.
pub fn fit(init: &Params, cfg: &FitConfig, data: FitData) -> Result<FitTrace> {
    cfg.validate()?;
    check_parametrization(init, cfg)?;
    let data = data_for(cfg, data)?;
    let mut params = *init;
    let (mut value, mut grad) = objective_and_gradient(&params, cfg, data)?;
    let mut objectives = vec![value];
    let mut step = cfg.step_size;
    let mut steps = 0;
    let stop = loop {
        if norm8(&grad) <= cfg.grad_tolerance || value == 0.0 {
            break StopReason::Converged;
        }
        if steps == cfg.max_steps {
            break StopReason::MaxSteps;
        }
        let theta = params.values();
        let metric = if cfg.precondition { inverse_metric(&params, cfg, data)? } else { Mat8::identity() };
        let direction = metric * SVector::<f64, 8>::from(grad);
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let mut trial = theta;
            for k in 0..8 {
                trial[k] -= step * direction[k];
            }
            let candidate = params.with_values(trial);
            // a trial point outside the layer's domain counts as no decrease
            match objective(&candidate, cfg, data) {
                Ok(v) if v < value => {
                    accepted = Some(candidate);
                    break;
                }
                Ok(_) | Err(Error::DependentColumns(_)) | Err(Error::DegenerateTranslation(_))
                | Err(Error::NonPositiveFocal(_)) | Err(Error::NearZeroDivisor(_)) | Err(Error::ZeroMatrix) => {
                    step *= 0.5;
                }
                Err(e) => return Err(e),
            }
        }
        let Some(next) = accepted else {
            break StopReason::LineSearchFailed;
        };
        params = next;
        (value, grad) = objective_and_gradient(&params, cfg, data)?;
        objectives.push(value);
        steps += 1;
        step *= 2.0;
        if cfg.precondition {
            // a unit step is the full Gauss-Newton step
            step = step.min(1.0);
        }
    };
    let f = apply_norm(&params.forward(&cfg.principal)?, cfg.norm)?;
    Ok(FitTrace { objectives, params, f, converged: stop == StopReason::Converged, steps, stop })
}

/// Initial point for start `index`: the given parameters for index 0,
/// otherwise a seeded jitter of them (angles by up to 0.05 rad, everything
/// else by up to 5% relative).
pub fn start_point(init: &Params, seed: u64, index: usize) -> Params {
    if index == 0 {
        return *init;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let mut v = init.values();
    for (k, x) in v.iter_mut().enumerate() {
        let angle = matches!(init, Params::Recon(_)) && k >= 5;
        if angle {
            *x += rng.random_range(-0.05..=0.05);
        } else {
            *x *= 1.0 + rng.random_range(-0.05..=0.05);
        }
    }
    init.with_values(v)
}

/// Runs [`fit`] from `n_starts` seeded starting points in parallel and keeps
/// the lowest final objective (lowest index on ties).
pub fn multi_start_fit(
    init: &Params,
    cfg: &FitConfig,
    data: FitData,
    n_starts: usize,
    seed: u64,
) -> Result<FitTrace> {
    if n_starts == 0 {
        return Err(Error::InvalidConfig("n_starts must be at least 1".into()));
    }
    cfg.validate()?;
    let results: Vec<Result<FitTrace>> = (0..n_starts)
        .into_par_iter()
        .map(|i| fit(&start_point(init, seed, i), cfg, data))
        .collect();
    let mut best: Option<FitTrace> = None;
    let mut last_err = None;
    for r in results {
        match r {
            Ok(t) => {
                if best.as_ref().is_none_or(|b| t.final_objective() < b.final_objective()) {
                    best = Some(t);
                }
            }
            Err(e @ Error::InvalidConfig(_)) => return Err(e),
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| Error::AllStartsFailed(last_err.map_or_else(String::new, |e| e.to_string())))
}
