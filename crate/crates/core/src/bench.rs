//! Seeded benchmark over synthetic scenes: one row per (normalization,
//! method) with EPI-ABS and EPI-SQR aggregated over trials.
//!
//! Metrics are computed on the correspondences that the ground-truth matrix
//! itself places within 2 px^2 (symmetric epipolar distance), after the
//! row's normalization has been applied to the estimate.

use std::fmt;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    algebraic_minimization, eight_point, lemeds, normalized_eight_point, ransac, RobustConfig,
};
use crate::fit::{fit, FitConfig, FitData, Objective, Parametrization, Params};
use crate::geometry::{CorrSet, FMat};
use crate::io::fmt_f64;
use crate::layers::{normalize, EpiParams, NormKind, ReconParams};
use crate::metrics::{select_high_confidence, MetricReport, HIGH_CONFIDENCE_THRESHOLD};
use crate::scene::{generate_scene, SceneConfig, SyntheticScene};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Method {
    EightPoint,
    NormEightPoint,
    Ransac,
    Lemeds,
    AlgMin,
    FitRecon,
    FitEpi,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::EightPoint,
        Method::NormEightPoint,
        Method::Ransac,
        Method::Lemeds,
        Method::AlgMin,
        Method::FitRecon,
        Method::FitEpi,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::EightPoint => "EIGHT_POINT",
            Method::NormEightPoint => "NORM_EIGHT_POINT",
            Method::Ransac => "RANSAC",
            Method::Lemeds => "LEMEDS",
            Method::AlgMin => "ALG_MIN",
            Method::FitRecon => "FIT_RECON",
            Method::FitEpi => "FIT_EPI",
        }
    }

    /// Fitted methods depend on the normalization inside their objective.
    fn uses_norm(&self) -> bool {
        matches!(self, Method::FitRecon | Method::FitEpi)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_uppercase().replace('-', "_");
        Method::ALL
            .into_iter()
            .find(|m| m.name() == key)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkSpec {
    pub methods: Vec<Method>,
    pub norms: Vec<NormKind>,
    #[serde(default)]
    pub scene: SceneConfig,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
}

impl BenchmarkSpec {
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() || self.norms.is_empty() {
            return Err(Error::InvalidConfig("methods and norms must be non-empty".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        self.scene.validate()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: BenchmarkSpec = serde_json::from_str(text).map_err(|e| {
            Error::InvalidConfig(format!("benchmark spec: {e}"))
        })?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Scene seed of trial `trial`.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng.next_u64()
}

/// Row label: a method or the ground-truth matrix itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    GroundTruth,
    Method(Method),
}

impl fmt::Display for RowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowKind::GroundTruth => f.write_str("GROUND_TRUTH"),
            RowKind::Method(m) => m.fmt(f),
        }
    }
}

/// Median and mean over trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub median: f64,
    pub mean: f64,
}

impl Aggregate {
    pub fn of(values: &[f64]) -> Aggregate {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) };
        Aggregate { median, mean: v.iter().sum::<f64>() / n as f64 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub norm: NormKind,
    pub kind: RowKind,
    pub trials: usize,
    /// Sums over the selected points.
    pub epi_abs: Aggregate,
    pub epi_sqr: Aggregate,
    /// Means over the selected points.
    pub epi_abs_pp: Aggregate,
    pub epi_sqr_pp: Aggregate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkTable {
    pub rows: Vec<BenchmarkRow>,
}

pub const CSV_HEADER: &str = "norm,method,trials,epi_abs_median,epi_sqr_median,epi_abs_mean,epi_sqr_mean,\
epi_abs_pp_median,epi_sqr_pp_median,epi_abs_pp_mean,epi_sqr_pp_mean";

impl BenchmarkTable {
    pub fn row(&self, norm: NormKind, kind: RowKind) -> Option<&BenchmarkRow> {
        self.rows.iter().find(|r| r.norm == norm && r.kind == kind)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let vals = [
                r.epi_abs.median,
                r.epi_sqr.median,
                r.epi_abs.mean,
                r.epi_sqr.mean,
                r.epi_abs_pp.median,
                r.epi_sqr_pp.median,
                r.epi_abs_pp.mean,
                r.epi_sqr_pp.mean,
            ];
            let vals: Vec<String> = vals.iter().map(|&v| fmt_f64(v)).collect();
            out.push_str(&format!("{},{},{},{}\n", r.norm, r.kind, r.trials, vals.join(",")));
        }
        out
    }

    /// Aligned plain-text table grouped by normalization.
    pub fn to_text(&self) -> String {
        let header = ["norm", "method", "EPI-ABS", "EPI-SQR", "EPI-ABS mean", "EPI-SQR mean"];
        let mut lines: Vec<[String; 6]> = vec![header.map(String::from)];
        for r in &self.rows {
            lines.push([
                r.norm.to_string(),
                r.kind.to_string(),
                format!("{:.4e}", r.epi_abs.median),
                format!("{:.4e}", r.epi_sqr.median),
                format!("{:.4e}", r.epi_abs.mean),
                format!("{:.4e}", r.epi_sqr.mean),
            ]);
        }
        let widths: Vec<usize> = (0..6).map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0)).collect();
        let mut out = String::new();
        for (i, l) in lines.iter().enumerate() {
            let cells: Vec<String> = l
                .iter()
                .enumerate()
                .map(|(c, s)| if c < 2 { format!("{s:<w$}", w = widths[c]) } else { format!("{s:>w$}", w = widths[c]) })
                .collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
            if i == 0 {
                out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * 5));
                out.push('\n');
            }
        }
        out
    }
}

/// Starting point for FIT_RECON: the true parameters with angles moved by
/// up to 0.05 rad and the translation by up to 5% per component.
pub fn perturbed_truth(scene: &SyntheticScene, seed: u64) -> ReconParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    let mut v = scene.recon_params().0;
    for x in &mut v[2..5] {
        *x *= 1.0 + rng.random_range(-0.05..=0.05);
    }
    for x in &mut v[5..8] {
        *x += rng.random_range(-0.05..=0.05);
    }
    ReconParams(v)
}

fn estimate(method: Method, norm: NormKind, scene: &SyntheticScene, seed: u64) -> Result<FMat> {
    let corrs = &scene.corrs_noisy;
    let robust = RobustConfig::with_seed(seed);
    let fit_cfg = |p: Parametrization| FitConfig {
        parametrization: p,
        norm: Some(norm),
        objective: Objective::EpiSqr,
        principal: scene.principal_points(),
        seed,
        ..Default::default()
    };
    match method {
        Method::EightPoint => eight_point(corrs),
        Method::NormEightPoint => normalized_eight_point(corrs),
        Method::Ransac => Ok(ransac(corrs, &robust)?.f),
        Method::Lemeds => Ok(lemeds(corrs, &robust)?.f),
        Method::AlgMin => Ok(algebraic_minimization(corrs, &normalized_eight_point(corrs)?)?.f),
        Method::FitRecon => {
            let init = Params::Recon(perturbed_truth(scene, seed));
            Ok(fit(&init, &fit_cfg(Parametrization::Recon), FitData::Corrs(corrs))?.f)
        }
        Method::FitEpi => {
            let init = Params::Epi(EpiParams::from_fmat(&normalized_eight_point(corrs)?)?);
            Ok(fit(&init, &fit_cfg(Parametrization::Epi), FitData::Corrs(corrs))?.f)
        }
    }
}

/// Metrics of every row for one trial, in row order.
fn run_trial(spec: &BenchmarkSpec, trial: usize) -> Result<Vec<MetricReport>> {
    let seed = trial_seed(spec.seed, trial);
    let ctx = |what: &str| format!("trial {trial} (scene seed {seed}) {what}");
    let scene = generate_scene(&SceneConfig { seed, ..spec.scene }).map_err(|e| e.context(ctx("scene")))?;
    let eval: CorrSet = select_high_confidence(&scene.corrs_noisy, &scene.f_gt, HIGH_CONFIDENCE_THRESHOLD)
        .map_err(|e| e.context(ctx("point selection")))?;

    let mut shared = Vec::new();
    for &m in spec.methods.iter().filter(|m| !m.uses_norm()) {
        shared.push((m, estimate(m, NormKind::Fbn, &scene, seed).map_err(|e| e.context(ctx(m.name())))?));
    }
    let mut out = Vec::new();
    for &norm in &spec.norms {
        let report = |f: &FMat, what: &str| -> Result<MetricReport> {
            let n = normalize(f, norm).map_err(|e| e.context(ctx(&format!("{what} {norm}"))))?;
            Ok(MetricReport::compute(&n, &eval, false))
        };
        out.push(report(&scene.f_gt, "ground truth")?);
        for &m in &spec.methods {
            let f = match shared.iter().find(|(s, _)| *s == m) {
                Some((_, f)) => *f,
                None => estimate(m, norm, &scene, seed).map_err(|e| e.context(ctx(&format!("{m} {norm}"))))?,
            };
            out.push(report(&f, m.name())?);
        }
    }
    Ok(out)
}

/// Run every trial on a pool of `threads` workers (0 = rayon default).
/// Trials are independent and collected by index, so the table does not
/// depend on the thread count.
pub fn run_benchmark(spec: &BenchmarkSpec, threads: usize) -> Result<BenchmarkTable> {
    use rayon::prelude::*;
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let per_trial: Vec<Result<Vec<MetricReport>>> =
        pool.install(|| (0..spec.trials).into_par_iter().map(|t| run_trial(spec, t)).collect());
    let per_trial = per_trial.into_iter().collect::<Result<Vec<_>>>()?;

    let mut kinds = vec![RowKind::GroundTruth];
    kinds.extend(spec.methods.iter().map(|&m| RowKind::Method(m)));
    let mut rows = Vec::new();
    let mut idx = 0;
    for &norm in &spec.norms {
        for &kind in &kinds {
            let col = |f: fn(&MetricReport) -> f64| -> Aggregate {
                Aggregate::of(&per_trial.iter().map(|t| f(&t[idx])).collect::<Vec<_>>())
            };
            rows.push(BenchmarkRow {
                norm,
                kind,
                trials: spec.trials,
                epi_abs: col(|r| r.epi_abs),
                epi_sqr: col(|r| r.epi_sqr),
                epi_abs_pp: col(|r| r.mean_abs),
                epi_sqr_pp: col(|r| r.mean_sqr),
            });
            idx += 1;
        }
    }
    Ok(BenchmarkTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregates() {
        let a = Aggregate::of(&[3.0, 1.0, 2.0]);
        assert_eq!((a.median, a.mean), (2.0, 2.0));
        let a = Aggregate::of(&[4.0, 1.0, 3.0, 2.0]);
        assert_eq!(a.median, 2.5);
    }

    #[test]
    fn spec_parsing() {
        let s = BenchmarkSpec::from_json(r#"{"methods": ["EIGHT_POINT", "RANSAC"], "norms": ["FBN"], "trials": 2}"#)
            .unwrap();
        assert_eq!(s.methods, vec![Method::EightPoint, Method::Ransac]);
        assert!(BenchmarkSpec::from_json(r#"{"methods": [], "norms": ["FBN"], "trials": 2}"#).is_err());
        assert!(BenchmarkSpec::from_json(r#"{"methods": ["RANSAC"], "norms": ["FBN"], "trials": 0}"#).is_err());
        assert!(BenchmarkSpec::from_json(r#"{"methods": ["X"], "norms": ["FBN"], "trials": 1}"#).is_err());
        assert_eq!("norm-eight-point".parse::<Method>().unwrap(), Method::NormEightPoint);
    }

    #[test]
    fn noise_free_rows_are_exact() {
        let spec = BenchmarkSpec {
            methods: Method::ALL.to_vec(),
            norms: NormKind::ALL.to_vec(),
            scene: SceneConfig::default(),
            trials: 2,
            seed: 5,
        };
        let t = run_benchmark(&spec, 2).unwrap();
        assert_eq!(t.rows.len(), 3 * 8);
        for r in &t.rows {
            let bound = if r.kind == RowKind::GroundTruth { 1e-9 } else { 1e-6 };
            assert!(r.epi_abs.median < bound && r.epi_sqr.median < bound, "{r:?}");
        }
    }
}
