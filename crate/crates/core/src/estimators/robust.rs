//! Hypothesize-and-verify estimators over seven-point samples.
//!
//! Hypotheses are generated in fixed-size batches that may be evaluated in
//! parallel. Hypothesis `i` draws its sample from its own ChaCha stream
//! `(seed, i)` and batches are reduced in index order, so the result depends
//! only on the inputs and the seed, never on the thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::linear::normalized_eight_point;
use crate::estimators::seven_point::seven_point;
use crate::geometry::{CorrSet, FMat};
use crate::metrics::symmetric_epipolar_distance;

const SAMPLE_SIZE: usize = 7;
const BATCH: usize = 32;

/// Consistency constant of the median absolute deviation for Gaussian noise.
const MAD_TO_SIGMA: f64 = 1.4826;
/// Inlier cut for LeMedS in units of the robust standard deviation.
const LEMEDS_CUT: f64 = 2.5;
/// Lower bound on the LeMedS scale estimate (px), so exact data keeps its
/// inliers.
const LEMEDS_MIN_SIGMA: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustConfig {
    pub max_iterations: usize,
    /// Cut-off on the symmetric epipolar distance (px^2).
    pub inlier_threshold: f64,
    pub seed: u64,
    pub min_inlier_count: usize,
    /// Early-exit confidence for the adaptive iteration bound; `None` always
    /// runs `max_iterations` hypotheses.
    pub confidence: Option<f64>,
}

impl Default for RobustConfig {
    fn default() -> Self {
        RobustConfig {
            max_iterations: 2000,
            inlier_threshold: 2.0,
            seed: 0,
            min_inlier_count: 8,
            confidence: Some(0.99),
        }
    }
}

impl RobustConfig {
    pub fn with_seed(seed: u64) -> Self {
        RobustConfig { seed, ..Default::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        if !(self.inlier_threshold > 0.0) {
            return Err(Error::InvalidConfig("inlier_threshold must be positive".into()));
        }
        if let Some(c) = self.confidence {
            if !(0.0..1.0).contains(&c) {
                return Err(Error::InvalidConfig("confidence must lie in [0, 1)".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustFit {
    pub f: FMat,
    pub inliers: Vec<bool>,
    /// Number of hypotheses drawn.
    pub iterations: usize,
}

impl RobustFit {
    pub fn inlier_count(&self) -> usize {
        self.inliers.iter().filter(|&&b| b).count()
    }
}

/// Seven distinct indices for hypothesis `index`.
fn draw_sample(seed: u64, index: usize, n: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rand::seq::index::sample(&mut rng, n, SAMPLE_SIZE).into_vec()
}

fn distances(f: &FMat, corrs: &CorrSet) -> Vec<f64> {
    corrs
        .iter()
        .map(|(p, q)| symmetric_epipolar_distance(f, p, q).unwrap_or(f64::INFINITY))
        .collect()
}

/// Hypotheses required to draw one all-inlier sample with `confidence`.
fn required_iterations(inlier_ratio: f64, confidence: f64) -> f64 {
    let good = inlier_ratio.powi(SAMPLE_SIZE as i32);
    if good >= 1.0 {
        return 1.0;
    }
    if good <= 0.0 {
        return f64::INFINITY;
    }
    ((1.0 - confidence).ln() / (1.0 - good).ln()).ceil().max(1.0)
}

/// Evaluate hypotheses in batches. `score` maps a candidate to a key where
/// smaller is better; `bound` gives the adaptive iteration bound from the
/// best key so far.
fn search<K, S, B>(corrs: &CorrSet, cfg: &RobustConfig, score: S, bound: B) -> Option<(K, FMat, usize)>
where
    K: PartialOrd + Copy + Send,
    S: Fn(&FMat) -> K + Sync,
    B: Fn(&K) -> f64,
{
    let n = corrs.len();
    let mut best: Option<(K, FMat)> = None;
    let mut done = 0;
    let mut limit = cfg.max_iterations as f64;
    while (done as f64) < limit.min(cfg.max_iterations as f64) {
        let end = (done + BATCH).min(cfg.max_iterations);
        let batch: Vec<Option<(K, FMat)>> = (done..end)
            .into_par_iter()
            .map(|i| {
                let sample = corrs.subset(&draw_sample(cfg.seed, i, n)).ok()?;
                let candidates = seven_point(&sample).ok()?;
                let mut local: Option<(K, FMat)> = None;
                for f in candidates {
                    let k = score(&f);
                    if local.as_ref().is_none_or(|(b, _)| k < *b) {
                        local = Some((k, f));
                    }
                }
                local
            })
            .collect();
        for (k, f) in batch.into_iter().flatten() {
            if best.as_ref().is_none_or(|(b, _)| k < *b) {
                best = Some((k, f));
            }
        }
        done = end;
        if let Some((k, _)) = &best {
            limit = bound(k);
        }
    }
    best.map(|(k, f)| (k, f, done))
}

fn mask_below(d: &[f64], cut: f64) -> Vec<bool> {
    d.iter().map(|&v| v < cut).collect()
}

fn count(mask: &[bool]) -> usize {
    mask.iter().filter(|&&b| b).count()
}

/// Refit on the inliers with the normalized eight-point algorithm; keep the
/// refit unless it loses inliers.
fn refit(corrs: &CorrSet, f: FMat, mask: Vec<bool>, cut: f64) -> (FMat, Vec<bool>) {
    let idx: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
    if idx.len() < 8 {
        return (f, mask);
    }
    let Ok(g) = corrs.subset(&idx).and_then(|s| normalized_eight_point(&s)) else {
        return (f, mask);
    };
    let g_mask = mask_below(&distances(&g, corrs), cut);
    if count(&g_mask) >= count(&mask) {
        (g, g_mask)
    } else {
        (f, mask)
    }
}

/// RANSAC: maximize the number of pairs with symmetric epipolar distance
/// under the threshold, ties broken by the smaller summed inlier distance.
pub fn ransac(corrs: &CorrSet, cfg: &RobustConfig) -> Result<RobustFit> {
    cfg.validate()?;
    let n = corrs.len();
    if n < SAMPLE_SIZE {
        return Err(Error::InsufficientCorrespondences { needed: SAMPLE_SIZE, got: n });
    }
    let thr = cfg.inlier_threshold;
    let score = |f: &FMat| {
        let d = distances(f, corrs);
        let inl: Vec<f64> = d.into_iter().filter(|&v| v < thr).collect();
        (std::cmp::Reverse(inl.len()), inl.iter().sum::<f64>())
    };
    let bound = |k: &(std::cmp::Reverse<usize>, f64)| match cfg.confidence {
        Some(c) => required_iterations(k.0 .0 as f64 / n as f64, c),
        None => f64::INFINITY,
    };
    let Some((_, f, iterations)) = search(corrs, cfg, score, bound) else {
        return Err(Error::NoConsensus { best: 0, required: cfg.min_inlier_count });
    };
    let mask = mask_below(&distances(&f, corrs), thr);
    let (f, inliers) = refit(corrs, f, mask, thr);
    let best = count(&inliers);
    if best < cfg.min_inlier_count {
        return Err(Error::NoConsensus { best, required: cfg.min_inlier_count });
    }
    Ok(RobustFit { f, inliers, iterations })
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    let mid = v.len() / 2;
    let (_, m, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    *m
}

/// Least median of squares: minimize the median symmetric epipolar distance
/// over the hypotheses, then keep pairs within `2.5` robust standard
/// deviations. The threshold in `cfg` is not used.
pub fn lemeds(corrs: &CorrSet, cfg: &RobustConfig) -> Result<RobustFit> {
    cfg.validate()?;
    let n = corrs.len();
    if n < SAMPLE_SIZE {
        return Err(Error::InsufficientCorrespondences { needed: SAMPLE_SIZE, got: n });
    }
    // without a threshold, size the adaptive bound for 50% contamination
    let fixed = cfg.confidence.map_or(f64::INFINITY, |c| required_iterations(0.5, c));
    let Some((med, f, iterations)) =
        search(corrs, cfg, |f| median(&distances(f, corrs)), |_| fixed)
    else {
        return Err(Error::DegenerateConfiguration("no seven-point sample produced a model".into()));
    };

    let dof = (n - SAMPLE_SIZE).max(1) as f64;
    let sigma = (MAD_TO_SIGMA * (1.0 + 5.0 / dof) * med.sqrt()).max(LEMEDS_MIN_SIGMA);
    let cut = (LEMEDS_CUT * sigma).powi(2);
    let mask = mask_below(&distances(&f, corrs), cut);
    let (f, inliers) = refit(corrs, f, mask, cut);
    Ok(RobustFit { f, inliers, iterations })
}
