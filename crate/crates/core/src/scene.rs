//! Synthetic two-view scenes with exact ground truth.
//!
//! Camera 1 sits at the origin looking down `+z`; camera 2 is related by
//! `X2 = R X1 + t` with `|t| = 1`. Points are drawn by picking a pixel in
//! image 1 and a depth, then kept only if they also land inside image 2 in
//! front of the camera.

use nalgebra::{DMatrix, Matrix3x4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    compose_fundamental, intrinsics_matrix, skew, CameraIntrinsics, CorrSet, FMat, HomoPoint,
    RelativePose, Vec3,
};
use crate::layers::{PrincipalPoints, ReconParams};
use crate::linalg::full_svd;

/// Attempts per requested point before giving up.
pub const REJECTION_FACTOR: usize = 100;

const GEOMETRY_STREAM: u64 = 0;
const PERTURB_STREAM: u64 = 1;

/// Per-axis `[lo, hi]` sampling bounds for the relative pose.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseRanges {
    /// Direction of travel; normalized to unit length after sampling.
    pub translation: [[f64; 2]; 3],
    /// Euler angles in radians.
    pub rotation: [[f64; 2]; 3],
}

impl Default for PoseRanges {
    fn default() -> Self {
        PoseRanges {
            translation: [[0.3, 1.0], [-0.2, 0.2], [-0.5, 0.5]],
            rotation: [[-0.3, 0.3], [-0.3, 0.3], [-0.3, 0.3]],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneConfig {
    pub n_points: usize,
    pub depth_range: [f64; 2],
    pub image_size: [f64; 2],
    pub gamma: f64,
    pub pose_ranges: PoseRanges,
    pub noise_sigma: f64,
    pub outlier_fraction: f64,
    pub seed: u64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            n_points: 60,
            depth_range: [4.0, 20.0],
            image_size: [640.0, 480.0],
            gamma: 500.0,
            pose_ranges: PoseRanges::default(),
            noise_sigma: 0.0,
            outlier_fraction: 0.0,
            seed: 0,
        }
    }
}

fn check(ok: bool, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidConfig(msg.into()))
    }
}

fn valid_range(r: &[f64; 2]) -> bool {
    r[0].is_finite() && r[1].is_finite() && r[0] <= r[1]
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        check(self.n_points >= 1, "n_points must be at least 1")?;
        let [zmin, zmax] = self.depth_range;
        check(zmin > 0.0, "depth_range: zmin must be positive")?;
        check(valid_range(&self.depth_range), "depth_range: zmin must not exceed zmax")?;
        check(zmax.is_finite(), "depth_range must be finite")?;
        let [w, h] = self.image_size;
        check(w > 0.0 && h > 0.0 && w.is_finite() && h.is_finite(), "image_size must be positive")?;
        check(self.gamma > 0.0 && self.gamma.is_finite(), "gamma must be positive")?;
        check(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite(), "noise_sigma must be >= 0")?;
        check(
            (0.0..1.0).contains(&self.outlier_fraction),
            "outlier_fraction must lie in [0, 1)",
        )?;
        for r in self.pose_ranges.translation.iter().chain(&self.pose_ranges.rotation) {
            check(valid_range(r), "pose_ranges: every [lo, hi] needs lo <= hi")?;
        }
        check(
            self.pose_ranges.translation.iter().any(|r| r[0] > 0.0 || r[1] < 0.0),
            "pose_ranges: translation range must exclude the zero vector",
        )?;
        Ok(())
    }

    pub fn principal_point(&self) -> (f64, f64) {
        (self.image_size[0] / 2.0, self.image_size[1] / 2.0)
    }

    pub fn intrinsics(&self) -> CameraIntrinsics {
        let (cx, cy) = self.principal_point();
        CameraIntrinsics { gamma: self.gamma, cx, cy }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub config: SceneConfig,
    pub points3d: Vec<Vec3>,
    pub cam1: (CameraIntrinsics, RelativePose),
    pub cam2: (CameraIntrinsics, RelativePose),
    pub corrs_exact: CorrSet,
    pub corrs_noisy: CorrSet,
    /// Canonical representative (unit norm, positive largest entry).
    pub f_gt: FMat,
    /// Norm of the sampled translation before it was scaled to 1.
    pub translation_scale: f64,
}

impl SyntheticScene {
    /// Ground-truth parameters of the reconstruction layer.
    pub fn recon_params(&self) -> ReconParams {
        let pose = self.cam2.1;
        ReconParams::new(self.cam1.0.gamma, self.cam2.0.gamma, pose.t, pose.r)
    }

    pub fn principal_points(&self) -> PrincipalPoints {
        [(self.cam1.0.cx, self.cam1.0.cy), (self.cam2.0.cx, self.cam2.0.cy)]
    }

    /// `P1 = K1 [I | 0]`, `P2 = K2 [R | t]`.
    pub fn projection_matrices(&self) -> (Matrix3x4<f64>, Matrix3x4<f64>) {
        (projection_matrix(&self.cam1.0, &self.cam1.1), projection_matrix(&self.cam2.0, &self.cam2.1))
    }
}

pub fn projection_matrix(k: &CameraIntrinsics, pose: &RelativePose) -> Matrix3x4<f64> {
    let mut rt = Matrix3x4::zeros();
    rt.fixed_view_mut::<3, 3>(0, 0).copy_from(&pose.rotation());
    rt.set_column(3, &pose.t);
    let km = intrinsics_matrix(k).expect("intrinsics validated by caller");
    km * rt
}

/// Pinhole projection of a point given in the first camera's frame.
pub fn project(point: &Vec3, k: &CameraIntrinsics, pose: &RelativePose) -> Result<HomoPoint> {
    let x = pose.rotation() * point + pose.t;
    if !(x[2] > 0.0) {
        return Err(Error::BehindCamera(x[2]));
    }
    let u = intrinsics_matrix(k)? * x;
    Ok(HomoPoint::from_pixel(u[0] / u[2], u[1] / u[2]))
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn inside(p: &HomoPoint, size: &[f64; 2]) -> bool {
    p.x >= 0.0 && p.x < size[0] && p.y >= 0.0 && p.y < size[1]
}

fn sample_pose(rng: &mut ChaCha8Rng, ranges: &PoseRanges) -> (RelativePose, f64) {
    let mut draw = |r: &[f64; 2]| rng.random_range(r[0]..=r[1]);
    let t_raw = Vec3::new(
        draw(&ranges.translation[0]),
        draw(&ranges.translation[1]),
        draw(&ranges.translation[2]),
    );
    let r = Vec3::new(
        draw(&ranges.rotation[0]),
        draw(&ranges.rotation[1]),
        draw(&ranges.rotation[2]),
    );
    let scale = t_raw.norm();
    (RelativePose::new(t_raw / scale, r), scale)
}

pub fn generate_scene(cfg: &SceneConfig) -> Result<SyntheticScene> {
    cfg.validate()?;
    let mut rng = rng_for(cfg.seed, GEOMETRY_STREAM);
    let (pose, translation_scale) = sample_pose(&mut rng, &cfg.pose_ranges);
    let k = cfg.intrinsics();
    let k_inv = k.inverse_matrix()?;
    let identity = RelativePose::new(Vec3::zeros(), Vec3::zeros());
    let [w, h] = cfg.image_size;
    let [zmin, zmax] = cfg.depth_range;

    let mut points3d = Vec::with_capacity(cfg.n_points);
    let mut pairs = Vec::with_capacity(cfg.n_points);
    for _ in 0..REJECTION_FACTOR * cfg.n_points {
        if points3d.len() == cfg.n_points {
            break;
        }
        let pixel = Vec3::new(rng.random_range(0.0..w), rng.random_range(0.0..h), 1.0);
        let z = rng.random_range(zmin..=zmax);
        let x = k_inv * pixel * z;
        let Ok(q) = project(&x, &k, &pose) else { continue };
        if !inside(&q, &cfg.image_size) {
            continue;
        }
        let p = project(&x, &k, &identity)?;
        points3d.push(x);
        pairs.push((p, q));
    }
    if points3d.len() < cfg.n_points {
        return Err(Error::InfeasibleConfig { placed: points3d.len(), requested: cfg.n_points });
    }

    let corrs_exact = CorrSet::new(pairs)?;
    let corrs_noisy =
        perturb(&corrs_exact, cfg.noise_sigma, cfg.outlier_fraction, cfg.image_size, cfg.seed)?;
    let f_gt = compose_fundamental(&k, &k, &pose)?.canonical()?;
    Ok(SyntheticScene {
        config: *cfg,
        points3d,
        cam1: (k, identity),
        cam2: (k, pose),
        corrs_exact,
        corrs_noisy,
        f_gt,
        translation_scale,
    })
}

/// Gaussian noise on both points of each inlier; `floor(fraction * n)`
/// outliers get their second point redrawn uniformly over the image.
pub fn perturb(
    corrs: &CorrSet,
    noise_sigma: f64,
    outlier_fraction: f64,
    image_size: [f64; 2],
    seed: u64,
) -> Result<CorrSet> {
    check(noise_sigma >= 0.0 && noise_sigma.is_finite(), "noise_sigma must be >= 0")?;
    check((0.0..1.0).contains(&outlier_fraction), "outlier_fraction must lie in [0, 1)")?;
    let mut rng = rng_for(seed, PERTURB_STREAM);
    let n = corrs.len();
    let n_out = (outlier_fraction * n as f64).floor() as usize;
    let mut labels = vec![true; n];
    for i in rand::seq::index::sample(&mut rng, n, n_out) {
        labels[i] = false;
    }
    let normal = Normal::new(0.0, noise_sigma).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let mut jitter = |p: &HomoPoint| {
        if noise_sigma == 0.0 {
            return *p;
        }
        let dx: f64 = rng.sample(normal);
        let dy: f64 = rng.sample(normal);
        HomoPoint::from_pixel(p.x / p.w + dx, p.y / p.w + dy)
    };
    let mut pairs = Vec::with_capacity(n);
    for (i, (p, q)) in corrs.iter().enumerate() {
        pairs.push(if labels[i] { (jitter(p), jitter(q)) } else { (*p, *q) });
    }
    for (i, pair) in pairs.iter_mut().enumerate() {
        if !labels[i] {
            pair.1 = HomoPoint::from_pixel(
                rng.random_range(0.0..image_size[0]),
                rng.random_range(0.0..image_size[1]),
            );
        }
    }
    CorrSet::with_labels(pairs, labels)
}

/// `F = [e']x P2 P1^+` with `e' = P2 C1` and `C1` the centre of camera 1.
pub fn fundamental_from_projections(p1: &Matrix3x4<f64>, p2: &Matrix3x4<f64>) -> Result<FMat> {
    let full_rank = |p: &Matrix3x4<f64>| {
        let s = full_svd(&DMatrix::from_column_slice(3, 4, p.as_slice())).s;
        s[0] > 0.0 && s[2] > 1e-12 * s[0]
    };
    if !full_rank(p1) || !full_rank(p2) {
        return Err(Error::RankDeficientCamera);
    }
    let d = full_svd(&DMatrix::from_column_slice(3, 4, p1.as_slice()));
    let c1 = nalgebra::Vector4::from_column_slice(d.v.column(3).as_slice());
    let e2 = p2 * c1;
    if e2.norm() <= 1e-12 * p2.norm() {
        return Err(Error::CoincidentCenters);
    }
    let gram = p1 * p1.transpose();
    let gram_inv = gram.try_inverse().ok_or(Error::RankDeficientCamera)?;
    let pinv = p1.transpose() * gram_inv;
    Ok(FMat::new(skew(&e2) * p2 * pinv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::epipolar_residual;

    #[test]
    fn projection_examples() {
        let k = CameraIntrinsics::identity();
        let id = RelativePose::new(Vec3::zeros(), Vec3::zeros());
        let p = project(&Vec3::new(0.0, 0.0, 1.0), &k, &id).unwrap();
        assert_eq!((p.x, p.y, p.w), (0.0, 0.0, 1.0));
        let p = project(&Vec3::new(1.0, 0.0, 2.0), &k, &id).unwrap();
        assert_eq!((p.x, p.y, p.w), (0.5, 0.0, 1.0));
        assert_eq!(project(&Vec3::new(0.0, 0.0, -1.0), &k, &id), Err(Error::BehindCamera(-1.0)));
    }

    #[test]
    fn default_scene_is_exact() {
        let s = generate_scene(&SceneConfig::default()).unwrap();
        assert_eq!(s.corrs_exact.len(), 60);
        for (p, q) in s.corrs_exact.iter() {
            assert!(epipolar_residual(&s.f_gt, p, q).abs() < 1e-9);
        }
        assert_eq!(s.corrs_noisy.pairs(), s.corrs_exact.pairs());
        assert!((s.cam2.1.t.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn outlier_count_is_floor() {
        let cfg = SceneConfig { n_points: 100, outlier_fraction: 0.3, ..Default::default() };
        let s = generate_scene(&cfg).unwrap();
        let labels = s.corrs_noisy.labels().unwrap();
        assert_eq!(labels.iter().filter(|&&l| !l).count(), 30);
        let cfg = SceneConfig { n_points: 7, outlier_fraction: 0.5, ..Default::default() };
        let s = generate_scene(&cfg).unwrap();
        assert_eq!(s.corrs_noisy.labels().unwrap().iter().filter(|&&l| !l).count(), 3);
    }

    #[test]
    fn config_guards() {
        let bad = |c: SceneConfig| matches!(generate_scene(&c), Err(Error::InvalidConfig(_)));
        assert!(bad(SceneConfig { depth_range: [0.0, 5.0], ..Default::default() }));
        assert!(bad(SceneConfig { outlier_fraction: 1.0, ..Default::default() }));
        assert!(bad(SceneConfig { noise_sigma: -0.1, ..Default::default() }));
        assert!(bad(SceneConfig { n_points: 0, ..Default::default() }));
    }

    #[test]
    fn infeasible_when_views_do_not_overlap() {
        // camera 2 turned half way round sees nothing of camera 1's frustum
        let mut cfg = SceneConfig::default();
        cfg.pose_ranges.rotation = [[0.0, 0.0], [3.0, 3.0], [0.0, 0.0]];
        assert!(matches!(
            generate_scene(&cfg),
            Err(Error::InfeasibleConfig { placed: 0, requested: 60 })
        ));
    }

    #[test]
    fn coincident_centres() {
        let s = generate_scene(&SceneConfig::default()).unwrap();
        let (p1, _) = s.projection_matrices();
        assert_eq!(fundamental_from_projections(&p1, &p1), Err(Error::CoincidentCenters));
        let flat = Matrix3x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        assert_eq!(fundamental_from_projections(&flat, &p1), Err(Error::RankDeficientCamera));
    }
}
