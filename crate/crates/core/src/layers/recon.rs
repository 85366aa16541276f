//! Reconstruction layer: eight camera parameters `(f1, f2, tx, ty, tz, rx,
//! ry, rz)` in, rank-two fundamental matrix out.
//!
//! The backward pass differentiates each factor of `K2^-T [t]x R K1^-1`
//! in closed form and applies the product rule.

use nalgebra::SMatrix;

use crate::error::Result;
use crate::geometry::{
    compose_fundamental, rotation_x, rotation_y, rotation_z, skew, CameraIntrinsics, FMat, Mat3,
    RelativePose, Vec3,
};

/// `d vec(F) / d params`, rows in row-major `f11 .. f33` order.
pub type Jacobian9x8 = SMatrix<f64, 9, 8>;

/// Principal point `(cx, cy)` of each camera.
pub type PrincipalPoints = [(f64, f64); 2];

/// Parameter vector of the reconstruction layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconParams(pub [f64; 8]);

impl ReconParams {
    pub fn new(f1: f64, f2: f64, t: Vec3, r: Vec3) -> Self {
        ReconParams([f1, f2, t[0], t[1], t[2], r[0], r[1], r[2]])
    }

    pub fn f1(&self) -> f64 {
        self.0[0]
    }

    pub fn f2(&self) -> f64 {
        self.0[1]
    }

    pub fn translation(&self) -> Vec3 {
        Vec3::new(self.0[2], self.0[3], self.0[4])
    }

    pub fn angles(&self) -> Vec3 {
        Vec3::new(self.0[5], self.0[6], self.0[7])
    }

    pub fn cameras(&self, principal: &PrincipalPoints) -> (CameraIntrinsics, CameraIntrinsics) {
        (
            CameraIntrinsics { gamma: self.f1(), cx: principal[0].0, cy: principal[0].1 },
            CameraIntrinsics { gamma: self.f2(), cx: principal[1].0, cy: principal[1].1 },
        )
    }

    pub fn pose(&self) -> RelativePose {
        RelativePose::new(self.translation(), self.angles())
    }
}

pub fn reconstruct_forward(theta: &ReconParams, principal: &PrincipalPoints) -> Result<FMat> {
    let (k1, k2) = theta.cameras(principal);
    compose_fundamental(&k1, &k2, &theta.pose())
}

fn d_rotation_x(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::new(0.0, 0.0, 0.0, 0.0, -s, -c, 0.0, c, -s)
}

fn d_rotation_y(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::new(-s, 0.0, c, 0.0, 0.0, 0.0, -c, 0.0, -s)
}

fn d_rotation_z(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::new(-s, -c, 0.0, c, -s, 0.0, 0.0, 0.0, 0.0)
}

/// Derivative of `K^-1` with respect to the diagonal entry.
fn d_inverse_intrinsics(k: &CameraIntrinsics) -> Mat3 {
    let g2 = k.gamma * k.gamma;
    Mat3::new(-1.0 / g2, 0.0, k.cx / g2, 0.0, -1.0 / g2, k.cy / g2, 0.0, 0.0, 0.0)
}

/// The nine partial derivative matrices `dF / d theta_k`.
pub fn reconstruct_partials(theta: &ReconParams, principal: &PrincipalPoints) -> Result<[Mat3; 8]> {
    // forward validates focal lengths and translation
    reconstruct_forward(theta, principal)?;
    let (k1, k2) = theta.cameras(principal);
    let b = k1.inverse_matrix()?;
    let a = k2.inverse_matrix()?.transpose();
    let s = skew(&theta.translation());
    let r = theta.angles();
    let (rx, ry, rz) = (rotation_x(r[0]), rotation_y(r[1]), rotation_z(r[2]));
    let rot = rx * ry * rz;
    let a_s = a * s;
    let r_b = rot * b;

    let mut out = [Mat3::zeros(); 8];
    out[0] = a_s * rot * d_inverse_intrinsics(&k1);
    out[1] = d_inverse_intrinsics(&k2).transpose() * s * r_b;
    for axis in 0..3 {
        out[2 + axis] = a * skew(&Vec3::ith(axis, 1.0)) * r_b;
    }
    out[5] = a_s * d_rotation_x(r[0]) * ry * rz * b;
    out[6] = a_s * rx * d_rotation_y(r[1]) * rz * b;
    out[7] = a_s * rx * ry * d_rotation_z(r[2]) * b;
    Ok(out)
}

pub fn reconstruct_jacobian(theta: &ReconParams, principal: &PrincipalPoints) -> Result<Jacobian9x8> {
    let partials = reconstruct_partials(theta, principal)?;
    Ok(Jacobian9x8::from_fn(|row, col| partials[col][(row / 3, row % 3)]))
}

/// `dL/dtheta = J^T vec(dL/dF)`.
pub fn reconstruct_backward(
    theta: &ReconParams,
    principal: &PrincipalPoints,
    upstream: &Mat3,
) -> Result<[f64; 8]> {
    let partials = reconstruct_partials(theta, principal)?;
    let mut grad = [0.0; 8];
    for (g, d) in grad.iter_mut().zip(partials.iter()) {
        *g = upstream.component_mul(d).sum();
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    const ORIGIN: PrincipalPoints = [(0.0, 0.0), (0.0, 0.0)];

    #[test]
    fn reduces_to_skew() {
        let theta = ReconParams([1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let f = reconstruct_forward(&theta, &ORIGIN).unwrap();
        assert_eq!(*f.matrix(), skew(&Vec3::new(1.0, 0.0, 0.0)));
    }

    #[test]
    fn equals_composition() {
        let theta = ReconParams([480.0, 520.0, 0.8, -0.1, 0.3, 0.05, -0.2, 0.1]);
        let pp = [(320.0, 240.0), (310.0, 250.0)];
        let (k1, k2) = theta.cameras(&pp);
        let a = reconstruct_forward(&theta, &pp).unwrap();
        let b = compose_fundamental(&k1, &k2, &theta.pose()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_upstream_gives_zero_gradient() {
        let theta = ReconParams([2.0, 3.0, 0.5, 0.1, -0.3, 0.2, 0.1, -0.4]);
        let g = reconstruct_backward(&theta, &ORIGIN, &Mat3::zeros()).unwrap();
        assert_eq!(g, [0.0; 8]);
    }

    #[test]
    fn translation_partial_is_skew_basis_at_identity() {
        // with K = I and R = I, dF/dtx is the derivative of [t]x alone
        let theta = ReconParams([1.0, 1.0, 0.3, -0.2, 0.9, 0.0, 0.0, 0.0]);
        let p = reconstruct_partials(&theta, &ORIGIN).unwrap();
        let h = 1e-6;
        for axis in 0..3 {
            let mut tp = theta.translation();
            let mut tm = tp;
            tp[axis] += h;
            tm[axis] -= h;
            let fd = (skew(&tp) - skew(&tm)) / (2.0 * h);
            assert!((p[2 + axis] - fd).amax() < 1e-9);
        }
        assert_eq!(p[2], Mat3::new(0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0));
    }

    #[test]
    fn errors_propagate() {
        let bad_f = ReconParams([0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            reconstruct_backward(&bad_f, &ORIGIN, &Mat3::identity()),
            Err(Error::NonPositiveFocal(_))
        ));
        let bad_t = ReconParams([1.0, 1.0, 0.0, 0.0, 0.0, 0.1, 0.0, 0.0]);
        assert!(matches!(reconstruct_forward(&bad_t, &ORIGIN), Err(Error::DegenerateTranslation(_))));
    }
}
