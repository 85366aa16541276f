//! Real roots of low-degree polynomials through companion-matrix
//! eigenvalues.

use nalgebra::DMatrix;

/// Imaginary-part tolerance for accepting an eigenvalue as a real root.
pub const IMAG_TOLERANCE: f64 = 1e-9;

/// Leading coefficients smaller than this fraction of the largest one are
/// treated as zero (degree drop).
const LEADING_TOLERANCE: f64 = 1e-12;

/// Evaluate `c[0] x^d + c[1] x^(d-1) + ... + c[d]`.
pub fn eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
}

fn eval_derivative(coeffs: &[f64], x: f64) -> f64 {
    let d = coeffs.len().saturating_sub(1);
    coeffs[..d]
        .iter()
        .enumerate()
        .fold(0.0, |acc, (i, &c)| acc * x + c * (d - i) as f64)
}

/// Real roots, ascending, of a polynomial with coefficients given highest
/// degree first. Roots are polished with a few Newton steps.
pub fn real_roots(coeffs: &[f64]) -> Vec<f64> {
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if scale == 0.0 {
        return Vec::new();
    }
    let start = coeffs
        .iter()
        .position(|c| c.abs() > LEADING_TOLERANCE * scale)
        .expect("nonzero polynomial");
    let c = &coeffs[start..];
    let degree = c.len() - 1;
    if degree == 0 {
        return Vec::new();
    }

    let mut companion = DMatrix::<f64>::zeros(degree, degree);
    for j in 0..degree {
        companion[(0, j)] = -c[j + 1] / c[0];
    }
    for i in 1..degree {
        companion[(i, i - 1)] = 1.0;
    }

    let mut roots: Vec<f64> = companion
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= IMAG_TOLERANCE * z.re.abs().max(1.0))
        .map(|z| polish(c, z.re))
        .collect();
    roots.sort_by(f64::total_cmp);
    roots
}

fn polish(coeffs: &[f64], mut x: f64) -> f64 {
    for _ in 0..4 {
        let d = eval_derivative(coeffs, x);
        if d == 0.0 {
            break;
        }
        let step = eval(coeffs, x) / d;
        let next = x - step;
        if !next.is_finite() || eval(coeffs, next).abs() > eval(coeffs, x).abs() {
            break;
        }
        x = next;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_real_roots() {
        // (x - 1)(x + 2)(x - 3) = x^3 - 2x^2 - 5x + 6
        let r = real_roots(&[1.0, -2.0, -5.0, 6.0]);
        assert_eq!(r.len(), 3);
        for (a, b) in r.iter().zip([-2.0, 1.0, 3.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn one_real_root() {
        // (x - 0.5)(x^2 + 1)
        let r = real_roots(&[1.0, -0.5, 1.0, -0.5]);
        assert_eq!(r.len(), 1);
        assert!((r[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn degree_drop() {
        let r = real_roots(&[0.0, 2.0, 0.0, -8.0]);
        assert_eq!(r.len(), 2);
        assert!((r[0] + 2.0).abs() < 1e-12 && (r[1] - 2.0).abs() < 1e-12);
        assert!(real_roots(&[0.0, 0.0, 0.0, 3.0]).is_empty());
    }

    #[test]
    fn scaled_leading_coefficient() {
        let r = real_roots(&[-4.0, 8.0, 20.0, -24.0]);
        assert_eq!(r.len(), 3);
        assert!(r.iter().all(|&x| eval(&[1.0, -2.0, -5.0, 6.0], x).abs() < 1e-10));
    }
}
