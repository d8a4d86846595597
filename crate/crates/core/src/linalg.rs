//! Small dense helpers for 2x2 and 3x3 blocks.

use nalgebra::{DMatrix, Matrix2, Matrix3};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Eigenvalues `(min, max)` of a real symmetric 2x2 matrix in closed form.
///
/// The smaller eigenvalue is recovered from `det / max` to avoid cancellation
/// when the matrix is nearly singular.
pub fn sym2_eigenvalues(m: &Matrix2<f64>) -> (f64, f64) {
    let (a, b, d) = (m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)]);
    let mean = 0.5 * (a + d);
    let r = (0.5 * (a - d)).hypot(b);
    let max = mean + r;
    let min = if mean > 0.0 && max > 0.0 {
        (a * d - b * b) / max
    } else {
        mean - r
    };
    (min, max)
}

pub fn sym2_inverse(m: &Matrix2<f64>) -> Option<Matrix2<f64>> {
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let scale = m.abs().max().powi(2);
    if det.abs() <= 1e-15 * scale || det == 0.0 {
        return None;
    }
    Some(Matrix2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]) / det)
}

/// Inverse of a 3x3 complex matrix through LU factorisation with partial pivoting.
pub fn inverse3_lu(m: &Matrix3<Complex64>) -> Option<Matrix3<Complex64>> {
    m.lu().try_inverse()
}

/// Inverse of a 3x3 complex matrix through the adjugate (cofactor) formula.
pub fn inverse3_adjugate(m: &Matrix3<Complex64>) -> Option<Matrix3<Complex64>> {
    let c = |r: usize, s: usize| m[(r, s)];
    let cof = |r0: usize, r1: usize, s0: usize, s1: usize| c(r0, s0) * c(r1, s1) - c(r0, s1) * c(r1, s0);
    let adj = Matrix3::new(
        cof(1, 2, 1, 2),
        -cof(0, 2, 1, 2),
        cof(0, 1, 1, 2),
        -cof(1, 2, 0, 2),
        cof(0, 2, 0, 2),
        -cof(0, 1, 0, 2),
        cof(1, 2, 0, 1),
        -cof(0, 2, 0, 1),
        cof(0, 1, 0, 1),
    );
    let det = c(0, 0) * adj[(0, 0)] + c(0, 1) * adj[(1, 0)] + c(0, 2) * adj[(2, 0)];
    let scale = m.iter().fold(0.0f64, |a, v| a.max(v.norm())).powi(3);
    if det.norm() <= 1e-15 * scale || det.norm() == 0.0 {
        return None;
    }
    Some(adj / det)
}

fn is_hermitian(m: &DMatrix<Complex64>) -> bool {
    let scale = m.iter().fold(0.0f64, |a, v| a.max(v.norm()));
    let gap = (m - m.adjoint()).iter().fold(0.0f64, |a, v| a.max(v.norm()));
    gap <= 1e-13 * scale
}

/// Largest singular value of a 2x2 or 3x3 complex matrix.
///
/// Hermitian inputs use `max |eigenvalue|`; anything else goes through the
/// eigenvalues of `M^H M`.
pub fn spectral_norm(m: &DMatrix<Complex64>) -> Result<f64> {
    if !(m.nrows() == m.ncols() && (m.nrows() == 2 || m.nrows() == 3)) {
        return Err(Error::invalid(
            "m",
            format!("expected a 2x2 or 3x3 matrix, got {}x{}", m.nrows(), m.ncols()),
        ));
    }
    if m.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    if is_hermitian(m) {
        let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let ev = h.symmetric_eigenvalues();
        Ok(ev.iter().fold(0.0f64, |a, v| a.max(v.abs())))
    } else {
        let g = m.adjoint() * m;
        let ev = g.symmetric_eigenvalues();
        Ok(ev.iter().fold(0.0f64, |a, v| a.max(*v)).max(0.0).sqrt())
    }
}

pub fn spectral_norm3(m: &Matrix3<Complex64>) -> Result<f64> {
    spectral_norm(&DMatrix::from_iterator(3, 3, m.iter().copied()))
}

/// Spectral norm of a real symmetric 2x2 matrix.
pub fn sym2_norm(m: &Matrix2<f64>) -> f64 {
    let (lo, hi) = sym2_eigenvalues(m);
    lo.abs().max(hi.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_hermitian3(rng: &mut ChaCha8Rng) -> Matrix3<Complex64> {
        let a = Matrix3::from_fn(|_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        (a + a.adjoint()) * c(0.5, 0.0)
    }

    #[test]
    fn sym2_closed_form_matches_eigen() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let (a, b, d) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let m = Matrix2::new(a, b, b, d);
            let (lo, hi) = sym2_eigenvalues(&m);
            let ev = m.symmetric_eigenvalues();
            let (elo, ehi) = (ev.min(), ev.max());
            assert!((lo - elo).abs() < 1e-12 * (1.0 + ehi.abs()));
            assert!((hi - ehi).abs() < 1e-12 * (1.0 + ehi.abs()));
        }
        // nearly singular PSD matrix keeps relative accuracy in the small eigenvalue
        let v = nalgebra::Vector2::new(1.0, 1e-3);
        let m = v * v.transpose() + Matrix2::identity() * 1e-14;
        let (lo, _) = sym2_eigenvalues(&m);
        assert!((lo - 1e-14).abs() < 1e-20);
    }

    #[test]
    fn inverse_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let m = random_hermitian3(&mut rng) + Matrix3::identity() * c(3.0, 0.0);
            let a = inverse3_lu(&m).unwrap();
            let b = inverse3_adjugate(&m).unwrap();
            assert!((a - b).norm() < 1e-12 * a.norm());
            assert!((m * b - Matrix3::identity()).norm() < 1e-12);
        }
        assert!(inverse3_adjugate(&Matrix3::zeros()).is_none());
        assert!(sym2_inverse(&Matrix2::zeros()).is_none());
    }

    #[test]
    fn spectral_norm_examples() {
        let id = DMatrix::<Complex64>::identity(3, 3);
        assert!((spectral_norm(&id).unwrap() - 1.0).abs() < 1e-15);
        let mut d = DMatrix::<Complex64>::zeros(3, 3);
        d[(2, 2)] = c(36.0, 0.0);
        assert!((spectral_norm(&d).unwrap() - 36.0).abs() < 1e-13);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let h = random_hermitian3(&mut rng);
            let got = spectral_norm3(&h).unwrap();
            let svd = h.svd(false, false).singular_values.max();
            assert!((got - svd).abs() < 1e-12 * svd.max(1.0));
            let g = Matrix3::from_fn(|_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let got = spectral_norm3(&g).unwrap();
            let svd = g.svd(false, false).singular_values.max();
            assert!((got - svd).abs() < 1e-12 * svd.max(1.0));
        }
    }

    #[test]
    fn spectral_norm_rejects_bad_input() {
        let mut m = DMatrix::<Complex64>::identity(2, 2);
        m[(0, 1)] = c(f64::NAN, 0.0);
        assert_eq!(spectral_norm(&m), Err(Error::NonFinite));
        assert!(spectral_norm(&DMatrix::<Complex64>::identity(4, 4)).is_err());
    }
}
