//! Small dense complex linear algebra on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative singular value cutoff for minimum-norm least squares.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// (λ_min, λ_max) of a Hermitian matrix.
pub fn hermitian_extremes(m: &CMatrix) -> (f64, f64) {
    if m.nrows() == 0 {
        return (0.0, 0.0);
    }
    let eig = m.clone().symmetric_eigenvalues();
    let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Minimum-norm solution of min ‖Ax − b‖₂ and whether A was numerically
/// rank deficient.
pub fn lstsq(a: &CMatrix, b: &CVector) -> (CVector, bool) {
    if a.ncols() == 0 {
        return (CVector::zeros(0), false);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let eps = RANK_TOLERANCE * smax.max(f64::MIN_POSITIVE);
    let deficient = svd.singular_values.iter().any(|&s| s <= eps);
    let x = svd
        .solve(b, eps)
        .expect("both singular vector sets were computed");
    (x, deficient)
}

/// Pseudo-inverse of a Hermitian positive semidefinite matrix.
pub fn hermitian_pinv(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    let eig = m.clone().symmetric_eigen();
    let lmax = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let eps = RANK_TOLERANCE * lmax.max(f64::MIN_POSITIVE);
    let mut out = CMatrix::zeros(n, n);
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        if l > eps {
            let v = eig.eigenvectors.column(i);
            out += (v * v.adjoint()) * Complex64::new(1.0 / l, 0.0);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rank_one_gram() {
        let g = CMatrix::from_element(2, 2, c(1.0, 0.0));
        let (lo, hi) = hermitian_extremes(&g);
        assert!(lo.abs() < 1e-14 && (hi - 2.0).abs() < 1e-14);
    }

    #[test]
    fn hermitian_complex_spectrum() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3
        let m = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let (lo, hi) = hermitian_extremes(&m);
        assert!((lo - 1.0).abs() < 1e-13 && (hi - 3.0).abs() < 1e-13);
    }

    #[test]
    fn lstsq_exact_and_deficient() {
        let a = CMatrix::from_row_slice(3, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0), c(1.0, 0.0), c(1.0, 0.0)]);
        let x_true = CVector::from_vec(vec![c(0.5, -1.0), c(2.0, 0.25)]);
        let b = &a * &x_true;
        let (x, deficient) = lstsq(&a, &b);
        assert!(!deficient);
        assert!((x - x_true).norm() < 1e-12);

        let dup = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0)]);
        let b = CVector::from_vec(vec![c(2.0, 0.0), c(4.0, 0.0)]);
        let (x, deficient) = lstsq(&dup, &b);
        assert!(deficient);
        // minimum-norm solution splits the weight evenly
        assert!((x[0] - c(1.0, 0.0)).norm() < 1e-12 && (x[1] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn pinv_of_singular() {
        let m = CMatrix::from_element(2, 2, c(1.0, 0.0));
        let p = hermitian_pinv(&m);
        assert!((&m * &p * &m - &m).norm() < 1e-12);
    }
}
