// Small dense helpers on top of nalgebra.

use nalgebra::DMatrix;

/// Largest singular value, from the symmetric eigendecomposition of `MᵀM`.
pub(crate) fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let gram = m.transpose() * m;
    let top = gram
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(0.0, f64::max);
    top.max(0.0).sqrt()
}

pub(crate) fn min_singular_value(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub(crate) fn min_sym_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_norm_of_diagonal() {
        let m = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, -5.0]);
        assert!((spectral_norm(&m) - 5.0).abs() < 1e-12);
        assert!((min_singular_value(&m) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn skew_matrix_has_zero_symmetric_part() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, -2.0, 0.0]);
        assert_eq!(min_sym_eigenvalue(&m), 0.0);
        assert_eq!(max_asymmetry(&m), 4.0);
    }
}
