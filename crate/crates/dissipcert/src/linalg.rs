//! Small dense linear-algebra helpers shared across the toolkit.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Smallest eigenvalue of a symmetric matrix together with an eigenvector.
///
/// The input is symmetrized first so that roundoff asymmetry from matrix
/// assembly cannot leak into the symmetric eigensolver.
pub fn min_symmetric_eig(m: &DMatrix<f64>) -> (f64, DVector<f64>) {
    assert_eq!(m.nrows(), m.ncols(), "min_symmetric_eig: square input");
    if m.nrows() == 0 {
        return (f64::INFINITY, DVector::zeros(0));
    }
    let sym = symmetrize(m);
    let eig = sym.symmetric_eigen();
    let mut idx = 0;
    for (i, v) in eig.eigenvalues.iter().enumerate() {
        if *v < eig.eigenvalues[idx] {
            idx = i;
        }
    }
    (eig.eigenvalues[idx], eig.eigenvectors.column(idx).into_owned())
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigenvalues of a general real square matrix.
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<Complex64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    m.complex_eigenvalues().iter().copied().collect()
}

/// Largest real part of the spectrum; `-inf` for the empty matrix.
pub fn spectral_abscissa(m: &DMatrix<f64>) -> f64 {
    eigenvalues(m)
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Operator 2-norm (largest singular value); 0 for empty matrices.
pub fn operator_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// Rank of the observability matrix `[C; CA; ...; CA^{n-1}]`.
pub fn observability_rank(a: &DMatrix<f64>, c: &DMatrix<f64>, tol: f64) -> usize {
    let n = a.nrows();
    if n == 0 {
        return 0;
    }
    let p = c.nrows();
    let mut obs = DMatrix::zeros(p * n, n);
    let mut block = c.clone();
    for k in 0..n {
        obs.view_mut((k * p, 0), (p, n)).copy_from(&block);
        block = &block * a;
    }
    obs.rank(tol)
}

/// Solve `a x = b` by LU with one step of iterative refinement.
pub fn solve_linear(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let lu = a.clone().lu();
    let mut x = lu.solve(b)?;
    let r = b - a * &x;
    if let Some(dx) = lu.solve(&r) {
        x += dx;
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn min_eig_of_diagonal() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, -2.0, 5.0]));
        let (lmin, v) = min_symmetric_eig(&m);
        assert!((lmin + 2.0).abs() < 1e-12);
        assert!((v[1].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn abscissa_of_rotation_plus_shift() {
        // eigenvalues -1 +/- 2i
        let m = dmatrix![-1.0, 2.0; -2.0, -1.0];
        assert!((spectral_abscissa(&m) + 1.0).abs() < 1e-10);
    }

    #[test]
    fn observability_rank_detects_unobservable_mode() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0]));
        let c_full = dmatrix![1.0, 1.0];
        let c_deficient = dmatrix![0.0, 1.0];
        assert_eq!(observability_rank(&a, &c_full, 1e-10), 2);
        assert_eq!(observability_rank(&a, &c_deficient, 1e-10), 1);
    }

    #[test]
    fn solve_linear_refines() {
        let a = dmatrix![4.0, 1.0; 1.0, 3.0];
        let b = DVector::from_vec(vec![1.0, 2.0]);
        let x = solve_linear(&a, &b).unwrap();
        assert!((&a * &x - &b).norm() < 1e-14);
    }
}
