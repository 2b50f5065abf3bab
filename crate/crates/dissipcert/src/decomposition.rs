//! Spectral splitting of the truncated model into unstable and stable blocks.
//!
//! In eigencoordinates the spectral projection reduces to an index selection:
//! the enclosing contour picks exactly the modes with nonnegative real part.
//! Orthogonality of the two subspaces holds structurally because distinct
//! eigenmodes are orthonormal.

use crate::linalg;
use crate::model::SpectralModel;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SplitError {
    #[error(
        "eigenvalue {eigenvalue} at index {index} is within {gap_tol} of the imaginary axis; \
         the spectrum cannot be separated"
    )]
    SpectrumNotSeparated {
        index: usize,
        eigenvalue: f64,
        gap_tol: f64,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Index partition of the modes with the extracted diagonal blocks.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub unstable_idx: Vec<usize>,
    pub stable_idx: Vec<usize>,
    /// `min over stable modes of -lambda`; infinite when no stable mode exists.
    pub stable_margin: f64,
    /// Unstable generator block (diagonal, n_u x n_u).
    pub a_u: DMatrix<f64>,
    /// Stable generator diagonal (length n_s).
    pub a_s_diag: DVector<f64>,
    /// Output restricted to the unstable block (p x n_u).
    pub c_u: DMatrix<f64>,
    /// Output restricted to the stable block (p x n_s).
    pub c_s: DMatrix<f64>,
}

impl Decomposition {
    pub fn n_unstable(&self) -> usize {
        self.unstable_idx.len()
    }

    pub fn n_stable(&self) -> usize {
        self.stable_idx.len()
    }
}

/// Partition the modes by the sign of the real part.
///
/// Eigenvalues within `gap_tol` of zero are rejected: the separating contour
/// of the spectral decomposition cannot be drawn, and the resolvent at zero
/// degenerates.
pub fn split(model: &SpectralModel, gap_tol: f64) -> Result<Decomposition, SplitError> {
    let n = model.n_modes();
    for (i, l) in model.eigenvalues().iter().enumerate() {
        if l.abs() < gap_tol {
            return Err(SplitError::SpectrumNotSeparated {
                index: i,
                eigenvalue: *l,
                gap_tol,
            });
        }
    }
    let unstable_idx: Vec<usize> = (0..n).filter(|&i| model.eigenvalues()[i] >= 0.0).collect();
    let stable_idx: Vec<usize> = (0..n).filter(|&i| model.eigenvalues()[i] < 0.0).collect();

    let n_u = unstable_idx.len();
    let n_s = stable_idx.len();
    let p = model.output_dim();

    let mut a_u = DMatrix::zeros(n_u, n_u);
    let mut c_u = DMatrix::zeros(p, n_u);
    for (col, &idx) in unstable_idx.iter().enumerate() {
        a_u[(col, col)] = model.eigenvalues()[idx];
        c_u.set_column(col, &model.output_coeffs().column(idx));
    }
    let mut a_s_diag = DVector::zeros(n_s);
    let mut c_s = DMatrix::zeros(p, n_s);
    for (col, &idx) in stable_idx.iter().enumerate() {
        a_s_diag[col] = model.eigenvalues()[idx];
        c_s.set_column(col, &model.output_coeffs().column(idx));
    }

    let stable_margin = a_s_diag.iter().map(|l| -l).fold(f64::INFINITY, f64::min);

    Ok(Decomposition {
        unstable_idx,
        stable_idx,
        stable_margin,
        a_u,
        a_s_diag,
        c_u,
        c_s,
    })
}

#[derive(Debug, Clone)]
pub struct DetectabilityReport {
    /// Spectrum of the injected unstable block `A_u + L_u C_u`.
    pub closed_loop_spectrum: Vec<Complex64>,
    /// Spectral abscissa of `A_u + L_u C_u` (`-inf` when the block is empty).
    pub unstable_block_abscissa: f64,
    /// Abscissa of the full closed-loop operator. The injection acts only on
    /// the unstable block, so the operator is block upper-triangular and the
    /// abscissa is `max(abscissa(A_u + L_u C_u), -stable_margin)`.
    pub overall_abscissa: f64,
    pub detectable: bool,
}

/// Evaluate an output injection on the unstable block.
pub fn check_detectability(
    dec: &Decomposition,
    l_u: &DMatrix<f64>,
) -> Result<DetectabilityReport, SplitError> {
    let n_u = dec.n_unstable();
    let p = dec.c_u.nrows();
    if l_u.nrows() != n_u || l_u.ncols() != p {
        return Err(SplitError::DimensionMismatch(format!(
            "injection is {}x{}, expected {n_u}x{p}",
            l_u.nrows(),
            l_u.ncols()
        )));
    }
    let closed = &dec.a_u + l_u * &dec.c_u;
    let closed_loop_spectrum = linalg::eigenvalues(&closed);
    let unstable_block_abscissa = linalg::spectral_abscissa(&closed);
    let overall_abscissa = unstable_block_abscissa.max(-dec.stable_margin);
    Ok(DetectabilityReport {
        closed_loop_spectrum,
        unstable_block_abscissa,
        overall_abscissa,
        detectable: overall_abscissa < 0.0,
    })
}
