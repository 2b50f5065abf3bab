//! Truncated spectral representation of the evolution equation and stage cost.
//!
//! A model holds the diagonal generator coefficients (one real eigenvalue per
//! retained mode), the mode coefficients of the input and output channels, the
//! control weight and the linear cost data. The state-cost weight is never
//! stored: it is `C^T C` by construction, so it stays positive semidefinite
//! exactly.

use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid heat configuration: {0}")]
    InvalidHeatConfig(String),
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("eigenvalues must be sorted non-increasing by real part")]
    Unsorted,
}

/// Truncated diagonal model of `(A, B, C, R, s, v)` in an orthonormal
/// eigenbasis of the self-adjoint generator.
#[derive(Debug, Clone)]
pub struct SpectralModel {
    /// Eigenvalues of the generator, sorted non-increasing.
    eigenvalues: DVector<f64>,
    /// N x m mode coefficients of the input channels.
    input_coeffs: DMatrix<f64>,
    /// p x N mode coefficients of the output channels.
    output_coeffs: DMatrix<f64>,
    /// m x m control weight.
    control_weight: DMatrix<f64>,
    /// Linear state-cost coefficients (length N).
    state_linear: DVector<f64>,
    /// Linear control-cost coefficients (length m).
    control_linear: DVector<f64>,
}

impl SpectralModel {
    pub fn new(
        eigenvalues: DVector<f64>,
        input_coeffs: DMatrix<f64>,
        output_coeffs: DMatrix<f64>,
        control_weight: DMatrix<f64>,
        state_linear: DVector<f64>,
        control_linear: DVector<f64>,
    ) -> Result<Self, ModelError> {
        let n = eigenvalues.len();
        let m = input_coeffs.ncols();
        if input_coeffs.nrows() != n {
            return Err(ModelError::DimensionMismatch(format!(
                "input_coeffs has {} rows, expected {n}",
                input_coeffs.nrows()
            )));
        }
        if output_coeffs.ncols() != n {
            return Err(ModelError::DimensionMismatch(format!(
                "output_coeffs has {} columns, expected {n}",
                output_coeffs.ncols()
            )));
        }
        if control_weight.nrows() != m || control_weight.ncols() != m {
            return Err(ModelError::DimensionMismatch(format!(
                "control_weight is {}x{}, expected {m}x{m}",
                control_weight.nrows(),
                control_weight.ncols()
            )));
        }
        if state_linear.len() != n {
            return Err(ModelError::DimensionMismatch(format!(
                "state_linear has length {}, expected {n}",
                state_linear.len()
            )));
        }
        if control_linear.len() != m {
            return Err(ModelError::DimensionMismatch(format!(
                "control_linear has length {}, expected {m}",
                control_linear.len()
            )));
        }
        for (name, ok) in [
            ("eigenvalues", eigenvalues.iter().all(|v| v.is_finite())),
            ("input_coeffs", input_coeffs.iter().all(|v| v.is_finite())),
            ("output_coeffs", output_coeffs.iter().all(|v| v.is_finite())),
            ("control_weight", control_weight.iter().all(|v| v.is_finite())),
            ("state_linear", state_linear.iter().all(|v| v.is_finite())),
            ("control_linear", control_linear.iter().all(|v| v.is_finite())),
        ] {
            if !ok {
                return Err(ModelError::NonFinite(name));
            }
        }
        if eigenvalues.as_slice().windows(2).any(|w| w[0] < w[1]) {
            return Err(ModelError::Unsorted);
        }
        Ok(Self {
            eigenvalues,
            input_coeffs,
            output_coeffs,
            control_weight,
            state_linear,
            control_linear,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn input_dim(&self) -> usize {
        self.input_coeffs.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.output_coeffs.nrows()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn input_coeffs(&self) -> &DMatrix<f64> {
        &self.input_coeffs
    }

    pub fn output_coeffs(&self) -> &DMatrix<f64> {
        &self.output_coeffs
    }

    pub fn control_weight(&self) -> &DMatrix<f64> {
        &self.control_weight
    }

    pub fn state_linear(&self) -> &DVector<f64> {
        &self.state_linear
    }

    pub fn control_linear(&self) -> &DVector<f64> {
        &self.control_linear
    }

    /// `C x` in mode coordinates.
    pub fn output(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.output_coeffs * x
    }

    /// `B u` in mode coordinates.
    pub fn input_map(&self, u: &DVector<f64>) -> DVector<f64> {
        &self.input_coeffs * u
    }

    /// `A x + B u` in mode coordinates (A acts modewise).
    pub fn vector_field(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        let mut f = self.input_map(u);
        for i in 0..self.n_modes() {
            f[i] += self.eigenvalues[i] * x[i];
        }
        f
    }

    /// Prefix truncation to the first `n` modes.
    pub fn truncated(&self, n: usize) -> Result<Self, ModelError> {
        if n == 0 || n > self.n_modes() {
            return Err(ModelError::DimensionMismatch(format!(
                "truncation {n} outside 1..={}",
                self.n_modes()
            )));
        }
        Ok(Self {
            eigenvalues: self.eigenvalues.rows(0, n).into_owned(),
            input_coeffs: self.input_coeffs.rows(0, n).into_owned(),
            output_coeffs: self.output_coeffs.columns(0, n).into_owned(),
            control_weight: self.control_weight.clone(),
            state_linear: self.state_linear.rows(0, n).into_owned(),
            control_linear: self.control_linear.clone(),
        })
    }
}

/// Configuration of the one-dimensional heat example: a shifted Laplacian with
/// averaged-indicator actuator and sensor on `(0, 1)`.
#[derive(Debug, Clone)]
pub struct HeatExampleConfig {
    /// Spectral shift; must avoid `n^2 pi^2` for every integer `n >= 0`.
    pub k: f64,
    /// Actuator center and half-width.
    pub xi_c: f64,
    pub eps: f64,
    /// Sensor center and half-width.
    pub xi_o: f64,
    pub nu: f64,
    /// Scalar control weight.
    pub r: f64,
    /// Linear state-cost coefficients (padded with zeros to the truncation).
    pub s_coeffs: Vec<f64>,
    /// Linear control-cost coefficient.
    pub v_scalar: f64,
    /// Number of retained modes.
    pub n_modes: usize,
}

impl HeatExampleConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let err = |msg: String| Err(ModelError::InvalidHeatConfig(msg));
        if self.n_modes < 2 {
            return err(format!("N = {} but at least 2 modes are required", self.n_modes));
        }
        if !(self.r > 0.0) {
            return err(format!("control weight r = {} must be positive", self.r));
        }
        for (name, center, half) in [("actuator", self.xi_c, self.eps), ("sensor", self.xi_o, self.nu)] {
            if !(half > 0.0) {
                return err(format!("{name} half-width must be positive, got {half}"));
            }
            if center - half <= 0.0 || center + half >= 1.0 {
                return err(format!(
                    "{name} interval [{}, {}] must stay inside (0, 1)",
                    center - half,
                    center + half
                ));
            }
        }
        // k = n^2 pi^2 puts a zero eigenvalue into the spectrum of the full
        // operator, so the resolvent at 0 does not exist.
        let tol = 1e-9 * (1.0 + self.k.abs());
        let n_max = ((self.k.max(0.0)).sqrt() / PI).ceil() as usize + 1;
        for n in 0..=n_max.max(self.n_modes) {
            let sq = (n * n) as f64 * PI * PI;
            if (self.k - sq).abs() < tol {
                return err(format!("k = {} coincides with n^2 pi^2 at n = {n}", self.k));
            }
        }
        if self.s_coeffs.len() > self.n_modes {
            return err(format!(
                "s has {} coefficients but only {} modes are retained",
                self.s_coeffs.len(),
                self.n_modes
            ));
        }
        Ok(())
    }
}

/// Mode coefficient of an averaged indicator `1/(2h) 1_[c-h, c+h]` against the
/// cosine eigenfunction of index `n`. The constant eigenfunction pairs to the
/// indicator's unit mass, so the n = 0 coefficient is exactly 1.
fn averaged_indicator_coeff(n: usize, center: f64, half_width: f64) -> f64 {
    if n == 0 {
        1.0
    } else {
        let npi = n as f64 * PI;
        (2.0f64).sqrt() * (npi * center).cos() * (npi * half_width).sin() / (npi * half_width)
    }
}

/// Build the heat-example model: eigenvalues `-n^2 pi^2 + k` with cosine
/// eigenfunctions, input/output coefficients from the averaged indicators.
pub fn build_heat_model(config: &HeatExampleConfig) -> Result<SpectralModel, ModelError> {
    config.validate()?;
    let n = config.n_modes;
    let eigenvalues =
        DVector::from_fn(n, |i, _| -((i * i) as f64) * PI * PI + config.k);
    let input_coeffs =
        DMatrix::from_fn(n, 1, |i, _| averaged_indicator_coeff(i, config.xi_c, config.eps));
    let output_coeffs =
        DMatrix::from_fn(1, n, |_, j| averaged_indicator_coeff(j, config.xi_o, config.nu));
    let mut s = DVector::zeros(n);
    for (i, v) in config.s_coeffs.iter().enumerate() {
        s[i] = *v;
    }
    SpectralModel::new(
        eigenvalues,
        input_coeffs,
        output_coeffs,
        DMatrix::from_element(1, 1, config.r),
        s,
        DVector::from_element(1, config.v_scalar),
    )
}

/// Report-only semantic validation: ellipticity of the control weight,
/// invertibility of the generator, and the unstable mode count.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    /// Smallest eigenvalue of the (symmetrized) control weight.
    pub c_r: f64,
    /// Smallest eigenvalue magnitude of the generator.
    pub min_abs_eigenvalue: f64,
    /// Number of modes with nonnegative real part.
    pub unstable_count: usize,
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_model(model: &SpectralModel) -> ValidationReport {
    let mut violations = Vec::new();

    let r = model.control_weight();
    let asym = (r - r.transpose()).norm();
    if asym > 1e-12 * (1.0 + r.norm()) {
        violations.push("control weight R is not symmetric".to_string());
    }
    let (c_r, _) = crate::linalg::min_symmetric_eig(r);
    if !(c_r > 0.0) {
        violations.push(format!("R not elliptic: smallest eigenvalue {c_r}"));
    }

    let min_abs_eigenvalue = model
        .eigenvalues()
        .iter()
        .map(|l| l.abs())
        .fold(f64::INFINITY, f64::min);
    if !(min_abs_eigenvalue > 0.0) {
        violations.push("zero eigenvalue: 0 is not in the resolvent set".to_string());
    }

    let unstable_count = model.eigenvalues().iter().filter(|l| **l >= 0.0).count();

    ValidationReport {
        c_r,
        min_abs_eigenvalue,
        unstable_count,
        violations,
    }
}

/// Stage cost `||C x||^2 + u^T R u + s^T x + v^T u`.
pub fn stage_cost(
    model: &SpectralModel,
    x: &DVector<f64>,
    u: &DVector<f64>,
) -> Result<f64, ModelError> {
    if x.len() != model.n_modes() {
        return Err(ModelError::DimensionMismatch(format!(
            "state has length {}, expected {}",
            x.len(),
            model.n_modes()
        )));
    }
    if u.len() != model.input_dim() {
        return Err(ModelError::DimensionMismatch(format!(
            "control has length {}, expected {}",
            u.len(),
            model.input_dim()
        )));
    }
    let y = model.output(x);
    Ok(y.norm_squared()
        + (u.transpose() * model.control_weight() * u)[(0, 0)]
        + model.state_linear().dot(x)
        + model.control_linear().dot(u))
}
