//! Certification toolkit for strict (pre-)dissipativity of generalized
//! linear-quadratic optimal control problems on spectrally decomposable
//! linear evolution equations.
//!
//! The pipeline splits a truncated diagonal model into unstable and stable
//! spectral blocks, solves the block Lyapunov problems, assembles a storage
//! operator, checks the ellipticity of the associated Lyapunov-like form,
//! derives the optimal equilibrium and storage offset, and finally validates
//! the resulting dissipation inequality pointwise and in integral form along
//! simulated trajectories. A finite-horizon solver measures the induced
//! turnpike behavior.

pub mod certificate;
pub mod cli;
pub mod config;
pub mod decomposition;
pub mod dynamics;
pub mod linalg;
pub mod lyapunov;
pub mod model;
pub mod ocp;
pub mod phi;
pub mod report;

pub use decomposition::{check_detectability, split, Decomposition};
pub use lyapunov::{
    build_unstable_p, place_observer, solve_dense_lyapunov, solve_stable_lyapunov,
};
pub use model::{build_heat_model, stage_cost, validate_model, HeatExampleConfig, SpectralModel};
