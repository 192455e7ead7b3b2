//! Critical points of Gaussian random Fourier series on the flat torus.
//!
//! The crate predicts the mean and variance of the number of critical points
//! of the random field `u(θ) = Σ_k X_k Ψ_k(θ)` on `T^m`, where the coefficients
//! are independent centered Gaussians with variance `w(2πε|k|)`. Predictions
//! come from Kac–Rice densities expressed through the Fourier transform of the
//! radial weight `w`. A direct simulator counts critical points of sampled
//! fields so the predictions can be checked.
//!
//! Layout:
//! * [`radial_weight`]: the weight `w` and the radial profile `f` with
//!   `V(ξ) = f(|ξ|²/2)`.
//! * [`kernel`]: derivatives of `V`, its lattice periodization and the
//!   two-point gradient covariance matrix with its inverse.
//! * [`sym_ensembles`]: Gaussian measures on symmetric matrices and Monte
//!   Carlo estimates of expected absolute determinants.
//! * [`conditional_hessian`]: covariance tensors of Hessian pairs conditioned
//!   on vanishing gradients.
//! * [`asymptotic_constants`]: the leading constants for mean and variance.
//! * [`torus_simulator`]: field sampling and critical point counting.
//! * [`cli`]: configuration, orchestration and JSON reports.

pub mod asymptotic_constants;
pub mod cli;
pub mod conditional_hessian;
pub mod error;
pub mod kernel;
pub mod quadrature;
pub mod radial_weight;
pub mod rng;
pub mod sym_ensembles;
pub mod torus_simulator;

pub use error::{Error, Result};
