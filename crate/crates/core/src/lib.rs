//! Semidefinite programs solved through Bose-Einstein free-energy
//! regularization.
//!
//! The regularized dual objective `f_T(μ) = μ·q + T Σ_j ln(1 − e^{−λ_j/T})`
//! over the spectrum of the slack operator `K_μ = H − Σ μ_i Q_i` is smooth
//! and concave; its maximizer yields the thermal operator
//! `X_T(μ) = (e^{K_μ/T} − I)^{-1}` whose energy approximates the SDP optimum.
//!
//! Modules:
//! - [`linalg`]: dense Hermitian matrices and spectral functions.
//! - [`sdp`]: instances, dual slack diagnostics, reference oracle.
//! - [`thermal`]: entropy, thermal operators, objective derivatives, bounds.
//! - [`optimize`]: deterministic and stochastic dual ascent.
//! - [`qsim`]: simulated Monte Carlo estimators for thermal traces.
//! - [`divergence`]: the Bose-Einstein relative entropy.

// Negated comparisons deliberately reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod divergence;
pub mod error;
pub mod linalg;
pub mod optimize;
pub mod qsim;
pub mod random;
pub mod sdp;
pub mod thermal;

pub use error::{Error, Result};
pub use linalg::{EigenSystem, HermitianMatrix};
pub use sdp::{DualPoint, SdpInstance};
