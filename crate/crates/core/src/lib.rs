//! Finite-N Lyapunov exponents for products of random matrices.
//!
//! The crate has two halves. The closed-form half ([`theory`], [`sigma`])
//! evaluates exact Lyapunov spectra and the leading `1/N` variances for
//! Gaussian, rectangular, inverse-mixture, general-covariance and truncated
//! unitary ensembles. The simulation half ([`ensembles`], [`montecarlo`])
//! samples the factor matrices over the reals, complex numbers or
//! quaternions and multiplies them out with per-step re-orthonormalization,
//! so every closed form can be checked against the product itself.
//!
//! Variances are always reported as `N·σ²`, i.e. with the `1/N` removed.

pub mod ensembles;
pub mod error;
pub mod field;
pub mod montecarlo;
pub mod quadrature;
pub mod sigma;
pub mod specfun;
pub mod theory;

pub use ensembles::{sample_factor, sample_gaussian, sample_haar_unitary, EnsembleSpec, FieldMatrix};
pub use error::{Error, Result};
pub use field::{Beta, Mat, Quaternion};
pub use montecarlo::{
    chain_rng, estimate, run_chain, spectral_ratio, stability_exponents, ChainResult, McEstimate,
    RatioEstimate, StabilityExponent,
};
pub use sigma::{JPair, JMethod, SigmaSpec};
pub use theory::{theory_spectrum, MixtureSpec, RectangularSpec, TheorySpectrum};
