//! Closed-form Lyapunov spectra and leading-order variances.
//!
//! Every spectrum is a sum of digamma (means) and trigamma (variances) terms
//! evaluated at half-integer multiples of `β`. Index `i` below is 1-based;
//! storage is 0-based with the largest exponent first.

use serde::{Deserialize, Serialize};

use crate::ensembles::EnsembleSpec;
use crate::error::{Error, Result};
use crate::field::Beta;
use crate::sigma::{kargin_first, sigma_spectrum_complex, sigma_variance1_complex};
use crate::specfun::{digamma, trigamma};

const PROPORTION_TOL: f64 = 1e-12;

/// Exact Lyapunov exponents `μ_1 ≥ … ≥ μ_d` and the `N`-scaled variances
/// `N·σ_i²` of the finite-`N` exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheorySpectrum {
    pub beta: Beta,
    pub d: usize,
    pub mu: Vec<f64>,
    pub n_sigma2: Vec<f64>,
    /// Set when the formula is evaluated outside the regime in which it has
    /// been proved.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl TheorySpectrum {
    /// `μ_1 + … + μ_k` for `k = 1..=d`.
    pub fn partial_sums_mu(&self) -> Vec<f64> {
        running_sum(&self.mu)
    }

    /// `N(σ_1² + … + σ_k²)` for `k = 1..=d`.
    pub fn partial_sums_n_sigma2(&self) -> Vec<f64> {
        running_sum(&self.n_sigma2)
    }
}

fn running_sum(xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .scan(0.0, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

/// Offsets `γ_s` of the rectangular factor shapes `(d + γ_s) × …` and the
/// proportions `α_s` in which they occur.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectangularSpec {
    pub shapes: Vec<RectangularShape>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectangularShape {
    pub offset: u32,
    pub proportion: f64,
}

impl RectangularSpec {
    pub fn new(shapes: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        let spec = Self {
            shapes: shapes
                .into_iter()
                .map(|(offset, proportion)| RectangularShape { offset, proportion })
                .collect(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.shapes.is_empty() {
            return Err(Error::InvalidSpec("rectangular spec has no shapes".into()));
        }
        for (idx, s) in self.shapes.iter().enumerate() {
            if !s.proportion.is_finite() || s.proportion <= 0.0 {
                return Err(Error::InvalidSpec(format!(
                    "proportion {} for offset {} must be positive",
                    s.proportion, s.offset
                )));
            }
            if self.shapes[..idx].iter().any(|t| t.offset == s.offset) {
                return Err(Error::InvalidSpec(format!("offset {} listed twice", s.offset)));
            }
        }
        let total: f64 = self.shapes.iter().map(|s| s.proportion).sum();
        if (total - 1.0).abs() > PROPORTION_TOL {
            return Err(Error::InvalidSpec(format!("proportions sum to {total}, not 1")));
        }
        Ok(())
    }
}

/// Proportions of Gaussian (`α₊`) and inverse Gaussian (`α₋`) factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub alpha_plus: f64,
    pub alpha_minus: f64,
}

impl MixtureSpec {
    pub fn new(alpha_plus: f64) -> Result<Self> {
        let spec = Self {
            alpha_plus,
            alpha_minus: 1.0 - alpha_plus,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let in_unit = |a: f64| (0.0..=1.0).contains(&a);
        if !in_unit(self.alpha_plus) || !in_unit(self.alpha_minus) {
            return Err(Error::InvalidSpec("mixture proportions must lie in [0, 1]".into()));
        }
        if (self.alpha_plus + self.alpha_minus - 1.0).abs() > PROPORTION_TOL {
            return Err(Error::InvalidSpec(format!(
                "mixture proportions sum to {}, not 1",
                self.alpha_plus + self.alpha_minus
            )));
        }
        Ok(())
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        Err(Error::InvalidSpec("dimension d must be at least 1".into()))
    } else {
        Ok(())
    }
}

// Shared kernel: a weighted average of digamma/trigamma at β(γ + d - i + 1)/2.
fn weighted_gaussian(beta: Beta, d: usize, weights: &[(u32, f64)]) -> Result<TheorySpectrum> {
    check_dim(d)?;
    let b = beta.as_f64();
    let shift = 0.5 * (2.0 / b).ln();
    let mut mu = Vec::with_capacity(d);
    let mut n_sigma2 = Vec::with_capacity(d);
    for i in 1..=d {
        let mut psi = 0.0;
        let mut psi1 = 0.0;
        for &(offset, alpha) in weights {
            let arg = b * (offset as usize + d - i + 1) as f64 / 2.0;
            psi += alpha * digamma(arg)?;
            psi1 += alpha * trigamma(arg)?;
        }
        mu.push(shift + 0.5 * psi);
        n_sigma2.push(0.25 * psi1);
    }
    Ok(TheorySpectrum {
        beta,
        d,
        mu,
        n_sigma2,
        warning: None,
    })
}

/// Square standard Gaussian factors:
/// `μ_i = ½ log(2/β) + ½ Ψ(β(d−i+1)/2)`, `Nσ_i² = ¼ Ψ′(β(d−i+1)/2)`.
pub fn gaussian_spectrum(beta: Beta, d: usize) -> Result<TheorySpectrum> {
    weighted_gaussian(beta, d, &[(0, 1.0)])
}

/// Gaussian factors of shapes `(d + γ_s) × …` occurring in proportions `α_s`.
pub fn rectangular_spectrum(beta: Beta, d: usize, spec: &RectangularSpec) -> Result<TheorySpectrum> {
    spec.validate()?;
    let weights: Vec<(u32, f64)> = spec.shapes.iter().map(|s| (s.offset, s.proportion)).collect();
    weighted_gaussian(beta, d, &weights)
}

/// Products mixing Gaussian and inverse Gaussian factors.
///
/// Inverting a factor reverses and negates the spectrum, so
/// `μ_i = α₊ μ⁺_i − α₋ μ⁺_{d+1−i}` and the variances mix the same way
/// without the sign.
pub fn mixture_spectrum(beta: Beta, d: usize, mix: &MixtureSpec) -> Result<TheorySpectrum> {
    mix.validate()?;
    let plus = gaussian_spectrum(beta, d)?;
    let (ap, am) = (mix.alpha_plus, mix.alpha_minus);
    let mu = (0..d).map(|i| ap * plus.mu[i] - am * plus.mu[d - 1 - i]).collect();
    let n_sigma2 = (0..d)
        .map(|i| ap * plus.n_sigma2[i] + am * plus.n_sigma2[d - 1 - i])
        .collect();
    Ok(TheorySpectrum {
        beta,
        d,
        mu,
        n_sigma2,
        warning: None,
    })
}

/// Factors that are the top-left `d × d` block of a Haar unitary matrix of
/// size `d + n`.
///
/// The closed form is proved for `n ≥ d`; for `0 < n < d` it is still
/// evaluated and the result carries a warning.
pub fn truncated_unitary_spectrum(beta: Beta, d: usize, n: usize) -> Result<TheorySpectrum> {
    check_dim(d)?;
    let h = beta.as_f64() / 2.0;
    let mut mu = Vec::with_capacity(d);
    let mut n_sigma2 = Vec::with_capacity(d);
    for i in 1..=d {
        let small = h * (d - i + 1) as f64;
        let large = h * (n + d - i + 1) as f64;
        mu.push(0.5 * (digamma(small)? - digamma(large)?));
        n_sigma2.push(0.25 * (trigamma(small)? - trigamma(large)?));
    }
    let warning = (n > 0 && n < d).then(|| {
        format!("truncation n = {n} < d = {d}: closed form used beyond the proved regime n >= d")
    });
    Ok(TheorySpectrum {
        beta,
        d,
        mu,
        n_sigma2,
        warning,
    })
}

/// Theory for any ensemble.
///
/// For a general covariance only part of the table is known in closed
/// form: with `β = 2` every `μ_i` but only `Nσ_1²`, otherwise just the
/// first exponent and its variance. `mu` and `n_sigma2` are then shorter
/// than `d`.
pub fn theory_spectrum(spec: &EnsembleSpec) -> Result<TheorySpectrum> {
    spec.validate()?;
    match spec {
        EnsembleSpec::StandardGaussian { beta, d } => gaussian_spectrum(*beta, *d),
        EnsembleSpec::InverseGaussian { beta, d } => mixture_spectrum(*beta, *d, &MixtureSpec::new(0.0)?),
        EnsembleSpec::GaussianInverseMixture { beta, d, alpha_plus } => {
            mixture_spectrum(*beta, *d, &MixtureSpec::new(*alpha_plus)?)
        }
        EnsembleSpec::RectangularGaussian { beta, d, shapes } => rectangular_spectrum(*beta, *d, shapes),
        EnsembleSpec::TruncatedUnitary { beta, d, n } => truncated_unitary_spectrum(*beta, *d, *n),
        EnsembleSpec::GeneralSigmaGaussian {
            beta,
            sigma_inv_eigenvalues: y,
        } => {
            let (mu, n_sigma2) = if *beta == Beta::Complex {
                (sigma_spectrum_complex(y)?, vec![sigma_variance1_complex(y)?])
            } else {
                let (mu1, var1) = kargin_first(*beta, y)?;
                (vec![mu1], vec![var1])
            };
            Ok(TheorySpectrum {
                beta: *beta,
                d: y.dim(),
                mu,
                n_sigma2,
                warning: None,
            })
        }
    }
}
