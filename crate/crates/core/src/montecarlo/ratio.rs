//! Ratio of the largest singular value to the largest eigenvalue modulus
//! of a single Gaussian matrix.

use nalgebra::{ComplexField, DMatrix, Dyn, Schur};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Beta, Mat};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimate {
    pub mean: f64,
    pub ratios: Vec<f64>,
}

fn largest_singular_value<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    m.singular_values().max()
}

fn largest_eigenvalue_modulus_real(m: DMatrix<f64>) -> Result<f64> {
    let eig = Schur::<f64, Dyn>::try_new(m, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Eigen("real Schur iteration did not converge".into()))?
        .complex_eigenvalues();
    Ok(eig.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

fn largest_eigenvalue_modulus_complex(m: DMatrix<Complex64>) -> Result<f64> {
    let eig = m
        .eigenvalues()
        .ok_or_else(|| Error::Eigen("complex Schur iteration did not converge".into()))?;
    Ok(eig.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// One draw of `ν₁((X†X)^{1/2}) / |z₁(X)|` for a `d × d` Gaussian `X`
/// normalized by `1/√d`.
pub fn ratio_draw<R: Rng + ?Sized>(beta: Beta, d: usize, rng: &mut R) -> Result<f64> {
    let scale = 1.0 / (d as f64).sqrt();
    let (sv, ev) = match beta {
        Beta::Real => {
            let m = Mat::<f64>::sample_gaussian(d, d, rng).to_nalgebra() * scale;
            (largest_singular_value(&m), largest_eigenvalue_modulus_real(m)?)
        }
        Beta::Complex => {
            let m = Mat::<Complex64>::sample_gaussian(d, d, rng).to_nalgebra() * Complex64::from(scale);
            (largest_singular_value(&m), largest_eigenvalue_modulus_complex(m)?)
        }
        Beta::Quaternion => {
            // Singular values and eigenvalues of the complex embedding are
            // those of the quaternion matrix, each repeated.
            let q = Mat::<crate::field::Quaternion>::sample_gaussian(d, d, rng);
            let m = q.to_complex().to_nalgebra() * Complex64::from(scale);
            (largest_singular_value(&m), largest_eigenvalue_modulus_complex(m)?)
        }
    };
    if ev.is_nan() || ev <= 0.0 {
        return Err(Error::Eigen("zero spectral radius".into()));
    }
    Ok(sv / ev)
}

/// Sample mean of the singular-value to eigenvalue ratio over `samples`
/// independent draws.
pub fn spectral_ratio<R: Rng + ?Sized>(beta: Beta, d: usize, samples: usize, rng: &mut R) -> Result<RatioEstimate> {
    if d < 2 {
        return Err(Error::InvalidSpec(format!("spectral ratio needs d >= 2, got {d}")));
    }
    if samples == 0 {
        return Err(Error::InvalidSpec("spectral ratio needs at least one sample".into()));
    }
    let ratios = (0..samples)
        .map(|_| ratio_draw(beta, d, rng))
        .collect::<Result<Vec<_>>>()?;
    let mean = ratios.iter().sum::<f64>() / samples as f64;
    Ok(RatioEstimate { mean, ratios })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::chain_rng;

    #[test]
    fn ratio_is_at_least_one() {
        for beta in Beta::ALL {
            let est = spectral_ratio(beta, 2, 2000, &mut chain_rng(11, 0)).unwrap();
            assert!(est.ratios.iter().all(|&r| r >= 1.0 - 1e-12), "beta {beta}");
        }
    }

    #[test]
    fn normal_matrices_have_ratio_one() {
        // Unitary matrices are normal, so both spectra have radius 1.
        let m = crate::ensembles::haar_unitary::<Complex64, _>(6, &mut chain_rng(12, 0)).to_nalgebra();
        let r = largest_singular_value(&m) / largest_eigenvalue_modulus_complex(m).unwrap();
        assert!((r - 1.0).abs() < 1e-10);
    }

    #[test]
    fn two_by_two_real_by_hand() {
        // [[0, 2], [0, 0]] + I: eigenvalues 1, singular values (√2 ± 1).
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        let sv = largest_singular_value(&m);
        assert!((sv - (2f64.sqrt() + 1.0)).abs() < 1e-12);
        assert!((largest_eigenvalue_modulus_real(m).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_degenerate_arguments() {
        assert!(spectral_ratio(Beta::Real, 1, 5, &mut chain_rng(0, 0)).is_err());
        assert!(spectral_ratio(Beta::Real, 3, 0, &mut chain_rng(0, 0)).is_err());
    }
}
