//! Stability exponents: growth rates of the eigenvalue moduli of `P_N`.
//!
//! Forming `P_N` and diagonalizing it loses every eigenvalue below
//! `ε·|z_1|`, which for `N` in the hundreds is all but the first. Instead we
//! carry the compound matrices `Λ^k P_N = Λ^k A_N ⋯ Λ^k A_1` (Cauchy–Binet),
//! rescaled by their largest entry each step. The dominant eigenvalue of
//! `Λ^k P_N` is `z_1 ⋯ z_k`, which is well conditioned, so
//! `N λ_k = ln|z_1⋯z_k| − ln|z_1⋯z_{k−1}|` for every `k`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ensembles::{EnsembleSpec, FactorSampler};
use crate::error::{Error, Result};
use crate::field::{Beta, Field, Mat};
use crate::with_field;

/// Default cap on the number of steps.
pub const DEFAULT_STEP_CAP: usize = 2000;

/// `z_k = exp(N λ_k + i θ_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityExponent {
    pub lambda: f64,
    pub theta: f64,
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.carry
    }
}

/// All `k`-subsets of `0..m` in lexicographic order.
fn subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..k).collect();
    loop {
        out.push(current.clone());
        let Some(pos) = (0..k).rev().find(|&i| current[i] < m - k + i) else {
            return out;
        };
        current[pos] += 1;
        for i in pos + 1..k {
            current[i] = current[i - 1] + 1;
        }
    }
}

/// Determinant by Gaussian elimination with partial pivoting.
fn det(mut a: Vec<Complex64>, n: usize) -> Complex64 {
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].norm().total_cmp(&a[j * n + col].norm()))
            .expect("non-empty range");
        if a[pivot * n + col] == Complex64::new(0.0, 0.0) {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            for j in 0..n {
                a.swap(pivot * n + j, col * n + j);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for i in col + 1..n {
            let f = a[i * n + col] / p;
            for j in col..n {
                let v = a[col * n + j];
                a[i * n + j] -= f * v;
            }
        }
    }
    det
}

/// `k`-th compound matrix: all `k × k` minors, rows and columns indexed by
/// `subsets`.
fn compound(a: &Mat<Complex64>, index: &[Vec<usize>]) -> Mat<Complex64> {
    let k = index[0].len();
    Mat::from_fn(index.len(), index.len(), |r, c| {
        let minor: Vec<Complex64> = index[r]
            .iter()
            .flat_map(|&i| index[c].iter().map(move |&j| a[(i, j)]))
            .collect();
        det(minor, k)
    })
}

fn dominant_eigenvalue(m: &Mat<Complex64>) -> Result<Complex64> {
    if m.rows() == 1 {
        return Ok(m[(0, 0)]);
    }
    let matrix: DMatrix<Complex64> = m.to_nalgebra();
    let schur = matrix
        .try_schur(f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Eigen("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    (0..t.nrows())
        .map(|i| t[(i, i)])
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .ok_or_else(|| Error::Eigen("empty matrix".into()))
}

fn wrap_angle(x: f64) -> f64 {
    use std::f64::consts::PI;
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y == -PI {
        PI
    } else {
        y
    }
}

fn stability_in<T: Field, R: Rng + ?Sized>(spec: &EnsembleSpec, steps: usize, rng: &mut R) -> Result<Vec<StabilityExponent>> {
    let d = spec.dim();
    let per = if T::BETA == Beta::Quaternion { 2 } else { 1 };
    let m = per * d;
    let index: Vec<Vec<Vec<usize>>> = (1..=m).map(|k| subsets(m, k)).collect();
    let mut products: Vec<Mat<Complex64>> = index.iter().map(|ix| Mat::identity(ix.len())).collect();
    let mut log_scale = vec![CompensatedSum::default(); m];

    let mut sampler = FactorSampler::<T>::new(spec)?;
    for _ in 0..steps {
        let a = sampler.next_factor(rng).matrix.to_complex();
        for k in 0..m {
            let step = if k == 0 { a.clone() } else { compound(&a, &index[k]) };
            let mut p = step.matmul(&products[k]);
            let scale = p.max_abs();
            if !(scale > 0.0 && scale.is_finite()) {
                return Err(Error::Eigen(format!("degenerate product in compound order {}", k + 1)));
            }
            p.scale_all(1.0 / scale);
            log_scale[k].add(scale.ln());
            products[k] = p;
        }
    }

    // log|z_1⋯z_k| and arg(z_1⋯z_k) for k = 0..=m
    let mut log_mod = vec![0.0];
    let mut phase = vec![0.0];
    for k in 0..m {
        let rho = dominant_eigenvalue(&products[k])?;
        log_mod.push(log_scale[k].value() + rho.norm().ln());
        phase.push(rho.arg());
    }

    let n = steps as f64;
    let mut out: Vec<StabilityExponent> = (1..=d)
        .map(|i| {
            // For quaternions the eigenvalues of the embedding come in
            // conjugate pairs; step over whole pairs.
            let (hi, lo) = (per * i, per * (i - 1));
            StabilityExponent {
                lambda: (log_mod[hi] - log_mod[lo]) / (per as f64 * n),
                theta: wrap_angle(phase[lo + 1] - phase[lo]),
            }
        })
        .collect();
    out.sort_by(|a, b| b.lambda.total_cmp(&a.lambda));
    Ok(out)
}

/// Stability exponents `λ_k`, `θ_k` of one product of `steps` factors, with
/// the default step cap.
pub fn stability_exponents<R: Rng + ?Sized>(
    spec: &EnsembleSpec,
    steps: usize,
    rng: &mut R,
) -> Result<Vec<StabilityExponent>> {
    stability_exponents_capped(spec, steps, DEFAULT_STEP_CAP, rng)
}

pub fn stability_exponents_capped<R: Rng + ?Sized>(
    spec: &EnsembleSpec,
    steps: usize,
    cap: usize,
    rng: &mut R,
) -> Result<Vec<StabilityExponent>> {
    spec.validate()?;
    if steps > cap {
        return Err(Error::StepCap { steps, cap });
    }
    if steps == 0 {
        return Err(Error::InvalidSpec("a product needs at least one factor".into()));
    }
    if !spec.is_square() {
        return Err(Error::Unsupported(
            "stability exponents need square factors; rectangular products have no eigenvalues".into(),
        ));
    }
    with_field!(spec.beta(), T => stability_in::<T, R>(spec, steps, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::{chain_rng, run_chain};
    use crate::theory::RectangularSpec;

    #[test]
    fn subsets_enumerate_binomially() {
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(subsets(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(subsets(3, 1), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn compound_of_product_is_product_of_compounds() {
        let mut rng = chain_rng(1, 0);
        let a = Mat::<Complex64>::sample_gaussian(4, 4, &mut rng);
        let b = Mat::<Complex64>::sample_gaussian(4, 4, &mut rng);
        for k in 1..=4 {
            let ix = subsets(4, k);
            let lhs = compound(&a.matmul(&b), &ix);
            let rhs = compound(&a, &ix).matmul(&compound(&b, &ix));
            for i in 0..ix.len() {
                for j in 0..ix.len() {
                    assert!((lhs[(i, j)] - rhs[(i, j)]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn eigenvalues_of_a_single_matrix() {
        let mut rng = chain_rng(2, 0);
        let spec = EnsembleSpec::StandardGaussian { beta: Beta::Complex, d: 3 };
        let mut replay = chain_rng(2, 0);
        let exps = stability_exponents(&spec, 1, &mut rng).unwrap();
        let a = Mat::<Complex64>::sample_gaussian(3, 3, &mut replay).to_nalgebra();
        let mut moduli: Vec<f64> = a.eigenvalues().unwrap().iter().map(|z| z.norm().ln()).collect();
        moduli.sort_by(|x, y| y.total_cmp(x));
        for (e, m) in exps.iter().zip(&moduli) {
            assert!((e.lambda - m).abs() < 1e-10);
        }
    }

    #[test]
    fn unitary_product_has_zero_exponents() {
        for beta in Beta::ALL {
            let spec = EnsembleSpec::TruncatedUnitary { beta, d: 2, n: 0 };
            let exps = stability_exponents(&spec, 300, &mut chain_rng(3, 0)).unwrap();
            assert_eq!(exps.len(), 2);
            assert!(exps.iter().all(|e| e.lambda.abs() <= 1e-10), "{exps:?}");
        }
    }

    #[test]
    fn scalar_case_matches_chain_mean() {
        for beta in Beta::ALL {
            let spec = EnsembleSpec::StandardGaussian { beta, d: 1 };
            let exps = stability_exponents(&spec, 1000, &mut chain_rng(4, 0)).unwrap();
            let chain = run_chain(&spec, 1, 1000, &mut chain_rng(4, 0)).unwrap();
            assert!((exps[0].lambda - chain.means()[0]).abs() <= 1e-12, "beta {beta}");
        }
    }

    #[test]
    fn small_eigenvalues_survive_long_products() {
        // det P_N is known exactly: Σ ln|det A_j|. Check λ_1 + λ_2 against it
        // for a product whose eigenvalue ratio is far below machine epsilon.
        let spec = EnsembleSpec::StandardGaussian { beta: Beta::Real, d: 2 };
        let steps = 500;
        let exps = stability_exponents(&spec, steps, &mut chain_rng(5, 0)).unwrap();
        let mut rng = chain_rng(5, 0);
        let mut sampler = FactorSampler::<f64>::new(&spec).unwrap();
        let log_det: f64 = (0..steps)
            .map(|_| {
                let a = sampler.next_factor(&mut rng).matrix;
                (a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)]).abs().ln()
            })
            .sum();
        assert!(((exps[0].lambda + exps[1].lambda) * steps as f64 - log_det).abs() < 1e-8);
        assert!(exps[0].lambda - exps[1].lambda > 0.1);
    }

    #[test]
    fn guards() {
        let spec = EnsembleSpec::StandardGaussian { beta: Beta::Real, d: 2 };
        assert!(matches!(
            stability_exponents(&spec, 2001, &mut chain_rng(0, 0)),
            Err(Error::StepCap { steps: 2001, cap: 2000 })
        ));
        assert!(stability_exponents_capped(&spec, 2001, 3000, &mut chain_rng(0, 0)).is_ok());
        let rect = EnsembleSpec::RectangularGaussian {
            beta: Beta::Real,
            d: 2,
            shapes: RectangularSpec::new([(0, 0.5), (1, 0.5)]).unwrap(),
        };
        assert!(matches!(
            stability_exponents(&rect, 10, &mut chain_rng(0, 0)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn angle_wrapping() {
        use std::f64::consts::PI;
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(0.25), 0.25);
    }
}
