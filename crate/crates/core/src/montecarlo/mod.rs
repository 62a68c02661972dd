//! Monte Carlo simulation of random matrix products.
//!
//! A chain carries a `d × k` orthonormal frame through the product. Each step
//! multiplies the frame by a fresh factor and re-orthonormalizes it with a
//! QR factorization whose `R` has a positive real diagonal; `ln r_ii` is the
//! step's log-volume increment for direction `i`. The running sum over
//! `i ≤ k` telescopes to `ln det(B_0† P_N† P_N B_0)^{1/2}`, so nothing ever
//! overflows however long the product is.

mod ratio;
mod stability;

pub use ratio::{spectral_ratio, RatioEstimate};
pub use stability::{stability_exponents, stability_exponents_capped, StabilityExponent, DEFAULT_STEP_CAP};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{EnsembleSpec, FactorSampler};
use crate::error::{Error, Result};
use crate::field::{Field, Mat};
use crate::with_field;

/// Generator for chain `chain` of a run with master seed `master_seed`.
///
/// ChaCha8 keyed by the master seed, on stream number `chain`: chains get
/// independent, non-overlapping streams and the mapping does not depend on
/// how chains are scheduled onto threads.
pub fn chain_rng(master_seed: u64, chain: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(chain);
    rng
}

/// Where a chain's randomness came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainSeed {
    pub master: u64,
    pub chain: u64,
}

/// Raw per-step data of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainResult {
    pub k_max: usize,
    pub steps: usize,
    /// Row-major `steps × k_max` table of `ln r_ii(j)`.
    pub increments: Vec<f64>,
    /// Stratum of each step (rectangular shape index, otherwise 0).
    pub strata: Vec<u32>,
    pub seed: Option<ChainSeed>,
    pub redraw_count: u64,
}

impl ChainResult {
    pub fn step(&self, j: usize) -> &[f64] {
        &self.increments[j * self.k_max..(j + 1) * self.k_max]
    }

    /// Mean increment of each direction.
    pub fn means(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.k_max];
        for j in 0..self.steps {
            for (s, x) in sums.iter_mut().zip(self.step(j)) {
                *s += x;
            }
        }
        sums.iter().map(|s| s / self.steps as f64).collect()
    }

    /// `Σ_j Σ_{i≤k} ξ_j^{(i)}` for `k = 1..=k_max`: the log-volume of the
    /// first `k` propagated directions.
    pub fn log_volumes(&self) -> Vec<f64> {
        let mut totals = vec![0.0; self.k_max];
        for j in 0..self.steps {
            let mut acc = 0.0;
            for (t, x) in totals.iter_mut().zip(self.step(j)) {
                acc += x;
                *t += acc;
            }
        }
        totals
    }
}

fn check_chain_args(spec: &EnsembleSpec, k_max: usize, steps: usize) -> Result<()> {
    spec.validate()?;
    if k_max == 0 || k_max > spec.dim() {
        return Err(Error::InvalidSpec(format!(
            "k_max = {k_max} must lie in 1..={}",
            spec.dim()
        )));
    }
    if steps == 0 {
        return Err(Error::InvalidSpec("a chain needs at least one step".into()));
    }
    Ok(())
}

fn run_chain_in<T: Field, R: Rng + ?Sized>(
    spec: &EnsembleSpec,
    k_max: usize,
    steps: usize,
    rng: &mut R,
) -> Result<ChainResult> {
    let mut sampler = FactorSampler::<T>::new(spec)?;
    let mut frame = Mat::<T>::eye(spec.dim(), k_max);
    let mut increments = Vec::with_capacity(steps * k_max);
    let mut strata = Vec::with_capacity(steps);
    let mut redraw_count = 0;
    for step in 0..steps {
        let factor = sampler.next_factor(rng);
        redraw_count += factor.redraws;
        let qr = factor
            .matrix
            .matmul(&frame)
            .qr()
            .ok_or(Error::NonFinite { step, index: 0 })?;
        for (index, r) in qr.diag.iter().enumerate() {
            let xi = r.ln();
            if !xi.is_finite() {
                return Err(Error::NonFinite { step, index });
            }
            increments.push(xi);
        }
        strata.push(factor.stratum as u32);
        frame = qr.q;
    }
    Ok(ChainResult {
        k_max,
        steps,
        increments,
        strata,
        seed: None,
        redraw_count,
    })
}

/// Propagate `k_max` directions through `steps` factors drawn from `spec`.
pub fn run_chain<R: Rng + ?Sized>(spec: &EnsembleSpec, k_max: usize, steps: usize, rng: &mut R) -> Result<ChainResult> {
    check_chain_args(spec, k_max, steps)?;
    with_field!(spec.beta(), T => run_chain_in::<T, R>(spec, k_max, steps, rng))
}

/// [`run_chain`] on the generator [`chain_rng`]`(master_seed, chain)`.
pub fn run_seeded_chain(
    spec: &EnsembleSpec,
    k_max: usize,
    steps: usize,
    master_seed: u64,
    chain: u64,
) -> Result<ChainResult> {
    let mut rng = chain_rng(master_seed, chain);
    let mut result = run_chain(spec, k_max, steps, &mut rng)?;
    result.seed = Some(ChainSeed {
        master: master_seed,
        chain,
    });
    Ok(result)
}

/// Pooled Monte Carlo estimates across chains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mu_hat: Vec<f64>,
    pub se_mu: Vec<f64>,
    /// `N σ̂_i²`: within-stratum sample variance of the per-step increments.
    pub n_sigma2_hat: Vec<f64>,
    /// `μ̂_1 + … + μ̂_k`.
    pub partial_sum_mu: Vec<f64>,
    /// `N(σ̂_1² + … + σ̂_k²)` measured on the summed increments, so the
    /// cross-covariances the per-index variances ignore are included.
    pub partial_sum_n_sigma2: Vec<f64>,
    /// Mean increment of each chain, chain-major.
    pub chain_mu: Vec<Vec<f64>>,
    pub steps: usize,
    pub chains: usize,
    pub redraws: u64,
}

/// Mean and within-stratum variance (divisor `count − strata`) of a stream
/// of `(stratum, value)` pairs.
#[derive(Debug, Default, Clone)]
struct StratifiedMoments {
    count: Vec<u64>,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl StratifiedMoments {
    fn slot(&mut self, stratum: usize) -> usize {
        if stratum >= self.count.len() {
            self.count.resize(stratum + 1, 0);
            self.sum.resize(stratum + 1, 0.0);
            self.sum_sq.resize(stratum + 1, 0.0);
        }
        stratum
    }

    fn total(&self) -> u64 {
        self.count.iter().sum()
    }

    fn mean(&self) -> f64 {
        self.sum.iter().sum::<f64>() / self.total() as f64
    }

    fn stratum_means(&self) -> Vec<f64> {
        self.count
            .iter()
            .zip(&self.sum)
            .map(|(&c, &s)| if c > 0 { s / c as f64 } else { 0.0 })
            .collect()
    }

    fn variance(&self) -> f64 {
        let occupied = self.count.iter().filter(|&&c| c > 0).count() as u64;
        let dof = self.total().saturating_sub(occupied);
        if dof == 0 {
            return 0.0;
        }
        self.sum_sq.iter().sum::<f64>() / dof as f64
    }
}

// Two passes: stratum means first, then centred squares.
fn stratified_moments(
    chains: &[ChainResult],
    value: impl Fn(&ChainResult, usize) -> f64 + Copy,
) -> StratifiedMoments {
    let mut m = StratifiedMoments::default();
    for c in chains {
        for j in 0..c.steps {
            let s = m.slot(c.strata[j] as usize);
            m.count[s] += 1;
            m.sum[s] += value(c, j);
        }
    }
    let means = m.stratum_means();
    for c in chains {
        for j in 0..c.steps {
            let s = c.strata[j] as usize;
            m.sum_sq[s] += (value(c, j) - means[s]).powi(2);
        }
    }
    m
}

/// Aggregate finished chains into an [`McEstimate`].
pub fn pool_chains(chains: &[ChainResult]) -> Result<McEstimate> {
    let first = chains
        .first()
        .ok_or_else(|| Error::InvalidSpec("no chains to pool".into()))?;
    let k_max = first.k_max;
    let steps = first.steps;
    if chains.iter().any(|c| c.k_max != k_max || c.steps != steps) {
        return Err(Error::InvalidSpec("chains have different shapes".into()));
    }
    let total = (steps * chains.len()) as f64;

    let mut mu_hat = Vec::with_capacity(k_max);
    let mut se_mu = Vec::with_capacity(k_max);
    let mut n_sigma2_hat = Vec::with_capacity(k_max);
    let mut partial_sum_n_sigma2 = Vec::with_capacity(k_max);
    for i in 0..k_max {
        let single = stratified_moments(chains, |c, j| c.increments[j * k_max + i]);
        let var = single.variance();
        mu_hat.push(single.mean());
        n_sigma2_hat.push(var);
        se_mu.push((var / total).sqrt().max(f64::EPSILON));

        let summed = stratified_moments(chains, |c, j| c.step(j)[..=i].iter().sum());
        partial_sum_n_sigma2.push(summed.variance());
    }
    let partial_sum_mu = mu_hat
        .iter()
        .scan(0.0, |acc, &m| {
            *acc += m;
            Some(*acc)
        })
        .collect();

    Ok(McEstimate {
        mu_hat,
        se_mu,
        n_sigma2_hat,
        partial_sum_mu,
        partial_sum_n_sigma2,
        chain_mu: chains.iter().map(ChainResult::means).collect(),
        steps,
        chains: chains.len(),
        redraws: chains.iter().map(|c| c.redraw_count).sum(),
    })
}

/// Run `chains` independent chains of `steps` steps and pool them.
///
/// Chains run on the current rayon pool; results are reduced in chain order,
/// so the estimate is bit-identical for any thread count.
pub fn estimate(
    spec: &EnsembleSpec,
    k_max: usize,
    steps: usize,
    chains: usize,
    master_seed: u64,
) -> Result<McEstimate> {
    if chains == 0 {
        return Err(Error::InvalidSpec("at least one chain is required".into()));
    }
    check_chain_args(spec, k_max, steps)?;
    let results = (0..chains as u64)
        .into_par_iter()
        .map(|c| run_seeded_chain(spec, k_max, steps, master_seed, c))
        .collect::<Result<Vec<_>>>()?;
    pool_chains(&results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Beta;
    use crate::sigma::SigmaSpec;
    use crate::specfun::EULER_GAMMA;
    use crate::theory::{truncated_unitary_spectrum, RectangularSpec};
    use num_complex::Complex64;

    #[test]
    fn unitary_factors_preserve_volume() {
        for beta in Beta::ALL {
            let spec = EnsembleSpec::TruncatedUnitary { beta, d: 2, n: 0 };
            let chain = run_chain(&spec, 2, 500, &mut chain_rng(1, 0)).unwrap();
            assert!(chain.increments.iter().all(|x| x.abs() <= 1e-12));
        }
    }

    #[test]
    fn argument_checks() {
        let spec = EnsembleSpec::StandardGaussian { beta: Beta::Real, d: 2 };
        assert!(run_chain(&spec, 0, 10, &mut chain_rng(0, 0)).is_err());
        assert!(run_chain(&spec, 3, 10, &mut chain_rng(0, 0)).is_err());
        assert!(run_chain(&spec, 1, 0, &mut chain_rng(0, 0)).is_err());
        assert!(estimate(&spec, 1, 10, 0, 0).is_err());
    }

    #[test]
    fn scalar_complex_gaussian_mean() {
        let spec = EnsembleSpec::StandardGaussian { beta: Beta::Complex, d: 1 };
        let est = estimate(&spec, 1, 1_000_000, 1, 2).unwrap();
        assert!((est.mu_hat[0] + EULER_GAMMA / 2.0).abs() < 3.0 * est.se_mu[0], "{est:?}");
    }

    #[test]
    fn diag_sigma_variance() {
        let spec = EnsembleSpec::GeneralSigmaGaussian {
            beta: Beta::Complex,
            sigma_inv_eigenvalues: SigmaSpec::new(vec![1.0, 0.25]).unwrap(),
        };
        let est = estimate(&spec, 1, 1_000_000, 1, 3).unwrap();
        assert!((est.n_sigma2_hat[0] - 0.197_699).abs() < 0.01, "{}", est.n_sigma2_hat[0]);
    }

    #[test]
    fn truncated_unitary_run() {
        let spec = EnsembleSpec::TruncatedUnitary { beta: Beta::Complex, d: 2, n: 2 };
        let theory = truncated_unitary_spectrum(Beta::Complex, 2, 2).unwrap();
        let est = estimate(&spec, 2, 100_000, 1, 4).unwrap();
        assert!((est.mu_hat[0] - theory.mu[0]).abs() < 0.01);
        assert!((est.partial_sum_mu[1] - (-7.0 / 6.0)).abs() < 0.02);
        assert!((est.n_sigma2_hat[0] - 13.0 / 144.0).abs() < 0.02);
        assert!((est.partial_sum_n_sigma2[1] - 29.0 / 72.0).abs() < 0.05);
    }

    #[test]
    fn partial_sums_are_running_sums() {
        let spec = EnsembleSpec::StandardGaussian { beta: Beta::Real, d: 3 };
        let est = estimate(&spec, 3, 1000, 2, 5).unwrap();
        let mut acc = 0.0;
        for k in 0..3 {
            acc += est.mu_hat[k];
            assert_eq!(est.partial_sum_mu[k], acc);
        }
        assert!(est.se_mu.iter().all(|&s| s > 0.0));
        assert_eq!(est.chain_mu.len(), 2);
    }

    #[test]
    fn estimate_is_deterministic_across_thread_counts() {
        let spec = EnsembleSpec::GaussianInverseMixture {
            beta: Beta::Complex,
            d: 2,
            alpha_plus: 0.5,
        };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| estimate(&spec, 2, 2000, 5, 99).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    fn log_volume_direct(spec: &EnsembleSpec, k: usize, steps: usize, seed: u64) -> Vec<f64> {
        // Replay the factor stream, form P_N explicitly, and take
        // ln|det R| from a Householder QR of its first k columns.
        let mut rng = chain_rng(seed, 0);
        let d = spec.dim();
        let mut p = Mat::<Complex64>::identity(match spec.beta() {
            Beta::Quaternion => 2 * d,
            _ => d,
        });
        crate::with_field!(spec.beta(), T => {
            let mut sampler = FactorSampler::<T>::new(spec).unwrap();
            for _ in 0..steps {
                p = sampler.next_factor(&mut rng).matrix.to_complex().matmul(&p);
            }
        });
        let s = if spec.beta() == Beta::Quaternion { 2 } else { 1 };
        (1..=k)
            .map(|kk| {
                let b = p.block(p.rows(), kk * s);
                let r = b.to_nalgebra().qr().r();
                (0..r.nrows()).map(|i| r[(i, i)].norm().ln()).sum::<f64>() / s as f64
            })
            .collect()
    }

    #[test]
    fn log_volumes_telescope() {
        let specs = [
            EnsembleSpec::StandardGaussian { beta: Beta::Real, d: 3 },
            EnsembleSpec::StandardGaussian { beta: Beta::Complex, d: 2 },
            EnsembleSpec::InverseGaussian { beta: Beta::Quaternion, d: 2 },
            EnsembleSpec::TruncatedUnitary { beta: Beta::Real, d: 3, n: 1 },
        ];
        for spec in &specs {
            let k = spec.dim();
            // P_N is formed explicitly, so keep N small enough that its
            // condition number stays far from 1/ε.
            for steps in [1, 3, 6] {
                let chain = run_chain(spec, k, steps, &mut chain_rng(6, 0)).unwrap();
                let direct = log_volume_direct(spec, k, steps, 6);
                for (a, b) in chain.log_volumes().iter().zip(&direct) {
                    assert!((a - b).abs() <= 1e-8, "{spec:?} N={steps}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn rectangular_strata_remove_schedule_variance() {
        let spec = EnsembleSpec::RectangularGaussian {
            beta: Beta::Complex,
            d: 1,
            shapes: RectangularSpec::new([(0, 0.5), (1, 0.5)]).unwrap(),
        };
        let chain = run_chain(&spec, 1, 10, &mut chain_rng(7, 0)).unwrap();
        assert_eq!(chain.strata, vec![0, 1, 0, 1, 0, 1, 0, 1, 0, 1]);
    }
}
