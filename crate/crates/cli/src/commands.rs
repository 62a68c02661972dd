use std::f64::consts::SQRT_2;
use std::time::Instant;

use anyhow::{bail, Context};
use lyapunov_core::{chain_rng, estimate, spectral_ratio, theory_spectrum, Beta, EnsembleSpec, McEstimate, TheorySpectrum};
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, Threads};
use crate::report::{round15, ComparisonRow, Meta, RatioRow, Report, SimulationRow, TheoryRow};

/// |z| above this marks a comparison as failed.
pub const Z_GATE: f64 = 5.0;

pub fn with_threads<T: Send>(threads: Threads, f: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Threads::Count(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().context("building thread pool")?;
    Ok(pool.install(f))
}

fn elapsed_ms(start: Instant) -> u64 {
    start.elapsed().as_millis() as u64
}

fn theory_for(ensemble: &EnsembleSpec) -> anyhow::Result<TheorySpectrum> {
    theory_spectrum(ensemble).with_context(|| format!("no closed form for {ensemble:?}"))
}

pub fn theory(config: &RunConfig) -> anyhow::Result<Report<RunConfig, TheoryRow>> {
    let start = Instant::now();
    let t = theory_for(&config.ensemble)?;
    let rows = t
        .mu
        .iter()
        .take(config.k_max())
        .enumerate()
        .map(|(i, &mu)| TheoryRow {
            i: i + 1,
            mu: round15(mu),
            n_sigma2: t.n_sigma2.get(i).map(|&v| round15(v)),
        })
        .collect();
    let mut meta = Meta::new(config.seed, elapsed_ms(start), 0);
    meta.warning = t.warning;
    Ok(Report {
        config: config.clone(),
        rows,
        meta,
    })
}

fn run_estimate(config: &RunConfig) -> anyhow::Result<McEstimate> {
    let (spec, k, n, chains, seed) = (&config.ensemble, config.k_max(), config.steps, config.chains, config.seed);
    Ok(with_threads(config.threads, || estimate(spec, k, n, chains, seed))??)
}

pub fn simulate(config: &RunConfig) -> anyhow::Result<Report<RunConfig, SimulationRow>> {
    let start = Instant::now();
    let est = run_estimate(config)?;
    let rows = (0..est.mu_hat.len())
        .map(|i| SimulationRow {
            i: i + 1,
            mu_mc: round15(est.mu_hat[i]),
            se_mu: round15(est.se_mu[i]),
            n_sigma2_mc: round15(est.n_sigma2_hat[i]),
            partial_sum_mu: round15(est.partial_sum_mu[i]),
            partial_sum_n_sigma2: round15(est.partial_sum_n_sigma2[i]),
        })
        .collect();
    Ok(Report {
        config: config.clone(),
        rows,
        meta: Meta::new(config.seed, elapsed_ms(start), est.redraws),
    })
}

/// Join theory and simulation. `theory_ensemble` replaces the ensemble the
/// theory is taken from, which is only useful to check that the gate trips.
pub fn compare(
    config: &RunConfig,
    theory_ensemble: Option<&EnsembleSpec>,
) -> anyhow::Result<Report<RunConfig, ComparisonRow>> {
    let start = Instant::now();
    let t = theory_for(theory_ensemble.unwrap_or(&config.ensemble))?;
    let est = run_estimate(config)?;
    let rows = (0..est.mu_hat.len().min(t.mu.len()))
        .map(|i| {
            let z = (est.mu_hat[i] - t.mu[i]) / est.se_mu[i];
            ComparisonRow {
                i: i + 1,
                mu_theory: round15(t.mu[i]),
                n_sigma2_theory: t.n_sigma2.get(i).map(|&v| round15(v)),
                mu_mc: round15(est.mu_hat[i]),
                se_mu: round15(est.se_mu[i]),
                n_sigma2_mc: round15(est.n_sigma2_hat[i]),
                z: round15(z),
            }
        })
        .collect();
    let mut meta = Meta::new(config.seed, elapsed_ms(start), est.redraws);
    meta.warning = t.warning;
    Ok(Report {
        config: config.clone(),
        rows,
        meta,
    })
}

pub fn comparison_passes(rows: &[ComparisonRow]) -> bool {
    rows.iter().all(|r| r.z.abs() <= Z_GATE)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioConfig {
    pub beta: Beta,
    pub d: usize,
    pub samples: usize,
    pub seed: u64,
}

pub fn ratio(config: &RatioConfig, threads: Threads) -> anyhow::Result<Report<RatioConfig, RatioRow>> {
    if config.d < 2 {
        bail!("ratio needs d >= 2, got {}", config.d);
    }
    let start = Instant::now();
    let est = with_threads(threads, || {
        spectral_ratio(config.beta, config.d, config.samples, &mut chain_rng(config.seed, 0))
    })??;
    let min = est.ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = est.ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(Report {
        config: config.clone(),
        rows: vec![RatioRow {
            beta: config.beta.value(),
            d: config.d,
            samples: config.samples,
            mean_ratio: round15(est.mean),
            min_ratio: round15(min),
            max_ratio: round15(max),
            sqrt2: round15(SQRT_2),
        }],
        meta: Meta::new(config.seed, elapsed_ms(start), 0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use lyapunov_core::specfun::EULER_GAMMA;
    use lyapunov_core::SigmaSpec;

    fn config(ensemble: EnsembleSpec) -> RunConfig {
        RunConfig::resolve(Some(RunConfig::new(ensemble)), Default::default()).unwrap()
    }

    #[test]
    fn truncated_unitary_theory_rows() {
        let r = theory(&config(EnsembleSpec::TruncatedUnitary {
            beta: Beta::Complex,
            d: 2,
            n: 2,
        }))
        .unwrap();
        assert_eq!(
            r.rows,
            vec![
                TheoryRow {
                    i: 1,
                    mu: -0.416666666666667,
                    n_sigma2: Some(0.0902777777777778)
                },
                TheoryRow {
                    i: 2,
                    mu: -0.75,
                    n_sigma2: Some(0.3125)
                },
            ]
        );
    }

    #[test]
    fn scalar_complex_theory_row() {
        let r = theory(&config(EnsembleSpec::StandardGaussian {
            beta: Beta::Complex,
            d: 1,
        }))
        .unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.rows[0].mu, round15(-EULER_GAMMA / 2.0));
        assert_eq!(r.rows[0].n_sigma2, Some(round15(std::f64::consts::PI.powi(2) / 24.0)));
    }

    #[test]
    fn general_sigma_real_has_one_row() {
        let spec = EnsembleSpec::GeneralSigmaGaussian {
            beta: Beta::Real,
            sigma_inv_eigenvalues: SigmaSpec::new(vec![1.0, 0.25]).unwrap(),
        };
        let r = theory(&config(spec)).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert!(r.rows[0].n_sigma2.is_some());
    }

    #[test]
    fn unitary_simulation_is_exactly_zero() {
        let mut c = config(EnsembleSpec::TruncatedUnitary {
            beta: Beta::Quaternion,
            d: 3,
            n: 0,
        });
        c.steps = 500;
        let r = simulate(&c).unwrap();
        assert!(r.rows.iter().all(|row| row.mu_mc.abs() <= 1e-12));
        let cmp = compare(&c, None).unwrap();
        assert!(cmp.rows.iter().all(|row| row.z.is_finite()));
    }

    #[test]
    fn scalar_gaussian_simulation_within_four_se() {
        let mut c = config(EnsembleSpec::StandardGaussian {
            beta: Beta::Complex,
            d: 1,
        });
        c.steps = 1_000_000;
        c.chains = 1;
        let row = &simulate(&c).unwrap().rows[0];
        assert!((row.mu_mc + EULER_GAMMA / 2.0).abs() <= 4.0 * row.se_mu);
    }

    #[test]
    fn mismatched_theory_trips_the_gate() {
        let mut c = config(EnsembleSpec::StandardGaussian {
            beta: Beta::Complex,
            d: 2,
        });
        c.steps = 20_000;
        assert!(comparison_passes(&compare(&c, None).unwrap().rows));
        let wrong = EnsembleSpec::StandardGaussian {
            beta: Beta::Complex,
            d: 3,
        };
        assert!(!comparison_passes(&compare(&c, Some(&wrong)).unwrap().rows));
    }

    #[test]
    fn small_ratio_is_at_least_one() {
        let c = RatioConfig {
            beta: Beta::Complex,
            d: 2,
            samples: 1000,
            seed: 5,
        };
        let r = ratio(&c, Threads::Auto).unwrap();
        assert!(r.rows[0].min_ratio >= 1.0);
        assert!(ratio(&RatioConfig { d: 1, ..c }, Threads::Auto).is_err());
    }
}
