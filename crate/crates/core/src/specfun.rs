//! Digamma, trigamma and harmonic numbers.
//!
//! Both polygamma functions shift the argument upward with the recurrence
//! until it is at least [`ASYMPTOTIC_THRESHOLD`], then sum the Bernoulli
//! asymptotic series. Eight correction terms at `x >= 10` leave a
//! truncation error below `1e-15`.

use crate::error::{Error, Result};

/// Euler's constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_43;

/// `Ψ′(1) = ζ(2) = π²/6`.
pub const PI_SQUARED_OVER_SIX: f64 = 1.644_934_066_848_226_436_472_415_166_646_025_2;

const ASYMPTOTIC_THRESHOLD: f64 = 10.0;

// B_{2n} / (2n) for n = 1..=7, highest order first.
const DIGAMMA_TAIL: [f64; 7] = [
    1.0 / 12.0,
    -691.0 / 32760.0,
    1.0 / 132.0,
    -1.0 / 240.0,
    1.0 / 252.0,
    -1.0 / 120.0,
    1.0 / 12.0,
];

// B_{2n} for n = 1..=7, highest order first.
const TRIGAMMA_TAIL: [f64; 7] = [
    7.0 / 6.0,
    -691.0 / 2730.0,
    5.0 / 66.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    1.0 / 6.0,
];

fn check_domain(function: &'static str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain { function, x })
    }
}

/// Number of unit shifts needed to move `x` to the asymptotic region.
fn shift_count(x: f64) -> usize {
    if x >= ASYMPTOTIC_THRESHOLD {
        0
    } else {
        (ASYMPTOTIC_THRESHOLD - x).ceil() as usize
    }
}

/// The digamma function `Ψ(x) = Γ′(x)/Γ(x)` for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    check_domain("digamma", x)?;
    let shifts = shift_count(x);
    let z = x + shifts as f64;

    let inv2 = 1.0 / (z * z);
    let series = DIGAMMA_TAIL.iter().fold(0.0, |acc, &c| acc * inv2 + c) * inv2;
    let asymptotic = z.ln() - 0.5 / z - series;

    // Ψ(x) = Ψ(x + n) - Σ_{k<n} 1/(x + k); add the small terms first.
    let correction: f64 = (0..shifts).rev().map(|k| 1.0 / (x + k as f64)).sum();
    Ok(asymptotic - correction)
}

/// The trigamma function `Ψ′(x)` for `x > 0`.
pub fn trigamma(x: f64) -> Result<f64> {
    check_domain("trigamma", x)?;
    let shifts = shift_count(x);
    let z = x + shifts as f64;

    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let series = TRIGAMMA_TAIL.iter().fold(0.0, |acc, &c| acc * inv2 + c) * inv2 * inv;
    let asymptotic = inv + 0.5 * inv2 + series;

    let correction: f64 = (0..shifts)
        .rev()
        .map(|k| {
            let t = x + k as f64;
            1.0 / (t * t)
        })
        .sum();
    Ok(asymptotic + correction)
}

/// Order of a generalized harmonic number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HarmonicOrder {
    First,
    Second,
}

/// `Σ_{s=1}^{m} 1/s` or `Σ_{s=1}^{m} 1/s²`; the empty sum is zero.
pub fn harmonic(m: u64, order: HarmonicOrder) -> f64 {
    (1..=m)
        .rev()
        .map(|s| {
            let s = s as f64;
            match order {
                HarmonicOrder::First => 1.0 / s,
                HarmonicOrder::Second => 1.0 / (s * s),
            }
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LN_2: f64 = std::f64::consts::LN_2;

    #[test]
    fn digamma_special_values() {
        assert!((digamma(1.0).unwrap() + EULER_GAMMA).abs() < 1e-15);
        assert!((digamma(0.5).unwrap() - (-EULER_GAMMA - 2.0 * LN_2)).abs() < 1e-14);
        assert!((digamma(2.0).unwrap() - (1.0 - EULER_GAMMA)).abs() < 1e-15);
        // Ψ(1/2) to 15 digits, independent of the constants above.
        assert!((digamma(0.5).unwrap() + 1.963_510_026_021_423_5).abs() < 1e-14);
    }

    #[test]
    fn trigamma_special_values() {
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((trigamma(1.0).unwrap() - pi2 / 6.0).abs() < 1e-14);
        assert!((trigamma(2.0).unwrap() - (pi2 / 6.0 - 1.0)).abs() < 1e-14);
        assert!((trigamma(0.5).unwrap() - pi2 / 2.0).abs() < 1e-13);
    }

    #[test]
    fn domain_errors() {
        for bad in [0.0, -1.0, -0.5, f64::NAN, f64::INFINITY] {
            assert!(matches!(digamma(bad), Err(Error::Domain { .. })));
            assert!(matches!(trigamma(bad), Err(Error::Domain { .. })));
        }
    }

    #[test]
    fn harmonic_values() {
        assert_eq!(harmonic(0, HarmonicOrder::First), 0.0);
        assert_eq!(harmonic(0, HarmonicOrder::Second), 0.0);
        assert!((harmonic(3, HarmonicOrder::First) - 11.0 / 6.0).abs() < 1e-15);
        assert!((harmonic(2, HarmonicOrder::Second) - 1.25).abs() < 1e-15);
    }

    #[test]
    fn integer_arguments_match_harmonic_numbers() {
        for m in 1..=30u64 {
            let psi = digamma(m as f64).unwrap();
            let expect = -EULER_GAMMA + harmonic(m - 1, HarmonicOrder::First);
            assert!((psi - expect).abs() <= 1e-12, "Ψ({m})");

            let psi1 = trigamma(m as f64).unwrap();
            let expect1 = PI_SQUARED_OVER_SIX - harmonic(m - 1, HarmonicOrder::Second);
            assert!((psi1 - expect1).abs() <= 1e-12, "Ψ′({m})");
        }
    }

    #[test]
    fn continuity_across_the_asymptotic_threshold() {
        let below = digamma(ASYMPTOTIC_THRESHOLD - 1e-12).unwrap();
        let at = digamma(ASYMPTOTIC_THRESHOLD).unwrap();
        assert!((below - at).abs() < 1e-12);
        let below = trigamma(ASYMPTOTIC_THRESHOLD - 1e-12).unwrap();
        let at = trigamma(ASYMPTOTIC_THRESHOLD).unwrap();
        assert!((below - at).abs() < 1e-12);
    }

    // Residuals are measured relative to max(1, |Ψ(x)|): for x near 0 the
    // values themselves are ~1/x and a double cannot hold the residual to
    // better than an ulp of that magnitude.
    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn digamma_recurrence(x in 1e-6f64..=50.0) {
            let lhs = digamma(x + 1.0).unwrap();
            let rhs = digamma(x).unwrap() + 1.0 / x;
            let scale = digamma(x).unwrap().abs().max(1.0);
            prop_assert!((lhs - rhs).abs() <= 1e-13 * scale);
        }

        #[test]
        fn trigamma_recurrence(x in 1e-6f64..=50.0) {
            let lhs = trigamma(x + 1.0).unwrap();
            let rhs = trigamma(x).unwrap() - 1.0 / (x * x);
            let scale = trigamma(x).unwrap().abs().max(1.0);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
        }
    }
}
