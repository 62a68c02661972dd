//! Gaussian factors with a general covariance, `A = Σ^{1/2} G`.
//!
//! Results depend on `Σ` only through the eigenvalues `y_1, …, y_d` of `Σ⁻¹`.
//! For complex entries the whole spectrum has a determinant closed form and
//! the largest exponent's variance a cofactor closed form; both need
//! distinct `y`. For any `β` the largest exponent and its variance follow
//! from the two real integrals `J_1`, `J_2`, evaluated here by quadrature
//! (and, when `y = 1^d` with `βd/2` integral, by residue sums).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Beta;
use crate::quadrature::integrate_half_line;
use crate::specfun::{digamma, harmonic, HarmonicOrder, EULER_GAMMA, PI_SQUARED_OVER_SIX};

/// Minimum pairwise relative separation of the `y_i` for the determinant
/// formulas.
pub const DISTINCTNESS_TOL: f64 = 1e-8;

/// Absolute accuracy targeted for each of `J_1`, `J_2`.
pub const J_TOLERANCE: f64 = 1e-10;

/// Eigenvalues of `Σ⁻¹`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SigmaSpec {
    y: Vec<f64>,
}

impl SigmaSpec {
    pub fn new(y: Vec<f64>) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::InvalidSpec("Sigma^-1 eigenvalue list is empty".into()));
        }
        if let Some(bad) = y.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidSpec(format!(
                "Sigma^-1 eigenvalue {bad} is not a positive finite number"
            )));
        }
        Ok(Self { y })
    }

    /// `Σ = 𝕀_d`.
    pub fn identity(d: usize) -> Result<Self> {
        Self::new(vec![1.0; d])
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn dim(&self) -> usize {
        self.y.len()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.y.iter().map(|v| v * c).collect())
    }

    /// Error unless every pair is separated by more than [`DISTINCTNESS_TOL`]
    /// relative to the larger of the two.
    pub fn check_distinct(&self) -> Result<()> {
        for (i, &a) in self.y.iter().enumerate() {
            for &b in &self.y[i + 1..] {
                let separation = (a - b).abs() / a.max(b);
                if separation <= DISTINCTNESS_TOL {
                    return Err(Error::NotDistinct {
                        a,
                        b,
                        separation,
                        threshold: DISTINCTNESS_TOL,
                    });
                }
            }
        }
        Ok(())
    }

    /// `w_j = 1 / Π_{l≠j} (1 − y_j / y_l)`, the first-row cofactors of the
    /// Vandermonde determinant divided by the determinant itself.
    fn cofactor_weights(&self) -> Vec<f64> {
        self.y
            .iter()
            .enumerate()
            .map(|(j, &yj)| {
                let prod: f64 = self
                    .y
                    .iter()
                    .enumerate()
                    .filter(|&(l, _)| l != j)
                    .map(|(_, &yl)| 1.0 - yj / yl)
                    .product();
                1.0 / prod
            })
            .collect()
    }
}

impl TryFrom<Vec<f64>> for SigmaSpec {
    type Error = Error;
    fn try_from(y: Vec<f64>) -> Result<Self> {
        Self::new(y)
    }
}

impl From<SigmaSpec> for Vec<f64> {
    fn from(spec: SigmaSpec) -> Vec<f64> {
        spec.y
    }
}

/// Full Lyapunov spectrum for complex Gaussian factors `Σ^{1/2} G`:
///
/// `μ_k = −½ det M_k / det V + ½ Ψ(k)`
///
/// where `V = [y_j^{i−1}]` is the Vandermonde matrix and `M_k` is `V` with
/// row `k` replaced by `(log y_j) y_j^{k−1}`. `k = 1` uses the explicit
/// cofactor expansion; other rows use pivoted LU.
pub fn sigma_spectrum_complex(spec: &SigmaSpec) -> Result<Vec<f64>> {
    spec.check_distinct()?;
    let y = spec.y();
    let d = y.len();

    let weights = spec.cofactor_weights();
    let first: f64 = y.iter().zip(&weights).map(|(v, w)| v.ln() * w).sum();
    let mut mu = vec![-0.5 * first + 0.5 * digamma(1.0)?];
    if d == 1 {
        return Ok(mu);
    }

    let vandermonde = DMatrix::from_fn(d, d, |i, j| y[j].powi(i as i32));
    let det_v = vandermonde.clone().lu().determinant();
    for k in 2..=d {
        let mut m = vandermonde.clone();
        for j in 0..d {
            m[(k - 1, j)] = y[j].ln() * y[j].powi(k as i32 - 1);
        }
        let ratio = m.lu().determinant() / det_v;
        mu.push(-0.5 * ratio + 0.5 * digamma(k as f64)?);
    }
    Ok(mu)
}

/// `N σ_1²` for complex Gaussian factors `Σ^{1/2} G`:
///
/// `¼ [Ψ′(1) + Σ_j (ln y_j)² w_j − (Σ_j ln y_j w_j)²]`, `w_j = 1/Π_{l≠j}(1 − y_j/y_l)`.
pub fn sigma_variance1_complex(spec: &SigmaSpec) -> Result<f64> {
    spec.check_distinct()?;
    let weights = spec.cofactor_weights();
    let (mut first, mut second) = (0.0, 0.0);
    for (&y, &w) in spec.y().iter().zip(&weights) {
        let l = y.ln();
        first += l * w;
        second += l * l * w;
    }
    Ok(0.25 * (PI_SQUARED_OVER_SIX + second - first * first))
}

/// How a [`JPair`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JMethod {
    Quadrature,
    Residue,
}

/// The integrals `J_1`, `J_2` (with absolute error estimates; zero for
/// residue sums).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JPair {
    pub j1: f64,
    pub j2: f64,
    pub j1_error: f64,
    pub j2_error: f64,
    pub method: JMethod,
}

/// `J_1`, `J_2` from their real-integral forms, with
/// `f(x) = χ_{(0,1)}(x) − Π_i (1 + x/y_i)^{−β/2}`:
///
/// `J_1 = −∫_0^∞ f(x) dx/x`, `J_2 = 2∫_0^∞ f(x) ln x dx/x + π²/3`.
///
/// The half-lines `(0, 1]` and `[1, ∞)` are mapped to `u ∈ [0, ∞)` by
/// `x = e^{∓u}`, which turns the `1/x` weight into `du` and both integrands
/// into exponentially decaying ones.
pub fn j_integrals(beta: Beta, spec: &SigmaSpec) -> Result<JPair> {
    let half_beta = beta.as_f64() / 2.0;
    let y = spec.y();
    let log_prod = |x: f64| -half_beta * y.iter().map(|v| (x / v).ln_1p()).sum::<f64>();
    // 1 − F(e^{−u}) and F(e^{u})
    let below = |u: f64| -log_prod((-u).exp()).exp_m1();
    let above = |u: f64| log_prod(u.exp()).exp();

    let y_min = y.iter().cloned().fold(f64::INFINITY, f64::min);
    let y_max = y.iter().cloned().fold(0.0, f64::max);
    let extent_below = (-y_min.ln()).max(0.0) + 1.0;
    let extent_above = y_max.ln().max(0.0) + 1.0;

    let tol = J_TOLERANCE / 4.0;
    let a0 = integrate_half_line(below, extent_below, tol)?;
    let b0 = integrate_half_line(above, extent_above, tol)?;
    let a1 = integrate_half_line(|u| u * below(u), extent_below, tol)?;
    let b1 = integrate_half_line(|u| u * above(u), extent_above, tol)?;

    // ∫_0^1 (1−F) dx/x = a0, ∫_1^∞ F dx/x = b0; the log-weighted pieces pick
    // up ln x = −u below and +u above.
    let j1 = -(a0.value - b0.value);
    let j2 = 2.0 * (-a1.value - b1.value) + 2.0 * PI_SQUARED_OVER_SIX;
    Ok(JPair {
        j1,
        j2,
        j1_error: a0.error + b0.error,
        j2_error: 2.0 * (a1.error + b1.error),
        method: JMethod::Quadrature,
    })
}

/// Residue evaluation at `Σ = 𝕀_d`, valid when `m = βd/2` is a positive
/// integer: `−J_1 = H_{m−1}`, `−J_2 = Σ_{s=2}^{m−1} (2/s) H_{s−1}`.
pub fn residue_j_sums(beta: Beta, d: usize) -> Result<JPair> {
    let twice = beta.value() as usize * d;
    if d == 0 || !twice.is_multiple_of(2) {
        return Err(Error::ResidueNotInteger { beta: beta.value(), d });
    }
    let m = (twice / 2) as u64;
    let j1 = -harmonic(m - 1, HarmonicOrder::First);
    let j2 = -(2..m)
        .map(|s| 2.0 / s as f64 * harmonic(s - 1, HarmonicOrder::First))
        .sum::<f64>();
    Ok(JPair {
        j1,
        j2,
        j1_error: 0.0,
        j2_error: 0.0,
        method: JMethod::Residue,
    })
}

fn mu1_from_j(beta: Beta, j: &JPair) -> f64 {
    0.5 * (-EULER_GAMMA + (2.0 / beta.as_f64()).ln() - j.j1)
}

fn variance1_from_j(j: &JPair) -> f64 {
    0.25 * (PI_SQUARED_OVER_SIX - j.j2 - j.j1 * j.j1)
}

/// Largest Lyapunov exponent for any `β`: `μ_1 = ½(−γ + ln(2/β) − J_1)`.
pub fn kargin_mu1(beta: Beta, spec: &SigmaSpec) -> Result<f64> {
    Ok(mu1_from_j(beta, &j_integrals(beta, spec)?))
}

/// `N σ_1² = ¼(π²/6 − J_2 − J_1²)` for any `β`.
pub fn kargin_variance1(beta: Beta, spec: &SigmaSpec) -> Result<f64> {
    Ok(variance1_from_j(&j_integrals(beta, spec)?))
}

/// Both `μ_1` and `N σ_1²` from a single quadrature pass.
pub fn kargin_first(beta: Beta, spec: &SigmaSpec) -> Result<(f64, f64)> {
    let j = j_integrals(beta, spec)?;
    Ok((mu1_from_j(beta, &j), variance1_from_j(&j)))
}
