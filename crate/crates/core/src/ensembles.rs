//! Seeded samplers for the factor matrices of a product.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Beta, Field, Mat, Quaternion};
use crate::sigma::SigmaSpec;
use crate::theory::{MixtureSpec, RectangularSpec};

/// Condition-number estimate above which a Gaussian draw is rejected before
/// being inverted.
pub const INVERSE_CONDITION_LIMIT: f64 = 1e12;

/// Run `$body` with `$t` bound to the scalar type for `$beta`.
#[macro_export]
#[doc(hidden)]
macro_rules! with_field {
    ($beta:expr, $t:ident => $body:expr) => {
        match $beta {
            $crate::field::Beta::Real => {
                type $t = f64;
                $body
            }
            $crate::field::Beta::Complex => {
                type $t = ::num_complex::Complex64;
                $body
            }
            $crate::field::Beta::Quaternion => {
                type $t = $crate::field::Quaternion;
                $body
            }
        }
    };
}

/// The ensemble each factor `A_i` of the product is drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum EnsembleSpec {
    StandardGaussian {
        beta: Beta,
        d: usize,
    },
    /// `A = Σ^{1/2} G`, with `Σ` given by the eigenvalues of its inverse.
    GeneralSigmaGaussian {
        beta: Beta,
        sigma_inv_eigenvalues: SigmaSpec,
    },
    InverseGaussian {
        beta: Beta,
        d: usize,
    },
    /// Each factor is Gaussian with probability `alpha_plus`, otherwise the
    /// inverse of a Gaussian.
    GaussianInverseMixture {
        beta: Beta,
        d: usize,
        alpha_plus: f64,
    },
    /// Factor `i` has shape `(d + ν_i) × (d + ν_{i−1})`, with `ν_0 = 0` and
    /// the `ν_i` cycling through the offsets in the given proportions.
    RectangularGaussian {
        beta: Beta,
        d: usize,
        shapes: RectangularSpec,
    },
    /// Top-left `d × d` block of a Haar unitary matrix of size `d + n`.
    TruncatedUnitary {
        beta: Beta,
        d: usize,
        n: usize,
    },
}

impl EnsembleSpec {
    pub fn beta(&self) -> Beta {
        match self {
            Self::StandardGaussian { beta, .. }
            | Self::GeneralSigmaGaussian { beta, .. }
            | Self::InverseGaussian { beta, .. }
            | Self::GaussianInverseMixture { beta, .. }
            | Self::RectangularGaussian { beta, .. }
            | Self::TruncatedUnitary { beta, .. } => *beta,
        }
    }

    /// Number of Lyapunov exponents, `d`.
    pub fn dim(&self) -> usize {
        match self {
            Self::GeneralSigmaGaussian {
                sigma_inv_eigenvalues,
                ..
            } => sigma_inv_eigenvalues.dim(),
            Self::StandardGaussian { d, .. }
            | Self::InverseGaussian { d, .. }
            | Self::GaussianInverseMixture { d, .. }
            | Self::RectangularGaussian { d, .. }
            | Self::TruncatedUnitary { d, .. } => *d,
        }
    }

    /// Whether every factor is `d × d`.
    pub fn is_square(&self) -> bool {
        match self {
            Self::RectangularGaussian { shapes, .. } => shapes.shapes.iter().all(|s| s.offset == 0),
            _ => true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim() == 0 {
            return Err(Error::InvalidSpec("dimension d must be at least 1".into()));
        }
        match self {
            Self::GaussianInverseMixture { alpha_plus, .. } => MixtureSpec::new(*alpha_plus).map(|_| ()),
            Self::RectangularGaussian { shapes, .. } => shapes.validate(),
            _ => Ok(()),
        }
    }
}

/// A matrix over the field selected by `β`.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldMatrix {
    Real(Mat<f64>),
    Complex(Mat<Complex64>),
    Quaternion(Mat<Quaternion>),
}

impl FieldMatrix {
    pub fn beta(&self) -> Beta {
        match self {
            Self::Real(_) => Beta::Real,
            Self::Complex(_) => Beta::Complex,
            Self::Quaternion(_) => Beta::Quaternion,
        }
    }

    pub fn rows(&self) -> usize {
        match self {
            Self::Real(m) => m.rows(),
            Self::Complex(m) => m.rows(),
            Self::Quaternion(m) => m.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            Self::Real(m) => m.cols(),
            Self::Complex(m) => m.cols(),
            Self::Quaternion(m) => m.cols(),
        }
    }

    /// Complex form; quaternion matrices become their `2n × 2n` embedding.
    pub fn to_complex(&self) -> Mat<Complex64> {
        match self {
            Self::Real(m) => m.to_complex(),
            Self::Complex(m) => m.to_complex(),
            Self::Quaternion(m) => m.to_complex(),
        }
    }
}

/// Conversion from a typed matrix to the tagged [`FieldMatrix`].
pub trait IntoFieldMatrix {
    fn into_field_matrix(self) -> FieldMatrix;
}

impl IntoFieldMatrix for Mat<f64> {
    fn into_field_matrix(self) -> FieldMatrix {
        FieldMatrix::Real(self)
    }
}

impl IntoFieldMatrix for Mat<Complex64> {
    fn into_field_matrix(self) -> FieldMatrix {
        FieldMatrix::Complex(self)
    }
}

impl IntoFieldMatrix for Mat<Quaternion> {
    fn into_field_matrix(self) -> FieldMatrix {
        FieldMatrix::Quaternion(self)
    }
}

/// Haar-distributed unitary (orthogonal, unitary, or symplectic) matrix of
/// size `m`: the `Q` factor of a Gaussian matrix, normalized so that `R` has
/// a positive real diagonal.
pub fn haar_unitary<T: Field, R: Rng + ?Sized>(m: usize, rng: &mut R) -> Mat<T> {
    loop {
        if let Some(qr) = Mat::<T>::sample_gaussian(m, m, rng).qr() {
            return qr.q;
        }
    }
}

/// Standard Gaussian matrix with density `∝ exp(−(β/2) Tr G†G)`.
pub fn sample_gaussian<R: Rng + ?Sized>(beta: Beta, rows: usize, cols: usize, rng: &mut R) -> FieldMatrix {
    with_field!(beta, T => Mat::<T>::sample_gaussian(rows, cols, rng).into_field_matrix())
}

pub fn sample_haar_unitary<R: Rng + ?Sized>(beta: Beta, m: usize, rng: &mut R) -> FieldMatrix {
    with_field!(beta, T => haar_unitary::<T, R>(m, rng).into_field_matrix())
}

/// Deterministic schedule of rectangular offsets.
///
/// Tijdeman's rule with `k` offsets and `κ = 1/(2k − 2)`: at step `j`
/// (1-based), among the offsets whose deficit `α_s j − count_s` is at least
/// `κ`, take the one with the earliest deadline `(count_s + 1 − κ)/α_s`, ties
/// going to the earlier entry. Every count then stays within `1 − κ` of
/// `α_s j` at every step.
#[derive(Debug, Clone)]
pub struct OffsetSchedule {
    offsets: Vec<u32>,
    proportions: Vec<f64>,
    counts: Vec<u64>,
    step: u64,
    kappa: f64,
}

impl OffsetSchedule {
    pub fn new(spec: &RectangularSpec) -> Self {
        let k = spec.shapes.len();
        Self {
            offsets: spec.shapes.iter().map(|s| s.offset).collect(),
            proportions: spec.shapes.iter().map(|s| s.proportion).collect(),
            counts: vec![0; k],
            step: 0,
            kappa: if k > 1 { 1.0 / (2 * k - 2) as f64 } else { 0.0 },
        }
    }

    /// Index (into the spec's shape list) of the next offset.
    pub fn next_index(&mut self) -> usize {
        const SLACK: f64 = 1e-12;
        self.step += 1;
        let j = self.step as f64;
        let mut best = None;
        let mut best_deadline = f64::INFINITY;
        for (s, (&alpha, &count)) in self.proportions.iter().zip(&self.counts).enumerate() {
            if alpha * j - (count as f64) < self.kappa - SLACK {
                continue;
            }
            let deadline = (count as f64 + 1.0 - self.kappa) / alpha;
            if deadline < best_deadline {
                best = Some(s);
                best_deadline = deadline;
            }
        }
        // The deficits sum to 1, so some offset is always eligible.
        let best = best.expect("an offset with deficit >= kappa exists");
        self.counts[best] += 1;
        best
    }

    pub fn offset(&self, index: usize) -> u32 {
        self.offsets[index]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }
}

impl Iterator for OffsetSchedule {
    type Item = u32;
    fn next(&mut self) -> Option<u32> {
        let idx = self.next_index();
        Some(self.offsets[idx])
    }
}

/// One factor plus the bookkeeping the simulation needs.
#[derive(Debug, Clone)]
pub struct Factor<T> {
    pub matrix: Mat<T>,
    /// Stratum of the step: the index of the rectangular shape used, 0 for
    /// every other ensemble.
    pub stratum: usize,
    /// Gaussian draws rejected by the inverse condition guard.
    pub redraws: u64,
}

/// Stateful stream of factors `A_1, A_2, …` for one chain.
#[derive(Debug, Clone)]
pub struct FactorSampler<T> {
    spec: EnsembleSpec,
    schedule: Option<OffsetSchedule>,
    prev_offset: u32,
    sqrt_sigma: Vec<f64>,
    _field: std::marker::PhantomData<T>,
}

impl<T: Field> FactorSampler<T> {
    pub fn new(spec: &EnsembleSpec) -> Result<Self> {
        spec.validate()?;
        if spec.beta() != T::BETA {
            return Err(Error::InvalidSpec(format!(
                "ensemble has beta = {} but the sampler field has beta = {}",
                spec.beta(),
                T::BETA
            )));
        }
        let schedule = match spec {
            EnsembleSpec::RectangularGaussian { shapes, .. } => Some(OffsetSchedule::new(shapes)),
            _ => None,
        };
        let sqrt_sigma = match spec {
            EnsembleSpec::GeneralSigmaGaussian {
                sigma_inv_eigenvalues,
                ..
            } => sigma_inv_eigenvalues.y().iter().map(|y| y.sqrt().recip()).collect(),
            _ => Vec::new(),
        };
        Ok(Self {
            spec: spec.clone(),
            schedule,
            prev_offset: 0,
            sqrt_sigma,
            _field: std::marker::PhantomData,
        })
    }

    pub fn next_factor<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Factor<T> {
        let d = self.spec.dim();
        let plain = |matrix| Factor {
            matrix,
            stratum: 0,
            redraws: 0,
        };
        match &self.spec {
            EnsembleSpec::StandardGaussian { .. } => plain(Mat::sample_gaussian(d, d, rng)),
            EnsembleSpec::GeneralSigmaGaussian { .. } => {
                let mut g = Mat::sample_gaussian(d, d, rng);
                g.scale_rows(&self.sqrt_sigma);
                plain(g)
            }
            EnsembleSpec::InverseGaussian { .. } => inverse_gaussian(d, rng),
            EnsembleSpec::GaussianInverseMixture { alpha_plus, .. } => {
                if rng.random::<f64>() < *alpha_plus {
                    plain(Mat::sample_gaussian(d, d, rng))
                } else {
                    inverse_gaussian(d, rng)
                }
            }
            EnsembleSpec::RectangularGaussian { .. } => {
                let schedule = self.schedule.as_mut().expect("rectangular ensembles carry a schedule");
                let idx = schedule.next_index();
                let offset = schedule.offset(idx);
                let rows = d + offset as usize;
                let cols = d + self.prev_offset as usize;
                self.prev_offset = offset;
                Factor {
                    matrix: Mat::sample_gaussian(rows, cols, rng),
                    stratum: idx,
                    redraws: 0,
                }
            }
            EnsembleSpec::TruncatedUnitary { n, .. } => plain(haar_unitary::<T, R>(d + n, rng).block(d, d)),
        }
    }
}

fn inverse_gaussian<T: Field, R: Rng + ?Sized>(d: usize, rng: &mut R) -> Factor<T> {
    let mut redraws = 0;
    loop {
        let g = Mat::<T>::sample_gaussian(d, d, rng);
        if let Some(inv) = g.inverse() {
            let condition = g.frobenius() * inv.frobenius();
            if condition.is_finite() && condition <= INVERSE_CONDITION_LIMIT {
                return Factor {
                    matrix: inv,
                    stratum: 0,
                    redraws,
                };
            }
        }
        redraws += 1;
    }
}

/// Factor `A_{step_index}` (1-based) of a product drawn from `spec`.
///
/// Factors are independent except for the rectangular schedule, which is
/// replayed from the first step; chains should use [`FactorSampler`], which
/// keeps the schedule as state.
pub fn sample_factor<R: Rng + ?Sized>(spec: &EnsembleSpec, step_index: usize, rng: &mut R) -> Result<FieldMatrix> {
    if step_index == 0 {
        return Err(Error::InvalidSpec("step indices start at 1".into()));
    }
    with_field!(spec.beta(), T => {
        let mut sampler = FactorSampler::<T>::new(spec)?;
        if let (Some(schedule), EnsembleSpec::RectangularGaussian { .. }) = (sampler.schedule.as_mut(), spec) {
            let mut prev = 0;
            for _ in 1..step_index {
                prev = schedule.next().expect("schedule is infinite");
            }
            sampler.prev_offset = prev;
        }
        Ok(sampler.next_factor(rng).matrix.into_field_matrix())
    })
}
