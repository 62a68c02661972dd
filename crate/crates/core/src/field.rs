//! Scalars and dense matrices over the reals, complex numbers and quaternions.
//!
//! Quaternions are stored as a pair of complex numbers `q = a + b·j`, which is
//! the same data as the 2×2 complex block `[[a, b], [-b̄, ā]]`. Every quaternion
//! matrix therefore satisfies the embedding symmetry by construction, and
//! [`Mat::to_complex`] materializes the `2n × 2n` complex embedding on demand.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dyson index of the entry field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub enum Beta {
    Real,
    Complex,
    Quaternion,
}

impl Beta {
    pub const ALL: [Beta; 3] = [Beta::Real, Beta::Complex, Beta::Quaternion];

    pub fn value(self) -> u32 {
        match self {
            Beta::Real => 1,
            Beta::Complex => 2,
            Beta::Quaternion => 4,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.value() as f64
    }
}

impl TryFrom<u32> for Beta {
    type Error = Error;

    fn try_from(value: u32) -> Result<Self> {
        match value {
            1 => Ok(Beta::Real),
            2 => Ok(Beta::Complex),
            4 => Ok(Beta::Quaternion),
            other => Err(Error::InvalidBeta(other)),
        }
    }
}

impl From<Beta> for u32 {
    fn from(beta: Beta) -> u32 {
        beta.value()
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// A real quaternion `a + b·j` with `a, b` complex.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quaternion {
    pub a: Complex64,
    pub b: Complex64,
}

impl Quaternion {
    pub fn new(a: Complex64, b: Complex64) -> Self {
        Self { a, b }
    }

    /// The 2×2 complex block `[[a, b], [-b̄, ā]]`.
    pub fn embed(self) -> [[Complex64; 2]; 2] {
        [[self.a, self.b], [-self.b.conj(), self.a.conj()]]
    }
}

impl Add for Quaternion {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.a + rhs.a, self.b + rhs.b)
    }
}

impl Sub for Quaternion {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.a - rhs.a, self.b - rhs.b)
    }
}

impl Neg for Quaternion {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.a, -self.b)
    }
}

impl Mul for Quaternion {
    type Output = Self;
    // (a1 + b1 j)(a2 + b2 j) = (a1 a2 - b1 b̄2) + (a1 b2 + b1 ā2) j
    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.a * rhs.a - self.b * rhs.b.conj(),
            self.a * rhs.b + self.b * rhs.a.conj(),
        )
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for Quaternion {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

/// Entry type of a random matrix: an associative division algebra over ℝ.
///
/// Multiplication need not commute; all matrix code multiplies in the
/// written order.
pub trait Field:
    Copy
    + Default
    + PartialEq
    + fmt::Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    const BETA: Beta;

    fn zero() -> Self {
        Self::default()
    }
    fn one() -> Self {
        Self::from_real(1.0)
    }
    fn from_real(x: f64) -> Self;
    fn conj(self) -> Self;
    fn norm_sqr(self) -> f64;
    fn scale(self, s: f64) -> Self;

    fn abs(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Multiplicative inverse; `None` for zero.
    fn inv(self) -> Option<Self> {
        let n = self.norm_sqr();
        (n > 0.0).then(|| self.conj().scale(1.0 / n))
    }

    /// A standard Gaussian entry: `β` independent real components, each of
    /// variance `1/β`, so that `E|x|² = 1`.
    fn sample_standard<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// The `β/2`-sized complex block representing this scalar (1×1 for real
    /// and complex, 2×2 for quaternions), row-major.
    fn complex_block(self) -> Vec<Complex64>;
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

impl Field for f64 {
    const BETA: Beta = Beta::Real;

    fn from_real(x: f64) -> Self {
        x
    }
    fn conj(self) -> Self {
        self
    }
    fn norm_sqr(self) -> f64 {
        self * self
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn sample_standard<R: Rng + ?Sized>(rng: &mut R) -> Self {
        normal(rng)
    }
    fn complex_block(self) -> Vec<Complex64> {
        vec![Complex64::new(self, 0.0)]
    }
}

impl Field for Complex64 {
    const BETA: Beta = Beta::Complex;

    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn sample_standard<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Complex64::new(normal(rng) * s, normal(rng) * s)
    }
    fn complex_block(self) -> Vec<Complex64> {
        vec![self]
    }
}

impl Field for Quaternion {
    const BETA: Beta = Beta::Quaternion;

    fn from_real(x: f64) -> Self {
        Quaternion::new(Complex64::new(x, 0.0), Complex64::new(0.0, 0.0))
    }
    fn conj(self) -> Self {
        Quaternion::new(self.a.conj(), -self.b)
    }
    fn norm_sqr(self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr()
    }
    fn scale(self, s: f64) -> Self {
        Quaternion::new(self.a * s, self.b * s)
    }
    fn sample_standard<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let a = Complex64::new(normal(rng) * 0.5, normal(rng) * 0.5);
        let b = Complex64::new(normal(rng) * 0.5, normal(rng) * 0.5);
        Quaternion::new(a, b)
    }
    fn complex_block(self) -> Vec<Complex64> {
        let [[a, b], [c, d]] = self.embed();
        vec![a, b, c, d]
    }
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Field> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::eye(n, n)
    }

    /// The `rows × cols` matrix with ones on the leading diagonal.
    pub fn eye(rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows.min(cols) {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    /// Top-left `rows × cols` block.
    pub fn block(&self, rows: usize, cols: usize) -> Self {
        assert!(rows <= self.rows && cols <= self.cols);
        Self::from_fn(rows, cols, |i, j| self[(i, j)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// Left-multiply by `diag(scales)`.
    pub fn scale_rows(&mut self, scales: &[f64]) {
        assert_eq!(scales.len(), self.rows);
        for (i, &s) in scales.iter().enumerate() {
            for x in &mut self.data[i * self.cols..(i + 1) * self.cols] {
                *x = x.scale(s);
            }
        }
    }

    pub fn scale_all(&mut self, s: f64) {
        for x in &mut self.data {
            *x = x.scale(s);
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.norm_sqr().is_finite())
    }

    /// Thin QR by modified Gram–Schmidt with one re-orthogonalization pass.
    ///
    /// Requires `rows >= cols`. `R` comes out with a real, positive diagonal,
    /// which makes the factorization unique; for a Gaussian input the `Q`
    /// factor is then Haar distributed. Returns `None` if a column is
    /// numerically dependent on the previous ones.
    pub fn qr(&self) -> Option<Qr<T>> {
        let (m, k) = (self.rows, self.cols);
        assert!(m >= k, "thin QR needs rows >= cols");
        let mut q = self.clone();
        let mut r = Mat::<T>::zeros(k, k);
        let mut diag = vec![0.0; k];
        for j in 0..k {
            let original = (0..m).map(|l| q[(l, j)].norm_sqr()).sum::<f64>().sqrt();
            for _pass in 0..2 {
                for i in 0..j {
                    // c = <q_i, v> = Σ conj(q_li) v_l ; v -= q_i c
                    let mut c = T::zero();
                    for l in 0..m {
                        c += q[(l, i)].conj() * q[(l, j)];
                    }
                    for l in 0..m {
                        let qi = q[(l, i)];
                        q[(l, j)] -= qi * c;
                    }
                    r[(i, j)] += c;
                }
            }
            let norm = (0..m).map(|l| q[(l, j)].norm_sqr()).sum::<f64>().sqrt();
            if !norm.is_finite() || norm <= original * m as f64 * f64::EPSILON {
                return None;
            }
            let inv = 1.0 / norm;
            for l in 0..m {
                q[(l, j)] = q[(l, j)].scale(inv);
            }
            r[(j, j)] = T::from_real(norm);
            diag[j] = norm;
        }
        Some(Qr { q, r, diag })
    }

    /// Inverse of a square matrix through its QR factorization.
    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let Qr { q, r, diag } = self.qr()?;
        // Solve R X = Q† by back substitution; R has a real diagonal, so the
        // pivots commute with everything.
        let mut x = q.adjoint();
        for i in (0..n).rev() {
            for j in 0..n {
                let mut acc = x[(i, j)];
                for k in i + 1..n {
                    acc -= r[(i, k)] * x[(k, j)];
                }
                x[(i, j)] = acc.scale(1.0 / diag[i]);
            }
        }
        Some(x)
    }

    /// Complex representation: the matrix itself for β = 1, 2 and the
    /// `2n × 2n` block embedding for quaternions.
    pub fn to_complex(&self) -> Mat<Complex64> {
        let s = if T::BETA == Beta::Quaternion { 2 } else { 1 };
        let mut out = Mat::<Complex64>::zeros(self.rows * s, self.cols * s);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let block = self[(i, j)].complex_block();
                for bi in 0..s {
                    for bj in 0..s {
                        out[(i * s + bi, j * s + bj)] = block[bi * s + bj];
                    }
                }
            }
        }
        out
    }

    pub fn sample_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        Self::from_fn(rows, cols, |_, _| T::sample_standard(rng))
    }
}

impl<T> std::ops::Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Thin QR factors; `diag` holds the (real, positive) diagonal of `r`.
#[derive(Debug, Clone)]
pub struct Qr<T> {
    pub q: Mat<T>,
    pub r: Mat<T>,
    pub diag: Vec<f64>,
}

/// `J = diag([[0, 1], [-1, 0]], …)` of size `2n`.
pub fn symplectic_j(n: usize) -> Mat<Complex64> {
    let mut j = Mat::<Complex64>::zeros(2 * n, 2 * n);
    for b in 0..n {
        j[(2 * b, 2 * b + 1)] = Complex64::new(1.0, 0.0);
        j[(2 * b + 1, 2 * b)] = Complex64::new(-1.0, 0.0);
    }
    j
}

impl Mat<Complex64> {
    pub fn conj_entries(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].conj())
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<Complex64> {
        nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

impl Mat<f64> {
    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}
