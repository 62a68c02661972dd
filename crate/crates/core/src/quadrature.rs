//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of an integration: value and absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (k, (&x, &w)) in XGK.iter().zip(&WGK).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if k % 2 == 1 {
            gauss += WG[k / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Segment { a, b, value, error }
}

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, max_segments: usize) -> Result<Integral> {
    let mut heap = BinaryHeap::new();
    let first = gk15(&f, a, b);
    let mut error = first.error;
    heap.push(first);
    while error > tol && heap.len() < max_segments {
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let left = gk15(&f, worst.a, mid);
        let right = gk15(&f, mid, worst.b);
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    let value = heap.iter().map(|s| s.value).sum();
    let error: f64 = heap.iter().map(|s| s.error).sum();
    if error > tol || !error.is_finite() {
        return Err(Error::Quadrature { achieved: error, target: tol });
    }
    Ok(Integral { value, error })
}

/// Integrate `f` over `[0, ∞)` for an integrand that eventually decays.
///
/// The half-line is covered by panels of doubling width. Integration stops
/// once `u >= min_extent` and two consecutive panels contribute less than
/// `tol * 1e-3` each.
pub fn integrate_half_line<F: Fn(f64) -> f64>(f: F, min_extent: f64, tol: f64) -> Result<Integral> {
    const MAX_EXTENT: f64 = 1e5;
    let mut total = Integral { value: 0.0, error: 0.0 };
    let (mut lo, mut width) = (0.0, 1.0);
    let mut quiet_panels = 0;
    loop {
        let hi = lo + width;
        let panel = integrate(&f, lo, hi, tol * 0.1, 2000)?;
        total.value += panel.value;
        total.error += panel.error;
        if panel.value.abs() < tol * 1e-3 {
            quiet_panels += 1;
        } else {
            quiet_panels = 0;
        }
        if hi >= min_extent && quiet_panels >= 2 {
            break;
        }
        if hi > MAX_EXTENT {
            return Err(Error::Quadrature { achieved: panel.value.abs(), target: tol });
        }
        lo = hi;
        width *= 2.0;
    }
    if total.error > tol {
        return Err(Error::Quadrature { achieved: total.error, target: tol });
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x, 0.0, 2.0, 1e-14, 10).unwrap();
        assert!((r.value - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
    }

    #[test]
    fn log_singularity() {
        // ∫_0^1 ln x dx = -1
        let r = integrate(|x| x.ln(), 0.0, 1.0, 1e-12, 2000).unwrap();
        assert!((r.value + 1.0).abs() < 1e-11);
    }

    #[test]
    fn half_line_exponential() {
        // ∫_0^∞ u e^{-u/3} du = 9
        let r = integrate_half_line(|u| u * (-u / 3.0).exp(), 1.0, 1e-12).unwrap();
        assert!((r.value - 9.0).abs() < 1e-11);
    }

    #[test]
    fn non_convergence_is_reported() {
        let err = integrate(|x| 1.0 / x, 0.0, 1.0, 1e-12, 20).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }
}
