//! Exact probabilities.

use num_rational::Ratio;
use num_traits::{One, Zero};

pub type Rational = Ratio<i64>;

pub fn half() -> Rational {
    Rational::new(1, 2)
}

/// Exact value of a finite `f64` whose denominator is a power of two no
/// larger than `2^max_bits`, or `None` if it is not such a dyadic rational.
pub fn exact_dyadic(x: f64, max_bits: u32) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let scale = (1u64 << max_bits) as f64;
    let scaled = x * scale;
    if scaled.fract() != 0.0 || scaled.abs() > 9.0e15 {
        return None;
    }
    Some(Rational::new(scaled as i64, 1i64 << max_bits))
}

/// Nearest dyadic rational with denominator at most `2^max_bits`, accepted
/// only if it lies within `tol` of `x`.
pub fn snap_dyadic(x: f64, max_bits: u32, tol: f64) -> Option<Rational> {
    let scale = (1u64 << max_bits) as f64;
    let numer = (x * scale).round();
    let snapped = numer / scale;
    if (snapped - x).abs() > tol {
        return None;
    }
    Some(Rational::new(numer as i64, 1i64 << max_bits))
}

pub fn is_power_of_two_denominator(r: &Rational) -> bool {
    let d = *r.denom();
    d > 0 && (d & (d - 1)) == 0
}

pub fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Arithmetic needed to evaluate a game on a distribution.
pub trait Probability: Clone + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn weight(&self, w: &Rational) -> Self;
    fn is_negative(&self) -> bool;
    fn to_f64(&self) -> f64;
}

impl Probability for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn weight(&self, w: &Rational) -> Self {
        self * w
    }
    fn is_negative(&self) -> bool {
        *self < Zero::zero()
    }
    fn to_f64(&self) -> f64 {
        to_f64(self)
    }
}

impl Probability for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn weight(&self, w: &Rational) -> Self {
        self * to_f64(w)
    }
    fn is_negative(&self) -> bool {
        *self < 0.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}
