//! Wigner 3j and 6j symbols by Racah's formulas in exact rational arithmetic.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::Mul;

use crate::error::{Error, Result};

/// Largest angular momentum accepted.
pub const MAX_J: i64 = 20;

/// A half-integer stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct HalfInt(i64);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);
    pub const HALF: HalfInt = HalfInt(1);
    pub const ONE: HalfInt = HalfInt(2);

    pub const fn from_twice(twice: i64) -> Self {
        HalfInt(twice)
    }
    pub const fn twice(self) -> i64 {
        self.0
    }
    pub fn from_f64(x: f64) -> Result<Self> {
        let t = 2.0 * x;
        if !t.is_finite() || (t - t.round()).abs() > 1e-9 || t.abs() > 1e6 {
            return Err(Error::InvalidParams(format!("{x} is not a half-integer")));
        }
        Ok(HalfInt(t.round() as i64))
    }
    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }
    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }
    pub fn neg(self) -> Self {
        HalfInt(-self.0)
    }
}

impl TryFrom<f64> for HalfInt {
    type Error = Error;
    fn try_from(x: f64) -> Result<Self> {
        HalfInt::from_f64(x)
    }
}

impl From<HalfInt> for f64 {
    fn from(h: HalfInt) -> f64 {
        h.value()
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// An exact real of the form ±√q with q a non-negative rational.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedSqrt {
    pub negative: bool,
    pub square: BigRational,
}

impl SignedSqrt {
    pub fn zero() -> Self {
        SignedSqrt { negative: false, square: BigRational::zero() }
    }
    pub fn one() -> Self {
        SignedSqrt { negative: false, square: BigRational::one() }
    }
    /// ±√(num/den)
    pub fn new(negative: bool, num: i64, den: i64) -> Self {
        let square = BigRational::new(BigInt::from(num), BigInt::from(den));
        assert!(!square.is_negative());
        let negative = negative && !square.is_zero();
        SignedSqrt { negative, square }
    }
    /// s·√a with s a rational.
    fn from_parts(root: BigRational, factor: BigRational) -> Self {
        let negative = factor.is_negative();
        let square = root * &factor * &factor;
        let negative = negative && !square.is_zero();
        SignedSqrt { negative, square }
    }
    pub fn is_zero(&self) -> bool {
        self.square.is_zero()
    }
    pub fn negate(mut self) -> Self {
        if !self.is_zero() {
            self.negative = !self.negative;
        }
        self
    }
    pub fn to_f64(&self) -> f64 {
        let v = self.square.to_f64().unwrap_or(f64::NAN).sqrt();
        if self.negative {
            -v
        } else {
            v
        }
    }
}

impl Mul for &SignedSqrt {
    type Output = SignedSqrt;
    fn mul(self, rhs: &SignedSqrt) -> SignedSqrt {
        let square = &self.square * &rhs.square;
        let negative = (self.negative != rhs.negative) && !square.is_zero();
        SignedSqrt { negative, square }
    }
}

fn factorial(n: i64) -> BigUint {
    debug_assert!(n >= 0);
    (2..=n as u64).fold(BigUint::one(), |acc, k| acc * k)
}

fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn check_bound(js: &[HalfInt]) -> Result<()> {
    if js.iter().any(|j| j.0 < 0 || j.0 > 2 * MAX_J) {
        return Err(Error::OutOfRange(format!("angular momenta must lie in [0, {MAX_J}]")));
    }
    Ok(())
}

/// Triangle rule including integer perimeter.
fn triad(a: HalfInt, b: HalfInt, c: HalfInt) -> bool {
    let (a, b, c) = (a.0, b.0, c.0);
    c <= a + b && a <= b + c && b <= a + c && (a + b + c) % 2 == 0
}

/// Δ(abc) as an exact rational. Arguments are twice the momenta.
fn triangle_coefficient(a: i64, b: i64, c: i64) -> BigRational {
    let num = factorial((a + b - c) / 2) * factorial((a - b + c) / 2) * factorial((-a + b + c) / 2);
    ratio(num, factorial((a + b + c) / 2 + 1))
}

fn parity_sign(twice_exponent: i64) -> BigRational {
    debug_assert!(twice_exponent % 2 == 0);
    if (twice_exponent / 2).rem_euclid(2) == 0 {
        BigRational::one()
    } else {
        -BigRational::one()
    }
}

pub fn wigner3j(j1: HalfInt, j2: HalfInt, j3: HalfInt, m1: HalfInt, m2: HalfInt, m3: HalfInt) -> Result<SignedSqrt> {
    check_bound(&[j1, j2, j3])?;
    for (j, m) in [(j1, m1), (j2, m2), (j3, m3)] {
        if (j.0 - m.0) % 2 != 0 {
            return Err(Error::InvalidParams(format!("j = {j} and m = {m} differ by a non-integer")));
        }
    }
    if m1.0 + m2.0 + m3.0 != 0 || !triad(j1, j2, j3) {
        return Ok(SignedSqrt::zero());
    }
    if [(j1, m1), (j2, m2), (j3, m3)].iter().any(|(j, m)| m.0.abs() > j.0) {
        return Ok(SignedSqrt::zero());
    }
    let (j1, j2, j3, m1, m2, m3) = (j1.0, j2.0, j3.0, m1.0, m2.0, m3.0);
    let f = |x: i64| factorial(x / 2);
    let root = triangle_coefficient(j1, j2, j3)
        * ratio(f(j1 + m1) * f(j1 - m1) * f(j2 + m2) * f(j2 - m2) * f(j3 + m3) * f(j3 - m3), BigUint::one());
    // k runs over values where every factorial argument is non-negative (twice units)
    let k_min = 0.max(j2 - j3 - m1).max(j1 - j3 + m2);
    let k_max = (j1 + j2 - j3).min(j1 - m1).min(j2 + m2);
    let mut sum = BigRational::zero();
    let mut k = k_min;
    while k <= k_max {
        let den = f(k) * f(j3 - j2 + k + m1) * f(j3 - j1 + k - m2) * f(j1 + j2 - j3 - k) * f(j1 - k - m1) * f(j2 - k + m2);
        let term = ratio(BigUint::one(), den);
        if (k / 2) % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        k += 2;
    }
    let factor = parity_sign(j1 - j2 - m3) * sum;
    Ok(SignedSqrt::from_parts(root, factor))
}

pub fn wigner6j(j1: HalfInt, j2: HalfInt, j3: HalfInt, j4: HalfInt, j5: HalfInt, j6: HalfInt) -> Result<SignedSqrt> {
    check_bound(&[j1, j2, j3, j4, j5, j6])?;
    let triads = [(j1, j2, j3), (j1, j5, j6), (j4, j2, j6), (j4, j5, j3)];
    if !triads.iter().all(|&(a, b, c)| triad(a, b, c)) {
        return Ok(SignedSqrt::zero());
    }
    let root = triads
        .iter()
        .fold(BigRational::one(), |acc, &(a, b, c)| acc * triangle_coefficient(a.0, b.0, c.0));
    let (a1, a2, a3, a4) = (
        j1.0 + j2.0 + j3.0,
        j1.0 + j5.0 + j6.0,
        j4.0 + j2.0 + j6.0,
        j4.0 + j5.0 + j3.0,
    );
    let (b1, b2, b3) = (j1.0 + j2.0 + j4.0 + j5.0, j2.0 + j3.0 + j5.0 + j6.0, j3.0 + j1.0 + j6.0 + j4.0);
    let t_min = a1.max(a2).max(a3).max(a4);
    let t_max = b1.min(b2).min(b3);
    let f = |x: i64| factorial(x / 2);
    let mut sum = BigRational::zero();
    let mut t = t_min;
    while t <= t_max {
        let num = factorial(t / 2 + 1);
        let den = f(t - a1) * f(t - a2) * f(t - a3) * f(t - a4) * f(b1 - t) * f(b2 - t) * f(b3 - t);
        let term = ratio(num, den);
        if (t / 2) % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        t += 2;
    }
    Ok(SignedSqrt::from_parts(root, sum))
}

fn halves(xs: [f64; 6]) -> Result<[HalfInt; 6]> {
    let mut out = [HalfInt::ZERO; 6];
    for (o, x) in out.iter_mut().zip(xs) {
        *o = HalfInt::from_f64(x)?;
    }
    Ok(out)
}

/// Float front end; errors on non-half-integer arguments.
pub fn wigner3j_f64(j1: f64, j2: f64, j3: f64, m1: f64, m2: f64, m3: f64) -> Result<f64> {
    let h = halves([j1, j2, j3, m1, m2, m3])?;
    Ok(wigner3j(h[0], h[1], h[2], h[3], h[4], h[5])?.to_f64())
}

pub fn wigner6j_f64(j1: f64, j2: f64, j3: f64, j4: f64, j5: f64, j6: f64) -> Result<f64> {
    let h = halves([j1, j2, j3, j4, j5, j6])?;
    Ok(wigner6j(h[0], h[1], h[2], h[3], h[4], h[5])?.to_f64())
}
