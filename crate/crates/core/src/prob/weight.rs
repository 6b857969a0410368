//! Numeric backends for probability masses.
//!
//! Two backends implement [`Weight`]: `f64` and [`Rational`] (arbitrary
//! precision). Masses are added and multiplied in the backend; entropic
//! functionals always convert to `f64` at the end.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Sub};

pub type Rational = BigRational;

/// Probability mass arithmetic shared by both numeric modes.
pub trait Weight:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// Whether arithmetic is exact.
    const EXACT: bool;

    fn ratio(num: u64, den: u64) -> Self;
    fn to_f64(&self) -> f64;
    fn from_rational(r: &Rational) -> Self;
    /// Exact conversion of a float (every finite float is a dyadic fraction).
    fn from_f64(x: f64) -> Self;
    /// Best-effort conversion back to an exact fraction.
    fn to_rational(&self) -> Rational;

    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }

    /// `|self - other|` compared against `tol` (ignored in exact mode).
    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if Self::EXACT {
            self == other
        } else {
            (self.to_f64() - other.to_f64()).abs() <= tol
        }
    }
}

impl Weight for f64 {
    const EXACT: bool = false;

    fn ratio(num: u64, den: u64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r)
    }

    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_rational(&self) -> Rational {
        BigRational::from_float(*self).unwrap_or_else(BigRational::zero)
    }
}

impl Weight for Rational {
    const EXACT: bool = true;

    fn ratio(num: u64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).unwrap_or_else(BigRational::zero)
    }

    fn to_rational(&self) -> Rational {
        self.clone()
    }
}

fn rational_to_f64(r: &Rational) -> f64 {
    if let Some(v) = ToPrimitive::to_f64(r) {
        if v.is_finite() {
            return v;
        }
    }
    // Very large numerators/denominators: shift both down before dividing.
    let n = r.numer();
    let d = r.denom();
    let shift = n.bits().max(d.bits()).saturating_sub(1000);
    let n = (n.abs() >> shift).to_f64().unwrap_or(f64::MAX);
    let d = (d >> shift).to_f64().unwrap_or(f64::MAX);
    let v = n / d;
    if Signed::is_negative(r) {
        -v
    } else {
        v
    }
}

/// Parse `"a/b"`, `"a"`, or a decimal like `"0.11"` into an exact fraction.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().ok()?;
        let b: BigInt = b.trim().parse().ok()?;
        if b.is_zero() {
            return None;
        }
        return Some(BigRational::new(a, b));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let int_digits = int.trim_start_matches('-');
        if !frac.chars().all(|c| c.is_ascii_digit()) || frac.is_empty() {
            return None;
        }
        let whole: BigInt = if int_digits.is_empty() {
            BigInt::zero()
        } else {
            int_digits.parse().ok()?
        };
        let f: BigInt = frac.parse().ok()?;
        let scale = num_traits::pow(BigInt::from(10u32), frac.len());
        let v = BigRational::new(whole * &scale + f, scale);
        return Some(if neg { -v } else { v });
    }
    let a: BigInt = s.parse().ok()?;
    Some(BigRational::from_integer(a))
}
