//! Scalar backends.
//!
//! Every geometric computation in this crate is generic over [`Scalar`]. Two
//! backends are provided: [`Rational`] (arbitrary precision, no rounding) and
//! `f64` (zero tests and rank decisions go through a [`Tolerance`]).

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational numbers.
pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseScalarError {
    #[error("empty scalar literal")]
    Empty,
    #[error("`{0}` is not a rational literal (expected `p`, `p/q` or a finite decimal)")]
    NotRational(String),
    #[error("`{0}` is not a number")]
    NotNumber(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// A field element usable by every algorithm in the crate.
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True when arithmetic is exact and zero tests need no tolerance.
    const EXACT: bool;
    /// Short backend name used in reports.
    const BACKEND: &'static str;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(n: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn is_exact_zero(&self) -> bool;
    fn to_f64(&self) -> f64;
    /// Parses a literal in this backend (`p`, `p/q`, decimals; floats also accept exponents).
    fn parse_literal(s: &str) -> Result<Self, ParseScalarError>;

    fn abs_f64(&self) -> f64 {
        self.to_f64().abs()
    }

    fn half() -> Self {
        Self::from_ratio(1, 2)
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;
    const BACKEND: &'static str = "rational";

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn is_exact_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn parse_literal(s: &str) -> Result<Self, ParseScalarError> {
        parse_rational(s)
    }
    fn abs_f64(&self) -> f64 {
        ToPrimitive::to_f64(&Signed::abs(self)).unwrap_or(f64::INFINITY)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    const BACKEND: &'static str = "float";

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn is_exact_zero(&self) -> bool {
        *self == 0.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn parse_literal(s: &str) -> Result<Self, ParseScalarError> {
        let t = s.trim();
        if t.is_empty() {
            return Err(ParseScalarError::Empty);
        }
        if let Ok(q) = parse_rational(t) {
            return Ok(Scalar::to_f64(&q));
        }
        f64::from_str(t).map_err(|_| ParseScalarError::NotNumber(s.to_string()))
    }
}

/// Parses `p`, `p/q` or a finite decimal such as `-1.25` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational, ParseScalarError> {
    let t = s.trim();
    if t.is_empty() {
        return Err(ParseScalarError::Empty);
    }
    if let Some((p, q)) = t.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| ParseScalarError::NotRational(s.into()))?;
        let q = BigInt::from_str(q.trim()).map_err(|_| ParseScalarError::NotRational(s.into()))?;
        if q.is_zero() {
            return Err(ParseScalarError::ZeroDenominator(s.into()));
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((int, frac)) = t.split_once('.') {
        let neg = int.starts_with('-');
        let digits = int.trim_start_matches(['-', '+']);
        if !digits.chars().all(|c| c.is_ascii_digit())
            || !frac.chars().all(|c| c.is_ascii_digit())
            || (digits.is_empty() && frac.is_empty())
        {
            return Err(ParseScalarError::NotRational(s.into()));
        }
        let joined = format!("{digits}{frac}");
        let mut num = BigInt::from_str(if joined.is_empty() { "0" } else { &joined })
            .map_err(|_| ParseScalarError::NotRational(s.into()))?;
        if neg {
            num = -num;
        }
        let den = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(BigRational::new(num, den));
    }
    BigInt::from_str(t)
        .map(BigRational::from_integer)
        .map_err(|_| ParseScalarError::NotRational(s.into()))
}

/// Zero-test policy for the floating backend. Ignored by exact backends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Relative threshold; an entry is zero when `|x| <= rel * max(1, scale)`.
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rel: 1e-9 }
    }
}

impl Tolerance {
    pub fn new(rel: f64) -> Self {
        Tolerance { rel }
    }

    pub fn threshold(&self, scale: f64) -> f64 {
        self.rel * scale.max(1.0)
    }

    pub fn is_zero<S: Scalar>(&self, x: &S, scale: f64) -> bool {
        if S::EXACT {
            x.is_exact_zero()
        } else {
            x.abs_f64() <= self.threshold(scale)
        }
    }

    /// True when a retained (nonzero) magnitude is within 10x of the threshold.
    pub fn is_marginal(&self, magnitude: f64, scale: f64) -> bool {
        magnitude > self.threshold(scale) && magnitude <= 10.0 * self.threshold(scale)
    }

    pub fn all_zero<'a, S: Scalar>(&self, xs: impl IntoIterator<Item = &'a S>, scale: f64) -> bool {
        xs.into_iter().all(|x| self.is_zero(x, scale))
    }
}

/// Sum of a sequence of scalars.
pub fn sum<S: Scalar>(xs: impl IntoIterator<Item = S>) -> S {
    xs.into_iter().fold(S::zero(), |acc, x| acc + x)
}

/// Parses a literal as a rational, returning `None` when it needs the float backend.
pub fn try_exact(s: &str) -> Option<Rational> {
    parse_rational(s).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rational_literals() {
        assert_eq!(parse_rational("3").unwrap(), Rational::from_i64(3));
        assert_eq!(parse_rational("-1/2").unwrap(), Rational::from_ratio(-1, 2));
        assert_eq!(parse_rational(" 6/4 ").unwrap(), Rational::from_ratio(3, 2));
        assert_eq!(parse_rational("-1.25").unwrap(), Rational::from_ratio(-5, 4));
        assert_eq!(parse_rational(".5").unwrap(), Rational::from_ratio(1, 2));
        assert!(matches!(parse_rational("1/0"), Err(ParseScalarError::ZeroDenominator(_))));
        assert!(parse_rational("1e-3").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn float_backend_accepts_exponents() {
        assert_eq!(f64::parse_literal("1e-3").unwrap(), 1e-3);
        assert_eq!(f64::parse_literal("1/4").unwrap(), 0.25);
        assert!(f64::parse_literal("abc").is_err());
    }

    #[test]
    fn rational_display_is_p_over_q() {
        assert_eq!(Rational::from_ratio(-3, 6).to_string(), "-1/2");
        assert_eq!(Rational::from_i64(4).to_string(), "4");
    }

    #[test]
    fn tolerance_is_scale_aware() {
        let tol = Tolerance::default();
        assert!(tol.is_zero(&1e-10_f64, 1.0));
        assert!(!tol.is_zero(&1e-8_f64, 1.0));
        assert!(tol.is_zero(&1e-8_f64, 100.0));
        assert!(!tol.is_zero(&Rational::from_ratio(1, 1_000_000_000_000), 1.0));
        assert!(tol.is_marginal(5e-9, 1.0));
    }
}
