//! Scalar field abstraction.
//!
//! All geometry in this crate is built from field operations and comparisons
//! only (no square roots), so it runs unchanged over any ordered field. The
//! exact instantiation, [`BigRational`], is the one the decision procedures are
//! meant for; `f64` is available for quick visual exploration but equality
//! tests (fixed points, periodicity) are then only as good as floating point.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Num, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// An ordered field usable as coordinate and length type.
pub trait Scalar:
    Clone + Debug + Display + PartialEq + PartialOrd + Num + Signed + Send + Sync + 'static
{
    /// `numer / denom`; `denom` must be non-zero.
    fn from_ratio(numer: i64, denom: i64) -> Self;

    /// Parses `"p/q"`, `"p"`, and (for floating types) decimal notation.
    fn parse_text(text: &str) -> Result<Self, Error>;

    /// Canonical text form; for rationals `"p/q"` in lowest terms.
    fn to_text(&self) -> String;

    fn to_f64(&self) -> f64;

    fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }

    fn half() -> Self {
        Self::from_ratio(1, 2)
    }

    /// A total order agreeing with equality, for use in lookup tables. It
    /// need not agree with the numeric order, and may be cheaper to compute.
    fn structural_cmp(&self, other: &Self) -> std::cmp::Ordering {
        cmp(self, other)
    }
}

fn split_ratio(text: &str) -> (&str, Option<&str>) {
    match text.split_once('/') {
        Some((p, q)) => (p.trim(), Some(q.trim())),
        None => (text.trim(), None),
    }
}

impl Scalar for BigRational {
    fn structural_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.denom().cmp(other.denom()).then_with(|| self.numer().cmp(other.numer()))
    }

    fn from_ratio(numer: i64, denom: i64) -> Self {
        Ratio::new(BigInt::from(numer), BigInt::from(denom))
    }

    fn parse_text(text: &str) -> Result<Self, Error> {
        let bad = || Error::Parse(format!("invalid rational {text:?}"));
        let (p, q) = split_ratio(text);
        let numer: BigInt = p.parse().map_err(|_| bad())?;
        let denom: BigInt = match q {
            Some(q) => q.parse().map_err(|_| bad())?,
            None => BigInt::from(1),
        };
        if denom.is_zero() {
            return Err(bad());
        }
        Ok(Ratio::new(numer, denom))
    }

    fn to_text(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

impl Scalar for Ratio<i64> {
    fn structural_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.denom().cmp(other.denom()).then_with(|| self.numer().cmp(other.numer()))
    }

    fn from_ratio(numer: i64, denom: i64) -> Self {
        Ratio::new(numer, denom)
    }

    fn parse_text(text: &str) -> Result<Self, Error> {
        let bad = || Error::Parse(format!("invalid rational {text:?}"));
        let (p, q) = split_ratio(text);
        let numer: i64 = p.parse().map_err(|_| bad())?;
        let denom: i64 = match q {
            Some(q) => q.parse().map_err(|_| bad())?,
            None => 1,
        };
        if denom == 0 {
            return Err(bad());
        }
        Ok(Ratio::new(numer, denom))
    }

    fn to_text(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

macro_rules! impl_float_scalar {
    ($f:ty) => {
        impl Scalar for $f {
            fn from_ratio(numer: i64, denom: i64) -> Self {
                numer as $f / denom as $f
            }

            fn parse_text(text: &str) -> Result<Self, Error> {
                let bad = || Error::Parse(format!("invalid number {text:?}"));
                match split_ratio(text) {
                    (p, Some(q)) => {
                        let p: $f = p.parse().map_err(|_| bad())?;
                        let q: $f = q.parse().map_err(|_| bad())?;
                        if q == 0.0 {
                            return Err(bad());
                        }
                        Ok(p / q)
                    }
                    (p, None) => p.parse().map_err(|_| bad()),
                }
            }

            fn to_text(&self) -> String {
                format!("{self}")
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }
        }
    };
}

impl_float_scalar!(f32);
impl_float_scalar!(f64);

/// Total order helper for scalars; incomparable values (NaN) compare equal.
pub(crate) fn cmp<S: Scalar>(a: &S, b: &S) -> std::cmp::Ordering {
    a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal)
}

pub(crate) fn min<S: Scalar>(a: &S, b: &S) -> S {
    if a <= b { a.clone() } else { b.clone() }
}

pub(crate) fn max<S: Scalar>(a: &S, b: &S) -> S {
    if a >= b { a.clone() } else { b.clone() }
}
