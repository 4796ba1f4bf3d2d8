//! Exact scalar types usable as set elements.
//!
//! Every counting routine in this crate depends only on the order and
//! equality structure of finite sums, so it is written once against
//! [`Scalar`] and instantiated for machine integers, big integers and
//! arbitrary-precision rationals.

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive};

use crate::error::{Error, Result};

/// An exact, totally ordered ring element.
pub trait Scalar:
    Num + Signed + Clone + Ord + Hash + Debug + Display + Send + Sync + 'static
{
    fn from_i64(v: i64) -> Self;

    /// `Some` iff the value is an integer representable as `i64`.
    fn exact_i64(&self) -> Option<i64>;

    fn approx_f64(&self) -> f64;

    fn to_rational(&self) -> BigRational;
}

macro_rules! impl_scalar_prim {
    ( $( $t:ty ),* ) => {
        $(
            impl Scalar for $t {
                fn from_i64(v: i64) -> Self {
                    v as $t
                }
                fn exact_i64(&self) -> Option<i64> {
                    i64::try_from(*self).ok()
                }
                fn approx_f64(&self) -> f64 {
                    *self as f64
                }
                fn to_rational(&self) -> BigRational {
                    BigRational::from_integer(BigInt::from(*self))
                }
            }
        )*
    };
}

impl_scalar_prim!(i64, i128);

impl Scalar for BigInt {
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn exact_i64(&self) -> Option<i64> {
        self.to_i64()
    }
    fn approx_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
    fn to_rational(&self) -> BigRational {
        BigRational::from_integer(self.clone())
    }
}

impl Scalar for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn exact_i64(&self) -> Option<i64> {
        if self.is_integer() {
            self.numer().to_i64()
        } else {
            None
        }
    }
    fn approx_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn to_rational(&self) -> BigRational {
        self.clone()
    }
}

/// Parses `"-12"`, `"+7"` or `"p/q"` (q > 0) into a rational in lowest terms.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let t = text.trim();
    let bad = || Error::input(format!("malformed rational {t:?}"));
    match t.split_once('/') {
        None => {
            let n = parse_int(t).ok_or_else(bad)?;
            Ok(BigRational::from_integer(n))
        }
        Some((p, q)) => {
            let p = parse_int(p).ok_or_else(bad)?;
            let q = parse_int(q).ok_or_else(bad)?;
            if !q.is_positive() {
                return Err(Error::input(format!(
                    "denominator must be positive in {t:?}"
                )));
            }
            Ok(BigRational::new(p, q))
        }
    }
}

fn parse_int(s: &str) -> Option<BigInt> {
    let s = s.trim();
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    BigInt::from_str(s.strip_prefix('+').unwrap_or(s)).ok()
}

/// Canonical text form: integer, or `p/q` with q > 1.
pub fn format_rational(v: &BigRational) -> String {
    if v.denom().is_one() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

pub fn rational_from_ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

pub fn rational_to_f64(v: &BigRational) -> f64 {
    v.approx_f64()
}
