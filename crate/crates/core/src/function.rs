//! Exact function specifications used to build s-convex and near-convex sets.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_rational};
use crate::{Rational, Set};

/// Textual forms: `poly:c0,c1,...,cd` (coefficients of 1, x, ..., x^d),
/// `pow:m` (x^m) and `root:m` (the real m-th root, exact on m-th powers).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FunctionSpec {
    Polynomial(Vec<Rational>),
    IntegerPower(u32),
    IntegerRoot(u32),
}

impl FunctionSpec {
    pub fn identity() -> Self {
        FunctionSpec::Polynomial(vec![Rational::zero(), Rational::one()])
    }

    /// Polynomial with trailing zero coefficients removed.
    pub fn polynomial(mut coefficients: Vec<Rational>) -> Self {
        while coefficients.last().is_some_and(Zero::is_zero) {
            coefficients.pop();
        }
        FunctionSpec::Polynomial(coefficients)
    }

    /// Coefficient form, when the function is a polynomial.
    pub fn as_polynomial(&self) -> Option<Vec<Rational>> {
        match self {
            FunctionSpec::Polynomial(c) => Some(c.clone()),
            FunctionSpec::IntegerPower(m) => {
                let mut c = vec![Rational::zero(); *m as usize + 1];
                c[*m as usize] = Rational::one();
                Some(c)
            }
            FunctionSpec::IntegerRoot(1) => Some(vec![Rational::zero(), Rational::one()]),
            FunctionSpec::IntegerRoot(_) => None,
        }
    }

    /// Exact value at `x`, or `DomainError` when it is not rational.
    pub fn eval(&self, x: &Rational) -> Result<Rational> {
        match self {
            FunctionSpec::Polynomial(c) => Ok(horner(c, x)),
            FunctionSpec::IntegerPower(m) => Ok(num_traits::pow(x.clone(), *m as usize)),
            FunctionSpec::IntegerRoot(m) => exact_root(x, *m),
        }
    }

    pub fn degree(&self) -> Option<usize> {
        self.as_polynomial().map(|c| c.len().saturating_sub(1))
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::Polynomial(c) => {
                let parts: Vec<String> = if c.is_empty() {
                    vec!["0".into()]
                } else {
                    c.iter().map(format_rational).collect()
                };
                write!(f, "poly:{}", parts.join(","))
            }
            FunctionSpec::IntegerPower(m) => write!(f, "pow:{m}"),
            FunctionSpec::IntegerRoot(m) => write!(f, "root:{m}"),
        }
    }
}

impl FromStr for FunctionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| Error::input(format!("function spec {s:?} lacks ':'")))?;
        let positive = |a: &str| -> Result<u32> {
            match a.trim().parse::<u32>() {
                Ok(m) if m >= 1 => Ok(m),
                _ => Err(Error::input(format!(
                    "expected positive integer, got {a:?}"
                ))),
            }
        };
        match kind {
            "poly" => {
                let coeffs = arg
                    .split(',')
                    .map(parse_rational)
                    .collect::<Result<Vec<_>>>()?;
                Ok(FunctionSpec::polynomial(coeffs))
            }
            "pow" => Ok(FunctionSpec::IntegerPower(positive(arg)?)),
            "root" => Ok(FunctionSpec::IntegerRoot(positive(arg)?)),
            other => Err(Error::input(format!("unknown function kind {other:?}"))),
        }
    }
}

fn horner(coefficients: &[Rational], x: &Rational) -> Rational {
    coefficients
        .iter()
        .rev()
        .fold(Rational::zero(), |acc, c| acc * x + c)
}

fn exact_int_root(n: &BigInt, m: u32) -> Option<BigInt> {
    if n.is_negative() && m.is_multiple_of(2) {
        return None;
    }
    let r = n.nth_root(m);
    (num_traits::pow(r.clone(), m as usize) == *n).then_some(r)
}

fn exact_root(x: &Rational, m: u32) -> Result<Rational> {
    let p = exact_int_root(x.numer(), m);
    let q = exact_int_root(x.denom(), m);
    match (p, q) {
        (Some(p), Some(q)) => Ok(Rational::new(p, q)),
        _ => Err(Error::domain(format!(
            "{} is not the {m}-th power of a rational",
            format_rational(x)
        ))),
    }
}

/// Image `f(B)`; `f` must be exact and strictly monotone on `B`.
pub fn eval_fn(f: &FunctionSpec, domain: &Set) -> Result<Set> {
    let image = domain
        .iter()
        .map(|x| f.eval(x))
        .collect::<Result<Vec<_>>>()?;
    let increasing = image.windows(2).all(|w| w[0] < w[1]);
    let decreasing = image.windows(2).all(|w| w[0] > w[1]);
    if !(increasing || decreasing) {
        return Err(Error::domain(format!(
            "{f} is not strictly monotone on the domain"
        )));
    }
    Set::new(image)
}

/// The polynomial `f(x+h) − f(x)`, one degree lower than `f`.
pub fn discrete_derivative_fn(f: &FunctionSpec, h: &Rational) -> Result<FunctionSpec> {
    if h.is_zero() {
        return Err(Error::input("step h must be non-zero"));
    }
    let c = match f {
        FunctionSpec::Polynomial(c) => c.clone(),
        FunctionSpec::IntegerPower(_) => f.as_polynomial().expect("powers are polynomials"),
        FunctionSpec::IntegerRoot(_) => {
            return Err(Error::Unsupported(format!(
                "discrete derivative of {f} is not a polynomial"
            )))
        }
    };
    let d = c.len();
    // Taylor shift: coefficient of x^j in f(x+h) is Σ_{i≥j} c_i·C(i,j)·h^{i−j}.
    let shifted: Vec<Rational> = (0..d)
        .map(|j| {
            (j..d).fold(Rational::zero(), |acc, i| {
                let binom = Rational::from_integer(binomial(BigInt::from(i), BigInt::from(j)));
                acc + &c[i] * binom * num_traits::pow(h.clone(), i - j)
            })
        })
        .collect();
    let diff = shifted
        .into_iter()
        .zip(c)
        .map(|(s, orig)| s - orig)
        .collect();
    Ok(FunctionSpec::polynomial(diff))
}

/// Formal derivative of a coefficient vector.
pub fn derivative_coefficients(c: &[Rational]) -> Vec<Rational> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(i, ci)| ci * Rational::from_integer(BigInt::from(i)))
        .collect()
}

/// Largest `s` such that the derivatives `f', ..., f^{(s+1)}` of a polynomial
/// each keep one strict sign at the endpoints and integer points of
/// `[lo, hi]`, i.e. `f^{(0)}, ..., f^{(s)}` are strictly monotone there.
///
/// Sign checks on a grid, not root isolation: the certificate is what the
/// set generators need and nothing more. `None` when `f` is not a polynomial
/// or `f'` itself changes sign.
pub fn certified_convexity(f: &FunctionSpec, lo: &Rational, hi: &Rational) -> Option<usize> {
    let mut c = f.as_polynomial()?;
    let mut points = vec![lo.clone(), hi.clone()];
    let mut k = lo.ceil();
    while &k <= hi {
        points.push(k.clone());
        k += Rational::one();
    }
    let mut monotone_levels = 0usize;
    loop {
        c = derivative_coefficients(&c);
        let signs: Vec<i8> = points
            .iter()
            .map(|x| {
                let v = horner(&c, x);
                if v.is_positive() {
                    1
                } else if v.is_negative() {
                    -1
                } else {
                    0
                }
            })
            .collect();
        let fixed_sign = signs[0] != 0 && signs.iter().all(|s| *s == signs[0]);
        if !fixed_sign {
            return monotone_levels.checked_sub(1);
        }
        monotone_levels += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational_from_ratio;

    fn q(n: i64) -> Rational {
        rational_from_ratio(n, 1)
    }

    fn set(v: &[i64]) -> Set {
        Set::new(v.iter().map(|&x| q(x)).collect()).unwrap()
    }

    #[test]
    fn parse_and_display() {
        for s in ["poly:1,0,3/2", "pow:3", "root:2"] {
            assert_eq!(s.parse::<FunctionSpec>().unwrap().to_string(), s);
        }
        assert!("pow:0".parse::<FunctionSpec>().is_err());
        assert!("sin:1".parse::<FunctionSpec>().is_err());
        assert!("poly".parse::<FunctionSpec>().is_err());
    }

    #[test]
    fn images() {
        let sq = eval_fn(&FunctionSpec::IntegerPower(2), &set(&[1, 2, 3])).unwrap();
        assert_eq!(sq, set(&[1, 4, 9]));
        let rt = eval_fn(&FunctionSpec::IntegerRoot(2), &set(&[1, 4, 9, 16])).unwrap();
        assert_eq!(rt, set(&[1, 2, 3, 4]));
        let err = eval_fn(&FunctionSpec::IntegerRoot(2), &set(&[1, 2])).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn rational_roots() {
        let f = FunctionSpec::IntegerRoot(3);
        assert_eq!(
            f.eval(&rational_from_ratio(-8, 27)).unwrap(),
            rational_from_ratio(-2, 3)
        );
        assert!(FunctionSpec::IntegerRoot(2).eval(&q(-4)).is_err());
    }

    #[test]
    fn non_monotone_image_rejected() {
        let err = eval_fn(&FunctionSpec::IntegerPower(2), &set(&[-1, 1])).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn derivative_examples() {
        let d = discrete_derivative_fn(&FunctionSpec::IntegerPower(2), &q(1)).unwrap();
        assert_eq!(d, FunctionSpec::Polynomial(vec![q(1), q(2)]));
        let d = discrete_derivative_fn(&FunctionSpec::IntegerPower(3), &q(1)).unwrap();
        assert_eq!(d, FunctionSpec::Polynomial(vec![q(1), q(3), q(3)]));
        let d = discrete_derivative_fn(&FunctionSpec::identity(), &q(1)).unwrap();
        assert_eq!(d, FunctionSpec::Polynomial(vec![q(1)]));
        assert!(matches!(
            discrete_derivative_fn(&FunctionSpec::IntegerRoot(2), &q(1)),
            Err(Error::Unsupported(_))
        ));
        assert!(discrete_derivative_fn(&FunctionSpec::identity(), &q(0)).is_err());
    }

    #[test]
    fn derivative_matches_pointwise_difference() {
        let f: FunctionSpec = "poly:3,-1/2,0,2,1".parse().unwrap();
        let h = rational_from_ratio(3, 2);
        let d = discrete_derivative_fn(&f, &h).unwrap();
        assert_eq!(d.degree(), Some(3));
        for x in -5..5 {
            let x = q(x);
            let want = f.eval(&(&x + &h)).unwrap() - f.eval(&x).unwrap();
            assert_eq!(d.eval(&x).unwrap(), want);
        }
    }

    #[test]
    fn certificates() {
        let lo = q(1);
        let hi = q(32);
        assert_eq!(
            certified_convexity(&FunctionSpec::IntegerPower(3), &lo, &hi),
            Some(2)
        );
        assert_eq!(
            certified_convexity(&FunctionSpec::identity(), &lo, &hi),
            Some(0)
        );
        // x^2 - 10x has f' changing sign on [1, 32].
        let f: FunctionSpec = "poly:0,-10,1".parse().unwrap();
        assert_eq!(certified_convexity(&f, &lo, &hi), None);
        assert_eq!(
            certified_convexity(&FunctionSpec::IntegerRoot(2), &lo, &hi),
            None
        );
    }
}
