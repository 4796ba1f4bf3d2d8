use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use super::fit::least_squares;
use super::{fit_exponent, BoundSpec, Direction, FitReport};
use crate::convexity::delta_h;
use crate::energy::{Engine, Sign};
use crate::error::{Error, Result};
use crate::families::FamilySpec;
use crate::{OrderedSet, Rational, Set};

pub const DEFAULT_SLOPE_TOLERANCE: f64 = 0.1;

/// Relative slack when comparing consecutive ratios, which are computed in
/// floating point.
const TREND_SLACK: f64 = 1e-12;

/// The measurable a bound speaks about, computed on a family member `A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// `T_k(A)`.
    Energy { k: usize },
    /// `|A + ... + A|` with `k` summands.
    SumsetSize { k: usize },
    /// `|A − A|`.
    DifferenceSize,
    /// `E(A, C)` with `C = A`, so `L = N`.
    CrossEnergy,
    /// `|{x : r_{A−A+A−A}(x) ≥ r}|` style tails; see [`tail_check`].
    RichTail { k: usize },
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Energy { k } => write!(f, "T{k}"),
            Quantity::SumsetSize { k } => write!(f, "sum{k}"),
            Quantity::DifferenceSize => f.write_str("diff"),
            Quantity::CrossEnergy => f.write_str("cross"),
            Quantity::RichTail { k } => write!(f, "tail{k}"),
        }
    }
}

impl FromStr for Quantity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let k_of = |rest: &str| -> Result<usize> {
            match rest.parse::<usize>() {
                Ok(k) if k >= 1 => Ok(k),
                _ => Err(Error::input(format!("bad quantity {s:?}"))),
            }
        };
        match s {
            "diff" => Ok(Quantity::DifferenceSize),
            "cross" | "E" => Ok(Quantity::CrossEnergy),
            _ if s.starts_with("sum") => Ok(Quantity::SumsetSize { k: k_of(&s[3..])? }),
            _ if s.starts_with("tail") => Ok(Quantity::RichTail { k: k_of(&s[4..])? }),
            _ if s.starts_with('T') => Ok(Quantity::Energy { k: k_of(&s[1..])? }),
            _ => Err(Error::input(format!("unknown quantity {s:?}"))),
        }
    }
}

impl Quantity {
    fn measure(self, engine: &Engine, a: &Set) -> Result<u128> {
        match self {
            Quantity::Energy { k } => engine.energy_t(&vec![a.clone(); k]),
            Quantity::CrossEnergy => engine.energy_cross(a, a),
            Quantity::SumsetSize { k } => {
                let signs = vec![Sign::Plus; k];
                Ok(engine.signed_sumset(&vec![a.clone(); k], &signs)?.len() as u128)
            }
            Quantity::DifferenceSize => {
                let signs = [Sign::Plus, Sign::Minus];
                Ok(engine.signed_sumset(&[a.clone(), a.clone()], &signs)?.len() as u128)
            }
            Quantity::RichTail { .. } => Err(Error::Unsupported(
                "tail quantities are checked with tail_check, not verify".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyPoint {
    /// Grid parameter passed to the family template.
    pub n_param: usize,
    /// `N = |A|`.
    pub n: usize,
    pub q: u128,
    /// `|B+B−B|/|B|` for the family's base set, when the bound involves `K`.
    pub k: Option<Rational>,
    pub l: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyFlags {
    /// Largest over smallest ratio across the grid.
    pub ratio_spread: f64,
    /// Nonincreasing for upper bounds, nondecreasing for lower bounds.
    pub ratio_monotone: bool,
    pub slope_within_bound: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub bound: BoundSpec,
    pub family: String,
    pub grid: Vec<usize>,
    pub points: Vec<VerifyPoint>,
    /// Fit of `Q` against `N`.
    pub raw_fit: FitReport,
    /// Slope of `Q / (K^a L^b)` against `N`; compared with the N-exponent.
    pub slope: f64,
    pub tolerance: f64,
    pub flags: VerifyFlags,
    pub heuristic: bool,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.flags.ratio_monotone && self.flags.slope_within_bound
    }
}

fn ln_rational(r: &Rational) -> f64 {
    ln_bigint(r.numer()) - ln_bigint(r.denom())
}

fn ln_bigint(v: &BigInt) -> f64 {
    // Shift large values into f64 range before taking the log.
    let bits = v.bits();
    if bits < 1000 {
        v.to_f64().unwrap_or(f64::NAN).ln()
    } else {
        let shift = bits - 64;
        (v >> shift).to_f64().unwrap_or(f64::NAN).ln() + shift as f64 * std::f64::consts::LN_2
    }
}

fn measure_point(
    engine: &Engine,
    family: &FamilySpec,
    bound: &BoundSpec,
    quantity: Quantity,
    n_param: usize,
) -> Result<(VerifyPoint, f64)> {
    let member = family.with_n(n_param);
    let a = member.generate()?;
    let q = quantity.measure(engine, &a)?;
    let n = a.len();
    let l = n;
    let k_exp = bound.total_k_exponent();
    let k = if k_exp.is_zero() {
        None
    } else {
        let base = match member.base() {
            Some(b) => b.generate()?,
            None => a.clone(),
        };
        Some(engine.doubling(&base, "++-")?.k)
    };
    let ln_k = k.as_ref().map(ln_rational).unwrap_or(0.0);
    let to_f = |r: &Rational| r.to_f64().unwrap_or(f64::NAN);
    let ln_q = (q as f64).ln();
    let ln_n = (n as f64).ln();
    let normalized = ln_q - to_f(&k_exp) * ln_k - to_f(&bound.l_exponent) * (l as f64).ln();
    let ratio = (normalized - bound.n_exponent.to_f64() * ln_n).exp();
    Ok((
        VerifyPoint {
            n_param,
            n,
            q,
            k,
            l,
            ratio,
        },
        normalized,
    ))
}

/// Evaluates `bound` on the members of `family` at each grid size.
pub fn verify_bound(
    engine: &Engine,
    family: &FamilySpec,
    quantity: Option<Quantity>,
    bound: &BoundSpec,
    grid: &[usize],
    tolerance: f64,
) -> Result<VerifyReport> {
    if grid.len() < 3 {
        return Err(Error::input("verify needs at least 3 grid sizes"));
    }
    let quantity = quantity.unwrap_or(bound.quantity);
    let measured: Vec<(VerifyPoint, f64)> = grid
        .par_iter()
        .map(|&n| measure_point(engine, family, bound, quantity, n))
        .collect::<Result<_>>()?;
    let raw: Vec<(u64, u128)> = measured.iter().map(|(p, _)| (p.n as u64, p.q)).collect();
    let raw_fit = fit_exponent(&raw)?;
    let xy: Vec<(f64, f64)> = measured
        .iter()
        .map(|(p, norm)| ((p.n as f64).ln(), *norm))
        .collect();
    let (slope, _, _) = least_squares(&xy);
    let points: Vec<VerifyPoint> = measured.into_iter().map(|(p, _)| p).collect();

    let ratios: Vec<f64> = points.iter().map(|p| p.ratio).collect();
    let max = ratios.iter().copied().fold(f64::MIN, f64::max);
    let min = ratios.iter().copied().fold(f64::MAX, f64::min);
    let mut order: Vec<&VerifyPoint> = points.iter().collect();
    order.sort_by_key(|p| p.n);
    let target = bound.n_exponent.to_f64();
    let (ratio_monotone, slope_within_bound) = match bound.direction {
        Direction::Upper => (
            order
                .windows(2)
                .all(|w| w[1].ratio <= w[0].ratio * (1.0 + TREND_SLACK)),
            slope <= target + tolerance,
        ),
        Direction::Lower => (
            order
                .windows(2)
                .all(|w| w[1].ratio >= w[0].ratio * (1.0 - TREND_SLACK)),
            slope >= target - tolerance,
        ),
    };
    Ok(VerifyReport {
        bound: bound.clone(),
        family: family.to_string(),
        grid: grid.to_vec(),
        points,
        raw_fit,
        slope,
        tolerance,
        flags: VerifyFlags {
            ratio_spread: max / min,
            ratio_monotone,
            slope_within_bound,
        },
        heuristic: bound.is_heuristic(),
    })
}

/// Tail profile of `r_{A−A+A−A}` against `N^4 r^{−7/3} Ê`, where `Ê` is the
/// largest energy among the sampled delta-sets `Δ_h A`. Heuristic: `Ê` only
/// stands in for a supremum over all sets of the lower convexity order.
#[derive(Debug, Clone, PartialEq)]
pub struct TailReport {
    pub n: usize,
    pub sampled_h: Vec<usize>,
    pub e_hat: u128,
    /// `(r, |{x : r(x) ≥ r}|, count / (N^4 r^{−7/3} Ê))` for dyadic `r`.
    pub rows: Vec<(u64, u64, f64)>,
    /// Largest ratio: the measured constant.
    pub constant: f64,
    pub heuristic: bool,
}

pub fn tail_check(engine: &Engine, a: &Set, hs: &[usize]) -> Result<TailReport> {
    let n = a.len();
    let mut sampled_h = Vec::new();
    let mut e_hat = 0u128;
    for &h in hs {
        if h == 0 || h + 1 >= n {
            continue;
        }
        let delta = OrderedSet::new(delta_h(a, h)?.terms)?;
        e_hat = e_hat.max(engine.energy_t(&[delta.clone(), delta])?);
        sampled_h.push(h);
    }
    if sampled_h.is_empty() {
        return Err(Error::input("no usable shift h (need 1 <= h <= N-2)"));
    }
    let sets = vec![a.clone(); 4];
    let signs = [Sign::Plus, Sign::Minus, Sign::Plus, Sign::Minus];
    let repr = engine.signed_representation(&sets, &signs)?;
    let mut counts: Vec<u64> = repr.counts().collect();
    counts.sort_unstable();
    let top = counts.last().copied().unwrap_or(0);
    let scale = (n as f64).powi(4) * e_hat as f64;
    let mut rows = Vec::new();
    let mut r = 1u64;
    while r <= top {
        let at_least = (counts.len() - counts.partition_point(|&c| c < r)) as u64;
        let bound = scale * (r as f64).powf(-7.0 / 3.0);
        rows.push((r, at_least, at_least as f64 / bound));
        r *= 2;
    }
    let constant = rows.iter().map(|row| row.2).fold(0.0, f64::max);
    Ok(TailReport {
        n,
        sampled_h,
        e_hat,
        rows,
        constant,
        heuristic: true,
    })
}

/// `max_j 2^{3j}·|X_j| / N^3` over the dyadic classes `X_j` of `r_{A−A}`.
pub fn rich_sum_constant(engine: &Engine, a: &Set) -> Result<Rational> {
    let spectrum = engine.spectrum(&[a.clone(), a.negated()])?;
    let n3 = BigInt::from(a.len()).pow(3);
    Ok(spectrum
        .classes
        .iter()
        .map(|&(j, size)| Rational::new((BigInt::from(1u8) << (3 * j)) * size, n3.clone()))
        .max()
        .unwrap_or_else(Rational::zero))
}
