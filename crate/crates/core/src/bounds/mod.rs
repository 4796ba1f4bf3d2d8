//! Exponent catalogue, log-log fitting and desk-scale bound verification.

mod fit;
mod verify;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::format_rational;
use crate::Rational;

pub use fit::{fit_exponent, FitReport};
pub use verify::{
    rich_sum_constant, tail_check, verify_bound, Quantity, TailReport, VerifyFlags, VerifyPoint,
    VerifyReport, DEFAULT_SLOPE_TOLERANCE,
};

fn q(p: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(d))
}

/// `α_s = Σ_{j=1}^{s} j·2^{−j}`.
pub fn alpha(s: u32) -> Rational {
    (1..=s).fold(Rational::zero(), |acc, j| {
        acc + Rational::new(BigInt::from(j), BigInt::one() << j)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundId {
    KgEnergy,
    Ikrt,
    TMain,
    CardMain,
    T4Improved,
    T3,
    Tail143,
    ECrossSqrtK,
    ECrossK,
    TNearConvex,
    TNearConvexSym,
    S66Diff,
    S66Sum,
    S66Energy,
    S63Diff,
    S63Sum,
    S63Energy,
}

impl BoundId {
    pub const ALL: [BoundId; 17] = [
        BoundId::KgEnergy,
        BoundId::Ikrt,
        BoundId::TMain,
        BoundId::CardMain,
        BoundId::T4Improved,
        BoundId::T3,
        BoundId::Tail143,
        BoundId::ECrossSqrtK,
        BoundId::ECrossK,
        BoundId::TNearConvex,
        BoundId::TNearConvexSym,
        BoundId::S66Diff,
        BoundId::S66Sum,
        BoundId::S66Energy,
        BoundId::S63Diff,
        BoundId::S63Sum,
        BoundId::S63Energy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundId::KgEnergy => "KG_energy",
            BoundId::Ikrt => "IKRT",
            BoundId::TMain => "T_main",
            BoundId::CardMain => "card_main",
            BoundId::T4Improved => "T4_improved",
            BoundId::T3 => "T3",
            BoundId::Tail143 => "tail_14_3",
            BoundId::ECrossSqrtK => "E_cross_sqrtK",
            BoundId::ECrossK => "E_cross_K",
            BoundId::TNearConvex => "T_near_convex",
            BoundId::TNearConvexSym => "T_near_convex_sym",
            BoundId::S66Diff => "S66_diff",
            BoundId::S66Sum => "S66_sum",
            BoundId::S66Energy => "S66_energy",
            BoundId::S63Diff => "S63_diff",
            BoundId::S63Sum => "S63_sum",
            BoundId::S63Energy => "S63_energy",
        }
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BoundId::ALL
            .iter()
            .copied()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::input(format!("unknown bound id {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Upper,
    Lower,
}

/// An exponent, remembering whether it was stated as a decimal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exponent {
    pub value: Rational,
    pub decimal: bool,
}

impl Exponent {
    pub fn exact(value: Rational) -> Self {
        Exponent {
            value,
            decimal: false,
        }
    }

    /// `digits / 10^places`, e.g. `(24554, 4)` for 2.4554.
    pub fn decimal(digits: i64, places: u32) -> Self {
        Exponent {
            value: Rational::new(BigInt::from(digits), BigInt::from(10u64.pow(places))),
            decimal: true,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.decimal {
            let mut d = self.value.denom().clone();
            let mut places = 0;
            while d > BigInt::one() {
                d /= 10;
                places += 1;
            }
            write!(f, "{:.*}", places, self.to_f64())
        } else {
            f.write_str(&format_rational(&self.value))
        }
    }
}

/// Parameters selecting an instance of a parametric bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundParams {
    /// Convexity order.
    pub s: u32,
    /// Number of summands (IKRT only; others derive it from `s`).
    pub k: u32,
}

impl Default for BoundParams {
    fn default() -> Self {
        BoundParams { s: 1, k: 2 }
    }
}

/// A bound of the shape `Q ≪ (Π K_i^{k_exponent}) · N^{n_exponent} · L^{l_exponent}
/// · r^{r_exponent} · E_{s−1}^{sup_energy_exponent}` (or `≫` for lower bounds).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundSpec {
    pub id: BoundId,
    pub quantity: Quantity,
    pub direction: Direction,
    pub n_exponent: Exponent,
    /// Exponent on each doubling constant `K_i`.
    pub k_exponent: Rational,
    /// Number of `K_i` factors (all equal in symmetric experiments).
    pub k_factors: u32,
    pub l_exponent: Rational,
    pub r_exponent: Rational,
    /// Power of the supremum energy `E_{s−1}`; such bounds are only
    /// checkable through a sampled proxy.
    pub sup_energy_exponent: Rational,
    /// Stated up to logarithmic factors.
    pub log_loss: bool,
}

impl BoundSpec {
    fn new(id: BoundId, quantity: Quantity, direction: Direction, n_exponent: Exponent) -> Self {
        BoundSpec {
            id,
            quantity,
            direction,
            n_exponent,
            k_exponent: Rational::zero(),
            k_factors: 0,
            l_exponent: Rational::zero(),
            r_exponent: Rational::zero(),
            sup_energy_exponent: Rational::zero(),
            log_loss: false,
        }
    }

    /// Total exponent on `K` when every `K_i` equals `K`.
    pub fn total_k_exponent(&self) -> Rational {
        &self.k_exponent * Rational::from_integer(self.k_factors.into())
    }

    pub fn is_heuristic(&self) -> bool {
        !self.sup_energy_exponent.is_zero()
    }
}

/// `2^{s+1} − 1 − s + α_s`.
fn main_n_exponent(s: u32) -> Rational {
    Rational::from_integer(BigInt::from((1i64 << (s + 1)) - 1 - s as i64)) + alpha(s)
}

pub fn predicted(id: BoundId, params: BoundParams) -> Result<BoundSpec> {
    let BoundParams { s, k } = params;
    let int = |v: i64| Rational::from_integer(v.into());
    let energy = |k: u32| Quantity::Energy { k: k as usize };
    if s > 20 {
        return Err(Error::input("s must be at most 20"));
    }
    let two_pow_s = 1u32 << s;
    let spec = match id {
        BoundId::KgEnergy => {
            BoundSpec::new(id, energy(2), Direction::Upper, Exponent::exact(q(5, 2)))
        }
        BoundId::Ikrt => {
            if !(1..=62).contains(&k) {
                return Err(Error::input("IKRT needs 1 <= k <= 62"));
            }
            // 2k − 2 + 2^{−(k−1)}
            let e = int(2 * k as i64 - 2) + Rational::new(BigInt::one(), BigInt::one() << (k - 1));
            BoundSpec::new(id, energy(k), Direction::Upper, Exponent::exact(e))
        }
        BoundId::TMain => BoundSpec::new(
            id,
            energy(two_pow_s),
            Direction::Upper,
            Exponent::exact(main_n_exponent(s)),
        ),
        BoundId::CardMain => {
            if s == 0 {
                return Err(Error::input("card_main needs s >= 1"));
            }
            BoundSpec::new(
                id,
                Quantity::SumsetSize {
                    k: two_pow_s as usize,
                },
                Direction::Lower,
                Exponent::exact(int(1 + s as i64) - alpha(s)),
            )
        }
        BoundId::T4Improved => {
            let mut b = BoundSpec::new(
                id,
                energy(4),
                Direction::Upper,
                Exponent::exact(int(4) + q(24, 13)),
            );
            b.log_loss = true;
            b
        }
        BoundId::T3 => BoundSpec::new(
            id,
            energy(3),
            Direction::Upper,
            Exponent::exact(int(4) + q(1, 9)),
        ),
        BoundId::Tail143 => {
            let mut b = BoundSpec::new(
                id,
                Quantity::RichTail { k: 4 },
                Direction::Upper,
                Exponent::exact(int(4)),
            );
            b.r_exponent = -q(7, 3);
            b.sup_energy_exponent = int(1);
            b.log_loss = true;
            b
        }
        BoundId::ECrossSqrtK => {
            let mut b = BoundSpec::new(
                id,
                Quantity::CrossEnergy,
                Direction::Upper,
                Exponent::exact(int(1)),
            );
            b.k_exponent = q(1, 2);
            b.k_factors = 1;
            b.l_exponent = q(3, 2);
            b
        }
        BoundId::ECrossK => {
            let mut b = BoundSpec::new(
                id,
                Quantity::CrossEnergy,
                Direction::Upper,
                Exponent::exact(int(1)),
            );
            b.k_exponent = int(1);
            b.k_factors = 1;
            b.l_exponent = q(3, 2);
            b
        }
        BoundId::TNearConvex => {
            let mut b = BoundSpec::new(
                id,
                energy(two_pow_s),
                Direction::Upper,
                Exponent::exact(main_n_exponent(s)),
            );
            // 2 − (2 + 2s − 2α_s)·2^{−s}
            let inner = int(2 + 2 * s as i64) - int(2) * alpha(s);
            b.k_exponent = int(2) - inner / int(two_pow_s as i64);
            b.k_factors = two_pow_s;
            b
        }
        BoundId::TNearConvexSym => {
            let mut b = BoundSpec::new(
                id,
                energy(two_pow_s),
                Direction::Upper,
                Exponent::exact(main_n_exponent(s)),
            );
            // 2^{s+1} − 2 − 2s + 2α_s
            b.k_exponent = int((1i64 << (s + 1)) - 2 - 2 * s as i64) + int(2) * alpha(s);
            b.k_factors = 1;
            b
        }
        BoundId::S66Diff => lower_logged(id, Quantity::DifferenceSize, Exponent::exact(q(8, 5))),
        BoundId::S66Sum => lower_logged(
            id,
            Quantity::SumsetSize { k: 2 },
            Exponent::exact(q(30, 19)),
        ),
        BoundId::S66Energy => {
            let mut b = BoundSpec::new(id, energy(2), Direction::Upper, Exponent::exact(q(32, 13)));
            b.log_loss = true;
            b
        }
        BoundId::S63Diff => lower_logged(
            id,
            Quantity::DifferenceSize,
            Exponent::exact(int(1) + q(151, 234)),
        ),
        BoundId::S63Sum => lower_logged(
            id,
            Quantity::SumsetSize { k: 2 },
            Exponent::exact(int(1) + q(229, 309)),
        ),
        BoundId::S63Energy => {
            BoundSpec::new(id, energy(2), Direction::Upper, Exponent::decimal(24554, 4))
        }
    };
    Ok(spec)
}

fn lower_logged(id: BoundId, quantity: Quantity, e: Exponent) -> BoundSpec {
    let mut b = BoundSpec::new(id, quantity, Direction::Lower, e);
    b.log_loss = true;
    b
}
