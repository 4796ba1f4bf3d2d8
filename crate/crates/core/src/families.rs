//! Deterministic and seeded set families.
//!
//! Textual forms (`key=value` pairs after the family name):
//!
//! | form | set |
//! |------|-----|
//! | `interval:n=N` | `{1, ..., N}` |
//! | `power:n=N,m=M` | `{i^M : 1 ≤ i ≤ N}` |
//! | `ap:n=N,start=A,step=D` | `{A + iD : 0 ≤ i < N}` |
//! | `rsc:n=N,s=S,seed=X,gap=G` | random S-convex set, see [`gen_random_s_convex`] |
//! | `gap:dims=8x8,steps=1/1:1000/1,base=0` | generalized arithmetic progression |
//! | `composed:f=<function>,inner=<family>` | image of the inner family under `f` |
//!
//! `n` may be omitted to form a template that [`FamilySpec::with_n`] completes.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};

use crate::convexity::convexity_order;
use crate::error::{Error, Result};
use crate::function::{eval_fn, FunctionSpec};
use crate::rng::SplitMix64;
use crate::scalar::{format_rational, parse_rational};
use crate::{Rational, Set};

pub fn gen_power(n: usize, m: u32) -> Result<Set> {
    if n == 0 || m == 0 {
        return Err(Error::input("power family needs n >= 1 and m >= 1"));
    }
    Set::from_sorted(
        (1..=n as i64)
            .map(|i| Rational::from_integer(num_traits::pow(i.into(), m as usize)))
            .collect(),
    )
}

/// Draws `N − s` strictly increasing positive integers with gaps uniform in
/// `[1, gap_bound]`, then applies prefix summation `s` times. Each prefix
/// summation starts at 1 and adds one element, so consecutive differences of
/// the result recover the previous level exactly and the set is s-convex by
/// construction.
pub fn gen_random_s_convex(n: usize, s: usize, seed: u64, gap_bound: u64) -> Result<Set> {
    if n < s + 2 {
        return Err(Error::input(format!(
            "random s-convex set needs N >= s+2 (N={n}, s={s})"
        )));
    }
    if gap_bound == 0 {
        return Err(Error::input("gap bound must be positive"));
    }
    let mut rng = SplitMix64::new(seed);
    let mut level: Vec<u64> = Vec::with_capacity(n);
    let mut x = 0u64;
    for _ in 0..n - s {
        x += rng.one_to(gap_bound);
        level.push(x);
    }
    let mut level: Vec<num_bigint::BigInt> = level.into_iter().map(Into::into).collect();
    for _ in 0..s {
        let mut next = Vec::with_capacity(level.len() + 1);
        let mut acc = num_bigint::BigInt::one();
        next.push(acc.clone());
        for d in &level {
            acc += d;
            next.push(acc.clone());
        }
        level = next;
    }
    Set::from_sorted(level.into_iter().map(Rational::from_integer).collect())
}

/// `{base + Σ_j i_j·step_j : 0 ≤ i_j < dims_j}`; fails if two index vectors collide.
pub fn gen_gap(dims: &[usize], steps: &[Rational], base: &Rational) -> Result<Set> {
    if dims.is_empty() || dims.len() != steps.len() {
        return Err(Error::input(
            "GAP needs rank >= 1 and one step per dimension",
        ));
    }
    if dims.contains(&0) {
        return Err(Error::input("GAP dimensions must be positive"));
    }
    if steps.iter().any(|s| !s.is_positive()) {
        return Err(Error::input("GAP steps must be positive"));
    }
    let mut values = vec![base.clone()];
    for (&d, step) in dims.iter().zip(steps) {
        let mut next = Vec::with_capacity(values.len() * d);
        for v in &values {
            let mut x = v.clone();
            for _ in 0..d {
                next.push(x.clone());
                x += step;
            }
        }
        values = next;
    }
    let expected = values.len();
    let set = Set::new(values)?;
    if set.len() != expected {
        return Err(Error::input(format!(
            "improper GAP: {} distinct elements out of {expected}",
            set.len()
        )));
    }
    Ok(set)
}

pub fn gen_ap(n: usize, start: &Rational, step: &Rational) -> Result<Set> {
    if n == 0 || step.is_zero() {
        return Err(Error::input("AP needs n >= 1 and a non-zero step"));
    }
    Set::new(
        (0..n)
            .map(|i| start + step * Rational::from_integer(i.into()))
            .collect(),
    )
}

/// `f(B)` for a near-convex construction.
pub fn gen_composed(f: &FunctionSpec, inner: &Set) -> Result<Set> {
    eval_fn(f, inner)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilySpec {
    Interval {
        n: Option<usize>,
    },
    Power {
        n: Option<usize>,
        m: u32,
    },
    Ap {
        n: Option<usize>,
        start: Rational,
        step: Rational,
    },
    RandomSConvex {
        n: Option<usize>,
        s: usize,
        seed: u64,
        gap: u64,
    },
    Gap {
        dims: Vec<usize>,
        steps: Vec<Rational>,
        base: Rational,
    },
    Composed {
        f: FunctionSpec,
        inner: Box<FamilySpec>,
    },
}

impl FamilySpec {
    /// Fills in the size parameter. For a GAP every dimension becomes `n`.
    pub fn with_n(&self, n: usize) -> FamilySpec {
        let mut spec = self.clone();
        match &mut spec {
            FamilySpec::Interval { n: slot }
            | FamilySpec::Power { n: slot, .. }
            | FamilySpec::Ap { n: slot, .. }
            | FamilySpec::RandomSConvex { n: slot, .. } => *slot = Some(n),
            FamilySpec::Gap { dims, .. } => dims.iter_mut().for_each(|d| *d = n),
            FamilySpec::Composed { inner, .. } => **inner = inner.with_n(n),
        }
        spec
    }

    /// Replaces the seed of every random component.
    pub fn with_seed(&self, seed: u64) -> FamilySpec {
        let mut spec = self.clone();
        match &mut spec {
            FamilySpec::RandomSConvex { seed: slot, .. } => *slot = seed,
            FamilySpec::Composed { inner, .. } => **inner = inner.with_seed(seed),
            _ => {}
        }
        spec
    }

    /// Base set `B` of a composed family (the set whose doubling is measured).
    pub fn base(&self) -> Option<&FamilySpec> {
        match self {
            FamilySpec::Composed { inner, .. } => Some(inner),
            _ => None,
        }
    }

    pub fn generate(&self) -> Result<Set> {
        let need = |n: &Option<usize>| n.ok_or_else(|| Error::input(format!("{self}: missing n")));
        match self {
            FamilySpec::Interval { n } => Set::interval(need(n)?),
            FamilySpec::Power { n, m } => gen_power(need(n)?, *m),
            FamilySpec::Ap { n, start, step } => gen_ap(need(n)?, start, step),
            FamilySpec::RandomSConvex { n, s, seed, gap } => {
                gen_random_s_convex(need(n)?, *s, *seed, *gap)
            }
            FamilySpec::Gap { dims, steps, base } => gen_gap(dims, steps, base),
            FamilySpec::Composed { f, inner } => gen_composed(f, &inner.generate()?),
        }
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n_part = |n: &Option<usize>| n.map(|n| format!("n={n},")).unwrap_or_default();
        match self {
            FamilySpec::Interval { n } => {
                write!(f, "interval:{}", n_part(n).trim_end_matches(','))
            }
            FamilySpec::Power { n, m } => write!(f, "power:{}m={m}", n_part(n)),
            FamilySpec::Ap { n, start, step } => write!(
                f,
                "ap:{}start={},step={}",
                n_part(n),
                format_rational(start),
                format_rational(step)
            ),
            FamilySpec::RandomSConvex { n, s, seed, gap } => {
                write!(f, "rsc:{}s={s},seed={seed},gap={gap}", n_part(n))
            }
            FamilySpec::Gap { dims, steps, base } => {
                let dims: Vec<String> = dims.iter().map(ToString::to_string).collect();
                let steps: Vec<String> = steps.iter().map(format_rational).collect();
                write!(
                    f,
                    "gap:dims={},steps={},base={}",
                    dims.join("x"),
                    steps.join(":"),
                    format_rational(base)
                )
            }
            FamilySpec::Composed { f: func, inner } => write!(f, "composed:f={func},inner={inner}"),
        }
    }
}

fn parse_pairs(body: &str) -> Result<Vec<(&str, &str)>> {
    if body.trim().is_empty() {
        return Ok(Vec::new());
    }
    body.split(',')
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::input(format!("expected key=value, got {kv:?}")))
        })
        .collect()
}

struct Params<'a> {
    family: &'a str,
    pairs: Vec<(&'a str, &'a str)>,
}

impl<'a> Params<'a> {
    fn take(&mut self, key: &str) -> Option<&'a str> {
        let i = self.pairs.iter().position(|(k, _)| *k == key)?;
        Some(self.pairs.remove(i).1)
    }

    fn required(&mut self, key: &str) -> Result<&'a str> {
        self.take(key)
            .ok_or_else(|| Error::input(format!("{}: missing parameter {key}", self.family)))
    }

    fn number<T: FromStr>(&self, key: &str, v: &str) -> Result<T> {
        v.parse()
            .map_err(|_| Error::input(format!("{}: bad value {v:?} for {key}", self.family)))
    }

    fn opt_n(&mut self) -> Result<Option<usize>> {
        self.take("n").map(|v| self.number("n", v)).transpose()
    }

    fn finish(self) -> Result<()> {
        match self.pairs.first() {
            None => Ok(()),
            Some((k, _)) => Err(Error::input(format!(
                "{}: unknown parameter {k}",
                self.family
            ))),
        }
    }
}

impl FromStr for FamilySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (family, body) = s.split_once(':').unwrap_or((s, ""));
        if family == "composed" {
            let rest = body
                .strip_prefix("f=")
                .ok_or_else(|| Error::input("composed: expected f=<function>,inner=<family>"))?;
            let (f, inner) = rest
                .split_once(",inner=")
                .ok_or_else(|| Error::input("composed: missing inner=<family>"))?;
            return Ok(FamilySpec::Composed {
                f: f.parse()?,
                inner: Box::new(inner.parse()?),
            });
        }
        let mut p = Params {
            family,
            pairs: parse_pairs(body)?,
        };
        let spec = match family {
            "interval" => FamilySpec::Interval { n: p.opt_n()? },
            "power" => {
                let n = p.opt_n()?;
                let v = p.required("m")?;
                FamilySpec::Power {
                    n,
                    m: p.number("m", v)?,
                }
            }
            "ap" => {
                let n = p.opt_n()?;
                let start = p.take("start").map(parse_rational).transpose()?;
                let step = p.take("step").map(parse_rational).transpose()?;
                FamilySpec::Ap {
                    n,
                    start: start.unwrap_or_else(Rational::one),
                    step: step.unwrap_or_else(Rational::one),
                }
            }
            "rsc" => {
                let n = p.opt_n()?;
                let sv = p.required("s")?;
                let s = p.number("s", sv)?;
                let seed = match p.take("seed") {
                    Some(v) => p.number("seed", v)?,
                    None => 0,
                };
                let gap = match p.take("gap") {
                    Some(v) => p.number("gap", v)?,
                    None => 8,
                };
                FamilySpec::RandomSConvex { n, s, seed, gap }
            }
            "gap" => {
                let dims = p.required("dims")?;
                let dims = dims
                    .split('x')
                    .map(|d| p.number("dims", d))
                    .collect::<Result<Vec<usize>>>()?;
                let steps = match p.take("steps") {
                    Some(v) => v
                        .split(':')
                        .map(parse_rational)
                        .collect::<Result<Vec<_>>>()?,
                    None => vec![Rational::one(); dims.len()],
                };
                let base = p.take("base").map(parse_rational).transpose()?;
                FamilySpec::Gap {
                    dims,
                    steps,
                    base: base.unwrap_or_else(Rational::zero),
                }
            }
            other => return Err(Error::input(format!("unknown family {other:?}"))),
        };
        p.finish()?;
        Ok(spec)
    }
}

/// Convenience for reports: the generated set and its convexity order.
pub fn describe(spec: &FamilySpec) -> Result<(Set, crate::convexity::ConvexityOrder)> {
    let set = spec.generate()?;
    let order = convexity_order(&set);
    Ok((set, order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convexity::ConvexityOrder;
    use crate::scalar::rational_from_ratio;

    fn ints(set: &Set) -> Vec<i64> {
        set.as_i64().unwrap()
    }

    #[test]
    fn power_examples() {
        assert_eq!(ints(&gen_power(5, 2).unwrap()), vec![1, 4, 9, 16, 25]);
        assert_eq!(ints(&gen_power(6, 1).unwrap()), vec![1, 2, 3, 4, 5, 6]);
        assert_eq!(ints(&gen_power(3, 3).unwrap()), vec![1, 8, 27]);
    }

    #[test]
    fn random_s_convex_is_deterministic_and_convex() {
        let a = gen_random_s_convex(8, 2, 7, 4).unwrap();
        let b = gen_random_s_convex(8, 2, 7, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 8);
        assert!(convexity_order(&a).at_least(2));
        let base = gen_random_s_convex(10, 0, 3, 5).unwrap();
        assert_eq!(base.len(), 10);
        assert!(base.iter().all(|v| v.is_positive()));
        assert!(matches!(
            gen_random_s_convex(3, 2, 0, 4),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn gap_examples() {
        let one = rational_from_ratio(1, 1);
        let b = gen_gap(&[7], std::slice::from_ref(&one), &one).unwrap();
        assert_eq!(ints(&b), (1..=7).collect::<Vec<_>>());
        let g = gen_gap(
            &[4, 4],
            &[one.clone(), rational_from_ratio(100, 1)],
            &Rational::zero(),
        )
        .unwrap();
        assert_eq!(g.len(), 16);
        let single = gen_gap(&[1], std::slice::from_ref(&one), &one).unwrap();
        assert_eq!(single.len(), 1);
        let improper = gen_gap(&[3, 2], &[one.clone(), rational_from_ratio(2, 1)], &one);
        assert!(matches!(improper, Err(Error::Input(_))));
    }

    #[test]
    fn composed_agrees_with_direct_families() {
        let root = FunctionSpec::IntegerRoot(2);
        let a = gen_composed(&root, &gen_power(9, 2).unwrap()).unwrap();
        assert_eq!(a, Set::interval(9).unwrap());
        let cubes =
            gen_composed(&FunctionSpec::IntegerPower(3), &Set::interval(9).unwrap()).unwrap();
        assert_eq!(cubes, gen_power(9, 3).unwrap());
    }

    #[test]
    fn spec_round_trip() {
        for s in [
            "power:n=64,m=3",
            "rsc:n=64,s=2,seed=7,gap=8",
            "gap:dims=8x8,steps=1:1000,base=0",
            "composed:f=root:2,inner=power:n=64,m=2",
            "composed:f=poly:0,1,1,inner=gap:dims=4x4,steps=1:100,base=1",
            "interval:n=5",
            "ap:n=4,start=1/2,step=3",
            "power:m=2",
        ] {
            let spec: FamilySpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        let spec: FamilySpec = "gap:dims=8x8,steps=1/1:1000/1,base=0".parse().unwrap();
        assert_eq!(spec.generate().unwrap().len(), 64);
    }

    #[test]
    fn malformed_specs() {
        for s in [
            "power:n=5",
            "power:n=x,m=2",
            "blob:n=3",
            "power:n=5,m=2,q=1",
            "composed:inner=x",
        ] {
            assert!(s.parse::<FamilySpec>().is_err(), "{s}");
        }
        assert!("power:m=2"
            .parse::<FamilySpec>()
            .unwrap()
            .generate()
            .is_err());
    }

    #[test]
    fn templates_fill_n() {
        let t: FamilySpec = "composed:f=root:2,inner=power:m=2".parse().unwrap();
        let a = t.with_n(12).generate().unwrap();
        assert_eq!(a, Set::interval(12).unwrap());
        let (set, order) = describe(&"power:n=5,m=2".parse().unwrap()).unwrap();
        assert_eq!(set.len(), 5);
        assert_eq!(order, ConvexityOrder::Exact(1));
    }
}
