//! Exact representation functions, energies, moments, rich-sum spectra,
//! signed sumsets, doubling constants and popular difference classes.

mod kernel;
mod spectrum;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::counts::SparseCounts;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::set::OrderedSet;
use crate::Rational;

pub use spectrum::{PopularClass, Spectrum};

/// Default memory budget: 4 GiB.
pub const DEFAULT_MEMORY_BUDGET: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algo {
    Auto,
    Naive,
    Mitm,
    Dense,
}

impl Algo {
    pub const ALL: [Algo; 3] = [Algo::Naive, Algo::Mitm, Algo::Dense];

    pub fn name(self) -> &'static str {
        match self {
            Algo::Auto => "auto",
            Algo::Naive => "naive",
            Algo::Mitm => "mitm",
            Algo::Dense => "dense",
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Algo::Auto),
            "naive" => Ok(Algo::Naive),
            "mitm" => Ok(Algo::Mitm),
            "dense" => Ok(Algo::Dense),
            _ => Err(Error::input(format!("unknown algorithm {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    /// Parses a pattern such as `"++-"`; `−` (U+2212) is accepted for minus.
    pub fn parse_pattern(pattern: &str) -> Result<Vec<Sign>> {
        let signs: Vec<Sign> = pattern
            .chars()
            .map(|c| match c {
                '+' => Ok(Sign::Plus),
                '-' | '\u{2212}' => Ok(Sign::Minus),
                other => Err(Error::input(format!("bad sign {other:?} in {pattern:?}"))),
            })
            .collect::<Result<_>>()?;
        if signs.is_empty() {
            return Err(Error::input("sign pattern must be non-empty"));
        }
        Ok(signs)
    }

    pub fn render(signs: &[Sign]) -> String {
        signs
            .iter()
            .map(|s| if *s == Sign::Plus { '+' } else { '-' })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub memory_budget: u64,
    pub algo: Algo,
    /// Re-check structural inequalities (spectrum sandwich, Cauchy–Schwarz)
    /// on every energy computed.
    pub verify: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            memory_budget: DEFAULT_MEMORY_BUDGET,
            algo: Algo::Auto,
            verify: false,
        }
    }
}

/// The patterned self-sumset `±B ± ... ± B` and its doubling constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoublingReport {
    pub pattern: String,
    pub size: usize,
    pub base_size: usize,
    pub k: Rational,
}

#[derive(Debug, Default)]
pub struct Engine {
    config: EngineConfig,
    checks: AtomicU64,
}

impl Clone for Engine {
    fn clone(&self) -> Self {
        Engine::new(self.config.clone())
    }
}

impl Engine {
    pub fn new(config: EngineConfig) -> Self {
        Engine {
            config,
            checks: AtomicU64::new(0),
        }
    }

    pub fn with_algo(algo: Algo) -> Self {
        Engine::new(EngineConfig {
            algo,
            ..EngineConfig::default()
        })
    }

    pub fn verifying() -> Self {
        Engine::new(EngineConfig {
            verify: true,
            ..EngineConfig::default()
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    /// Number of verify-mode inequality checks that passed so far.
    pub fn checks_passed(&self) -> u64 {
        self.checks.load(Ordering::Relaxed)
    }

    /// Kernel that would run for these summands under the current config.
    pub fn resolve_algo<S: Scalar>(&self, sets: &[OrderedSet<S>]) -> Result<Algo> {
        if sets.is_empty() {
            return Err(Error::input("need at least one summand"));
        }
        kernel::plan(sets).choose(self.config.algo, self.config.memory_budget)
    }

    fn repr<S: Scalar>(&self, sets: &[OrderedSet<S>]) -> Result<kernel::Repr<S>> {
        let algo = self.resolve_algo(sets)?;
        kernel::run(sets, algo)
    }

    /// `r_{A_1+...+A_k}` exactly.
    pub fn representation<S: Scalar>(&self, sets: &[OrderedSet<S>]) -> Result<SparseCounts<S>> {
        Ok(self.repr(sets)?.into_sparse())
    }

    /// `r_{ε_1 A_1 + ... + ε_k A_k}`.
    pub fn signed_representation<S: Scalar>(
        &self,
        sets: &[OrderedSet<S>],
        signs: &[Sign],
    ) -> Result<SparseCounts<S>> {
        self.representation(&apply_signs(sets, signs)?)
    }

    /// `T(A_1, ..., A_k)`: number of solutions of
    /// `a_1 + ... + a_k = a_1' + ... + a_k'`.
    pub fn energy_t<S: Scalar>(&self, sets: &[OrderedSet<S>]) -> Result<u128> {
        let repr = self.repr(sets)?;
        let t = crate::counts::mass_of_squares(repr.counts());
        if sets.windows(2).all(|w| w[0] == w[1]) {
            check_trivial_bounds(sets[0].len(), sets.len(), t)?;
        }
        if self.config.verify {
            let spec = Spectrum::from_counts(repr.counts());
            spec.check_sandwich()?;
            self.checks.fetch_add(1, Ordering::Relaxed);
        }
        Ok(t)
    }

    /// `E(A, C) = T(A, C)`; in verify mode also checks
    /// `E(A,C)^2 ≤ E(A)·E(C)`.
    pub fn energy_cross<S: Scalar>(&self, a: &OrderedSet<S>, c: &OrderedSet<S>) -> Result<u128> {
        let e = self.energy_t(&[a.clone(), c.clone()])?;
        if self.config.verify {
            let ea = self.energy_t(&[a.clone(), a.clone()])?;
            let ec = self.energy_t(&[c.clone(), c.clone()])?;
            let lhs = BigInt::from(e) * BigInt::from(e);
            let rhs = BigInt::from(ea) * BigInt::from(ec);
            if lhs > rhs {
                return Err(Error::Invariant(format!(
                    "Cauchy-Schwarz: E(A,C)^2 = {lhs} > E(A)E(C) = {rhs}"
                )));
            }
            self.checks.fetch_add(1, Ordering::Relaxed);
        }
        Ok(e)
    }

    /// `Σ_x r(x)^m` for the signed sum.
    pub fn moment<S: Scalar>(
        &self,
        sets: &[OrderedSet<S>],
        signs: &[Sign],
        m: u32,
    ) -> Result<u128> {
        if m == 0 {
            return Err(Error::input("moment order must be positive"));
        }
        let repr = self.repr(&apply_signs(sets, signs)?)?;
        let mut total = 0u128;
        for c in repr.counts() {
            let term = u128::from(c)
                .checked_pow(m)
                .ok_or(Error::Overflow("moment"))?;
            total = total.checked_add(term).ok_or(Error::Overflow("moment"))?;
        }
        Ok(total)
    }

    /// `Σ_x r(x)^{1+p}` in floating point, `0 < p < 2`.
    pub fn fractional_moment<S: Scalar>(
        &self,
        sets: &[OrderedSet<S>],
        signs: &[Sign],
        p: &Rational,
    ) -> Result<f64> {
        let two = Rational::from_integer(2.into());
        if !p.is_positive() || p >= &two {
            return Err(Error::input("fractional moment needs 0 < p < 2"));
        }
        let pf = p.to_f64().expect("finite rational");
        let repr = self.repr(&apply_signs(sets, signs)?)?;
        // Many sums share a multiplicity; group them to keep the float sum short.
        let mut by_count: BTreeMap<u64, u64> = BTreeMap::new();
        for c in repr.counts() {
            *by_count.entry(c).or_default() += 1;
        }
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for (c, mult) in by_count {
            let cf = c as f64;
            let term = mult as f64 * cf * cf.powf(pf);
            // Neumaier compensated summation.
            let t = sum + term;
            if sum.abs() >= term.abs() {
                comp += (sum - t) + term;
            } else {
                comp += (term - t) + sum;
            }
            sum = t;
        }
        Ok(sum + comp)
    }

    pub fn spectrum<S: Scalar>(&self, sets: &[OrderedSet<S>]) -> Result<Spectrum> {
        let spec = Spectrum::from_counts(self.repr(sets)?.counts());
        if self.config.verify {
            spec.check_sandwich()?;
            self.checks.fetch_add(1, Ordering::Relaxed);
        }
        Ok(spec)
    }

    /// `{ε_1 a_1 + ... + ε_k a_k}` with `ε_1 = +1`.
    pub fn signed_sumset<S: Scalar>(
        &self,
        sets: &[OrderedSet<S>],
        signs: &[Sign],
    ) -> Result<OrderedSet<S>> {
        if signs.first() != Some(&Sign::Plus) {
            return Err(Error::input("the first sign must be '+'"));
        }
        self.signed_representation(sets, signs)?.support()
    }

    pub fn doubling<S: Scalar>(
        &self,
        base: &OrderedSet<S>,
        pattern: &str,
    ) -> Result<DoublingReport> {
        let mut signs = Sign::parse_pattern(pattern)?;
        // |−X| = |X|: normalize so the leading sign is '+'.
        if signs[0] == Sign::Minus {
            for s in &mut signs {
                *s = if *s == Sign::Plus {
                    Sign::Minus
                } else {
                    Sign::Plus
                };
            }
        }
        let sets = vec![base.clone(); signs.len()];
        let size = self.signed_sumset(&sets, &signs)?.len();
        Ok(DoublingReport {
            pattern: pattern.to_string(),
            size,
            base_size: base.len(),
            k: Rational::new(size.into(), base.len().into()),
        })
    }

    /// The dyadic class of `r_{A−A}` (zero and both signs included) maximizing
    /// `|D|·Δ²`, ties broken toward larger `Δ`.
    pub fn popular_dyadic_class<S: Scalar>(&self, a: &OrderedSet<S>) -> Result<PopularClass<S>> {
        if a.len() < 2 {
            return Err(Error::input("popular class needs N >= 2"));
        }
        let r = self.signed_representation(&[a.clone(), a.clone()], &[Sign::Plus, Sign::Minus])?;
        Ok(PopularClass::select(&r))
    }
}

fn apply_signs<S: Scalar>(sets: &[OrderedSet<S>], signs: &[Sign]) -> Result<Vec<OrderedSet<S>>> {
    if sets.len() != signs.len() {
        return Err(Error::input(format!(
            "{} sets but {} signs",
            sets.len(),
            signs.len()
        )));
    }
    Ok(sets
        .iter()
        .zip(signs)
        .map(|(s, sign)| match sign {
            Sign::Plus => s.clone(),
            Sign::Minus => s.negated(),
        })
        .collect())
}

/// `N^k ≤ T_k(A) ≤ N^{2k−1}`.
fn check_trivial_bounds(n: usize, k: usize, t: u128) -> Result<()> {
    let n = BigInt::from(n);
    let t = BigInt::from(t);
    let lo = num_traits::pow(n.clone(), k);
    let hi = num_traits::pow(n, 2 * k - 1);
    if t < lo || t > hi || t.is_zero() {
        return Err(Error::Invariant(format!(
            "T_{k} = {t} outside trivial range [{lo}, {hi}]"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational_from_ratio;

    fn iset(v: &[i64]) -> OrderedSet<i64> {
        OrderedSet::new(v.to_vec()).unwrap()
    }

    fn interval(n: usize) -> OrderedSet<i64> {
        OrderedSet::interval(n).unwrap()
    }

    fn all_engines() -> Vec<Engine> {
        Algo::ALL.iter().map(|a| Engine::with_algo(*a)).collect()
    }

    #[test]
    fn representation_examples() {
        for e in all_engines() {
            let r = e.representation(&[interval(2), interval(2)]).unwrap();
            assert_eq!(r.entries(), &[(2, 1), (3, 2), (4, 1)]);
            let r = e.representation(&vec![interval(3); 3]).unwrap();
            assert_eq!(
                r.entries(),
                &[(3, 1), (4, 3), (5, 6), (6, 7), (7, 6), (8, 3), (9, 1)]
            );
            let a = iset(&[-3, 4, 10]);
            let r = e.representation(std::slice::from_ref(&a)).unwrap();
            assert!(r.counts().all(|c| c == 1));
            assert_eq!(r.len(), 3);
        }
    }

    #[test]
    fn energy_examples() {
        let e = Engine::default();
        let a = iset(&[2, 3, 5, 11, 20]);
        assert_eq!(e.energy_t(std::slice::from_ref(&a)).unwrap(), 5);
        assert_eq!(e.energy_t(&[interval(3), interval(3)]).unwrap(), 19);
        for n in 1..=20u128 {
            let t = e
                .energy_t(&[interval(n as usize), interval(n as usize)])
                .unwrap();
            assert_eq!(t, (2 * n * n * n + n) / 3);
        }
    }

    #[test]
    fn cross_energy_examples() {
        let e = Engine::verifying();
        let a = iset(&[1, 4, 9]);
        assert_eq!(e.energy_cross(&a, &iset(&[7])).unwrap(), 3);
        assert_eq!(e.energy_cross(&a, &iset(&[1, 2])).unwrap(), 6);
        assert_eq!(
            e.energy_cross(&interval(6), &interval(6)).unwrap(),
            (2 * 216 + 6) / 3
        );
        assert!(e.checks_passed() >= 3);
    }

    #[test]
    fn moments() {
        let e = Engine::default();
        let two = [interval(2), interval(2)];
        let pp = [Sign::Plus, Sign::Plus];
        assert_eq!(e.moment(&two, &pp, 3).unwrap(), 10);
        let a = iset(&[1, 3, 4, 9, 13]);
        let b = iset(&[0, 2, 7]);
        for signs in [[Sign::Plus, Sign::Plus], [Sign::Plus, Sign::Minus]] {
            let m2 = e.moment(&[a.clone(), b.clone()], &signs, 2).unwrap();
            let sets = apply_signs(&[a.clone(), b.clone()], &signs).unwrap();
            assert_eq!(m2, e.energy_t(&sets).unwrap());
            let f = e
                .fractional_moment(&[a.clone(), b.clone()], &signs, &rational_from_ratio(1, 1))
                .unwrap();
            assert!((f - m2 as f64).abs() <= 1e-9 * m2 as f64);
        }
        assert!(e.moment(&two, &pp, 0).is_err());
        assert!(e
            .fractional_moment(&two, &pp, &rational_from_ratio(2, 1))
            .is_err());
        assert!(e
            .fractional_moment(&two, &pp, &rational_from_ratio(0, 1))
            .is_err());
        assert!(e.moment(&two, &[Sign::Plus], 2).is_err());
    }

    #[test]
    fn fractional_moment_half() {
        let e = Engine::default();
        // r = (1,2,3,2,1) for [3]+[3]: Σ r^{3/2}.
        let got = e
            .fractional_moment(
                &[interval(3), interval(3)],
                &[Sign::Plus, Sign::Plus],
                &rational_from_ratio(1, 2),
            )
            .unwrap();
        let want = 2.0 + 2.0 * 2f64.powf(1.5) + 3f64.powf(1.5);
        assert!((got - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn sumset_examples() {
        let e = Engine::default();
        let n = 9;
        let pp = [Sign::Plus, Sign::Plus];
        let pm = [Sign::Plus, Sign::Minus];
        assert_eq!(
            e.signed_sumset(&[interval(n), interval(n)], &pp)
                .unwrap()
                .len(),
            2 * n - 1
        );
        assert_eq!(
            e.signed_sumset(&[interval(n), interval(n)], &pm)
                .unwrap()
                .len(),
            2 * n - 1
        );
        let sq = iset(&[1, 4, 9, 16, 25]);
        assert_eq!(
            e.signed_sumset(&[sq.clone(), sq.clone()], &pp)
                .unwrap()
                .len(),
            15
        );
        assert!(e.signed_sumset(std::slice::from_ref(&sq), &pp).is_err());
        assert!(e
            .signed_sumset(&[sq.clone(), sq], &[Sign::Minus, Sign::Plus])
            .is_err());
    }

    #[test]
    fn doubling_examples() {
        let e = Engine::default();
        for n in 1..12usize {
            let d = e.doubling(&interval(n), "++-").unwrap();
            assert_eq!(d.size, 3 * n - 2);
            assert_eq!(d.k, Rational::new((3 * n - 2).into(), n.into()));
        }
        let single = e.doubling(&iset(&[5]), "+-+-").unwrap();
        assert_eq!(single.k, rational_from_ratio(1, 1));
        let flipped = e.doubling(&iset(&[1, 4, 9, 16]), "-+-").unwrap();
        let plain = e.doubling(&iset(&[1, 4, 9, 16]), "+-+").unwrap();
        assert_eq!(flipped.size, plain.size);
        assert!(e.doubling(&interval(3), "").is_err());
        assert!(e.doubling(&interval(3), "+*").is_err());
    }

    #[test]
    fn rational_sets_use_sparse_path() {
        let e = Engine::default();
        let half = rational_from_ratio(1, 2);
        let a =
            OrderedSet::new((1..=6).map(|i| rational_from_ratio(i, 1) * &half).collect()).unwrap();
        assert_eq!(e.resolve_algo(&[a.clone(), a.clone()]).unwrap(), Algo::Mitm);
        assert_eq!(e.energy_t(&[a.clone(), a]).unwrap(), (2 * 216 + 6) / 3);
        let dense = Engine::with_algo(Algo::Dense);
        let b = OrderedSet::new(vec![half.clone()]).unwrap();
        assert!(matches!(
            dense.energy_t(&[b.clone(), b]),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn resource_error_before_allocation() {
        let e = Engine::new(EngineConfig {
            memory_budget: 1 << 20,
            algo: Algo::Auto,
            verify: false,
        });
        let spread =
            OrderedSet::new((0..200).map(|i: i64| i * i * i * 1_000_003).collect()).unwrap();
        let err = e.energy_t(&vec![spread; 4]).unwrap_err();
        assert!(matches!(err, Error::Resource { .. }), "{err}");
    }
}
