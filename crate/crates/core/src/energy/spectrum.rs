use std::collections::BTreeMap;

use crate::counts::SparseCounts;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::set::OrderedSet;

fn dyadic_index(r: u64) -> u32 {
    debug_assert!(r > 0);
    63 - r.leading_zeros()
}

/// Dyadic rich-sum classes `X_{2^j} = {x : 2^j ≤ r(x) < 2^{j+1}}` of a
/// representation function, together with `T = Σ r(x)²`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spectrum {
    /// `(j, |X_{2^j}|)` for non-empty classes, increasing in `j`.
    pub classes: Vec<(u32, u64)>,
    pub total_t: u128,
}

impl Spectrum {
    pub fn from_counts(counts: impl Iterator<Item = u64>) -> Self {
        let mut classes: BTreeMap<u32, u64> = BTreeMap::new();
        let mut total_t = 0u128;
        for c in counts {
            *classes.entry(dyadic_index(c)).or_default() += 1;
            total_t += u128::from(c) * u128::from(c);
        }
        Spectrum {
            classes: classes.into_iter().collect(),
            total_t,
        }
    }

    /// `Σ_j 4^j·|X_{2^j}|`.
    pub fn dyadic_mass(&self) -> u128 {
        self.classes
            .iter()
            .map(|(j, size)| (1u128 << (2 * j)) * u128::from(*size))
            .sum()
    }

    /// `Σ_j 4^j |X| ≤ T < 4·Σ_j 4^j |X|`.
    pub fn check_sandwich(&self) -> Result<()> {
        let m = self.dyadic_mass();
        if m <= self.total_t && self.total_t < 4 * m {
            Ok(())
        } else {
            Err(Error::Invariant(format!(
                "spectrum sandwich fails: dyadic mass {m}, T = {}",
                self.total_t
            )))
        }
    }

    pub fn class_size(&self, j: u32) -> u64 {
        self.classes
            .iter()
            .find(|(i, _)| *i == j)
            .map_or(0, |(_, s)| *s)
    }

    /// CSV rows `j,r_lo,r_hi,size` where the class is `r_lo ≤ r < r_hi`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,r_lo,r_hi,size\n");
        for (j, size) in &self.classes {
            let lo = 1u128 << j;
            out.push_str(&format!("{j},{lo},{},{size}\n", lo * 2));
        }
        out
    }
}

/// The popular dyadic class of differences: every `d ∈ D` has
/// `Δ ≤ r_{A−A}(d) < 2Δ`, and `|D|·Δ²` is maximal over classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PopularClass<S> {
    pub differences: OrderedSet<S>,
    pub delta: u64,
    pub score: u128,
}

impl<S: Scalar> PopularClass<S> {
    pub(super) fn select(r: &SparseCounts<S>) -> Self {
        let mut classes: BTreeMap<u32, Vec<S>> = BTreeMap::new();
        for (d, c) in r.entries() {
            classes.entry(dyadic_index(*c)).or_default().push(d.clone());
        }
        let (j, members) = classes
            .into_iter()
            // Ascending j, so `>=` keeps the larger Δ on ties.
            .fold(None::<(u32, Vec<S>, u128)>, |best, (j, members)| {
                let score = members.len() as u128 * (1u128 << (2 * j));
                match best {
                    Some((_, _, s)) if s > score => best,
                    _ => Some((j, members, score)),
                }
            })
            .map(|(j, m, _)| (j, m))
            .expect("difference set is non-empty");
        let delta = 1u64 << j;
        PopularClass {
            score: members.len() as u128 * u128::from(delta) * u128::from(delta),
            differences: OrderedSet::from_sorted(members).expect("entries are sorted"),
            delta,
        }
    }

    /// `4·(⌊log₂(2N)⌋ + 1)·|D|Δ²`, an upper bound for `E(A)`.
    pub fn energy_bound(&self, n: usize) -> u128 {
        let levels = u128::from(dyadic_index(2 * n as u64)) + 1;
        4 * levels * self.score
    }
}

#[cfg(test)]
mod tests {
    use super::super::Engine;
    use super::*;

    #[test]
    fn spectrum_of_three_plus_three() {
        let e = Engine::default();
        let a = OrderedSet::<i64>::interval(3).unwrap();
        let s = e.spectrum(&[a.clone(), a]).unwrap();
        assert_eq!(s.classes, vec![(0, 2), (1, 3)]);
        assert_eq!(s.total_t, 19);
        assert_eq!(s.dyadic_mass(), 14);
        s.check_sandwich().unwrap();
        assert_eq!(s.to_csv(), "j,r_lo,r_hi,size\n0,1,2,2\n1,2,4,3\n");
    }

    #[test]
    fn spectrum_of_singletons() {
        let e = Engine::default();
        let a = OrderedSet::new(vec![4i64]).unwrap();
        let s = e.spectrum(&[a.clone(), a]).unwrap();
        assert_eq!(s.classes, vec![(0, 1)]);
    }

    #[test]
    fn popular_class_of_interval_four() {
        let e = Engine::default();
        let a = OrderedSet::<i64>::interval(4).unwrap();
        let p = e.popular_dyadic_class(&a).unwrap();
        assert_eq!(p.delta, 4);
        assert_eq!(p.differences.as_slice(), &[0]);
        assert_eq!(p.score, 16);
        let energy = e.energy_t(&[a.clone(), a]).unwrap();
        assert_eq!(energy, 44);
        // ⌊log₂ 8⌋ + 1 = 4 levels.
        assert_eq!(p.energy_bound(4), 256);
        assert!(energy <= p.energy_bound(4));
    }

    #[test]
    fn popular_class_of_two_points() {
        let e = Engine::default();
        let a = OrderedSet::new(vec![3i64, 17]).unwrap();
        let p = e.popular_dyadic_class(&a).unwrap();
        assert_eq!((p.delta, p.score), (2, 4));
        assert_eq!(p.differences.as_slice(), &[0]);
        assert!(e
            .popular_dyadic_class(&OrderedSet::new(vec![1i64]).unwrap())
            .is_err());
    }
}
