//! Representation-function kernels: naive expansion, balanced sparse
//! convolution, and dense integer count arrays.

use std::mem::size_of;

use crate::counts::SparseCounts;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::set::OrderedSet;

use super::Algo;

/// A representation function in whichever layout the kernel produced.
#[derive(Debug, Clone)]
pub(crate) enum Repr<S> {
    Sparse(SparseCounts<S>),
    /// `counts[i]` is the multiplicity of `offset + i`.
    Dense {
        offset: i64,
        counts: Vec<u64>,
    },
}

impl<S: Scalar> Repr<S> {
    pub fn counts(&self) -> Box<dyn Iterator<Item = u64> + '_> {
        match self {
            Repr::Sparse(s) => Box::new(s.counts()),
            Repr::Dense { counts, .. } => Box::new(counts.iter().copied().filter(|c| *c > 0)),
        }
    }

    pub fn into_sparse(self) -> SparseCounts<S> {
        match self {
            Repr::Sparse(s) => s,
            Repr::Dense { offset, counts } => SparseCounts::from_entries_unchecked(
                counts
                    .into_iter()
                    .enumerate()
                    .filter(|(_, c)| *c > 0)
                    .map(|(i, c)| (S::from_i64(offset + i as i64), c))
                    .collect(),
            ),
        }
    }
}

/// Memory estimates in bytes for each kernel, plus the problem shape.
#[derive(Debug, Clone)]
pub(crate) struct Plan {
    pub tuples: u128,
    /// Width of the integer hull of the sumset, when all elements are `i64`.
    pub int_range: Option<u128>,
    pub naive_bytes: u128,
    pub mitm_bytes: u128,
    pub dense_bytes: Option<u128>,
}

const ENTRY_OVERHEAD: u128 = 16;
const MITM_CHUNK: u128 = 1 << 22;

pub(crate) fn plan<S: Scalar>(sets: &[OrderedSet<S>]) -> Plan {
    let tuples: u128 = sets
        .iter()
        .map(|s| s.len() as u128)
        .fold(1u128, |a, b| a.saturating_mul(b));
    let entry = size_of::<(S, u64)>() as u128 + ENTRY_OVERHEAD;
    let int_range = integer_hull(sets).map(|(lo, hi)| (hi - lo + 1) as u128);
    let support_bound = int_range.map_or(tuples, |r| r.min(tuples));
    Plan {
        tuples,
        int_range,
        naive_bytes: tuples.saturating_mul(entry),
        mitm_bytes: support_bound
            .saturating_add(tuples.min(MITM_CHUNK))
            .saturating_mul(entry),
        dense_bytes: int_range.map(|r| r.saturating_mul(2 * size_of::<u64>() as u128)),
    }
}

/// Sum of per-set `[min, max]` hulls, when every element is an `i64` and the
/// sums stay well inside `i64`.
fn integer_hull<S: Scalar>(sets: &[OrderedSet<S>]) -> Option<(i128, i128)> {
    let mut lo = 0i128;
    let mut hi = 0i128;
    for s in sets {
        if !s.iter().all(|v| v.exact_i64().is_some()) {
            return None;
        }
        lo += s.min().exact_i64()? as i128;
        hi += s.max().exact_i64()? as i128;
    }
    let limit = (i64::MAX / 4) as i128;
    (lo.abs() < limit && hi.abs() < limit).then_some((lo, hi))
}

impl Plan {
    pub fn choose(&self, requested: Algo, budget: u64) -> Result<Algo> {
        let fits = |bytes: u128| bytes <= budget as u128;
        let algo = match requested {
            Algo::Auto => match (self.dense_bytes, self.int_range) {
                // Dense wins whenever the hull is not much wider than the tuple count.
                (Some(d), Some(r)) if fits(d) && r <= self.tuples.saturating_mul(64) => Algo::Dense,
                _ => Algo::Mitm,
            },
            Algo::Dense if self.dense_bytes.is_none() => {
                return Err(Error::Unsupported(
                    "dense kernel needs integer elements with bounded sums".into(),
                ))
            }
            other => other,
        };
        let estimate = match algo {
            Algo::Naive => self.naive_bytes,
            Algo::Mitm => self.mitm_bytes,
            Algo::Dense => self.dense_bytes.expect("checked above"),
            Algo::Auto => unreachable!(),
        };
        if !fits(estimate) {
            return Err(Error::Resource {
                what: format!("{} kernel over {} tuples", algo.name(), self.tuples),
                estimate_bytes: estimate,
                budget_bytes: budget,
            });
        }
        if self.tuples > u64::MAX as u128 {
            return Err(Error::Overflow("representation counts exceed u64"));
        }
        Ok(algo)
    }
}

/// Full k-fold expansion: every tuple sum materialized, then sorted.
pub(crate) fn naive<S: Scalar>(sets: &[OrderedSet<S>]) -> Result<SparseCounts<S>> {
    let mut sums: Vec<S> = vec![S::zero()];
    for set in sets {
        let mut next = Vec::with_capacity(sums.len() * set.len());
        for partial in &sums {
            for a in set {
                next.push(partial.clone() + a.clone());
            }
        }
        sums = next;
    }
    SparseCounts::from_unsorted(sums.into_iter().map(|v| (v, 1)).collect())
}

/// Balanced convolution tree: split the summands in halves, recurse, convolve.
pub(crate) fn mitm<S: Scalar>(sets: &[OrderedSet<S>]) -> Result<SparseCounts<S>> {
    match sets {
        [] => SparseCounts::singleton(S::zero(), 1),
        [one] => Ok(SparseCounts::from_set(one)),
        _ => {
            let (left, right) = sets.split_at(sets.len() / 2);
            mitm(left)?.convolve(&mitm(right)?)
        }
    }
}

struct DenseCounts {
    offset: i64,
    counts: Vec<u64>,
}

impl DenseCounts {
    fn of_set(values: &[i64]) -> Self {
        let offset = values[0];
        let mut counts = vec![0u64; (values[values.len() - 1] - offset + 1) as usize];
        for v in values {
            counts[(v - offset) as usize] += 1;
        }
        DenseCounts { offset, counts }
    }

    fn nonzero(&self) -> Vec<(usize, u64)> {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, c)| **c > 0)
            .map(|(i, c)| (i, *c))
            .collect()
    }

    /// Product over the non-zero entries. Callers guarantee the total mass
    /// fits in `u64`, so no partial sum can overflow.
    fn convolve(&self, other: &Self) -> Self {
        let mut counts = vec![0u64; self.counts.len() + other.counts.len() - 1];
        let a = self.nonzero();
        let b = other.nonzero();
        for &(i, ca) in &a {
            let row = &mut counts[i..];
            for &(j, cb) in &b {
                row[j] += ca * cb;
            }
        }
        DenseCounts {
            offset: self.offset + other.offset,
            counts,
        }
    }
}

pub(crate) fn dense(sets: &[Vec<i64>]) -> (i64, Vec<u64>) {
    fn tree(sets: &[Vec<i64>]) -> DenseCounts {
        match sets {
            [] => DenseCounts {
                offset: 0,
                counts: vec![1],
            },
            [one] => DenseCounts::of_set(one),
            _ => {
                let (l, r) = sets.split_at(sets.len() / 2);
                tree(l).convolve(&tree(r))
            }
        }
    }
    let d = tree(sets);
    (d.offset, d.counts)
}

pub(crate) fn run<S: Scalar>(sets: &[OrderedSet<S>], algo: Algo) -> Result<Repr<S>> {
    match algo {
        Algo::Naive => naive(sets).map(Repr::Sparse),
        Algo::Mitm => mitm(sets).map(Repr::Sparse),
        Algo::Dense => {
            let ints: Vec<Vec<i64>> = sets
                .iter()
                .map(|s| s.as_i64())
                .collect::<Option<_>>()
                .ok_or_else(|| Error::Unsupported("dense kernel needs integer elements".into()))?;
            let (offset, counts) = dense(&ints);
            Ok(Repr::Dense { offset, counts })
        }
        Algo::Auto => unreachable!("resolved by Plan::choose"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iset(v: &[i64]) -> OrderedSet<i64> {
        OrderedSet::new(v.to_vec()).unwrap()
    }

    #[test]
    fn fractional_interior_rules_out_dense() {
        let half = crate::scalar::rational_from_ratio;
        let a = OrderedSet::new(vec![half(0, 1), half(1, 2), half(1, 1)]).unwrap();
        let p = plan(&[a.clone(), a]);
        assert!(p.dense_bytes.is_none());
        assert_eq!(p.choose(Algo::Auto, u64::MAX).unwrap(), Algo::Mitm);
    }

    #[test]
    fn kernels_agree_on_small_input() {
        let sets = vec![iset(&[1, 2, 3]), iset(&[-4, 0, 9, 10]), iset(&[5, 7])];
        let a = run(&sets, Algo::Naive).unwrap().into_sparse();
        let b = run(&sets, Algo::Mitm).unwrap().into_sparse();
        let c = run(&sets, Algo::Dense).unwrap().into_sparse();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_eq!(a.total_mass(), 24);
    }

    #[test]
    fn plan_prefers_dense_for_intervals() {
        let sets = vec![OrderedSet::<i64>::interval(50).unwrap(); 3];
        let p = plan(&sets);
        assert_eq!(p.int_range, Some(148));
        assert_eq!(p.choose(Algo::Auto, 1 << 30).unwrap(), Algo::Dense);
    }

    #[test]
    fn plan_prefers_sparse_for_spread_out_sets() {
        let sets = vec![iset(&[0, 1 << 40]), iset(&[3, 1 << 41])];
        assert_eq!(plan(&sets).choose(Algo::Auto, 1 << 30).unwrap(), Algo::Mitm);
    }

    #[test]
    fn budget_exceeded() {
        let sets = vec![OrderedSet::<i64>::interval(100).unwrap(); 5];
        let err = plan(&sets).choose(Algo::Naive, 1 << 20).unwrap_err();
        assert!(matches!(err, Error::Resource { .. }));
    }
}
