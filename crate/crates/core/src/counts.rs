use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::set::OrderedSet;

/// Number of pairwise products materialized at once by [`SparseCounts::convolve`].
const CONVOLVE_CHUNK: usize = 1 << 22;

/// A finitely supported function value → multiplicity, stored as a sorted
/// sequence with strictly increasing values and counts ≥ 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SparseCounts<S> {
    entries: Vec<(S, u64)>,
}

impl<S: Scalar> SparseCounts<S> {
    /// Indicator function of a set.
    pub fn from_set(set: &OrderedSet<S>) -> Self {
        SparseCounts {
            entries: set.iter().map(|v| (v.clone(), 1)).collect(),
        }
    }

    pub fn singleton(value: S, count: u64) -> Result<Self> {
        Self::from_entries(vec![(value, count)])
    }

    /// Validates an already-sorted entry list.
    pub fn from_entries(entries: Vec<(S, u64)>) -> Result<Self> {
        if entries.iter().any(|(_, c)| *c == 0) {
            return Err(Error::input("counts must be positive"));
        }
        if entries.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::input("values must be strictly increasing"));
        }
        Ok(SparseCounts { entries })
    }

    /// Sorts, merges equal values by adding counts, drops zero counts.
    pub fn from_unsorted(mut entries: Vec<(S, u64)>) -> Result<Self> {
        entries.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        Ok(SparseCounts {
            entries: merge_runs(entries)?,
        })
    }

    pub(crate) fn from_entries_unchecked(entries: Vec<(S, u64)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        SparseCounts { entries }
    }

    pub fn entries(&self) -> &[(S, u64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn counts(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.iter().map(|(_, c)| *c)
    }

    pub fn get(&self, value: &S) -> u64 {
        self.entries
            .binary_search_by(|(v, _)| v.cmp(value))
            .map(|i| self.entries[i].1)
            .unwrap_or(0)
    }

    pub fn total_mass(&self) -> u128 {
        self.counts().map(u128::from).sum()
    }

    /// Σ count², i.e. the number of pairs of realisations of a common value.
    pub fn mass_of_squares(&self) -> u128 {
        mass_of_squares(self.counts())
    }

    /// The support as an ordered set.
    pub fn support(&self) -> Result<OrderedSet<S>> {
        OrderedSet::from_sorted(self.entries.iter().map(|(v, _)| v.clone()).collect())
    }

    /// Additive convolution: `(p ∗ q)(v) = Σ_u p(u)·q(v−u)`.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        if self.is_empty() || other.is_empty() {
            return Err(Error::input("cannot convolve an empty count table"));
        }
        let (outer, inner) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let rows_per_chunk = (CONVOLVE_CHUNK / inner.len()).max(1);
        let mut acc: Vec<(S, u64)> = Vec::new();
        for rows in outer.entries.chunks(rows_per_chunk) {
            let mut buf = Vec::with_capacity(rows.len() * inner.len());
            for (u, cu) in rows {
                for (w, cw) in &inner.entries {
                    let c = cu.checked_mul(*cw).ok_or(Error::Overflow("convolution"))?;
                    buf.push((u.clone() + w.clone(), c));
                }
            }
            buf.sort_unstable_by(|a, b| a.0.cmp(&b.0));
            let chunk = merge_runs(buf)?;
            acc = if acc.is_empty() {
                chunk
            } else {
                merge_add(acc, chunk)?
            };
        }
        Ok(SparseCounts { entries: acc })
    }

    /// `v ↦ −v`.
    pub fn reflected(&self) -> Self {
        SparseCounts {
            entries: self
                .entries
                .iter()
                .rev()
                .map(|(v, c)| (-v.clone(), *c))
                .collect(),
        }
    }
}

pub(crate) fn mass_of_squares(counts: impl Iterator<Item = u64>) -> u128 {
    counts.map(|c| u128::from(c) * u128::from(c)).sum()
}

fn merge_runs<S: Scalar>(sorted: Vec<(S, u64)>) -> Result<Vec<(S, u64)>> {
    let mut out: Vec<(S, u64)> = Vec::with_capacity(sorted.len());
    for (v, c) in sorted {
        if c == 0 {
            continue;
        }
        match out.last_mut() {
            Some((last, lc)) if *last == v => {
                *lc = lc.checked_add(c).ok_or(Error::Overflow("count merge"))?;
            }
            _ => out.push((v, c)),
        }
    }
    Ok(out)
}

fn merge_add<S: Scalar>(a: Vec<(S, u64)>, b: Vec<(S, u64)>) -> Result<Vec<(S, u64)>> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let mut ia = a.into_iter().peekable();
    let mut ib = b.into_iter().peekable();
    loop {
        let take_a = match (ia.peek(), ib.peek()) {
            (None, None) => break,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (Some(x), Some(y)) => {
                if x.0 == y.0 {
                    let (v, cx) = ia.next().unwrap();
                    let (_, cy) = ib.next().unwrap();
                    let c = cx.checked_add(cy).ok_or(Error::Overflow("count merge"))?;
                    out.push((v, c));
                    continue;
                }
                x.0 < y.0
            }
        };
        out.push(if take_a { ia.next() } else { ib.next() }.unwrap());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc(e: &[(i64, u64)]) -> SparseCounts<i64> {
        SparseCounts::from_entries(e.to_vec()).unwrap()
    }

    #[test]
    fn binomial_convolution() {
        let p = sc(&[(0, 1), (1, 1)]);
        assert_eq!(p.convolve(&p).unwrap(), sc(&[(0, 1), (1, 2), (2, 1)]));
    }

    #[test]
    fn identity_element() {
        let p = sc(&[(-3, 2), (5, 7), (11, 1)]);
        let e = sc(&[(0, 1)]);
        assert_eq!(p.convolve(&e).unwrap(), p);
        assert_eq!(e.convolve(&p).unwrap(), p);
    }

    #[test]
    fn square_of_121() {
        let p = sc(&[(2, 1), (3, 2), (4, 1)]);
        let expected = sc(&[(4, 1), (5, 4), (6, 6), (7, 4), (8, 1)]);
        assert_eq!(p.convolve(&p).unwrap(), expected);
        assert_eq!(expected.total_mass(), 16);
    }

    #[test]
    fn mass_of_squares_examples() {
        assert_eq!(sc(&[(2, 1), (3, 2), (4, 1)]).mass_of_squares(), 6);
        assert_eq!(sc(&[(0, 5)]).mass_of_squares(), 25);
        let r = sc(&[(2, 1), (3, 2), (4, 3), (5, 2), (6, 1)]);
        assert_eq!(r.mass_of_squares(), 19);
    }

    #[test]
    fn entries_validated() {
        assert!(SparseCounts::from_entries(vec![(1i64, 0)]).is_err());
        assert!(SparseCounts::from_entries(vec![(2i64, 1), (1, 1)]).is_err());
        let merged = SparseCounts::from_unsorted(vec![(2i64, 1), (1, 1), (2, 3)]).unwrap();
        assert_eq!(merged, sc(&[(1, 1), (2, 4)]));
    }

    #[test]
    fn chunked_merge_matches_single_pass() {
        // Large enough inner table to force several chunks.
        let a: Vec<(i64, u64)> = (0..3000)
            .map(|i| (i * 7 % 5003, 1 + (i as u64 % 3)))
            .collect();
        let p = SparseCounts::from_unsorted(a).unwrap();
        let q =
            SparseCounts::from_unsorted((0..2000).map(|i| (i * i % 4001, 1)).collect()).unwrap();
        let fast = p.convolve(&q).unwrap();
        let mut all = Vec::new();
        for (u, cu) in p.entries() {
            for (w, cw) in q.entries() {
                all.push((u + w, cu * cw));
            }
        }
        assert_eq!(fast, SparseCounts::from_unsorted(all).unwrap());
    }

    #[test]
    fn empty_convolution_is_error() {
        let p = sc(&[(0, 1)]);
        let empty = SparseCounts::<i64>::from_entries(vec![]).unwrap();
        assert!(p.convolve(&empty).is_err());
    }
}
