//! Higher convexity of finite sets via iterated difference tables.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::set::OrderedSet;

/// `Δ_h A`: the sequence `a_{i+h} − a_i` in index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifferenceSequence<S> {
    pub h: usize,
    pub terms: Vec<S>,
    pub all_distinct: bool,
}

impl<S: Scalar> DifferenceSequence<S> {
    pub fn is_strictly_increasing(&self) -> bool {
        self.terms.windows(2).all(|w| w[0] < w[1])
    }
}

pub fn delta_h<S: Scalar>(set: &OrderedSet<S>, h: usize) -> Result<DifferenceSequence<S>> {
    let n = set.len();
    if h == 0 || h >= n {
        return Err(Error::input(format!("need 1 <= h < N, got h={h}, N={n}")));
    }
    let a = set.as_slice();
    let terms: Vec<S> = (0..n - h)
        .map(|i| a[i + h].clone() - a[i].clone())
        .collect();
    let mut sorted = terms.clone();
    sorted.sort_unstable();
    let all_distinct = sorted.windows(2).all(|w| w[0] != w[1]);
    Ok(DifferenceSequence {
        h,
        terms,
        all_distinct,
    })
}

/// Result of the difference-table test.
///
/// `Exact(s)`: levels `1..=s` are strictly monotone and level `s+1` is not.
/// `Saturated(s)`: levels `1..=s` are strictly monotone and level `s+1` has
/// fewer than two terms, so higher orders cannot be decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConvexityOrder {
    Exact(usize),
    Saturated(usize),
}

impl ConvexityOrder {
    /// Highest level verified strictly monotone.
    pub fn level(self) -> usize {
        match self {
            ConvexityOrder::Exact(s) | ConvexityOrder::Saturated(s) => s,
        }
    }

    pub fn at_least(self, s: usize) -> bool {
        self.level() >= s
    }

    pub fn is_saturated(self) -> bool {
        matches!(self, ConvexityOrder::Saturated(_))
    }
}

impl fmt::Display for ConvexityOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConvexityOrder::Exact(s) => write!(f, "{s}"),
            ConvexityOrder::Saturated(s) => write!(f, "saturated({s})"),
        }
    }
}

pub fn convexity_order<S: Scalar>(set: &OrderedSet<S>) -> ConvexityOrder {
    convexity_order_of_sequence(set.as_slice())
}

/// Same test applied to an arbitrary sequence (level 0 is the sequence itself).
pub fn convexity_order_of_sequence<S: Scalar>(seq: &[S]) -> ConvexityOrder {
    let mut level: Vec<S> = seq.to_vec();
    let mut verified = 0;
    loop {
        let next: Vec<S> = level
            .windows(2)
            .map(|w| w[1].clone() - w[0].clone())
            .collect();
        if next.len() < 2 {
            return ConvexityOrder::Saturated(verified);
        }
        if !strictly_monotone(&next) {
            return ConvexityOrder::Exact(verified);
        }
        verified += 1;
        level = next;
    }
}

fn strictly_monotone<S: Ord>(seq: &[S]) -> bool {
    let dir = seq[0].cmp(&seq[1]);
    dir != Ordering::Equal && seq.windows(2).all(|w| w[0].cmp(&w[1]) == dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[i64]) -> OrderedSet<i64> {
        OrderedSet::new(v.to_vec()).unwrap()
    }

    #[test]
    fn delta_examples() {
        let d = delta_h(&set(&[1, 2, 3, 4, 5]), 1).unwrap();
        assert_eq!(d.terms, vec![1, 1, 1, 1]);
        assert!(!d.all_distinct);
        let sq = set(&[1, 4, 9, 16]);
        let d1 = delta_h(&sq, 1).unwrap();
        assert_eq!(d1.terms, vec![3, 5, 7]);
        assert!(d1.all_distinct);
        let d2 = delta_h(&sq, 2).unwrap();
        assert_eq!(d2.terms, vec![8, 12]);
        assert!(d2.all_distinct);
    }

    #[test]
    fn delta_rejects_bad_h() {
        assert!(matches!(delta_h(&set(&[1, 2, 3]), 3), Err(Error::Input(_))));
        assert!(delta_h(&set(&[1, 2, 3]), 0).is_err());
    }

    #[test]
    fn order_examples() {
        for n in 3..10 {
            let ap: Vec<i64> = (1..=n).collect();
            assert_eq!(convexity_order(&set(&ap)), ConvexityOrder::Exact(0));
        }
        assert_eq!(
            convexity_order(&set(&[1, 4, 9, 16, 25])),
            ConvexityOrder::Exact(1)
        );
        assert_eq!(
            convexity_order(&set(&[1, 8, 27, 64, 125])),
            ConvexityOrder::Exact(2)
        );
    }

    #[test]
    fn saturation_on_short_sets() {
        assert_eq!(convexity_order(&set(&[5])), ConvexityOrder::Saturated(0));
        assert_eq!(convexity_order(&set(&[1, 2])), ConvexityOrder::Saturated(0));
        assert_eq!(
            convexity_order(&set(&[1, 4, 9])),
            ConvexityOrder::Saturated(1)
        );
        // Cubes with only four elements: 7,19,37 then 12,18 then a single term.
        assert_eq!(
            convexity_order(&set(&[1, 8, 27, 64])),
            ConvexityOrder::Saturated(2)
        );
    }

    #[test]
    fn concave_counts_as_monotone() {
        // Differences 10, 6, 3, 1 strictly decreasing; second differences -4,-3,-2 increasing.
        let s = set(&[0, 10, 16, 19, 20]);
        assert_eq!(convexity_order(&s), ConvexityOrder::Exact(2));
    }
}
