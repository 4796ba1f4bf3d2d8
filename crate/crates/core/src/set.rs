use std::ops::Index;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A non-empty, strictly increasing finite sequence of exact scalars.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrderedSet<S> {
    elements: Vec<S>,
}

impl<S: Scalar> OrderedSet<S> {
    /// Sorts and silently deduplicates; fails only on empty input.
    pub fn new(mut values: Vec<S>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::input("a set needs at least one element"));
        }
        values.sort_unstable();
        values.dedup();
        Ok(OrderedSet { elements: values })
    }

    pub fn from_sorted(values: Vec<S>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::input("a set needs at least one element"));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::input("elements are not strictly increasing"));
        }
        Ok(OrderedSet { elements: values })
    }

    /// The interval `{1, ..., n}`.
    pub fn interval(n: usize) -> Result<Self> {
        Self::from_sorted((1..=n as i64).map(S::from_i64).collect())
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[S] {
        &self.elements
    }

    pub fn iter(&self) -> std::slice::Iter<'_, S> {
        self.elements.iter()
    }

    pub fn min(&self) -> &S {
        &self.elements[0]
    }

    pub fn max(&self) -> &S {
        &self.elements[self.elements.len() - 1]
    }

    pub fn contains(&self, v: &S) -> bool {
        self.elements.binary_search(v).is_ok()
    }

    /// Position of `v` in increasing order.
    pub fn index_of(&self, v: &S) -> Option<usize> {
        self.elements.binary_search(v).ok()
    }

    /// Number of elements in the half-open interval `(lo, hi]`.
    pub fn count_in(&self, lo: &S, hi: &S) -> usize {
        if hi <= lo {
            return 0;
        }
        let above_lo = self.elements.partition_point(|e| e <= lo);
        let upto_hi = self.elements.partition_point(|e| e <= hi);
        upto_hi - above_lo
    }

    pub fn negated(&self) -> Self {
        OrderedSet {
            elements: self.elements.iter().rev().map(|e| -e.clone()).collect(),
        }
    }

    pub fn into_vec(self) -> Vec<S> {
        self.elements
    }

    /// Every element is an integer that fits in `i64`.
    pub fn as_i64(&self) -> Option<Vec<i64>> {
        self.elements.iter().map(Scalar::exact_i64).collect()
    }

    pub fn map_into<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Result<OrderedSet<T>> {
        OrderedSet::new(self.elements.iter().map(f).collect())
    }
}

impl<S> Index<usize> for OrderedSet<S> {
    type Output = S;
    fn index(&self, i: usize) -> &S {
        &self.elements[i]
    }
}

impl<'a, S> IntoIterator for &'a OrderedSet<S> {
    type Item = &'a S;
    type IntoIter = std::slice::Iter<'a, S>;
    fn into_iter(self) -> Self::IntoIter {
        self.elements.iter()
    }
}
