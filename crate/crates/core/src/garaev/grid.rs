use num_traits::One;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::Rational;

/// Cells `(e_1 + a, ..., e_k + a)` for `0 ≤ a < len`, starting from a cell
/// with some coordinate equal to 1. Coordinates are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagonal {
    pub start: Vec<usize>,
    pub len: usize,
}

impl Diagonal {
    pub fn cells(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.len).map(move |a| self.start.iter().map(|e| e + a).collect())
    }
}

/// Diagonal cover of the index grid `[r]^k`: `r^k − (r−1)^k` diagonals.
pub fn diagonal_cover(k: usize, r: usize) -> Vec<Diagonal> {
    diagonal_cover_grid(&vec![r; k])
}

/// Diagonal cover of a grid with `cells[i]` cells along axis `i`.
pub fn diagonal_cover_grid(cells: &[usize]) -> Vec<Diagonal> {
    let mut out = Vec::new();
    if cells.is_empty() || cells.contains(&0) {
        return out;
    }
    let k = cells.len();
    // Group starts by the first axis whose coordinate is 1: earlier axes are ≥ 2.
    for first in 0..k {
        let ranges: Vec<(usize, usize)> = (0..k)
            .map(|i| match i.cmp(&first) {
                std::cmp::Ordering::Less => (2, cells[i]),
                std::cmp::Ordering::Equal => (1, 1),
                std::cmp::Ordering::Greater => (1, cells[i]),
            })
            .collect();
        if ranges.iter().any(|(lo, hi)| lo > hi) {
            continue;
        }
        for e in index_product(&ranges) {
            let len = (0..k).map(|i| cells[i] + 1 - e[i]).min().expect("k >= 1");
            out.push(Diagonal { start: e, len });
        }
    }
    out
}

fn index_product(ranges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new()];
    for &(lo, hi) in ranges {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (lo..=hi).map(move |v| {
                    let mut next = prefix.clone();
                    next.push(v);
                    next
                })
            })
            .collect();
    }
    out
}

/// `k·r^{k−1}`.
pub fn hyperplane_bound(k: usize, r: usize) -> u128 {
    k as u128 * (r as u128).pow(k as u32 - 1)
}

fn check_boundaries<S: Scalar>(boundaries: &[Vec<S>]) -> Result<()> {
    if boundaries.len() < 2 {
        return Err(Error::input("hyperplane count needs k >= 2 axes"));
    }
    for b in boundaries {
        if b.len() < 2 || b.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::input(
                "each axis needs >= 2 strictly increasing boundaries",
            ));
        }
    }
    Ok(())
}

/// Number of grid cells whose interior meets `{x_1 + ... + x_k = C}`.
///
/// `boundaries[i]` lists the `t_i + 1` cut coordinates along axis `i`. A level
/// equal to some corner sum is shifted by `+ε`, half the minimal gap between
/// distinct corner sums; that shift is equivalent to counting cells with
/// `Σ lower ≤ C < Σ upper`. Along each diagonal the lower sums strictly
/// increase and the upper sum of one cell is the lower sum of the next, so a
/// binary search finds the at most one crossed cell.
pub fn hyperplane_cell_count<S: Scalar>(boundaries: &[Vec<S>], level: &S) -> Result<usize> {
    check_boundaries(boundaries)?;
    let cells: Vec<usize> = boundaries.iter().map(|b| b.len() - 1).collect();
    let lower_sum = |start: &[usize], a: usize| -> S {
        start
            .iter()
            .zip(boundaries)
            .fold(S::zero(), |acc, (e, b)| acc + b[e - 1 + a].clone())
    };
    let mut crossed = 0;
    for d in diagonal_cover_grid(&cells) {
        // First a in [0, len] with lower_sum(a) > level; the crossed cell is a-1.
        let (mut lo, mut hi) = (0usize, d.len + 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if lower_sum(&d.start, mid) > *level {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        if lo >= 1 && lo <= d.len {
            crossed += 1;
        }
    }
    Ok(crossed)
}

/// The level actually used for `C`: `C` itself when generic, otherwise
/// `C + ε` with `ε` half the minimal gap between distinct corner sums.
pub fn perturbed_level(boundaries: &[Vec<Rational>], level: &Rational) -> Result<Rational> {
    check_boundaries(boundaries)?;
    let mut sums = vec![Rational::from_integer(0.into())];
    for b in boundaries {
        sums = sums
            .iter()
            .flat_map(|s| b.iter().map(move |x| s + x))
            .collect();
        sums.sort();
        sums.dedup();
    }
    if sums.binary_search(level).is_err() {
        return Ok(level.clone());
    }
    let two = Rational::one() + Rational::one();
    let gap = sums
        .windows(2)
        .map(|w| &w[1] - &w[0])
        .min()
        .unwrap_or_else(Rational::one);
    Ok(level + gap / two)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational_from_ratio;

    fn q(n: i64) -> Rational {
        rational_from_ratio(n, 1)
    }

    #[test]
    fn diagonal_examples() {
        let d = diagonal_cover(2, 2);
        assert_eq!(d.len(), 3);
        let cells: Vec<Vec<Vec<usize>>> = d.iter().map(|d| d.cells().collect()).collect();
        assert!(cells.contains(&vec![vec![1, 1], vec![2, 2]]));
        assert!(cells.contains(&vec![vec![1, 2]]));
        assert!(cells.contains(&vec![vec![2, 1]]));
        assert_eq!(diagonal_cover(2, 3).len(), 5);
        assert_eq!(diagonal_cover(2, 1).len(), 1);
        assert_eq!(diagonal_cover(3, 4).len(), 64 - 27);
    }

    #[test]
    fn diagonals_partition_rectangular_grid() {
        let dims = [3usize, 1, 4];
        let mut seen = std::collections::BTreeSet::new();
        for d in diagonal_cover_grid(&dims) {
            for c in d.cells() {
                assert!(c.iter().zip(&dims).all(|(e, n)| (1..=*n).contains(e)));
                assert!(seen.insert(c));
            }
        }
        assert_eq!(seen.len(), 12);
    }

    #[test]
    fn uniform_three_by_three() {
        let b: Vec<Rational> = (0..=3).map(q).collect();
        let grid = vec![b.clone(), b];
        let c = rational_from_ratio(7, 2);
        assert_eq!(hyperplane_cell_count(&grid, &c).unwrap(), 5);
        assert_eq!(hyperplane_cell_count(&grid, &q(-1)).unwrap(), 0);
        assert_eq!(hyperplane_cell_count(&grid, &q(6)).unwrap(), 0);
    }

    #[test]
    fn corner_levels_are_perturbed_upward() {
        let b: Vec<Rational> = (0..=3).map(q).collect();
        let grid = vec![b.clone(), b];
        // C = 3 lies on corners; C + 1/2 crosses cells with i+j ∈ {2, 3} (0-based).
        assert_eq!(
            perturbed_level(&grid, &q(3)).unwrap(),
            rational_from_ratio(7, 2)
        );
        assert_eq!(hyperplane_cell_count(&grid, &q(3)).unwrap(), 5);
        assert_eq!(
            perturbed_level(&grid, &rational_from_ratio(7, 3)).unwrap(),
            rational_from_ratio(7, 3)
        );
    }

    #[test]
    fn two_by_two_never_reaches_four() {
        let grid = vec![vec![q(0), q(1), q(5)], vec![q(0), q(2), q(3)]];
        for num in -4..40 {
            let c = rational_from_ratio(num, 4);
            assert!(hyperplane_cell_count(&grid, &c).unwrap() <= 3);
        }
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(hyperplane_cell_count(&[vec![q(0), q(1)]], &q(0)).is_err());
        assert!(hyperplane_cell_count(&[vec![q(0), q(1)], vec![q(1), q(1)]], &q(0)).is_err());
    }
}
