//! Independent oracles shared by the integration tests. Nothing here calls
//! into the engine's kernels.
#![allow(dead_code)]

use sumsetlab::rng::SplitMix64;
use sumsetlab::scalar::rational_from_ratio;
use sumsetlab::{Rational, Set};

/// All sums `a_1 + ... + a_k` with multiplicity, one per k-tuple.
pub fn tuple_sums(sets: &[Vec<i64>]) -> Vec<i64> {
    let mut sums = vec![0i64];
    for s in sets {
        sums = sums
            .iter()
            .flat_map(|p| s.iter().map(move |a| p + a))
            .collect();
    }
    sums
}

/// `T(A_1, ..., A_k)` by comparing every pair of k-tuples, i.e. walking all
/// 2k-tuples.
pub fn brute_energy(sets: &[Vec<i64>]) -> u128 {
    let sums = tuple_sums(sets);
    let mut count = 0u128;
    for x in &sums {
        count += sums.iter().filter(|y| *y == x).count() as u128;
    }
    count
}

/// Cells `Π [lo_i, hi_i)` whose open interior meets `Σ x_i = level`.
pub fn brute_cells(boundaries: &[Vec<Rational>], level: &Rational) -> usize {
    let (grid, level) = scaled(boundaries, level, 1);
    count_cells(&grid, |lo, hi| lo < level && level < hi)
}

/// Cells met by `Σ x_i = level + ε` for an infinitesimal `ε > 0`. After
/// doubling an integer grid every corner sum is even, so the odd level
/// `2·level + 1` sits strictly between `2·level` and the next corner sum.
pub fn brute_cells_shifted(boundaries: &[Vec<Rational>], level: &Rational) -> usize {
    let (grid, level) = scaled(boundaries, level, 2);
    count_cells(&grid, |lo, hi| lo < level + 1 && level + 1 < hi)
}

/// Multiplies everything by `extra` times the lcm of the denominators.
fn scaled(boundaries: &[Vec<Rational>], level: &Rational, extra: i128) -> (Vec<Vec<i128>>, i128) {
    use num_integer::Integer;
    let lcm = boundaries
        .iter()
        .flatten()
        .chain(std::iter::once(level))
        .fold(num_bigint::BigInt::from(1), |acc, v| acc.lcm(v.denom()));
    let factor = Rational::from_integer(lcm * extra);
    let int = |v: &Rational| -> i128 {
        let scaled = v * &factor;
        assert!(scaled.is_integer());
        i128::try_from(scaled.to_integer()).expect("fits in i128")
    };
    let grid = boundaries
        .iter()
        .map(|b| b.iter().map(int).collect())
        .collect();
    (grid, int(level))
}

fn count_cells(grid: &[Vec<i128>], meets: impl Fn(i128, i128) -> bool) -> usize {
    let mut count = 0;
    let mut idx = vec![0usize; grid.len()];
    loop {
        let lo: i128 = idx.iter().zip(grid).map(|(&i, b)| b[i]).sum();
        let hi: i128 = idx.iter().zip(grid).map(|(&i, b)| b[i + 1]).sum();
        if meets(lo, hi) {
            count += 1;
        }
        let mut axis = 0;
        loop {
            if axis == idx.len() {
                return count;
            }
            idx[axis] += 1;
            if idx[axis] + 1 < grid[axis].len() {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }
}

pub fn int_set(values: &[i64]) -> Set {
    Set::new(values.iter().map(|&v| rational_from_ratio(v, 1)).collect()).unwrap()
}

/// A random set of at most `max_n` integers from `[-range, range]`.
pub fn random_int_values(rng: &mut SplitMix64, max_n: u64, range: u64) -> Vec<i64> {
    let n = rng.one_to(max_n);
    let mut v: Vec<i64> = (0..n)
        .map(|_| rng.below(2 * range + 1) as i64 - range as i64)
        .collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Strictly increasing boundaries `b_0 < ... < b_r` with uneven gaps, some
/// of them fractional.
pub fn random_boundaries(rng: &mut SplitMix64, r: usize) -> Vec<Rational> {
    let mut x = rational_from_ratio(rng.below(21) as i64 - 10, 1);
    let mut out = vec![x.clone()];
    for _ in 0..r {
        let num = rng.one_to(12) as i64;
        let den = rng.one_to(3) as i64;
        x += rational_from_ratio(num, den);
        out.push(x.clone());
    }
    out
}
