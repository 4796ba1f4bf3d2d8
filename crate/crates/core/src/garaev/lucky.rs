use std::collections::BTreeMap;

use num_bigint::BigUint;

use crate::energy::{Engine, Sign};
use crate::error::{Error, Result};
use crate::function::{eval_fn, FunctionSpec};
use crate::scalar::Scalar;
use crate::set::OrderedSet;
use crate::{Rational, Set};

/// `B` together with its triple sumset `B + B − B`.
#[derive(Debug, Clone)]
pub struct TripleSumset<S> {
    pub base: OrderedSet<S>,
    pub triple: OrderedSet<S>,
}

impl<S: Scalar> TripleSumset<S> {
    pub fn new(base: &OrderedSet<S>) -> Result<Self> {
        let triple = Engine::default().signed_sumset(
            &[base.clone(), base.clone(), base.clone()],
            &[Sign::Plus, Sign::Plus, Sign::Minus],
        )?;
        Ok(TripleSumset {
            base: base.clone(),
            triple,
        })
    }

    /// `n_B(b, b')`: elements of `B + B − B` in `(min(b,b'), max(b,b')]`.
    pub fn count_between(&self, b: &S, b_prime: &S) -> usize {
        if b <= b_prime {
            self.triple.count_in(b, b_prime)
        } else {
            self.triple.count_in(b_prime, b)
        }
    }
}

/// A finite set `B_i` with the values of a strictly monotone map `g_i` on it.
#[derive(Debug, Clone)]
pub struct MonotoneAxis<S> {
    base: OrderedSet<S>,
    image: Vec<S>,
}

impl<S: Scalar> MonotoneAxis<S> {
    /// `image[j] = g(base[j])`; must be strictly monotone.
    pub fn new(base: OrderedSet<S>, image: Vec<S>) -> Result<Self> {
        if image.len() != base.len() {
            return Err(Error::input("image and base differ in length"));
        }
        let inc = image.windows(2).all(|w| w[0] < w[1]);
        let dec = image.windows(2).all(|w| w[0] > w[1]);
        if !(inc || dec) {
            return Err(Error::domain("axis map is not strictly monotone"));
        }
        Ok(MonotoneAxis { base, image })
    }

    pub fn identity(base: &OrderedSet<S>) -> Self {
        MonotoneAxis {
            base: base.clone(),
            image: base.as_slice().to_vec(),
        }
    }

    /// `B = {1, ..., N}` and `g(j) = a_j`.
    pub fn index_form(a: &OrderedSet<S>) -> Self {
        MonotoneAxis {
            base: OrderedSet::interval(a.len()).expect("non-empty"),
            image: a.as_slice().to_vec(),
        }
    }

    pub fn base(&self) -> &OrderedSet<S> {
        &self.base
    }

    pub fn image(&self) -> &[S] {
        &self.image
    }

    pub fn g(&self, b: &S) -> Option<&S> {
        self.base.index_of(b).map(|i| &self.image[i])
    }
}

impl MonotoneAxis<Rational> {
    pub fn from_function(f: &FunctionSpec, base: &Set) -> Result<Self> {
        eval_fn(f, base)?;
        let image = base.iter().map(|x| f.eval(x)).collect::<Result<Vec<_>>>()?;
        Self::new(base.clone(), image)
    }
}

/// Smallest `t ≥ 1` with `(t·c)^{k−1} ≥ r`, i.e. `⌈r^{1/(k−1)}/c⌉` in exact integers.
pub fn cells_per_axis(r: u64, k: usize, c: u64) -> Result<u64> {
    if k < 2 || c == 0 || r == 0 {
        return Err(Error::input("need k >= 2, c >= 1 and r >= 1"));
    }
    let r = BigUint::from(r);
    let mut t = 1u64;
    while num_traits::pow(BigUint::from(t) * c, k - 1) < r {
        t += 1;
    }
    Ok(t)
}

/// Smallest integer `q` with `q ≥ c·M / r^{1/(k−1)}`, exactly.
pub fn pair_bound(triple_size: usize, r: u64, k: usize, c: u64) -> Result<u64> {
    if k < 2 || r == 0 {
        return Err(Error::input("need k >= 2 and r >= 1"));
    }
    // q·r^{1/(k−1)} ≥ cM  ⟺  q^{k−1}·r ≥ (cM)^{k−1}.
    let target = num_traits::pow(BigUint::from(c) * triple_size, k - 1);
    let holds = |q: u64| num_traits::pow(BigUint::from(q), k - 1) * r >= target;
    let (mut lo, mut hi) = (0u64, c * triple_size as u64);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

/// One axis of a [`GridPartition`]: `B + B − B` split into consecutive runs.
#[derive(Debug, Clone)]
pub struct AxisPartition<S> {
    pub triple: OrderedSet<S>,
    /// First element of each run after the first; run `j` is
    /// `[cuts[j−1], cuts[j])`, lower-closed.
    pub cuts: Vec<S>,
    pub cells: usize,
    pub largest_run: usize,
    /// `⌈c·|B+B−B| / r^{1/(k−1)}⌉`.
    pub run_bound: u64,
}

impl<S: Scalar> AxisPartition<S> {
    pub fn cell_of(&self, v: &S) -> usize {
        self.cuts.partition_point(|cut| cut <= v)
    }
}

#[derive(Debug, Clone)]
pub struct GridPartition<S> {
    pub axes: Vec<AxisPartition<S>>,
    pub k: usize,
    pub r: u64,
    pub c: u64,
    /// `⌈r^{1/(k−1)}/c⌉` before capping at the triple-sumset size.
    pub t: u64,
    /// `r < c^{k−1}`: a single cell per axis.
    pub degenerate: bool,
}

impl<S: Scalar> GridPartition<S> {
    pub fn cell_of(&self, point: &[S]) -> Vec<usize> {
        self.axes
            .iter()
            .zip(point)
            .map(|(a, v)| a.cell_of(v))
            .collect()
    }

    /// `k·t^{k−1}`, the hyperplane crossing bound for this grid.
    pub fn crossing_bound(&self) -> u128 {
        let t = self.axes.iter().map(|a| a.cells).max().unwrap_or(1);
        super::hyperplane_bound(self.k, t)
    }
}

fn partition_axis<S: Scalar>(
    triple: &OrderedSet<S>,
    t: u64,
    run_bound: u64,
) -> Result<AxisPartition<S>> {
    let m = triple.len();
    let cells = (t as usize).min(m);
    // Balanced runs: run j covers indices [⌊jM/t⌋, ⌊(j+1)M/t⌋).
    let starts: Vec<usize> = (0..cells).map(|j| j * m / cells).collect();
    let largest_run = (0..cells)
        .map(|j| (j + 1) * m / cells - starts[j])
        .max()
        .unwrap_or(0);
    if largest_run as u64 > run_bound {
        return Err(Error::Invariant(format!(
            "axis run of {largest_run} exceeds bound {run_bound}"
        )));
    }
    Ok(AxisPartition {
        triple: triple.clone(),
        cuts: starts[1..].iter().map(|&i| triple[i].clone()).collect(),
        cells,
        largest_run,
        run_bound,
    })
}

/// Splits each `B_i + B_i − B_i` into `⌈r^{1/(k−1)}/c⌉` runs of consecutive
/// elements (fewer if the triple sumset is smaller).
pub fn build_partition<S: Scalar>(
    bases: &[OrderedSet<S>],
    r: u64,
    c: u64,
) -> Result<GridPartition<S>> {
    let triples = bases
        .iter()
        .map(TripleSumset::new)
        .collect::<Result<Vec<_>>>()?;
    partition_from_triples(&triples, r, c)
}

fn partition_from_triples<S: Scalar>(
    triples: &[TripleSumset<S>],
    r: u64,
    c: u64,
) -> Result<GridPartition<S>> {
    let k = triples.len();
    let t = cells_per_axis(r, k, c)?;
    let degenerate = BigUint::from(r) < num_traits::pow(BigUint::from(c), k - 1);
    let axes = triples
        .iter()
        .map(|tr| {
            let bound = pair_bound(tr.triple.len(), r, k, c)?;
            partition_axis(&tr.triple, t, bound)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GridPartition {
        axes,
        k,
        r,
        c,
        t,
        degenerate,
    })
}

/// Two distinct solution tuples of `g_1(b_1) + ... + g_k(b_k) = x` lying close
/// in every coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LuckyPair<S> {
    pub p: Vec<S>,
    pub p_prime: Vec<S>,
    /// `n_{B_i}(b_i, b_i')` per axis.
    pub witnesses: Vec<usize>,
}

/// Lucky pairs found for one sum `x`.
#[derive(Debug, Clone)]
pub struct Census<S> {
    pub x: S,
    pub r_x: usize,
    pub pairs: Vec<LuckyPair<S>>,
    pub occupied_cells: usize,
    pub cells_per_axis: u64,
    /// `r_x − k·t^{k−1}`; may be negative.
    pub lower_bound: i128,
    pub degenerate: bool,
}

impl<S: Scalar> Census<S> {
    pub fn csv_header() -> &'static str {
        "x,r_x,pairs_found,lower_bound,occupied_cells"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.x,
            self.r_x,
            self.pairs.len(),
            self.lower_bound,
            self.occupied_cells
        )
    }
}

/// Solution sets and triple sumsets for a fixed list of axes.
#[derive(Debug, Clone)]
pub struct LuckyPairs<S> {
    axes: Vec<MonotoneAxis<S>>,
    triples: Vec<TripleSumset<S>>,
}

impl<S: Scalar> LuckyPairs<S> {
    pub fn new(axes: Vec<MonotoneAxis<S>>) -> Result<Self> {
        if axes.len() < 2 {
            return Err(Error::input("lucky pairs need k >= 2 axes"));
        }
        let triples = axes
            .iter()
            .map(|a| TripleSumset::new(a.base()))
            .collect::<Result<Vec<_>>>()?;
        Ok(LuckyPairs { axes, triples })
    }

    pub fn k(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[MonotoneAxis<S>] {
        &self.axes
    }

    pub fn triples(&self) -> &[TripleSumset<S>] {
        &self.triples
    }

    /// Every index tuple `(j_1, ..., j_k)` grouped by `Σ g_i(b_{i,j_i})`.
    pub fn solutions_by_sum(&self) -> BTreeMap<S, Vec<Vec<usize>>> {
        let mut out: BTreeMap<S, Vec<Vec<usize>>> = BTreeMap::new();
        let mut idx = vec![0usize; self.k()];
        self.enumerate(0, S::zero(), &mut idx, &mut |sum, tuple| {
            out.entry(sum).or_default().push(tuple.to_vec());
        });
        out
    }

    fn enumerate(
        &self,
        axis: usize,
        partial: S,
        idx: &mut Vec<usize>,
        visit: &mut impl FnMut(S, &[usize]),
    ) {
        if axis == self.k() {
            visit(partial, idx);
            return;
        }
        for j in 0..self.axes[axis].image.len() {
            idx[axis] = j;
            let next = partial.clone() + self.axes[axis].image[j].clone();
            self.enumerate(axis + 1, next, idx, visit);
        }
    }

    /// Solutions for one `x`: the first `k−1` coordinates are enumerated and
    /// the last is found by binary search on the monotone image.
    pub fn solutions(&self, x: &S) -> Vec<Vec<usize>> {
        let k = self.k();
        let last = &self.axes[k - 1].image;
        let increasing = last.len() < 2 || last[0] < last[1];
        let mut out = Vec::new();
        let mut idx = vec![0usize; k];
        let mut visit = |partial: S, prefix: &[usize]| {
            let need = x.clone() - partial;
            let found = if increasing {
                last.binary_search(&need)
            } else {
                last.binary_search_by(|v| need.cmp(v))
            };
            if let Ok(j) = found {
                let mut t = prefix[..k - 1].to_vec();
                t.push(j);
                out.push(t);
            }
        };
        self.enumerate_prefix(0, S::zero(), &mut idx, &mut visit);
        out.sort();
        out
    }

    fn enumerate_prefix(
        &self,
        axis: usize,
        partial: S,
        idx: &mut Vec<usize>,
        visit: &mut impl FnMut(S, &[usize]),
    ) {
        if axis == self.k() - 1 {
            visit(partial, idx);
            return;
        }
        for j in 0..self.axes[axis].image.len() {
            idx[axis] = j;
            let next = partial.clone() + self.axes[axis].image[j].clone();
            self.enumerate_prefix(axis + 1, next, idx, visit);
        }
    }

    pub fn partition(&self, r: u64, c: u64) -> Result<GridPartition<S>> {
        partition_from_triples(&self.triples, r, c)
    }

    /// All unordered pairs of distinct solutions of `Σ g_i(b_i) = x` sharing
    /// a cell of the `(r, c)` partition; each is re-checked before return.
    pub fn census(&self, x: &S, r: u64, c: u64) -> Result<Census<S>> {
        let solutions = self.solutions(x);
        if solutions.is_empty() {
            return Err(Error::input(format!("{x} is not representable")));
        }
        let grid = self.partition(r, c)?;
        self.census_with(x, &solutions, &grid)
    }

    pub fn census_with(
        &self,
        x: &S,
        solutions: &[Vec<usize>],
        grid: &GridPartition<S>,
    ) -> Result<Census<S>> {
        let points: Vec<Vec<S>> = solutions
            .iter()
            .map(|t| {
                t.iter()
                    .zip(&self.axes)
                    .map(|(j, ax)| ax.base[*j].clone())
                    .collect()
            })
            .collect();
        let mut cells: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(grid.cell_of(p)).or_default().push(i);
        }
        let mut pairs = Vec::new();
        for members in cells.values() {
            for (a, &i) in members.iter().enumerate() {
                for &j in &members[a + 1..] {
                    let pair = LuckyPair {
                        witnesses: self.witnesses(&points[i], &points[j]),
                        p: points[i].clone(),
                        p_prime: points[j].clone(),
                    };
                    if !self.is_lucky(&pair, x, grid.r, grid.c)? {
                        return Err(Error::Invariant(format!(
                            "pair in one cell fails the lucky-pair conditions for x = {x}"
                        )));
                    }
                    pairs.push(pair);
                }
            }
        }
        let r_x = solutions.len();
        Ok(Census {
            x: x.clone(),
            r_x,
            pairs,
            occupied_cells: cells.len(),
            cells_per_axis: grid.t,
            lower_bound: r_x as i128 - grid.crossing_bound() as i128,
            degenerate: grid.degenerate,
        })
    }

    fn witnesses(&self, p: &[S], q: &[S]) -> Vec<usize> {
        self.triples
            .iter()
            .zip(p.iter().zip(q))
            .map(|(t, (a, b))| t.count_between(a, b))
            .collect()
    }

    /// Both conditions of the lucky-pair definition, recomputed from scratch:
    /// distinct points, both summing to `x` under the `g_i`, and
    /// `n_{B_i}(b_i, b_i') ≤ ⌈c·|B_i+B_i−B_i| / r^{1/(k−1)}⌉` on every axis.
    pub fn is_lucky(&self, pair: &LuckyPair<S>, x: &S, r: u64, c: u64) -> Result<bool> {
        let k = self.k();
        if pair.p.len() != k || pair.p_prime.len() != k || pair.p == pair.p_prime {
            return Ok(false);
        }
        let value = |pt: &[S]| -> Option<S> {
            pt.iter()
                .zip(&self.axes)
                .try_fold(S::zero(), |acc, (b, ax)| Some(acc + ax.g(b)?.clone()))
        };
        if value(&pair.p).as_ref() != Some(x) || value(&pair.p_prime).as_ref() != Some(x) {
            return Ok(false);
        }
        for (i, t) in self.triples.iter().enumerate() {
            let bound = pair_bound(t.triple.len(), r, k, c)?;
            if t.count_between(&pair.p[i], &pair.p_prime[i]) as u64 > bound {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Lucky pairs for the sum `x` over the given axes.
pub fn lucky_pairs_for_sum<S: Scalar>(
    axes: Vec<MonotoneAxis<S>>,
    x: &S,
    r: u64,
    c: u64,
) -> Result<Census<S>> {
    LuckyPairs::new(axes)?.census(x, r, c)
}

/// Pairs `b > b'` in `B` with `n_B(b', b) ≤ Z` but `b − b'` larger than the
/// `Z`-th smallest positive difference of `B` (expected: none).
pub fn small_gap_counterexamples<S: Scalar>(base: &OrderedSet<S>, z: usize) -> Result<Vec<(S, S)>> {
    let triple = TripleSumset::new(base)?;
    let mut diffs: Vec<S> = Vec::new();
    for (i, b) in base.iter().enumerate() {
        for bp in &base.as_slice()[..i] {
            diffs.push(b.clone() - bp.clone());
        }
    }
    diffs.sort_unstable();
    diffs.dedup();
    if z == 0 || z > diffs.len() {
        return Ok(Vec::new());
    }
    let d_z = &diffs[z - 1];
    let mut bad = Vec::new();
    for (i, b) in base.iter().enumerate() {
        for bp in &base.as_slice()[..i] {
            if triple.count_between(bp, b) <= z && &(b.clone() - bp.clone()) > d_z {
                bad.push((b.clone(), bp.clone()));
            }
        }
    }
    Ok(bad)
}
