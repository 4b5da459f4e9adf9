//! Partition families and the transforms built on them.
//!
//! Indices are 0-based throughout: a partition of `n` covers `0..n`.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{Num, One, Zero};

use crate::error::{Error, Result};

pub const MAX_SET_PARTITION_N: usize = 12;
pub const MAX_ORDERED_PARTITION_N: usize = 9;
pub const MAX_NONCROSSING_N: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SetPartition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    /// Blocks are sorted internally and ordered by their smallest element.
    pub fn new(n: usize, mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        for b in &mut blocks {
            if b.is_empty() {
                return Err(Error::InvalidParameter("empty block".into()));
            }
            b.sort_unstable();
            for &i in b.iter() {
                if i >= n || seen[i] {
                    return Err(Error::InvalidParameter(format!("index {i} repeated or out of range")));
                }
                seen[i] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidParameter("blocks do not cover the ground set".into()));
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Ok(Self { n, blocks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    fn from_rgs(rgs: &[usize]) -> Self {
        let m = rgs.iter().copied().max().map_or(0, |x| x + 1);
        let mut blocks = vec![Vec::new(); m];
        for (i, &b) in rgs.iter().enumerate() {
            blocks[b].push(i);
        }
        Self { n: rgs.len(), blocks }
    }

    /// Stack-discipline test: scanning left to right, every non-first element
    /// must belong to the innermost open block.
    pub fn is_noncrossing(&self) -> bool {
        let mut owner = vec![0usize; self.n];
        for (b, blk) in self.blocks.iter().enumerate() {
            for &i in blk {
                owner[i] = b;
            }
        }
        let mut stack: Vec<usize> = Vec::new();
        for i in 0..self.n {
            let b = owner[i];
            let blk = &self.blocks[b];
            let first = blk[0] == i;
            let last = *blk.last().unwrap() == i;
            if first {
                if !last {
                    stack.push(b);
                }
            } else {
                if stack.last() != Some(&b) {
                    return false;
                }
                if last {
                    stack.pop();
                }
            }
        }
        true
    }
}

/// Lazy enumeration of set partitions through restricted growth strings.
#[derive(Debug, Clone)]
pub struct SetPartitions {
    rgs: Vec<usize>,
    maxes: Vec<usize>,
    done: bool,
}

impl Iterator for SetPartitions {
    type Item = SetPartition;

    fn next(&mut self) -> Option<SetPartition> {
        if self.done {
            return None;
        }
        let out = SetPartition::from_rgs(&self.rgs);
        // advance the rightmost position that can still grow
        let n = self.rgs.len();
        let mut i = n - 1;
        while i >= 1 {
            if self.rgs[i] <= self.maxes[i - 1] {
                self.rgs[i] += 1;
                for j in i..n {
                    if j > i {
                        self.rgs[j] = 0;
                    }
                    self.maxes[j] = self.maxes[j - 1].max(self.rgs[j]);
                }
                return Some(out);
            }
            i -= 1;
        }
        self.done = true;
        Some(out)
    }
}

fn guard(what: &'static str, n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::TooLarge { what, n, cap });
    }
    Ok(())
}

pub fn set_partitions(n: usize) -> Result<SetPartitions> {
    guard("set partition size", n, MAX_SET_PARTITION_N)?;
    Ok(SetPartitions {
        rgs: vec![0; n],
        maxes: vec![0; n],
        done: n == 0,
    })
}

/// Partition whose blocks carry an internal order; blocks are listed by their
/// smallest element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrderedPartition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl OrderedPartition {
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let underlying = SetPartition::new(n, blocks.clone())?;
        let mut blocks = blocks;
        blocks.sort_unstable_by_key(|b| *b.iter().min().unwrap());
        debug_assert_eq!(underlying.blocks().len(), blocks.len());
        Ok(Self { n, blocks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn underlying(&self) -> SetPartition {
        SetPartition::new(self.n, self.blocks.clone()).expect("valid by construction")
    }
}

/// Every ordering of `items`, in lexicographic order of positions.
pub fn permutations_of(items: &[usize]) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..items.len()).collect();
    let mut out = Vec::new();
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        if !next_permutation(&mut idx) {
            break;
        }
    }
    out
}

/// Advance to the next permutation in lexicographic order; false at the last one.
pub fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut cur: Option<Vec<usize>> = Some((0..n).collect());
    std::iter::from_fn(move || {
        let out = cur.take()?;
        let mut nxt = out.clone();
        if next_permutation(&mut nxt) {
            cur = Some(nxt);
        }
        Some(out)
    })
}

pub fn ordered_partitions(n: usize) -> Result<impl Iterator<Item = OrderedPartition>> {
    guard("ordered partition size", n, MAX_ORDERED_PARTITION_N)?;
    let parts = set_partitions(n)?;
    Ok(parts.flat_map(move |sp| {
        let choices: Vec<Vec<Vec<usize>>> = sp.blocks().iter().map(|b| permutations_of(b)).collect();
        let mut counter = vec![0usize; choices.len()];
        let mut finished = false;
        std::iter::from_fn(move || {
            if finished {
                return None;
            }
            let blocks = choices
                .iter()
                .zip(&counter)
                .map(|(c, &i)| c[i].clone())
                .collect();
            // mixed-radix increment
            let mut p = 0;
            loop {
                if p == counter.len() {
                    finished = true;
                    break;
                }
                counter[p] += 1;
                if counter[p] < choices[p].len() {
                    break;
                }
                counter[p] = 0;
                p += 1;
            }
            Some(OrderedPartition { n, blocks })
        })
    }))
}

/// Cut points `0 = n_0 < n_1 < ... < n_m = k` of a partition of `0..k` into
/// consecutive blocks.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntervalComposition {
    cuts: Vec<usize>,
}

impl IntervalComposition {
    pub fn new(cuts: Vec<usize>) -> Result<Self> {
        if cuts.first() != Some(&0) || cuts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(format!("bad cut points {cuts:?}")));
        }
        Ok(Self { cuts })
    }

    pub fn cuts(&self) -> &[usize] {
        &self.cuts
    }

    pub fn k(&self) -> usize {
        *self.cuts.last().unwrap()
    }

    /// Half-open index ranges of the blocks.
    pub fn blocks(&self) -> impl Iterator<Item = std::ops::Range<usize>> + '_ {
        self.cuts.windows(2).map(|w| w[0]..w[1])
    }
}

/// All `2^(k-1)` interval compositions of `k` (one empty composition for `k = 0`).
///
/// Panics for `k >= 64`.
pub fn interval_compositions(k: usize) -> impl Iterator<Item = IntervalComposition> {
    assert!(k < 64, "interval compositions of k >= 64 are not enumerable");
    let count: u64 = if k == 0 { 1 } else { 1u64 << (k - 1) };
    (0..count).map(move |mask| {
        let mut cuts = vec![0];
        for i in 1..k {
            if mask >> (i - 1) & 1 == 1 {
                cuts.push(i);
            }
        }
        if k > 0 {
            cuts.push(k);
        }
        IntervalComposition { cuts }
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NoncrossingPartition(SetPartition);

impl NoncrossingPartition {
    pub fn new(p: SetPartition) -> Result<Self> {
        if !p.is_noncrossing() {
            return Err(Error::InvalidParameter("partition is crossing".into()));
        }
        Ok(Self(p))
    }

    pub fn partition(&self) -> &SetPartition {
        &self.0
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        self.0.blocks()
    }
}

pub fn noncrossing_partitions(n: usize) -> Result<impl Iterator<Item = NoncrossingPartition>> {
    guard("noncrossing partition size", n, MAX_NONCROSSING_N)?;
    Ok(set_partitions(n)?.filter(SetPartition::is_noncrossing).map(NoncrossingPartition))
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

pub fn catalan(l: u64) -> BigUint {
    binomial(2 * l, l) / (l + 1)
}

fn binomial_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Block weight of the free moment expansion:
/// `sum_{l >= 0, 2l <= n-2} Cat(l) C(n-2, 2l) s^(n-2l-2)`, and 0 for `n < 2`.
///
/// Counts the paths of a block of size `n` that open with a creator, close
/// with the matching annihilator and use `l` inner creator/merge pairs; the
/// remaining positions carry a factor `s` each.
pub fn cumulant_weight(n: usize, s: f64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let inner = n - 2;
    (0..=inner / 2)
        .map(|l| {
            let cat = binomial_f64(2 * l, l) / (l + 1) as f64;
            cat * binomial_f64(inner, 2 * l) * s.powi((inner - 2 * l) as i32)
        })
        .sum()
}

/// Number of pairs `i < j` with `p[i] > p[j]`, by merge sort.
pub fn inversions(p: &[usize]) -> usize {
    fn sort_count(v: &mut Vec<usize>) -> usize {
        if v.len() < 2 {
            return 0;
        }
        let mut right = v.split_off(v.len() / 2);
        let mut count = sort_count(v) + sort_count(&mut right);
        let mut merged = Vec::with_capacity(v.len() + right.len());
        let (mut i, mut j) = (0, 0);
        while i < v.len() && j < right.len() {
            if v[i] <= right[j] {
                merged.push(v[i]);
                i += 1;
            } else {
                merged.push(right[j]);
                count += v.len() - i;
                j += 1;
            }
        }
        merged.extend_from_slice(&v[i..]);
        merged.extend_from_slice(&right[j..]);
        *v = merged;
        count
    }
    sort_count(&mut p.to_vec())
}

/// `coef[s][r]` = coefficient of `z^r` in `(sum_i m_i z^i)^s`, with `m_0 = 1`,
/// using only moments of order `< upto`.
fn composition_sums<T: Num + Clone>(moments: &[T], upto: usize) -> Vec<Vec<T>> {
    let mut power = vec![vec![T::zero(); upto]; upto + 1];
    power[0][0] = T::one();
    let m = |i: usize| -> T {
        if i == 0 {
            T::one()
        } else {
            moments[i - 1].clone()
        }
    };
    for s in 1..=upto {
        for r in 0..upto {
            let mut acc = T::zero();
            for i in 0..=r {
                if i < upto && (i == 0 || i <= moments.len()) {
                    acc = acc + m(i) * power[s - 1][r - i].clone();
                }
            }
            power[s][r] = acc;
        }
    }
    power
}

/// Free cumulants `k_1..k_m` from moments `m_1..m_m` (input index 0 holds `m_1`).
pub fn moments_to_free_cumulants<T: Num + Clone>(moments: &[T]) -> Vec<T> {
    let m = moments.len();
    let power = composition_sums(moments, m);
    let mut k: Vec<T> = Vec::with_capacity(m);
    for n in 1..=m {
        let mut acc = moments[n - 1].clone();
        for s in 1..n {
            acc = acc - k[s - 1].clone() * power[s][n - s].clone();
        }
        k.push(acc);
    }
    k
}

/// Moments from free cumulants: the sum over noncrossing partitions of block
/// cumulant products, evaluated by the first-block recursion.
pub fn free_cumulants_to_moments<T: Num + Clone>(cumulants: &[T]) -> Vec<T> {
    let m = cumulants.len();
    let mut moments: Vec<T> = Vec::with_capacity(m);
    for n in 1..=m {
        let power = composition_sums(&moments, n);
        let mut acc = T::zero();
        for s in 1..=n {
            acc = acc + cumulants[s - 1].clone() * power[s][n - s].clone();
        }
        moments.push(acc);
    }
    moments
}

/// Multivariate free cumulant `k_n(x_0, ..., x_{n-1})` given a moment
/// functional on ordered index subsequences, through
/// `k(V) = m(V) - sum_{pi in NC(V), pi != 1_V} prod_B k(B)`.
pub fn multivariate_free_cumulant<T, F>(n: usize, moment: F) -> Result<T>
where
    T: Num + Clone,
    F: Fn(&[usize]) -> T,
{
    guard("cumulant order", n, MAX_NONCROSSING_N)?;
    let mut memo: HashMap<Vec<usize>, T> = HashMap::new();
    let all: Vec<usize> = (0..n).collect();
    cumulant_rec(&all, &moment, &mut memo)
}

fn cumulant_rec<T, F>(idx: &[usize], moment: &F, memo: &mut HashMap<Vec<usize>, T>) -> Result<T>
where
    T: Num + Clone,
    F: Fn(&[usize]) -> T,
{
    if let Some(v) = memo.get(idx) {
        return Ok(v.clone());
    }
    let mut acc = moment(idx);
    for pi in noncrossing_partitions(idx.len())? {
        if pi.blocks().len() == 1 {
            continue;
        }
        let mut prod = T::one();
        for b in pi.blocks() {
            let sub: Vec<usize> = b.iter().map(|&i| idx[i]).collect();
            prod = prod * cumulant_rec(&sub, moment, memo)?;
        }
        acc = acc - prod;
    }
    memo.insert(idx.to_vec(), acc.clone());
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    fn count<I: Iterator>(it: I) -> usize {
        it.count()
    }

    #[test]
    fn set_partition_counts_are_bell_numbers() {
        let bell = [1, 1, 2, 5, 15, 52, 203, 877, 4140];
        for n in 1..=8 {
            assert_eq!(count(set_partitions(n).unwrap()), bell[n], "n = {n}");
        }
        assert_eq!(count(set_partitions(0).unwrap()), 0);
        assert!(matches!(set_partitions(13), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn set_partitions_are_distinct_and_valid() {
        let all: Vec<_> = set_partitions(5).unwrap().collect();
        let uniq: std::collections::HashSet<_> = all.iter().cloned().collect();
        assert_eq!(uniq.len(), all.len());
        for p in &all {
            SetPartition::new(5, p.blocks().to_vec()).unwrap();
        }
    }

    #[test]
    fn ordered_partitions_small() {
        let two: Vec<_> = ordered_partitions(2).unwrap().map(|p| p.blocks().to_vec()).collect();
        assert_eq!(two.len(), 3);
        assert!(two.contains(&vec![vec![0], vec![1]]));
        assert!(two.contains(&vec![vec![0, 1]]));
        assert!(two.contains(&vec![vec![1, 0]]));
        assert_eq!(count(ordered_partitions(1).unwrap()), 1);
        assert_eq!(count(ordered_partitions(3).unwrap()), 13);
        assert!(ordered_partitions(10).is_err());
    }

    #[test]
    fn ordered_count_matches_factorial_weighted_set_partitions() {
        let fact = |k: usize| (1..=k).product::<usize>();
        for n in 1..=7 {
            let weighted: usize = set_partitions(n)
                .unwrap()
                .map(|p| p.blocks().iter().map(|b| fact(b.len())).product::<usize>())
                .sum();
            assert_eq!(count(ordered_partitions(n).unwrap()), weighted, "n = {n}");
        }
    }

    #[test]
    fn interval_composition_counts() {
        assert_eq!(count(interval_compositions(1)), 1);
        assert_eq!(count(interval_compositions(3)), 4);
        assert_eq!(count(interval_compositions(4)), 8);
        for c in interval_compositions(5) {
            IntervalComposition::new(c.cuts().to_vec()).unwrap();
            assert_eq!(c.blocks().map(|r| r.len()).sum::<usize>(), 5);
        }
    }

    // O(n^4) scan for a < b < c < d with a, c in one block and b, d in another
    fn crosses_brute(p: &SetPartition) -> bool {
        let n = p.n();
        let mut owner = vec![0; n];
        for (i, b) in p.blocks().iter().enumerate() {
            for &x in b {
                owner[x] = i;
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    for d in c + 1..n {
                        if owner[a] == owner[c] && owner[b] == owner[d] && owner[a] != owner[b] {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }

    #[test]
    fn noncrossing_counts_and_certificates() {
        assert_eq!(count(noncrossing_partitions(3).unwrap()), 5);
        assert_eq!(count(noncrossing_partitions(4).unwrap()), 14);
        assert_eq!(count(noncrossing_partitions(5).unwrap()), 42);
        for n in 1..=8 {
            let mut nc = 0;
            for p in set_partitions(n).unwrap() {
                assert_eq!(p.is_noncrossing(), !crosses_brute(&p), "{p:?}");
                if p.is_noncrossing() {
                    nc += 1;
                }
            }
            assert_eq!(BigUint::from(nc as u64), catalan(n as u64));
        }
    }

    #[test]
    fn catalan_values() {
        assert_eq!(catalan(0), BigUint::from(1u32));
        assert_eq!(catalan(3), BigUint::from(5u32));
        assert_eq!(catalan(10), BigUint::from(16796u32));
    }

    #[test]
    fn cumulant_weight_values() {
        assert_eq!(cumulant_weight(2, 7.5), 1.0);
        assert_eq!(cumulant_weight(3, 2.0), 2.0);
        assert_eq!(cumulant_weight(1, 5.0), 0.0);
        assert_eq!(cumulant_weight(4, 0.0), 1.0);
        // n = 6, s = 1: C(4,0) + 1*C(4,2) + 2*C(4,4) = 1 + 6 + 2
        assert_eq!(cumulant_weight(6, 1.0), 9.0);
    }

    #[test]
    fn inversions_match_pair_count() {
        for n in 0..=6 {
            for p in permutations(n) {
                let brute = (0..n)
                    .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                    .filter(|&(i, j)| p[i] > p[j])
                    .count();
                assert_eq!(inversions(&p), brute);
            }
        }
    }

    #[test]
    fn semicircle_moments_have_single_cumulant() {
        // m_{2j} = Cat(j), odd moments vanish
        let m: Vec<Ratio<i64>> = (1..=10)
            .map(|n| {
                if n % 2 == 1 {
                    Ratio::from_integer(0)
                } else {
                    let c: u64 = catalan(n as u64 / 2).try_into().unwrap();
                    Ratio::from_integer(c as i64)
                }
            })
            .collect();
        let k = moments_to_free_cumulants(&m);
        for (i, ki) in k.iter().enumerate() {
            let expect = if i == 1 { 1 } else { 0 };
            assert_eq!(*ki, Ratio::from_integer(expect), "k_{}", i + 1);
        }
    }

    #[test]
    fn low_order_cumulants() {
        let k = moments_to_free_cumulants(&[Ratio::from_integer(7i64)]);
        assert_eq!(k, vec![Ratio::from_integer(7)]);
        let k = moments_to_free_cumulants(&[Ratio::from_integer(1i64), Ratio::from_integer(1)]);
        assert_eq!(k, vec![Ratio::from_integer(1), Ratio::from_integer(0)]);
    }

    #[test]
    fn forward_transform_matches_noncrossing_sum() {
        let k: Vec<Ratio<i64>> = vec![
            Ratio::new(1, 2),
            Ratio::new(-3, 4),
            Ratio::new(2, 3),
            Ratio::new(5, 7),
            Ratio::new(-1, 5),
            Ratio::new(1, 9),
        ];
        let m = free_cumulants_to_moments(&k);
        for n in 1..=k.len() {
            let direct: Ratio<i64> = noncrossing_partitions(n)
                .unwrap()
                .map(|p| p.blocks().iter().map(|b| k[b.len() - 1]).product::<Ratio<i64>>())
                .sum();
            assert_eq!(m[n - 1], direct, "n = {n}");
        }
    }

    #[test]
    fn multivariate_cumulants_reduce_to_univariate() {
        let k: Vec<Ratio<i64>> = (1..=5).map(|i| Ratio::new(i, i + 3)).collect();
        let m = free_cumulants_to_moments(&k);
        for n in 1..=5 {
            let kn = multivariate_free_cumulant(n, |idx: &[usize]| m[idx.len() - 1]).unwrap();
            assert_eq!(kn, k[n - 1]);
        }
    }

    mod props {
        use super::*;
        use num_bigint::BigInt;
        use num_rational::BigRational;
        use proptest::prelude::*;

        fn big(a: i64, b: i64) -> BigRational {
            BigRational::new(BigInt::from(a), BigInt::from(b))
        }

        proptest! {
            #[test]
            fn cumulant_round_trip_is_exact(v in proptest::collection::vec((-20i64..20, 1i64..9), 1..8)) {
                let k: Vec<BigRational> = v.iter().map(|&(a, b)| big(a, b)).collect();
                let back = moments_to_free_cumulants(&free_cumulants_to_moments(&k));
                prop_assert_eq!(back, k);
            }

            #[test]
            fn moment_round_trip_is_exact(v in proptest::collection::vec((-20i64..20, 1i64..9), 1..8)) {
                let m: Vec<BigRational> = v.iter().map(|&(a, b)| big(a, b)).collect();
                let back = free_cumulants_to_moments(&moments_to_free_cumulants(&m));
                prop_assert_eq!(back, m);
            }
        }
    }
}
