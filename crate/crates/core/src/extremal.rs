//! Set-family conditions behind the degree bound in `M^n_Z`, and exhaustive
//! searches for the largest antichains and 3-chain-free families.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::binomial;
use crate::signed_set::{all_signed_sets, mask_indices, SignedSet};
use crate::zspace::{extremal_family, star_criterion, witness_involving, ExtremalVariant};

fn full_mask(m: usize) -> u64 {
    if m == 64 {
        u64::MAX
    } else {
        (1u64 << m) - 1
    }
}

fn subset(a: u64, b: u64) -> bool {
    a & !b == 0
}

/// Subsets of `[m]` other than `∅` and `[m]`, as bit masks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetFamily {
    members: Vec<u64>,
    m: usize,
}

impl SetFamily {
    pub fn new(members: Vec<u64>, m: usize) -> Result<Self> {
        if m == 0 || m > 64 {
            return Err(Error::invalid(format!("ground set size {m} out of range")));
        }
        let full = full_mask(m);
        for &y in &members {
            if y == 0 || y == full || y & !full != 0 {
                return Err(Error::invalid(format!(
                    "{:?} is not a proper nonempty subset of [{m}]",
                    mask_indices(y)
                )));
            }
        }
        Ok(SetFamily { members, m })
    }

    /// From 1-based index lists, as accepted on the command line.
    pub fn from_index_lists(lists: &[Vec<usize>], m: usize) -> Result<Self> {
        let members = lists
            .iter()
            .map(|l| crate::signed_set::mask_from_indices(l, m))
            .collect::<Result<Vec<_>>>()?;
        SetFamily::new(members, m)
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn ground(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn index_lists(&self) -> Vec<Vec<usize>> {
        self.members.iter().map(|&y| mask_indices(y)).collect()
    }

    /// All sets of the given sizes, ordered by size then mask.
    pub fn levels(m: usize, sizes: &[usize]) -> Result<Self> {
        let full = full_mask(m);
        let mut members = Vec::new();
        for &s in sizes {
            members.extend((1..full).filter(|y: &u64| y.count_ones() as usize == s));
        }
        SetFamily::new(members, m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conditions {
    pub distinct: bool,
    pub no3chain: bool,
    pub nobutterfly: bool,
    pub star: bool,
}

/// Absence of each forbidden pattern. `star` is evaluated directly from its
/// definition: no `a, b, c, d` with `{a,b} ∩ {c,d} = ∅` and
/// `Y_a ∪ Y_c ⊆ Y_b ∩ Y_d`.
pub fn check_conditions(fam: &SetFamily) -> Conditions {
    let y = &fam.members;
    let k = y.len();
    let mut distinct = true;
    for i in 0..k {
        for j in i + 1..k {
            distinct &= y[i] != y[j];
        }
    }
    let mut no3chain = true;
    'chain: for a in 0..k {
        for b in 0..k {
            if a == b || !subset(y[a], y[b]) {
                continue;
            }
            for c in 0..k {
                if c != a && c != b && subset(y[b], y[c]) {
                    no3chain = false;
                    break 'chain;
                }
            }
        }
    }
    let mut nobutterfly = true;
    'fly: for a in 0..k {
        for b in a + 1..k {
            let u = y[a] | y[b];
            for c in 0..k {
                if c == a || c == b || !subset(u, y[c]) {
                    continue;
                }
                for d in c + 1..k {
                    if d != a && d != b && subset(u, y[d]) {
                        nobutterfly = false;
                        break 'fly;
                    }
                }
            }
        }
    }
    let mut star = true;
    'star: for a in 0..k {
        for b in 0..k {
            for c in 0..k {
                if c == a || c == b || !subset(y[a] | y[c], y[b]) {
                    continue;
                }
                for d in 0..k {
                    if d != a && d != b && subset(y[a] | y[c], y[d]) {
                        star = false;
                        break 'star;
                    }
                }
            }
        }
    }
    Conditions { distinct, no3chain, nobutterfly, star }
}

/// Whether every choice of sets `X_i⁺ ⊆ Y_i ⊆ [m] ∖ X_i⁻` satisfies the star
/// condition, decided through the signed-set criterion.
pub fn signed_to_families(xs: &[SignedSet]) -> Result<bool> {
    Ok(star_criterion(xs)?.is_smt())
}

/// Number of sandwich choices `Π 2^{|X_i⁰|}`, saturating.
pub fn sandwich_count(xs: &[SignedSet]) -> u128 {
    xs.iter().fold(1u128, |acc, x| acc.saturating_mul(1u128 << x.zero_set().count_ones().min(100)))
}

/// The `t`-th sandwich family: bits of `t` choose which zero coordinates of
/// each `X_i` join `Y_i`.
fn sandwich_member(x: &SignedSet, bits: u64) -> u64 {
    let mut y = x.pos();
    let zeros = mask_indices(x.zero_set());
    for (b, i) in zeros.iter().enumerate() {
        if bits >> b & 1 == 1 {
            y |= 1 << (i - 1);
        }
    }
    y
}

/// Exhaustive check over all sandwich families (at most `limit` of them).
pub fn all_sandwiches_satisfy_star(xs: &[SignedSet], limit: u128) -> Result<bool> {
    crate::zspace::star_criterion(xs)?;
    let total = sandwich_count(xs);
    if total > limit {
        return Err(Error::TooLarge(format!("{total} sandwich families")));
    }
    let m = xs.first().map_or(1, SignedSet::ground);
    let widths: Vec<u32> = xs.iter().map(|x| x.zero_set().count_ones()).collect();
    for t in 0..total {
        let mut rest = t;
        let mut members = Vec::with_capacity(xs.len());
        for (x, &w) in xs.iter().zip(&widths) {
            let bits = (rest & ((1u128 << w) - 1)) as u64;
            rest >>= w;
            members.push(sandwich_member(x, bits));
        }
        if !check_conditions(&SetFamily::new(members, m)?).star {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Random sandwich families; `false` when one of them violates the star
/// condition.
pub fn sampled_sandwiches_satisfy_star(xs: &[SignedSet], samples: usize, rng: &mut impl rand::Rng) -> Result<bool> {
    crate::zspace::star_criterion(xs)?;
    let m = xs.first().map_or(1, SignedSet::ground);
    for _ in 0..samples {
        let members = xs.iter().map(|x| sandwich_member(x, rng.gen())).collect();
        if !check_conditions(&SetFamily::new(members, m)?).star {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Outcome of an exhaustive family search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchResult {
    pub size: usize,
    /// One family attaining the size, as masks.
    pub family: Vec<u64>,
    /// Search-tree nodes visited.
    pub nodes: u64,
}

/// Chain id of each mask in the symmetric chain decomposition of `P[m]`
/// obtained by bracket matching (a 0 bit opens, a 1 bit closes).
fn symmetric_chain_ids(m: usize) -> Vec<u64> {
    (0..1u64 << m)
        .map(|s| {
            let mut open: Vec<usize> = Vec::new();
            let mut matched = 0u64;
            for i in 0..m {
                if s >> i & 1 == 0 {
                    open.push(i);
                } else if let Some(j) = open.pop() {
                    matched |= (1 << i) | (1 << j);
                }
            }
            // Matched positions and their bits identify the chain.
            (matched << m) | (s & matched)
        })
        .collect()
}

struct Search {
    cands: Vec<u64>,
    /// Bitsets over candidate indices.
    below: Vec<u64>,
    above: Vec<u64>,
    chain: Vec<usize>,
    num_chains: usize,
    cap: usize,
    best: usize,
    best_family: u64,
    nodes: u64,
}

impl Search {
    fn new(m: usize, include_extremes: bool, cap: usize) -> Result<Self> {
        if !(1..=6).contains(&m) {
            return Err(Error::TooLarge(format!("exhaustive search over P[{m}]")));
        }
        let full = full_mask(m);
        let mut cands: Vec<u64> = (0..=full).filter(|&s| include_extremes || (s != 0 && s != full)).collect();
        cands.sort_by_key(|&s| (s.count_ones(), s));
        if cands.len() > 64 {
            return Err(Error::TooLarge(format!("{} candidate sets", cands.len())));
        }
        let k = cands.len();
        let mut below = vec![0u64; k];
        let mut above = vec![0u64; k];
        for i in 0..k {
            for j in 0..k {
                if i != j && subset(cands[j], cands[i]) {
                    below[i] |= 1 << j;
                    above[j] |= 1 << i;
                }
            }
        }
        let ids = symmetric_chain_ids(m);
        let mut distinct: Vec<u64> = cands.iter().map(|&s| ids[s as usize]).collect();
        distinct.sort_unstable();
        distinct.dedup();
        let chain = cands.iter().map(|&s| distinct.binary_search(&ids[s as usize]).expect("id")).collect();
        Ok(Search {
            cands,
            below,
            above,
            chain,
            num_chains: distinct.len(),
            cap,
            best: 0,
            best_family: 0,
            nodes: 0,
        })
    }

    /// Candidates that can still join `fam` without creating a chain of
    /// `cap + 1` sets.
    fn allowed(&self, fam: u64) -> u64 {
        let mut out = 0u64;
        for i in 0..self.cands.len() {
            if fam >> i & 1 == 1 {
                continue;
            }
            let ok = if self.cap == 1 {
                (self.below[i] | self.above[i]) & fam == 0
            } else {
                let has_below = |j: usize| self.below[j] & fam != 0;
                let has_above = |j: usize| self.above[j] & fam != 0;
                let lo = self.below[i] & fam;
                let hi = self.above[i] & fam;
                !(lo != 0 && hi != 0)
                    && bits(lo).all(|j| !has_below(j))
                    && bits(hi).all(|j| !has_above(j))
            };
            if ok {
                out |= 1 << i;
            }
        }
        out
    }

    fn bound(&self, size: usize, avail: u64) -> usize {
        let mut per_chain = vec![0usize; self.num_chains];
        for i in bits(avail) {
            per_chain[self.chain[i]] += 1;
        }
        size + per_chain.iter().map(|&c| c.min(self.cap)).sum::<usize>()
    }

    /// Include/exclude search over candidates with index `>= from`.
    fn dfs(&mut self, fam: u64, size: usize, from: usize) {
        self.nodes += 1;
        if size > self.best {
            self.best = size;
            self.best_family = fam;
        }
        let avail = self.allowed(fam) & !((1u64 << from) - 1);
        if avail == 0 || self.bound(size, avail) <= self.best {
            return;
        }
        let i = avail.trailing_zeros() as usize;
        self.dfs(fam | 1 << i, size + 1, i + 1);
        // Exclude `i`: continue with later candidates only.
        let rest = avail & !(1u64 << i);
        if rest != 0 && self.bound(size, rest) > self.best {
            self.dfs(fam, size, i + 1);
        }
    }

    /// Up to a permutation of `[m]`, the first member of any family in the
    /// (size, mask) order is `{1..s}` where `s` is its smallest member size;
    /// so the search fixes that member and excludes everything before it.
    fn run(mut self) -> SearchResult {
        let sizes: Vec<u32> = {
            let mut v: Vec<u32> = self.cands.iter().map(|s| s.count_ones()).collect();
            v.dedup();
            v
        };
        for s in sizes {
            let first = self.cands.iter().position(|&c| c.count_ones() == s && c == (1u64 << s) - 1);
            if let Some(i) = first {
                self.dfs(1u64 << i, 1, i + 1);
            }
        }
        SearchResult {
            size: self.best,
            family: bits(self.best_family).map(|i| self.cands[i]).collect(),
            nodes: self.nodes,
        }
    }
}

fn bits(mut x: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if x == 0 {
            return None;
        }
        let i = x.trailing_zeros() as usize;
        x &= x - 1;
        Some(i)
    })
}

/// Largest antichain in `P[m]` by exhaustive search (`1 ≤ m ≤ 6`).
pub fn sperner_search(m: usize) -> Result<SearchResult> {
    Search::new(m, true, 1).map(Search::run)
}

/// Largest 3-chain-free family of distinct sets in `P[m] ∖ {∅, [m]}` by
/// exhaustive search (`2 ≤ m ≤ 6`).
pub fn two_level_search(m: usize) -> Result<SearchResult> {
    if m < 2 {
        return Err(Error::invalid("two_level_search needs m >= 2"));
    }
    Search::new(m, false, 2).map(Search::run)
}

pub const EXHAUSTIVE_LIMIT: usize = 5;

/// `binom(m, ⌊m/2⌋)`, found by exhaustive search when `2 ≤ m ≤ 5`.
pub fn sperner_max(m: usize) -> Result<u128> {
    if m < 2 {
        return Err(Error::invalid("sperner_max needs m >= 2"));
    }
    if m <= EXHAUSTIVE_LIMIT {
        return Ok(sperner_search(m)?.size as u128);
    }
    Ok(binomial(m as u64, m as u64 / 2))
}

/// `binom(m+1, ⌊(m+1)/2⌋)`, found by exhaustive search when `2 ≤ m ≤ 5`.
pub fn two_level_max(m: usize) -> Result<u128> {
    if m < 2 {
        return Err(Error::invalid("two_level_max needs m >= 2"));
    }
    if m <= EXHAUSTIVE_LIMIT {
        return Ok(two_level_search(m)?.size as u128);
    }
    Ok(binomial(m as u64 + 1, (m as u64 + 1) / 2))
}

/// Signed sets over `[n+1]` whose addition to the extremal family leaves the
/// star criterion satisfied. Empty means the family is locally maximal.
pub fn extensions_keeping_criterion(n: usize, variant: ExtremalVariant) -> Result<Vec<SignedSet>> {
    let mut fam = extremal_family(n, variant)?;
    if !star_criterion(&fam)?.is_smt() {
        return Err(Error::invalid("extremal family fails the criterion"));
    }
    let k = fam.len();
    let mut survivors = Vec::new();
    for x in all_signed_sets(n + 1) {
        if !x.has_both_parts() {
            continue;
        }
        fam.push(x);
        if witness_involving(&fam, k)?.is_none() {
            survivors.push(x);
        }
        fam.pop();
    }
    Ok(survivors)
}

/// Families of `size` distinct sets in `P[m] ∖ {∅, [m]}` satisfying (distinct)
/// and (butterfly), by brute force over all subfamilies.
pub fn butterfly_free_families(m: usize, size: usize) -> Result<Vec<SetFamily>> {
    let full = full_mask(m);
    let cands: Vec<u64> = (1..full).collect();
    if cands.len() > 20 {
        return Err(Error::TooLarge(format!("{} candidate sets", cands.len())));
    }
    let mut out = Vec::new();
    for pick in 0u32..1 << cands.len() {
        if pick.count_ones() as usize != size {
            continue;
        }
        let fam = SetFamily::new(bits(pick as u64).map(|i| cands[i]).collect(), m)?;
        if check_conditions(&fam).nobutterfly {
            out.push(fam);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signed_set::proper_faces;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fam(lists: &[&[usize]], m: usize) -> SetFamily {
        SetFamily::from_index_lists(&lists.iter().map(|l| l.to_vec()).collect::<Vec<_>>(), m).unwrap()
    }

    #[test]
    fn condition_examples() {
        let mid = SetFamily::levels(4, &[2, 3]).unwrap();
        assert_eq!(mid.len(), 10);
        assert_eq!(
            check_conditions(&mid),
            Conditions { distinct: true, no3chain: true, nobutterfly: true, star: true }
        );
        let c = check_conditions(&fam(&[&[1], &[1, 2], &[1, 2, 3]], 4));
        assert!(!c.no3chain && !c.star);
        let c = check_conditions(&fam(&[&[1], &[2], &[1, 2, 3], &[1, 2, 4]], 4));
        assert!(!c.nobutterfly && c.no3chain && !c.star);
        assert!(!check_conditions(&fam(&[&[1], &[1]], 3)).distinct);
        assert!(SetFamily::new(vec![0b1111], 4).is_err());
        assert!(SetFamily::new(vec![0], 4).is_err());
    }

    fn star_is_conjunction(f: &SetFamily) -> bool {
        let c = check_conditions(f);
        c.star == (c.distinct && c.no3chain && c.nobutterfly)
    }

    #[test]
    fn star_equivalence_exhaustive_m3() {
        // All families of up to 6 members drawn with repetition from the six
        // proper subsets of [3].
        let cands: Vec<u64> = (1..7).collect();
        fn rec(cands: &[u64], cur: &mut Vec<u64>, depth: usize, count: &mut usize) {
            let f = SetFamily::new(cur.clone(), 3).unwrap();
            assert!(star_is_conjunction(&f), "{:?}", f.index_lists());
            *count += 1;
            if depth == 0 {
                return;
            }
            let start = cur.last().map_or(0, |l| cands.iter().position(|c| c == l).unwrap());
            for i in start..cands.len() {
                cur.push(cands[i]);
                rec(cands, cur, depth - 1, count);
                cur.pop();
            }
        }
        let mut count = 0;
        rec(&cands, &mut Vec::new(), 6, &mut count);
        assert_eq!(count, 924);
    }

    #[test]
    fn star_equivalence_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for m in [4usize, 5] {
            let full = (1u64 << m) - 1;
            for _ in 0..10_000 {
                let k = rng.gen_range(1..=10);
                let members = (0..k).map(|_| rng.gen_range(1..full)).collect();
                assert!(star_is_conjunction(&SetFamily::new(members, m).unwrap()));
            }
        }
    }

    #[test]
    fn signed_to_family_examples() {
        assert!(signed_to_families(&extremal_family(3, ExtremalVariant::Low).unwrap()).unwrap());
        let s = |p: &[usize], n: &[usize]| SignedSet::from_indices(p, n, 4).unwrap();
        assert!(!signed_to_families(&[s(&[1], &[2]), s(&[1], &[3])]).unwrap());
        assert!(signed_to_families(&[s(&[1], &[2])]).unwrap());
    }

    #[test]
    fn criterion_matches_sandwich_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let faces = proper_faces(4);
        for _ in 0..400 {
            let k = rng.gen_range(1..=5);
            let xs: Vec<SignedSet> = (0..k).map(|_| faces[rng.gen_range(0..faces.len())]).collect();
            let direct = signed_to_families(&xs).unwrap();
            assert_eq!(all_sandwiches_satisfy_star(&xs, 1 << 16).unwrap(), direct, "{xs:?}");
            if direct {
                assert!(sampled_sandwiches_satisfy_star(&xs, 20, &mut rng).unwrap());
            }
        }
    }

    #[test]
    fn chain_decomposition_is_symmetric() {
        for m in 1..=6usize {
            let ids = symmetric_chain_ids(m);
            let mut chains: std::collections::BTreeMap<u64, Vec<u64>> = Default::default();
            for (s, &id) in ids.iter().enumerate() {
                chains.entry(id).or_default().push(s as u64);
            }
            assert_eq!(chains.len() as u128, binomial(m as u64, m as u64 / 2));
            for sets in chains.values() {
                let mut v = sets.clone();
                v.sort_by_key(|s| s.count_ones());
                for w in v.windows(2) {
                    assert!(subset(w[0], w[1]) && w[1].count_ones() == w[0].count_ones() + 1);
                }
                let lo = v[0].count_ones() as usize;
                let hi = v.last().unwrap().count_ones() as usize;
                assert_eq!(lo + hi, m);
            }
        }
    }

    #[test]
    fn sperner_values() {
        assert_eq!(sperner_max(2).unwrap(), 2);
        assert_eq!(sperner_max(4).unwrap(), 6);
        assert_eq!(sperner_max(5).unwrap(), 10);
        assert_eq!(sperner_max(8).unwrap(), 70);
        assert!(sperner_max(1).is_err());
        let r = sperner_search(4).unwrap();
        let f = SetFamily { members: r.family.clone(), m: 4 };
        assert_eq!(f.len(), 6);
        for (i, &a) in f.members().iter().enumerate() {
            for &b in &f.members()[i + 1..] {
                assert!(!subset(a, b) && !subset(b, a));
            }
        }
    }

    #[test]
    fn two_level_values() {
        assert_eq!(two_level_max(3).unwrap(), 6);
        assert_eq!(two_level_max(4).unwrap(), 10);
        assert_eq!(two_level_max(2).unwrap(), 2);
        let r = two_level_search(4).unwrap();
        let c = check_conditions(&SetFamily::new(r.family, 4).unwrap());
        assert!(c.distinct && c.no3chain);
    }

    #[test]
    fn extremal_family_is_locally_maximal() {
        for n in 2..=4 {
            for v in [ExtremalVariant::Low, ExtremalVariant::High] {
                assert!(extensions_keeping_criterion(n, v).unwrap().is_empty());
            }
        }
    }

    #[test]
    fn butterfly_bound_has_extra_equality_at_four() {
        let fams = butterfly_free_families(4, 10).unwrap();
        let two_levels: Vec<&SetFamily> = fams
            .iter()
            .filter(|f| {
                let mut sizes: Vec<u32> = f.members().iter().map(|s| s.count_ones()).collect();
                sizes.sort_unstable();
                sizes.dedup();
                sizes.len() == 2 && sizes[1] == sizes[0] + 1
            })
            .collect();
        assert!(!two_levels.is_empty());
        assert!(fams.len() > two_levels.len());
        assert!(butterfly_free_families(4, 11).unwrap().is_empty());
    }
}
