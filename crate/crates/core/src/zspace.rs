//! The space `M^n_Z`: the zero-sum hyperplane `H ⊂ R^{n+1}` normed by
//! `½(max xᵢ − min xᵢ)`, its dual faces, and the combinatorial star criterion.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{binomial, q, Rational};
use crate::signed_set::{mask_indices, SignedSet};

/// A point of `H`, stored with its `n + 1` ambient coordinates.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(try_from = "Vec<Rational>", into = "Vec<Rational>")]
pub struct ZPoint {
    coords: Vec<Rational>,
}

/// A functional on `H`, i.e. a zero-sum row vector of length `n + 1`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(try_from = "Vec<Rational>", into = "Vec<Rational>")]
pub struct DualVector {
    coords: Vec<Rational>,
}

fn check_zero_sum(coords: &[Rational]) -> Result<()> {
    if coords.len() < 2 {
        return Err(Error::invalid("need at least two ambient coordinates"));
    }
    let s: Rational = coords.iter().sum();
    if !s.is_zero() {
        return Err(Error::NonZeroSum(s.to_string()));
    }
    Ok(())
}

macro_rules! zero_sum_vector {
    ($t:ident) => {
        impl $t {
            pub fn new(coords: Vec<Rational>) -> Result<Self> {
                check_zero_sum(&coords)?;
                Ok($t { coords })
            }

            pub fn zero(m: usize) -> Self {
                $t { coords: vec![Rational::zero(); m] }
            }

            pub fn coords(&self) -> &[Rational] {
                &self.coords
            }

            pub fn into_coords(self) -> Vec<Rational> {
                self.coords
            }

            /// Ambient length `n + 1`.
            pub fn ambient(&self) -> usize {
                self.coords.len()
            }

            pub fn is_zero(&self) -> bool {
                self.coords.iter().all(Rational::is_zero)
            }

            pub fn scale(&self, c: &Rational) -> Self {
                $t { coords: self.coords.iter().map(|x| x * c).collect() }
            }

            pub fn add(&self, other: &Self) -> Result<Self> {
                self.same_len(other)?;
                Ok($t { coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect() })
            }

            pub fn sub(&self, other: &Self) -> Result<Self> {
                self.same_len(other)?;
                Ok($t { coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect() })
            }

            fn same_len(&self, other: &Self) -> Result<()> {
                if self.ambient() != other.ambient() {
                    return Err(Error::DimensionMismatch {
                        expected: self.ambient(),
                        found: other.ambient(),
                    });
                }
                Ok(())
            }
        }

        impl TryFrom<Vec<Rational>> for $t {
            type Error = Error;
            fn try_from(v: Vec<Rational>) -> Result<Self> {
                $t::new(v)
            }
        }

        impl From<$t> for Vec<Rational> {
            fn from(p: $t) -> Vec<Rational> {
                p.coords
            }
        }

        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
                f.write_str(&parts.join(","))
            }
        }

        impl FromStr for $t {
            type Err = Error;
            /// Comma-separated rationals, e.g. `3/2,-1/2,-1/2,-1/2`.
            fn from_str(s: &str) -> Result<Self> {
                let coords = s
                    .split(',')
                    .map(|p| p.parse::<Rational>())
                    .collect::<Result<Vec<_>>>()?;
                $t::new(coords)
            }
        }
    };
}

zero_sum_vector!(ZPoint);
zero_sum_vector!(DualVector);

impl DualVector {
    /// `φ(x)`.
    pub fn apply(&self, x: &ZPoint) -> Result<Rational> {
        if self.ambient() != x.ambient() {
            return Err(Error::DimensionMismatch { expected: self.ambient(), found: x.ambient() });
        }
        Ok(self.coords.iter().zip(x.coords()).map(|(a, b)| a * b).sum())
    }

    pub fn l1_norm(&self) -> Rational {
        self.coords.iter().map(Rational::abs).sum()
    }
}

pub fn znorm(x: &ZPoint) -> Rational {
    let max = x.coords.iter().max().expect("nonempty").clone();
    let min = x.coords.iter().min().expect("nonempty").clone();
    (max - min) * q(1, 2)
}

/// The unique signed set whose face `F(X)` of `Z_n` contains `x / ‖x‖` in its
/// relative interior: `X⁺` is the argmax index set and `X⁻` the argmin set.
pub fn face_of(x: &ZPoint) -> Result<SignedSet> {
    if x.is_zero() {
        return Err(Error::ZeroVector);
    }
    let max = x.coords.iter().max().expect("nonempty");
    let min = x.coords.iter().min().expect("nonempty");
    let mut pos = 0u64;
    let mut neg = 0u64;
    for (i, c) in x.coords.iter().enumerate() {
        if c == max {
            pos |= 1 << i;
        } else if c == min {
            neg |= 1 << i;
        }
    }
    SignedSet::new(pos, neg, x.ambient())
}

/// Vertices of the dual face `F′(X)`: `½εᵢ − ½εⱼ` for `i ∈ X⁺`, `j ∈ X⁻`,
/// ordered by `(i, j)`.
pub fn face_vertices(x: &SignedSet) -> Result<Vec<DualVector>> {
    if !x.has_both_parts() {
        return Err(Error::EmptyPart(x.to_string()));
    }
    let m = x.ground();
    let half = q(1, 2);
    let mut out = Vec::new();
    for i in x.pos_indices() {
        for j in x.neg_indices() {
            let mut c = vec![Rational::zero(); m];
            c[i - 1] = half.clone();
            c[j - 1] = -&half;
            out.push(DualVector { coords: c });
        }
    }
    Ok(out)
}

/// `Σ_{X⁺} π(eᵢ) − Σ_{X⁻} π(eⱼ)`: the vertex `F(X)` when `X⁰ = ∅`, and in
/// general the centre of the face `F(X)` (a point of its relative interior
/// when both parts are nonempty).
pub fn face_point(x: &SignedSet) -> ZPoint {
    let m = x.ground();
    let shift = q(
        x.pos().count_ones() as i64 - x.neg().count_ones() as i64,
        m as i64,
    );
    let coords = (1..=m)
        .map(|i| Rational::from_integer(x.sign(i) as i64) - &shift)
        .collect();
    ZPoint { coords }
}

/// Vertex of `Z_n` indexed by its positive part `X⁺ ⊆ [m]`.
pub fn vertex(pos_mask: u64, m: usize) -> Result<ZPoint> {
    let full = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    if pos_mask == 0 || pos_mask & full == full || pos_mask & !full != 0 {
        return Err(Error::invalid("vertex index set must be a proper nonempty subset"));
    }
    Ok(face_point(&SignedSet::new(pos_mask, full & !pos_mask, m)?))
}

/// Indices `(a, b, c, d)` (0-based) with `{a,b} ∩ {c,d} = ∅` and
/// `(X_a⁺ ∪ X_c⁺) ∩ (X_b⁻ ∪ X_d⁻) = ∅`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quadruple {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub d: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StarVerdict {
    Smt,
    NotSmt(Quadruple),
}

impl StarVerdict {
    pub fn is_smt(&self) -> bool {
        matches!(self, StarVerdict::Smt)
    }
}

pub(crate) fn validate_family(family: &[SignedSet]) -> Result<()> {
    if let Some(first) = family.first() {
        for x in family {
            if x.ground() != first.ground() {
                return Err(Error::GroundSetMismatch { left: first.ground(), right: x.ground() });
            }
            if !x.has_both_parts() {
                return Err(Error::EmptyPart(x.to_string()));
            }
        }
    }
    Ok(())
}

/// Decides whether the star from `o` to points with face patterns `family` is
/// a Steiner minimal tree. Reports the lexicographically least witness.
pub fn star_criterion(family: &[SignedSet]) -> Result<StarVerdict> {
    validate_family(family)?;
    let k = family.len();
    for a in 0..k {
        let pa = family[a].pos();
        for b in 0..k {
            let nb = family[b].neg();
            for c in 0..k {
                if c == a || c == b {
                    continue;
                }
                let u = pa | family[c].pos();
                if u & nb != 0 {
                    continue;
                }
                for d in 0..k {
                    if d == a || d == b {
                        continue;
                    }
                    if u & family[d].neg() == 0 {
                        return Ok(StarVerdict::NotSmt(Quadruple { a, b, c, d }));
                    }
                }
            }
        }
    }
    Ok(StarVerdict::Smt)
}

/// Some witnessing quadruple that uses index `idx` in at least one position.
/// Used for incremental checks when one set is appended to a family known to
/// have no witness.
pub fn witness_involving(family: &[SignedSet], idx: usize) -> Result<Option<Quadruple>> {
    validate_family(family)?;
    let k = family.len();
    if idx >= k {
        return Err(Error::invalid(format!("index {idx} out of range for {k} sets")));
    }
    let holds = |a: usize, b: usize, c: usize, d: usize| {
        a != c && a != d && b != c && b != d
            && (family[a].pos() | family[c].pos()) & (family[b].neg() | family[d].neg()) == 0
    };
    for slot in 0..4 {
        for x in 0..k {
            for y in 0..k {
                for z in 0..k {
                    let mut q = [x, y, z];
                    let mut full = [0usize; 4];
                    let mut it = q.iter_mut();
                    for (p, f) in full.iter_mut().enumerate() {
                        *f = if p == slot { idx } else { *it.next().expect("three free slots") };
                    }
                    let [a, b, c, d] = full;
                    if holds(a, b, c, d) {
                        return Ok(Some(Quadruple { a, b, c, d }));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// `binom(n+2, ⌊(n+2)/2⌋)`: the largest degree of a given point in an SMT in `M^n_Z`.
pub fn max_degree(n: usize) -> Result<u128> {
    if n < 2 {
        return Err(Error::invalid(format!("max_degree needs n >= 2, got {n}")));
    }
    Ok(binomial(n as u64 + 2, (n as u64 + 2) / 2))
}

/// Which pair of consecutive levels of `P[n+1]` the extremal family uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremalVariant {
    /// `|X⁺| ∈ {⌊(n+1)/2⌋, ⌊(n+1)/2⌋ + 1}`.
    Low,
    /// `|X⁺| ∈ {⌈(n+1)/2⌉ − 1, ⌈(n+1)/2⌉}`.
    High,
}

impl FromStr for ExtremalVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "low" => Ok(ExtremalVariant::Low),
            "high" => Ok(ExtremalVariant::High),
            other => Err(Error::Parse(format!("variant must be low or high, got {other:?}"))),
        }
    }
}

impl ExtremalVariant {
    pub fn levels(self, n: usize) -> (usize, usize) {
        let m = n + 1;
        match self {
            ExtremalVariant::Low => (m / 2, m / 2 + 1),
            ExtremalVariant::High => (m.div_ceil(2) - 1, m.div_ceil(2)),
        }
    }
}

/// All vertex patterns (`X⁰ = ∅`) over `[n+1]` whose positive part has one of
/// two consecutive sizes; ordered by level, then by mask.
pub fn extremal_family(n: usize, variant: ExtremalVariant) -> Result<Vec<SignedSet>> {
    if n < 2 {
        return Err(Error::invalid(format!("extremal_family needs n >= 2, got {n}")));
    }
    let m = n + 1;
    let (lo, hi) = variant.levels(n);
    let mut out = Vec::new();
    for level in [lo, hi] {
        out.extend(vertex_patterns_of_size(m, level)?);
    }
    Ok(out)
}

fn vertex_patterns_of_size(m: usize, size: usize) -> Result<Vec<SignedSet>> {
    if m > 24 {
        return Err(Error::TooLarge(format!("vertex enumeration over [{m}]")));
    }
    let full = (1u64 << m) - 1;
    (1..full)
        .filter(|s: &u64| s.count_ones() as usize == size)
        .map(|s| SignedSet::new(s, full & !s, m))
        .collect()
}

/// `‖F(X⁺) − F(Y⁺)‖_Z` for distinct proper nonempty positive parts: 1 when
/// one contains the other, 2 otherwise.
pub fn vertex_distance(xp: u64, yp: u64, m: usize) -> Result<u8> {
    let full = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    for s in [xp, yp] {
        if s == 0 || s == full || s & !full != 0 {
            return Err(Error::invalid(format!(
                "{:?} is not a proper nonempty subset of [{m}]",
                mask_indices(s)
            )));
        }
    }
    if xp == yp {
        return Err(Error::invalid("vertex_distance needs distinct sets"));
    }
    let nested = xp & !yp == 0 || yp & !xp == 0;
    Ok(if nested { 1 } else { 2 })
}

/// The vertices `F(X)` with `|X⁺| = ⌊(n+1)/2⌋`: unit vectors at pairwise
/// distance 2.
pub fn antichain_equilateral(n: usize) -> Result<Vec<ZPoint>> {
    if n < 2 {
        return Err(Error::invalid(format!("antichain_equilateral needs n >= 2, got {n}")));
    }
    let m = n + 1;
    Ok(vertex_patterns_of_size(m, m / 2)?.iter().map(face_point).collect())
}
