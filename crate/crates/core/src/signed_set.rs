//! Signed subsets of `[m]`, the conformal relation, the natural partial order,
//! and the commutative non-associative operation `⊡` on the face lattice
//! augmented by a top element.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported ground set.
pub const MAX_GROUND: usize = 64;

/// A signed subset `X = (X⁺, X⁻)` of `{1..m}` stored as two bit masks.
/// Bit `i - 1` represents index `i`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignedSet {
    pos: u64,
    neg: u64,
    m: u8,
}

fn full_mask(m: usize) -> u64 {
    if m == 64 {
        u64::MAX
    } else {
        (1u64 << m) - 1
    }
}

/// Converts 1-based indices into a mask, validating the range.
pub fn mask_from_indices(indices: &[usize], m: usize) -> Result<u64> {
    let mut mask = 0u64;
    for &i in indices {
        if i == 0 || i > m {
            return Err(Error::invalid(format!("index {i} outside 1..={m}")));
        }
        mask |= 1 << (i - 1);
    }
    Ok(mask)
}

/// 1-based indices of the set bits.
pub fn mask_indices(mask: u64) -> Vec<usize> {
    (0..64).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect()
}

impl SignedSet {
    pub fn new(pos: u64, neg: u64, m: usize) -> Result<Self> {
        if m == 0 || m > MAX_GROUND {
            return Err(Error::invalid(format!("ground-set size {m} not in 1..=64")));
        }
        if (pos | neg) & !full_mask(m) != 0 {
            return Err(Error::invalid(format!("signed set exceeds ground set [{m}]")));
        }
        if pos & neg != 0 {
            return Err(Error::invalid("positive and negative parts overlap"));
        }
        Ok(SignedSet { pos, neg, m: m as u8 })
    }

    /// Builds from 1-based index lists.
    pub fn from_indices(pos: &[usize], neg: &[usize], m: usize) -> Result<Self> {
        Self::new(mask_from_indices(pos, m)?, mask_from_indices(neg, m)?, m)
    }

    pub fn empty(m: usize) -> Self {
        SignedSet { pos: 0, neg: 0, m: m as u8 }
    }

    /// Sign pattern of a vector: positive coordinates go to `X⁺`, negative to `X⁻`.
    pub fn support_of<T: PartialOrd + Default>(coords: &[T]) -> Result<Self> {
        let zero = T::default();
        let mut pos = 0;
        let mut neg = 0;
        for (i, c) in coords.iter().enumerate() {
            if *c > zero {
                pos |= 1 << i;
            } else if *c < zero {
                neg |= 1 << i;
            }
        }
        Self::new(pos, neg, coords.len())
    }

    pub fn pos(&self) -> u64 {
        self.pos
    }

    pub fn neg(&self) -> u64 {
        self.neg
    }

    pub fn ground(&self) -> usize {
        self.m as usize
    }

    pub fn support(&self) -> u64 {
        self.pos | self.neg
    }

    pub fn zero_set(&self) -> u64 {
        full_mask(self.ground()) & !self.support()
    }

    pub fn is_empty(&self) -> bool {
        self.support() == 0
    }

    /// Both parts nonempty, i.e. a nonempty proper face index of the dual zonotope.
    pub fn has_both_parts(&self) -> bool {
        self.pos != 0 && self.neg != 0
    }

    pub fn pos_indices(&self) -> Vec<usize> {
        mask_indices(self.pos)
    }

    pub fn neg_indices(&self) -> Vec<usize> {
        mask_indices(self.neg)
    }

    /// Sign of index `i` (1-based): 1, -1 or 0.
    pub fn sign(&self, i: usize) -> i8 {
        let bit = 1u64 << (i - 1);
        if self.pos & bit != 0 {
            1
        } else if self.neg & bit != 0 {
            -1
        } else {
            0
        }
    }

    pub fn negated(&self) -> Self {
        SignedSet { pos: self.neg, neg: self.pos, m: self.m }
    }

    fn check_same(&self, other: &SignedSet) -> Result<()> {
        if self.m != other.m {
            return Err(Error::GroundSetMismatch {
                left: self.ground(),
                right: other.ground(),
            });
        }
        Ok(())
    }

    pub fn conformal(&self, other: &SignedSet) -> Result<bool> {
        self.check_same(other)?;
        Ok(self.pos & other.neg == 0 && self.neg & other.pos == 0)
    }

    /// `X ≤ Y` iff `X⁺ ⊆ Y⁺` and `X⁻ ⊆ Y⁻`.
    pub fn leq(&self, other: &SignedSet) -> Result<bool> {
        self.check_same(other)?;
        Ok(self.pos & !other.pos == 0 && self.neg & !other.neg == 0)
    }
}

pub fn conformal(x: &SignedSet, y: &SignedSet) -> Result<bool> {
    x.conformal(y)
}

pub fn leq(x: &SignedSet, y: &SignedSet) -> Result<bool> {
    x.leq(y)
}

impl fmt::Display for SignedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: Vec<usize>| {
            v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
        };
        write!(f, "+{{{}}}-{{{}}}", join(self.pos_indices()), join(self.neg_indices()))
    }
}

impl fmt::Debug for SignedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}/{}", self.m)
    }
}

impl SignedSet {
    /// Parses the text form `+{1,3}-{2}` over the ground set `[m]`.
    pub fn parse(s: &str, m: usize) -> Result<Self> {
        let bad = || Error::Parse(format!("expected +{{..}}-{{..}}, got {s:?}"));
        let s = s.trim();
        let rest = s.strip_prefix("+{").ok_or_else(bad)?;
        let (pos_text, rest) = rest.split_once('}').ok_or_else(bad)?;
        let rest = rest.trim_start().strip_prefix("-{").ok_or_else(bad)?;
        let (neg_text, rest) = rest.split_once('}').ok_or_else(bad)?;
        if !rest.trim().is_empty() {
            return Err(bad());
        }
        let list = |t: &str| -> Result<Vec<usize>> {
            t.split(',')
                .map(str::trim)
                .filter(|p| !p.is_empty())
                .map(|p| p.parse::<usize>().map_err(|_| bad()))
                .collect()
        };
        Self::from_indices(&list(pos_text)?, &list(neg_text)?, m)
    }
}

/// JSON form `{"pos":[1,3],"neg":[2]}` with 1-based indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedSetJson {
    pub pos: Vec<usize>,
    pub neg: Vec<usize>,
}

impl SignedSetJson {
    pub fn to_signed(&self, m: usize) -> Result<SignedSet> {
        SignedSet::from_indices(&self.pos, &self.neg, m)
    }
}

impl From<&SignedSet> for SignedSetJson {
    fn from(x: &SignedSet) -> Self {
        SignedSetJson { pos: x.pos_indices(), neg: x.neg_indices() }
    }
}

/// An element of the face lattice of the dual zonotope with the improper
/// face adjoined as `Top`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum ExtendedFace {
    Top,
    Face(SignedSet),
}

impl ExtendedFace {
    pub fn is_top(&self) -> bool {
        matches!(self, ExtendedFace::Top)
    }

    pub fn face(&self) -> Option<&SignedSet> {
        match self {
            ExtendedFace::Top => None,
            ExtendedFace::Face(x) => Some(x),
        }
    }

    /// Lattice order with `Top` above everything.
    pub fn leq(&self, other: &ExtendedFace) -> Result<bool> {
        match (self, other) {
            (_, ExtendedFace::Top) => Ok(true),
            (ExtendedFace::Top, ExtendedFace::Face(_)) => Ok(false),
            (ExtendedFace::Face(x), ExtendedFace::Face(y)) => x.leq(y),
        }
    }
}

impl From<SignedSet> for ExtendedFace {
    fn from(x: SignedSet) -> Self {
        ExtendedFace::Face(x)
    }
}

impl fmt::Display for ExtendedFace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedFace::Top => f.write_str("1"),
            ExtendedFace::Face(x) => write!(f, "{x}"),
        }
    }
}

impl FromStr for ExtendedFace {
    type Err = Error;
    /// `1` for the top element; otherwise `m:+{..}-{..}`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "1" {
            return Ok(ExtendedFace::Top);
        }
        let (m, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected m:+{{..}}-{{..}}, got {s:?}")))?;
        let m = m.trim().parse::<usize>().map_err(|_| Error::Parse(s.to_string()))?;
        Ok(ExtendedFace::Face(SignedSet::parse(rest, m)?))
    }
}

/// The four-case operation `X ⊡ Y`, with `Top` as identity.
pub fn boxdot(x: &ExtendedFace, y: &ExtendedFace) -> Result<ExtendedFace> {
    let (x, y) = match (x, y) {
        (ExtendedFace::Top, other) | (other, ExtendedFace::Top) => return Ok(*other),
        (ExtendedFace::Face(x), ExtendedFace::Face(y)) => (x, y),
    };
    x.check_same(y)?;
    let pn = x.pos & y.neg != 0;
    let np = x.neg & y.pos != 0;
    Ok(match (pn, np) {
        (false, true) => ExtendedFace::Face(SignedSet { pos: x.pos, neg: y.neg, m: x.m }),
        (true, false) => ExtendedFace::Face(SignedSet { pos: y.pos, neg: x.neg, m: x.m }),
        (true, true) => ExtendedFace::Top,
        (false, false) => ExtendedFace::Face(SignedSet::empty(x.ground())),
    })
}

/// Every signed set over `[m]` (all `3^m` of them).
pub fn all_signed_sets(m: usize) -> Vec<SignedSet> {
    assert!(m <= 20, "3^m enumeration limited to m <= 20");
    let mut out = Vec::new();
    let mut digits = vec![0u8; m];
    loop {
        let mut pos = 0u64;
        let mut neg = 0u64;
        for (i, d) in digits.iter().enumerate() {
            match d {
                1 => pos |= 1 << i,
                2 => neg |= 1 << i,
                _ => {}
            }
        }
        out.push(SignedSet { pos, neg, m: m as u8 });
        let mut i = 0;
        loop {
            if i == m {
                return out;
            }
            digits[i] += 1;
            if digits[i] == 3 {
                digits[i] = 0;
                i += 1;
            } else {
                break;
            }
        }
    }
}

/// The nonempty members of the covector set of the zero-sum hyperplane over
/// `[m]`: signed sets with both parts nonempty.
pub fn proper_faces(m: usize) -> Vec<SignedSet> {
    all_signed_sets(m).into_iter().filter(SignedSet::has_both_parts).collect()
}
