//! The norm `‖·‖₁ + λ‖·‖₂` on `R^n`: its dual ball (cube plus a Euclidean
//! ball of radius λ), exposed faces, the pigeonhole bound on star degree for
//! `λ ≤ 1`, and the coordinatewise interval procedure showing that the star
//! on `{±e_i}` is a Steiner minimal tree for `λ ≤ √n/(√n−1)`.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parens::{for_each_rooted, labels, Key};
use crate::rational::Rational;
use crate::signed_set::SignedSet;

/// `a + b√d` with rational `a, b` and a positive integer `d`. When `d` is a
/// perfect square the root is folded into `a`, so equal numbers have equal
/// representations.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Surd {
    a: Rational,
    b: Rational,
    d: u64,
}

fn exact_sqrt(d: u64) -> Option<u64> {
    let r = (d as f64).sqrt().round() as u64;
    (r.saturating_sub(1)..=r + 1).find(|&s| s.checked_mul(s) == Some(d))
}

impl Surd {
    pub fn new(a: Rational, b: Rational, d: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("surd radicand must be positive"));
        }
        Ok(Self::normalized(a, b, d))
    }

    fn normalized(a: Rational, b: Rational, d: u64) -> Self {
        if b.is_zero() {
            return Surd { a, b, d: 1 };
        }
        match exact_sqrt(d) {
            Some(s) => Surd { a: a + b * Rational::from_integer(s as i64), b: Rational::zero(), d: 1 },
            None => Surd { a, b, d },
        }
    }

    pub fn rational(a: Rational) -> Self {
        Surd { a, b: Rational::zero(), d: 1 }
    }

    /// `√d`.
    pub fn sqrt(d: u64) -> Result<Self> {
        Surd::new(Rational::zero(), Rational::one(), d)
    }

    pub fn parts(&self) -> (&Rational, &Rational, u64) {
        (&self.a, &self.b, self.d)
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    fn common_d(&self, other: &Surd) -> u64 {
        match (self.b.is_zero(), other.b.is_zero()) {
            (true, _) => other.d,
            (_, true) => self.d,
            _ => {
                assert_eq!(self.d, other.d, "surds over different radicands");
                self.d
            }
        }
    }

    pub fn add(&self, other: &Surd) -> Surd {
        Self::normalized(&self.a + &other.a, &self.b + &other.b, self.common_d(other))
    }

    pub fn sub(&self, other: &Surd) -> Surd {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Surd {
        Surd { a: -&self.a, b: -&self.b, d: self.d }
    }

    pub fn mul(&self, other: &Surd) -> Surd {
        let d = self.common_d(other);
        let dd = Rational::from_integer(d as i64);
        let a = &self.a * &other.a + &self.b * &other.b * dd;
        let b = &self.a * &other.b + &self.b * &other.a;
        Self::normalized(a, b, d)
    }

    pub fn scale(&self, c: &Rational) -> Surd {
        Self::normalized(&self.a * c, &self.b * c, self.d)
    }

    pub fn recip(&self) -> Result<Surd> {
        if self.is_zero() {
            return Err(Error::invalid("division by zero"));
        }
        // (a − b√d) / (a² − b²d); the denominator is nonzero since √d is
        // irrational whenever b ≠ 0.
        let den = &self.a * &self.a - &self.b * &self.b * Rational::from_integer(self.d as i64);
        let inv = den.recip();
        Ok(Self::normalized(&self.a * &inv, -(&self.b * &inv), self.d))
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn signum(&self) -> i32 {
        let (sa, sb) = (self.a.signum(), self.b.signum());
        if sb == 0 || sa == sb {
            return if sa == 0 { sb } else { sa };
        }
        if sa == 0 {
            return sb;
        }
        let a2 = &self.a * &self.a;
        let b2d = &self.b * &self.b * Rational::from_integer(self.d as i64);
        match a2.cmp(&b2d) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => 0,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.a.to_f64() + self.b.to_f64() * (self.d as f64).sqrt()
    }
}

impl Ord for Surd {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sub(other).signum().cmp(&0)
    }
}

impl PartialOrd for Surd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        let root = format!("√{}", self.d);
        let b = if self.b == Rational::one() {
            root
        } else if self.b == -Rational::one() {
            format!("-{root}")
        } else {
            format!("{}·{root}", self.b)
        };
        if self.a.is_zero() {
            write!(f, "{b}")
        } else if let Some(rest) = b.strip_prefix('-') {
            write!(f, "{} - {rest}", self.a)
        } else {
            write!(f, "{} + {b}", self.a)
        }
    }
}

impl FromStr for Surd {
    type Err = Error;

    /// Accepts a rational such as `7/2`, or `a+b*sqrt(d)` forms like
    /// `2+sqrt(2)`, `201/100+sqrt(2)` and `1/3*sqrt(6)`.
    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::Parse(format!("not a number of the form a+b*sqrt(d): {s:?}"));
        let Some(pos) = t.find("sqrt(") else {
            return Ok(Surd::rational(t.parse()?));
        };
        let close = t[pos..].find(')').ok_or_else(bad)? + pos;
        if close + 1 != t.len() {
            return Err(bad());
        }
        let d: u64 = t[pos + 5..close].parse().map_err(|_| bad())?;
        let head = &t[..pos];
        let split = head.rfind(['+', '-']).filter(|&i| i > 0);
        let (a_str, coef) = match split {
            Some(i) => (&head[..i], &head[i..]),
            None => ("", head),
        };
        let coef = coef.strip_suffix('*').unwrap_or(coef);
        let b = match coef {
            "" | "+" => Rational::one(),
            "-" => -Rational::one(),
            c => c.trim_start_matches('+').parse()?,
        };
        let a = if a_str.is_empty() { Rational::zero() } else { a_str.parse()? };
        Surd::new(a, b, d)
    }
}

/// `c + l·λ + r·λ/√n`, kept in this symbolic form for display and evaluated
/// through a [`Context`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymValue {
    pub c: Rational,
    pub l: Rational,
    pub r: Rational,
}

impl SymValue {
    pub fn new(c: Rational, l: Rational, r: Rational) -> Self {
        SymValue { c, l, r }
    }

    pub fn constant(c: Rational) -> Self {
        SymValue { c, l: Rational::zero(), r: Rational::zero() }
    }

    pub fn add(&self, o: &SymValue) -> SymValue {
        SymValue { c: &self.c + &o.c, l: &self.l + &o.l, r: &self.r + &o.r }
    }

    pub fn neg(&self) -> SymValue {
        SymValue { c: -&self.c, l: -&self.l, r: -&self.r }
    }
}

impl fmt::Display for SymValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}·λ + {}·λ/√n", self.c, self.l, self.r)
    }
}

fn sym(c: i64, l: i64, r: i64) -> SymValue {
    SymValue::new(c.into(), l.into(), r.into())
}

/// Fixes `n` and `λ`, and so an order on [`SymValue`]s.
#[derive(Clone, Debug)]
pub struct Context {
    n: usize,
    lambda: Surd,
    lambda_over_root: Surd,
}

impl Context {
    /// `λ` must be positive and lie in `Q(√n)`.
    pub fn new(n: usize, lambda: Surd) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n must be at least 1"));
        }
        if lambda.signum() <= 0 {
            return Err(Error::invalid(format!("λ = {lambda} must be positive")));
        }
        let root = Surd::sqrt(n as u64)?;
        if !lambda.is_rational() && (root.is_rational() || lambda.d != root.d) {
            return Err(Error::invalid(format!("λ = {lambda} is not in Q(√{n})")));
        }
        let lambda_over_root = lambda.mul(&root.recip()?);
        Ok(Context { n, lambda, lambda_over_root })
    }

    pub fn from_rational(n: usize, lambda: Rational) -> Result<Self> {
        Context::new(n, Surd::rational(lambda))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> &Surd {
        &self.lambda
    }

    pub fn eval(&self, v: &SymValue) -> Surd {
        Surd::rational(v.c.clone())
            .add(&self.lambda.scale(&v.l))
            .add(&self.lambda_over_root.scale(&v.r))
    }

    fn le(&self, a: &SymValue, b: &SymValue) -> bool {
        self.eval(a) <= self.eval(b)
    }

    /// `√n/(√n−1)`, or `None` for `n = 1` where no bound applies.
    pub fn threshold(n: usize) -> Result<Option<Surd>> {
        if n == 0 {
            return Err(Error::invalid("n must be at least 1"));
        }
        if n == 1 {
            return Ok(None);
        }
        let root = Surd::sqrt(n as u64)?;
        let den = root.sub(&Surd::rational(Rational::one()));
        Ok(Some(root.mul(&den.recip()?)))
    }

    /// The box `[−1−λ/√n, 1+λ/√n]` used for clipping.
    pub fn clip_box(&self) -> Interval {
        Interval::closed(sym(-1, 0, -1), sym(1, 0, 1), self)
    }
}

/// A closed interval with symbolic endpoints, possibly empty.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval(Option<(SymValue, SymValue)>);

impl Interval {
    pub fn empty() -> Self {
        Interval(None)
    }

    pub fn point(v: SymValue) -> Self {
        Interval(Some((v.clone(), v)))
    }

    /// `[lo, hi]`, empty when `lo > hi`.
    pub fn closed(lo: SymValue, hi: SymValue, ctx: &Context) -> Self {
        if ctx.le(&lo, &hi) {
            Interval(Some((lo, hi)))
        } else {
            Interval(None)
        }
    }

    pub fn unit() -> Self {
        Interval(Some((sym(-1, 0, 0), sym(1, 0, 0))))
    }

    pub fn bounds(&self) -> Option<(&SymValue, &SymValue)> {
        self.0.as_ref().map(|(a, b)| (a, b))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_none()
    }

    pub fn sum(&self, other: &Interval) -> Interval {
        match (&self.0, &other.0) {
            (Some((a, b)), Some((c, d))) => Interval(Some((a.add(c), b.add(d)))),
            _ => Interval(None),
        }
    }

    pub fn intersect(&self, other: &Interval, ctx: &Context) -> Interval {
        let (Some((a, b)), Some((c, d))) = (&self.0, &other.0) else {
            return Interval(None);
        };
        let lo = if ctx.le(a, c) { c } else { a };
        let hi = if ctx.le(b, d) { b } else { d };
        Interval::closed(lo.clone(), hi.clone(), ctx)
    }

    pub fn intersects(&self, other: &Interval, ctx: &Context) -> bool {
        !self.intersect(other, ctx).is_empty()
    }

    pub fn contains_value(&self, v: &SymValue, ctx: &Context) -> bool {
        self.0.as_ref().is_some_and(|(a, b)| ctx.le(a, v) && ctx.le(v, b))
    }

    /// Whether `other ⊆ self`; the empty interval is contained in anything.
    pub fn contains(&self, other: &Interval, ctx: &Context) -> bool {
        match (&self.0, &other.0) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some((a, b)), Some((c, d))) => ctx.le(a, c) && ctx.le(d, b),
        }
    }

    /// Evaluated endpoints, identifying intervals with the same value.
    fn value_key(&self, ctx: &Context) -> Option<(Surd, Surd)> {
        self.0.as_ref().map(|(a, b)| (ctx.eval(a), ctx.eval(b)))
    }

    pub fn display(&self, ctx: &Context) -> String {
        match &self.0 {
            None => "∅".into(),
            Some((a, b)) => format!("[{}, {}]", ctx.eval(a), ctx.eval(b)),
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            None => write!(f, "∅"),
            Some((a, b)) => write!(f, "[{a}, {b}]"),
        }
    }
}

/// `C ⊞″ D = (C + D) ∩ [−1−λ/√n, 1+λ/√n]`.
pub fn boxsum2(c: &Interval, d: &Interval, ctx: &Context) -> Interval {
    c.sum(d).intersect(&ctx.clip_box(), ctx)
}

/// Whether the Euclidean distance from `phi` to the cube `[−1,1]ⁿ` is at most `λ`.
pub fn dual_membership(phi: &[Rational], lambda: &Rational) -> Result<bool> {
    if !lambda.is_positive() {
        return Err(Error::invalid("λ must be positive"));
    }
    let one = Rational::one();
    let dist2: Rational = phi
        .iter()
        .map(|x| {
            let e = x.abs() - &one;
            if e.is_positive() {
                &e * &e
            } else {
                Rational::zero()
            }
        })
        .sum();
    Ok(dist2 <= lambda * lambda)
}

/// The exposed face `F + φ` of the dual ball equal to `∂‖x‖`: `F` is the face
/// of the cube with sign pattern `supp(x)`, and `φ = λx/‖x‖₂`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubeFace {
    pub sign: SignedSet,
    /// Coordinates of `φ`, exactly, as elements of `Q(√(‖x‖₂²))`.
    pub shift: Vec<Surd>,
}

impl CubeFace {
    pub fn shift_f64(&self) -> Vec<f64> {
        self.shift.iter().map(Surd::to_f64).collect()
    }

    /// `‖φ‖₂²`, exactly.
    pub fn shift_norm_sq(&self) -> Rational {
        let mut acc = Surd::rational(Rational::zero());
        for s in &self.shift {
            acc = acc.add(&s.mul(s));
        }
        assert!(acc.is_rational(), "squared shift norm is rational");
        acc.a
    }

    /// Membership of `chi` in `F + φ`, up to `tol`.
    pub fn contains_f64(&self, chi: &[f64], tol: f64) -> bool {
        chi.len() == self.shift.len()
            && chi.iter().zip(&self.shift).enumerate().all(|(i, (&c, s))| {
                let c = c - s.to_f64();
                match self.sign.sign(i + 1) {
                    1 => (c - 1.0).abs() <= tol,
                    -1 => (c + 1.0).abs() <= tol,
                    _ => c.abs() <= 1.0 + tol,
                }
            })
    }
}

fn rational_to_u64(r: &Rational) -> Result<(u64, u64)> {
    let (p, q) = r.parts();
    match (p.to_u64(), q.to_u64()) {
        (Some(p), Some(q)) => Ok((p, q)),
        _ => Err(Error::TooLarge(format!("{r} does not fit a 64-bit radicand"))),
    }
}

pub fn l1l2_subdifferential(x: &[Rational], lambda: &Rational) -> Result<CubeFace> {
    if !lambda.is_positive() {
        return Err(Error::invalid("λ must be positive"));
    }
    let sign = SignedSet::support_of(x)?;
    if sign.is_empty() {
        return Err(Error::ZeroVector);
    }
    let ss: Rational = x.iter().map(|v| v * v).sum();
    // λ x_i / √(p/r) = (λ x_i / p) · √(p r).
    let (p, r) = rational_to_u64(&ss)?;
    let d = p.checked_mul(r).ok_or_else(|| Error::TooLarge(format!("radicand {p}·{r}")))?;
    let inv_p = Rational::new(1, p as i64);
    let shift = x
        .iter()
        .map(|xi| Surd::new(Rational::zero(), lambda * xi * &inv_p, d))
        .collect::<Result<Vec<_>>>()?;
    Ok(CubeFace { sign, shift })
}

/// The lexicographically least 1-based pair `(i, j)` whose sign sets share a
/// coordinate with equal sign.
pub fn upper_bound_witness(signs: &[SignedSet]) -> Result<Option<(usize, usize)>> {
    if let Some(i) = signs.iter().position(SignedSet::is_empty) {
        return Err(Error::invalid(format!("sign set {} is empty", i + 1)));
    }
    let m = signs.first().map_or(0, SignedSet::ground);
    if let Some(s) = signs.iter().find(|s| s.ground() != m) {
        return Err(Error::GroundSetMismatch { left: m, right: s.ground() });
    }
    for i in 0..signs.len() {
        for j in i + 1..signs.len() {
            if signs[i].pos() & signs[j].pos() != 0 || signs[i].neg() & signs[j].neg() != 0 {
                return Ok(Some((i + 1, j + 1)));
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum BoundVerdict {
    /// Two points whose subdifferentials have an empty restricted sum.
    NotSmt { i: usize, j: usize },
    Inconclusive,
}

/// The upper-bound argument for `λ ≤ 1`: a star with more than `2n` rays is
/// never a Steiner minimal tree.
pub fn node_degree_bound(points: &[Vec<Rational>], n: usize, lambda: &Rational) -> Result<BoundVerdict> {
    if !lambda.is_positive() {
        return Err(Error::invalid("λ must be positive"));
    }
    if *lambda > Rational::one() {
        return Err(Error::invalid(format!("the degree bound needs λ ≤ 1, got {lambda}")));
    }
    let mut signs = Vec::with_capacity(points.len());
    for p in points {
        if p.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: p.len() });
        }
        let s = SignedSet::support_of(p)?;
        if s.is_empty() {
            return Err(Error::ZeroVector);
        }
        signs.push(s);
    }
    if points.len() <= 2 * n {
        return Ok(BoundVerdict::Inconclusive);
    }
    let (i, j) = upper_bound_witness(&signs)?.expect("pigeonhole: more than 2n nonempty sign sets");
    Ok(BoundVerdict::NotSmt { i, j })
}

/// Leaf projections in one coordinate: `{1+λ}`, `{−1−λ}` and `[−1,1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Kind {
    Plus,
    Minus,
    Unit,
}

fn kind_interval(k: Kind) -> Interval {
    match k {
        Kind::Plus => Interval::point(sym(1, 1, 0)),
        Kind::Minus => Interval::point(sym(-1, -1, 0)),
        Kind::Unit => Interval::unit(),
    }
}

/// Every value of `⟨·⟩″` over all parenthesizations of a multiset with
/// `p` copies of `{1+λ}`, `m` of `{−1−λ}` and `c` of `[−1,1]`.
struct IntervalTable {
    ctx: Context,
    memo: HashMap<(usize, usize, usize), Vec<Interval>>,
}

impl IntervalTable {
    fn new(ctx: Context) -> Self {
        IntervalTable { ctx, memo: HashMap::new() }
    }

    fn get(&mut self, p: usize, m: usize, c: usize) -> Vec<Interval> {
        if let Some(v) = self.memo.get(&(p, m, c)) {
            return v.clone();
        }
        let total = p + m + c;
        assert!(total >= 1);
        let out = if total == 1 {
            let k = if p == 1 {
                Kind::Plus
            } else if m == 1 {
                Kind::Minus
            } else {
                Kind::Unit
            };
            vec![kind_interval(k)]
        } else {
            let mut seen = HashSet::new();
            let mut out = Vec::new();
            for p1 in 0..=p {
                for m1 in 0..=m {
                    for c1 in 0..=c {
                        let left = p1 + m1 + c1;
                        // Each unordered split once: the left part takes the
                        // lexicographically smaller triple.
                        if left == 0 || left == total || (p1, m1, c1) > (p - p1, m - m1, c - c1) {
                            continue;
                        }
                        let a = self.get(p1, m1, c1);
                        let b = self.get(p - p1, m - m1, c - c1);
                        for x in &a {
                            for y in &b {
                                let z = boxsum2(x, y, &self.ctx);
                                if seen.insert(z.value_key(&self.ctx)) {
                                    out.push(z);
                                }
                            }
                        }
                    }
                }
            }
            out
        };
        self.memo.insert((p, m, c), out.clone());
        out
    }
}

/// Why the interval procedure fails, if it does.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalFailure {
    /// 1-based coordinate.
    pub coordinate: usize,
    /// Offending value of `⟨π_i(Σ)⟩″`, or of `⟨π_n(Σ₁)⟩″` for the last
    /// coordinate, printed with evaluated endpoints.
    pub interval: String,
}

/// Runs the interval procedure over all parenthesizations of
/// `Σ = {±E_i : i < n} ∪ {E_n}`, coordinate by coordinate, and returns the
/// first failing condition. Parenthesizations are grouped by how many
/// operands of each projected kind they combine, which loses nothing since
/// `⊞″` depends only on the projected operands.
pub fn interval_failure(ctx: &Context) -> Option<IntervalFailure> {
    let n = ctx.n;
    if n == 1 {
        return None;
    }
    let mut table = IntervalTable::new(ctx.clone());
    let top = sym(1, 1, 0);
    // Last coordinate: E_n projects to {1+λ}, every other operand to [−1,1].
    for c1 in 0..2 * n - 2 {
        let c2 = 2 * n - 2 - c1;
        for a in table.get(1, 0, c1) {
            for b in table.get(0, 0, c2) {
                if !a.sum(&b).contains_value(&top, ctx) {
                    return Some(IntervalFailure { coordinate: n, interval: a.display(ctx) });
                }
            }
        }
    }
    // Other coordinates are alike up to relabelling: one {1+λ}, one
    // {−1−λ}, and 2n−3 copies of [−1,1].
    for z in table.get(1, 1, 2 * n - 3) {
        if !z.intersects(&Interval::unit(), ctx) {
            return Some(IntervalFailure { coordinate: 1, interval: z.display(ctx) });
        }
    }
    None
}

/// Whether the interval procedure certifies that the star joining `o` to
/// all `±e_i` is a Steiner minimal tree.
pub fn steiner_star_check(n: usize, lambda: &Surd) -> Result<bool> {
    Ok(interval_failure(&Context::new(n, lambda.clone())?).is_none())
}

pub fn steiner_star_check_rational(n: usize, lambda: &Rational) -> Result<bool> {
    steiner_star_check(n, &Surd::rational(lambda.clone()))
}

/// Operand labels: `1..n−1` are `+E_i`, `n..2n−2` are `−E_i`, `2n−1` is `E_n`.
fn operand_kind(label: u32, coord: usize, n: usize) -> Kind {
    let l = label as usize;
    if l == 2 * n - 1 {
        return if coord == n { Kind::Plus } else { Kind::Unit };
    }
    if l < n && l == coord {
        Kind::Plus
    } else if l >= n && l - (n - 1) == coord {
        Kind::Minus
    } else {
        Kind::Unit
    }
}

fn eval_key(key: &Key, leaf: &dyn Fn(u32) -> Interval, ctx: &Context) -> Interval {
    match key {
        Key::Leaf(l) => leaf(*l),
        Key::Node(kids) => {
            let mut it = kids.iter().map(|k| eval_key(k, leaf, ctx));
            let first = it.next().expect("internal vertex with children");
            it.fold(first, |acc, x| boxsum2(&acc, &x, ctx))
        }
    }
}

fn key_contains(key: &Key, label: u32) -> bool {
    match key {
        Key::Leaf(l) => *l == label,
        Key::Node(kids) => kids.iter().any(|k| key_contains(k, label)),
    }
}

/// Evaluates `⊞″` on a parenthesization of arbitrary operand intervals.
pub fn evaluate_parenthesization(key: &Key, operands: &HashMap<u32, Interval>, ctx: &Context) -> Result<Interval> {
    fn check(key: &Key, ops: &HashMap<u32, Interval>) -> Result<()> {
        match key {
            Key::Leaf(l) if ops.contains_key(l) => Ok(()),
            Key::Leaf(l) => Err(Error::invalid(format!("no operand for label {l}"))),
            Key::Node(kids) => kids.iter().try_for_each(|k| check(k, ops)),
        }
    }
    check(key, operands)?;
    Ok(eval_key(key, &|l| operands[&l].clone(), ctx))
}

/// As [`steiner_star_check`], evaluating each labelled parenthesization
/// separately (`a_{2n−1}` of them). Used to cross-check the grouped version.
pub fn steiner_star_check_enumerated(n: usize, lambda: &Surd) -> Result<bool> {
    let ctx = Context::new(n, lambda.clone())?;
    if n == 1 {
        return Ok(true);
    }
    if n > 5 {
        return Err(Error::TooLarge(format!("explicit enumeration for n = {n}")));
    }
    let top = sym(1, 1, 0);
    let e_n = (2 * n - 1) as u32;
    let mut ok = true;
    for_each_rooted(&labels(2 * n - 1), &mut |t| {
        let key = t.key();
        let Key::Node(kids) = &key else { unreachable!("at least three operands") };
        for coord in 1..=n {
            let leaf = |l: u32| kind_interval(operand_kind(l, coord, n));
            if coord == n {
                let (s1, s2): (Vec<&Key>, Vec<&Key>) = kids.iter().partition(|k| key_contains(k, e_n));
                let part = |ks: &[&Key]| {
                    let mut it = ks.iter().map(|k| eval_key(k, &leaf, &ctx));
                    let first = it.next().expect("nonempty side");
                    it.fold(first, |acc, x| boxsum2(&acc, &x, &ctx))
                };
                if !part(&s1).sum(&part(&s2)).contains_value(&top, &ctx) {
                    ok = false;
                }
            } else if !eval_key(&key, &leaf, &ctx).intersects(&Interval::unit(), &ctx) {
                ok = false;
            }
        }
        ok
    })?;
    Ok(ok)
}

/// The interval contained in any parenthesization of copies of `[−1,1]` and
/// one `{1+λ}` that is not just `{1+λ}` itself: `[λ, 1+λ/√n]`.
pub fn claim_two_interval(ctx: &Context) -> Interval {
    Interval::closed(sym(0, 1, 0), sym(1, 0, 1), ctx)
}

/// Which of the four cases applies to the smallest subexpression combining
/// `{1+λ}` and `{−1−λ}`, by whether each side is a lone operand.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MixedCase {
    BothComposite,
    PlusComposite,
    MinusComposite,
    BothSingle,
}

/// The interval the argument guarantees inside that subexpression.
pub fn mixed_case_interval(case: MixedCase, ctx: &Context) -> Interval {
    match case {
        MixedCase::BothComposite => Interval::closed(sym(-1, 1, -1), sym(1, -1, 1), ctx),
        MixedCase::PlusComposite => Interval::closed(sym(-1, 0, 0), sym(0, -1, 1), ctx),
        MixedCase::MinusComposite => Interval::closed(sym(0, 1, -1), sym(1, 0, 0), ctx),
        MixedCase::BothSingle => Interval::point(sym(0, 0, 0)),
    }
}

fn mixed_case(key: &Key, plus: u32, minus: u32) -> MixedCase {
    let Key::Node(kids) = key else { unreachable!("both labels below a leaf") };
    let p = kids.iter().position(|k| key_contains(k, plus)).expect("plus below");
    let m = kids.iter().position(|k| key_contains(k, minus)).expect("minus below");
    if p == m {
        return mixed_case(&kids[p], plus, minus);
    }
    let single = |k: &Key| matches!(k, Key::Leaf(_));
    match (single(&kids[p]), single(&kids[m])) {
        (false, false) => MixedCase::BothComposite,
        (false, true) => MixedCase::PlusComposite,
        (true, false) => MixedCase::MinusComposite,
        (true, true) => MixedCase::BothSingle,
    }
}

/// Certifies every parenthesization through the case analysis of the proof:
/// the inner containments, the four cases, and the closing claim that
/// further `⊞″` with `[−1,1]` keeps a point of `[−1,1]`. Returns `false`
/// when some step does not go through, which is weaker than the condition
/// failing.
pub fn claims_certify(n: usize, lambda: &Surd) -> Result<bool> {
    let ctx = Context::new(n, lambda.clone())?;
    if n == 1 {
        return Ok(true);
    }
    if n > 5 {
        return Err(Error::TooLarge(format!("explicit enumeration for n = {n}")));
    }
    let inner = claim_two_interval(&ctx);
    if inner.is_empty() {
        return Ok(false);
    }
    let top = sym(1, 1, 0);
    let e_n = (2 * n - 1) as u32;
    let mut ok = true;
    for_each_rooted(&labels(2 * n - 1), &mut |t| {
        let key = t.key();
        let Key::Node(kids) = &key else { unreachable!("at least three operands") };
        // Last coordinate: the side holding E_n is {1+λ} or contains
        // [λ, 1+λ/√n]; the other side contains [−1,1].
        let lone = kids.iter().any(|k| matches!(k, Key::Leaf(l) if *l == e_n));
        let side = if lone { Interval::point(top.clone()) } else { inner.clone() };
        ok &= side.sum(&Interval::unit()).contains_value(&top, &ctx);
        for i in 1..n {
            let z = mixed_case_interval(mixed_case(&key, i as u32, (n - 1 + i) as u32), &ctx);
            ok &= z.intersects(&Interval::unit(), &ctx);
        }
        ok
    })?;
    Ok(ok)
}

impl Serialize for Surd {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string().replace('√', "sqrt").replace('·', "*"))
    }
}

/// Parses `λ` for the CLI: a rational or `a+b*sqrt(d)`.
pub fn parse_lambda(s: &str) -> Result<Surd> {
    s.parse()
}

/// `1/4, 1/2, …` up to and including `√n/(√n−1)` (the threshold itself is
/// appended when it is not on the grid).
pub fn lambda_grid(n: usize, step: &Rational) -> Result<Vec<Surd>> {
    let t = Context::threshold(n)?.ok_or_else(|| Error::invalid("no threshold for n = 1"))?;
    let mut out = Vec::new();
    let mut x = step.clone();
    while Surd::rational(x.clone()) <= t {
        out.push(Surd::rational(x.clone()));
        x = x + step;
    }
    if out.last() != Some(&t) {
        out.push(t);
    }
    Ok(out)
}
