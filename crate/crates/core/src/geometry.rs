//! Norms, dual unit balls and subdifferentials for the supported spaces, and
//! the exact LP that decides one parenthesization of reduced Minkowski sums.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, rank, solve};
use crate::lp::{LinearProgram, Relation};
use crate::parens::ParenTree;
use crate::rational::{q, Rational};
use crate::zspace::{face_of, face_vertices, znorm, ZPoint};

/// Which norm. Points of `ZNorm(n)` carry `n + 1` zero-sum coordinates; all
/// other spaces use `n` coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SpaceRepr", into = "SpaceRepr")]
pub enum SpaceDescriptor {
    ZNorm(usize),
    L1(usize),
    Linf(usize),
    L2(usize),
    L1PlusLambdaL2(usize, Rational),
    PolytopeBall(Vec<Vec<Rational>>),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum SpaceRepr {
    Z { n: usize },
    L1 { n: usize },
    Linf { n: usize },
    L2 { n: usize },
    L1l2 { n: usize, lambda: Rational },
    Polytope { vertices: Vec<Vec<Rational>> },
}

impl TryFrom<SpaceRepr> for SpaceDescriptor {
    type Error = Error;
    fn try_from(r: SpaceRepr) -> Result<Self> {
        let s = match r {
            SpaceRepr::Z { n } => SpaceDescriptor::ZNorm(n),
            SpaceRepr::L1 { n } => SpaceDescriptor::L1(n),
            SpaceRepr::Linf { n } => SpaceDescriptor::Linf(n),
            SpaceRepr::L2 { n } => SpaceDescriptor::L2(n),
            SpaceRepr::L1l2 { n, lambda } => SpaceDescriptor::L1PlusLambdaL2(n, lambda),
            SpaceRepr::Polytope { vertices } => SpaceDescriptor::PolytopeBall(vertices),
        };
        s.validate()?;
        Ok(s)
    }
}

impl From<SpaceDescriptor> for SpaceRepr {
    fn from(s: SpaceDescriptor) -> Self {
        match s {
            SpaceDescriptor::ZNorm(n) => SpaceRepr::Z { n },
            SpaceDescriptor::L1(n) => SpaceRepr::L1 { n },
            SpaceDescriptor::Linf(n) => SpaceRepr::Linf { n },
            SpaceDescriptor::L2(n) => SpaceRepr::L2 { n },
            SpaceDescriptor::L1PlusLambdaL2(n, lambda) => SpaceRepr::L1l2 { n, lambda },
            SpaceDescriptor::PolytopeBall(vertices) => SpaceRepr::Polytope { vertices },
        }
    }
}

impl SpaceDescriptor {
    pub fn validate(&self) -> Result<()> {
        match self {
            SpaceDescriptor::ZNorm(n)
            | SpaceDescriptor::L1(n)
            | SpaceDescriptor::Linf(n)
            | SpaceDescriptor::L2(n) => {
                if *n < 1 {
                    return Err(Error::invalid("dimension must be at least 1"));
                }
                if *n > 24 {
                    return Err(Error::TooLarge(format!("dimension {n}")));
                }
            }
            SpaceDescriptor::L1PlusLambdaL2(n, lambda) => {
                if *n < 1 {
                    return Err(Error::invalid("dimension must be at least 1"));
                }
                if !lambda.is_positive() {
                    return Err(Error::invalid(format!("lambda must be positive, got {lambda}")));
                }
            }
            SpaceDescriptor::PolytopeBall(vs) => {
                let d = vs.first().map_or(0, Vec::len);
                if d == 0 {
                    return Err(Error::invalid("polytope needs vertices of positive dimension"));
                }
                if let Some(v) = vs.iter().find(|v| v.len() != d) {
                    return Err(Error::DimensionMismatch { expected: d, found: v.len() });
                }
                for v in vs {
                    let neg: Vec<Rational> = v.iter().map(|x| -x).collect();
                    if !vs.contains(&neg) {
                        return Err(Error::invalid("polytope vertex list is not centrally symmetric"));
                    }
                }
                if rank(vs) < d {
                    return Err(Error::invalid("polytope vertices do not span the space"));
                }
            }
        }
        Ok(())
    }

    /// Dimension of the normed space.
    pub fn dim(&self) -> usize {
        match self {
            SpaceDescriptor::ZNorm(n)
            | SpaceDescriptor::L1(n)
            | SpaceDescriptor::Linf(n)
            | SpaceDescriptor::L2(n)
            | SpaceDescriptor::L1PlusLambdaL2(n, _) => *n,
            SpaceDescriptor::PolytopeBall(vs) => vs[0].len(),
        }
    }

    /// Number of coordinates used to write a point.
    pub fn ambient(&self) -> usize {
        match self {
            SpaceDescriptor::ZNorm(n) => n + 1,
            _ => self.dim(),
        }
    }

    pub fn is_polyhedral(&self) -> bool {
        !matches!(self, SpaceDescriptor::L2(_) | SpaceDescriptor::L1PlusLambdaL2(..))
    }

    /// Short name used by the command line (`z:3`, `l1l2:2:7/2`, ...).
    pub fn short_name(&self) -> String {
        match self {
            SpaceDescriptor::ZNorm(n) => format!("z:{n}"),
            SpaceDescriptor::L1(n) => format!("l1:{n}"),
            SpaceDescriptor::Linf(n) => format!("linf:{n}"),
            SpaceDescriptor::L2(n) => format!("l2:{n}"),
            SpaceDescriptor::L1PlusLambdaL2(n, l) => format!("l1l2:{n}:{l}"),
            SpaceDescriptor::PolytopeBall(vs) => format!("polytope:{}:{}", vs[0].len(), vs.len()),
        }
    }

    pub fn check_point(&self, x: &[Rational]) -> Result<()> {
        if x.len() != self.ambient() {
            return Err(Error::DimensionMismatch { expected: self.ambient(), found: x.len() });
        }
        if let SpaceDescriptor::ZNorm(_) = self {
            let s: Rational = x.iter().sum();
            if !s.is_zero() {
                return Err(Error::NonZeroSum(s.to_string()));
            }
        }
        Ok(())
    }

    fn to_zpoint(&self, x: &[Rational]) -> Result<ZPoint> {
        self.check_point(x)?;
        ZPoint::new(x.to_vec())
    }

    /// Exact norm, for polyhedral spaces.
    pub fn norm(&self, x: &[Rational]) -> Result<Rational> {
        self.check_point(x)?;
        match self {
            SpaceDescriptor::ZNorm(_) => Ok(znorm(&self.to_zpoint(x)?)),
            SpaceDescriptor::L1(_) => Ok(x.iter().map(Rational::abs).sum()),
            SpaceDescriptor::Linf(_) => Ok(x.iter().map(Rational::abs).max().expect("nonempty")),
            SpaceDescriptor::PolytopeBall(_) => Ok(self
                .dual_vertices()?
                .iter()
                .map(|v| dot(v, x))
                .max()
                .expect("nonempty")),
            _ => Err(Error::UnsupportedSpace(format!(
                "{} has no exact rational norm; use norm_f64",
                self.short_name()
            ))),
        }
    }

    /// Exact dual norm of a functional, for polyhedral spaces.
    pub fn dual_norm(&self, phi: &[Rational]) -> Result<Rational> {
        if phi.len() != self.ambient() {
            return Err(Error::DimensionMismatch { expected: self.ambient(), found: phi.len() });
        }
        match self {
            SpaceDescriptor::ZNorm(_) => {
                self.check_point(phi)?;
                Ok(phi.iter().map(Rational::abs).sum())
            }
            SpaceDescriptor::L1(_) => Ok(phi.iter().map(Rational::abs).max().expect("nonempty")),
            SpaceDescriptor::Linf(_) => Ok(phi.iter().map(Rational::abs).sum()),
            SpaceDescriptor::PolytopeBall(vs) => Ok(vs.iter().map(|v| dot(phi, v)).max().expect("nonempty")),
            _ => Err(Error::UnsupportedSpace(self.short_name())),
        }
    }

    /// Vertices of the dual unit ball.
    pub fn dual_vertices(&self) -> Result<Vec<Vec<Rational>>> {
        match self {
            SpaceDescriptor::ZNorm(n) => {
                let m = n + 1;
                let mut out = Vec::new();
                for i in 0..m {
                    for j in 0..m {
                        if i != j {
                            let mut v = vec![Rational::zero(); m];
                            v[i] = q(1, 2);
                            v[j] = q(-1, 2);
                            out.push(v);
                        }
                    }
                }
                Ok(out)
            }
            SpaceDescriptor::Linf(n) => {
                let mut out = Vec::new();
                for i in 0..*n {
                    for s in [1, -1] {
                        let mut v = vec![Rational::zero(); *n];
                        v[i] = Rational::from_integer(s);
                        out.push(v);
                    }
                }
                Ok(out)
            }
            SpaceDescriptor::L1(n) => Ok(sign_vectors(*n)),
            SpaceDescriptor::PolytopeBall(vs) => Ok(polar_vertices(vs)),
            _ => Err(Error::UnsupportedSpace(format!(
                "{} has no polyhedral dual ball",
                self.short_name()
            ))),
        }
    }

    /// `‖x‖` in floating point; defined for every space.
    pub fn norm_f64(&self, x: &[f64]) -> f64 {
        match self {
            SpaceDescriptor::ZNorm(_) => {
                let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
                0.5 * (hi - lo)
            }
            SpaceDescriptor::L1(_) => x.iter().map(|v| v.abs()).sum(),
            SpaceDescriptor::Linf(_) => x.iter().fold(0.0, |a, v| a.max(v.abs())),
            SpaceDescriptor::L2(_) => l2(x),
            SpaceDescriptor::L1PlusLambdaL2(_, lambda) => {
                x.iter().map(|v| v.abs()).sum::<f64>() + lambda.to_f64() * l2(x)
            }
            SpaceDescriptor::PolytopeBall(_) => {
                let duals = self.dual_vertices().expect("polytope");
                duals
                    .iter()
                    .map(|v| v.iter().zip(x).map(|(a, b)| a.to_f64() * b).sum::<f64>())
                    .fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    /// A subgradient of the norm at `x` (the zero functional at `x = o`). For
    /// `ZNorm` the result is zero-sum, so steps stay in the hyperplane.
    pub fn subgradient_f64(&self, x: &[f64], duals: &[Vec<f64>]) -> Vec<f64> {
        let n = x.len();
        let mut g = vec![0.0; n];
        if x.iter().all(|&v| v == 0.0) {
            return g;
        }
        match self {
            SpaceDescriptor::ZNorm(_) => {
                let imax = argmax_by(x, |v| v);
                let imin = argmax_by(x, |v| -v);
                if imax != imin {
                    g[imax] = 0.5;
                    g[imin] = -0.5;
                }
            }
            SpaceDescriptor::L1(_) => {
                for (gi, &v) in g.iter_mut().zip(x) {
                    *gi = sign(v);
                }
            }
            SpaceDescriptor::Linf(_) => {
                let i = argmax_by(x, f64::abs);
                g[i] = sign(x[i]);
            }
            SpaceDescriptor::L2(_) => {
                let r = l2(x);
                for (gi, &v) in g.iter_mut().zip(x) {
                    *gi = v / r;
                }
            }
            SpaceDescriptor::L1PlusLambdaL2(_, lambda) => {
                let r = l2(x);
                let l = lambda.to_f64();
                for (gi, &v) in g.iter_mut().zip(x) {
                    *gi = sign(v) + l * v / r;
                }
            }
            SpaceDescriptor::PolytopeBall(_) => {
                let vals: Vec<f64> = duals.iter().map(|d| d.iter().zip(x).map(|(a, b)| a * b).sum()).collect();
                g.clone_from(&duals[argmax_by(&vals, |v| v)]);
            }
        }
        g
    }

    /// Dual-ball vertices in floating point (empty for non-polyhedral spaces).
    pub fn dual_vertices_f64(&self) -> Vec<Vec<f64>> {
        match self.dual_vertices() {
            Ok(vs) => vs.iter().map(|v| v.iter().map(Rational::to_f64).collect()).collect(),
            Err(_) => Vec::new(),
        }
    }
}

fn l2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn argmax_by(x: &[f64], f: impl Fn(f64) -> f64) -> usize {
    let mut best = 0;
    for i in 1..x.len() {
        if f(x[i]) > f(x[best]) {
            best = i;
        }
    }
    best
}

fn sign_vectors(n: usize) -> Vec<Vec<Rational>> {
    (0..1u64 << n)
        .map(|mask| {
            (0..n)
                .map(|i| Rational::from_integer(if mask >> i & 1 == 1 { -1 } else { 1 }))
                .collect()
        })
        .collect()
}

/// Vertices of `{φ : φ(v) ≤ 1 for all v}`: every nonsingular choice of `d`
/// tight constraints whose solution satisfies the rest.
fn polar_vertices(vs: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let d = vs[0].len();
    let mut out: Vec<Vec<Rational>> = Vec::new();
    let ones = vec![Rational::one(); d];
    let mut pick: Vec<usize> = (0..d).collect();
    if d > vs.len() {
        return out;
    }
    loop {
        let rows: Vec<Vec<Rational>> = pick.iter().map(|&i| vs[i].clone()).collect();
        if let Some(phi) = solve(&rows, &ones) {
            if vs.iter().all(|v| dot(&phi, v) <= Rational::one()) && !out.contains(&phi) {
                out.push(phi);
            }
        }
        // Next d-subset in lexicographic order.
        let mut i = d;
        while i > 0 && pick[i - 1] == vs.len() - d + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        pick[i - 1] += 1;
        for j in i..d {
            pick[j] = pick[j - 1] + 1;
        }
    }
    out.sort();
    out
}

impl fmt::Display for SpaceDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.short_name())
    }
}

impl FromStr for SpaceDescriptor {
    type Err = Error;
    /// `z:3`, `l1:2`, `linf:2`, `l2:2` or `l1l2:2:7/2`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let n = |p: &str| -> Result<usize> {
            p.parse().map_err(|_| Error::Parse(format!("bad dimension {p:?} in {s:?}")))
        };
        let space = match parts.as_slice() {
            ["z", d] => SpaceDescriptor::ZNorm(n(d)?),
            ["l1", d] => SpaceDescriptor::L1(n(d)?),
            ["linf", d] => SpaceDescriptor::Linf(n(d)?),
            ["l2", d] => SpaceDescriptor::L2(n(d)?),
            ["l1l2", d, l] => SpaceDescriptor::L1PlusLambdaL2(n(d)?, l.parse()?),
            _ => return Err(Error::Parse(format!("unknown space {s:?}"))),
        };
        space.validate()?;
        Ok(space)
    }
}

/// `B*` as linear constraints on functionals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualBallHRep {
    pub inequalities: Vec<(Vec<Rational>, Rational)>,
    pub equalities: Vec<(Vec<Rational>, Rational)>,
}

impl DualBallHRep {
    pub fn dim(&self) -> usize {
        self.inequalities.first().map_or(0, |(a, _)| a.len())
    }

    pub fn contains(&self, phi: &[Rational]) -> bool {
        self.inequalities.iter().all(|(a, b)| dot(a, phi) <= *b)
            && self.equalities.iter().all(|(a, b)| dot(a, phi) == *b)
    }
}

pub fn dual_ball(space: &SpaceDescriptor) -> Result<DualBallHRep> {
    let m = space.ambient();
    let mut equalities = Vec::new();
    let inequalities = match space {
        SpaceDescriptor::ZNorm(_) => {
            equalities.push((vec![Rational::one(); m], Rational::zero()));
            sign_vectors(m).into_iter().map(|a| (a, Rational::one())).collect()
        }
        SpaceDescriptor::Linf(_) => sign_vectors(m).into_iter().map(|a| (a, Rational::one())).collect(),
        SpaceDescriptor::L1(_) => {
            let mut rows = Vec::new();
            for i in 0..m {
                for s in [1, -1] {
                    let mut a = vec![Rational::zero(); m];
                    a[i] = Rational::from_integer(s);
                    rows.push((a, Rational::one()));
                }
            }
            rows
        }
        SpaceDescriptor::PolytopeBall(vs) => vs.iter().map(|v| (v.clone(), Rational::one())).collect(),
        _ => {
            return Err(Error::UnsupportedSpace(format!(
                "{} is not polyhedral; its dual ball is handled by the l1l2 module",
                space.short_name()
            )))
        }
    };
    Ok(DualBallHRep { inequalities, equalities })
}

/// A polytope of functionals given by its vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualPolytope {
    vertices: Vec<Vec<Rational>>,
    dim: usize,
}

impl DualPolytope {
    pub fn new(vertices: Vec<Vec<Rational>>) -> Result<Self> {
        let dim = vertices.first().map(Vec::len).ok_or_else(|| Error::invalid("empty vertex list"))?;
        if let Some(v) = vertices.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: v.len() });
        }
        Ok(DualPolytope { vertices, dim })
    }

    pub fn point(v: Vec<Rational>) -> Self {
        let dim = v.len();
        DualPolytope { vertices: vec![v], dim }
    }

    pub fn vertices(&self) -> &[Vec<Rational>] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `max_{φ ∈ P} a·φ`.
    pub fn support(&self, a: &[Rational]) -> Rational {
        self.vertices.iter().map(|v| dot(a, v)).max().expect("nonempty")
    }
}

/// `∂x`: the face of `B*` on which functionals attain `‖x‖` at `x`.
pub fn subdifferential(space: &SpaceDescriptor, x: &[Rational]) -> Result<DualPolytope> {
    space.check_point(x)?;
    if x.iter().all(Rational::is_zero) {
        return Err(Error::ZeroVector);
    }
    if let SpaceDescriptor::ZNorm(_) = space {
        let face = face_of(&space.to_zpoint(x)?)?;
        let vs = face_vertices(&face)?.into_iter().map(|v| v.into_coords()).collect();
        return DualPolytope::new(vs);
    }
    let duals = space.dual_vertices()?;
    let best = duals.iter().map(|v| dot(v, x)).max().expect("nonempty");
    DualPolytope::new(duals.into_iter().filter(|v| dot(v, x) == best).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Every subexpression sum lies in `B*` (the star centre is a terminal).
    Node,
    /// Additionally the whole sum is `o` (the star centre is a Steiner point).
    Steiner,
}

/// Counts kept by [`paren_feasible_with_stats`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpSize {
    pub variables: usize,
    pub constraints: usize,
    pub dropped_rows: usize,
}

/// Decides whether the parenthesization encoded by `tree` is nonempty
/// (`Node`) or contains `o` (`Steiner`). Leaf label `i` uses `subdiffs[i-1]`.
pub fn paren_feasible(tree: &ParenTree, subdiffs: &[DualPolytope], ball: &DualBallHRep, mode: Mode) -> Result<bool> {
    paren_feasible_with_stats(tree, subdiffs, ball, mode).map(|(f, _)| f)
}

pub fn paren_feasible_with_stats(
    tree: &ParenTree,
    subdiffs: &[DualPolytope],
    ball: &DualBallHRep,
    mode: Mode,
) -> Result<(bool, LpSize)> {
    let (lp, size) = paren_lp(tree, subdiffs, ball, mode)?;
    Ok((lp.is_feasible(), size))
}

/// The LP behind [`paren_feasible`]. Its variables are convex weights over
/// the vertices of each leaf's polytope, laid out leaf by leaf in label
/// order, so trees on the same labels share a variable layout.
pub fn paren_lp(
    tree: &ParenTree,
    subdiffs: &[DualPolytope],
    ball: &DualBallHRep,
    mode: Mode,
) -> Result<(LinearProgram, LpSize)> {
    ParenLpBuilder::new(subdiffs, ball)?.build(tree, mode)
}

/// Builds [`paren_lp`] programs for many trees over the same operands,
/// caching every product `a · v` of a ball row with an operand vertex.
pub struct ParenLpBuilder<'a> {
    subdiffs: &'a [DualPolytope],
    ball: &'a DualBallHRep,
    /// `ineq[i][r]`: nonzero `(vertex, a_r · v)` for operand `i`.
    ineq: Vec<Vec<Vec<(usize, Rational)>>>,
    /// `support[i][r] = max_v a_r · v`.
    support: Vec<Vec<Rational>>,
    eq: Vec<Vec<Vec<(usize, Rational)>>>,
}

impl<'a> ParenLpBuilder<'a> {
    pub fn new(subdiffs: &'a [DualPolytope], ball: &'a DualBallHRep) -> Result<Self> {
        let dim = ball.dim();
        let products = |rows: &[(Vec<Rational>, Rational)]| -> Vec<Vec<Vec<(usize, Rational)>>> {
            subdiffs
                .iter()
                .map(|p| {
                    rows.iter()
                        .map(|(a, _)| {
                            p.vertices()
                                .iter()
                                .enumerate()
                                .map(|(j, v)| (j, dot(a, v)))
                                .filter(|(_, c)| !c.is_zero())
                                .collect()
                        })
                        .collect()
                })
                .collect()
        };
        if let Some(p) = subdiffs.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: p.dim() });
        }
        let support = subdiffs
            .iter()
            .map(|p| ball.inequalities.iter().map(|(a, _)| p.support(a)).collect())
            .collect();
        Ok(ParenLpBuilder {
            subdiffs,
            ball,
            ineq: products(&ball.inequalities),
            support,
            eq: products(&ball.equalities),
        })
    }

    pub fn build(&self, tree: &ParenTree, mode: Mode) -> Result<(LinearProgram, LpSize)> {
        let subdiffs = self.subdiffs;
        let ball = self.ball;
        let leaves = tree.leaves();
        let dim = ball.dim();
        let mut offset = vec![usize::MAX; subdiffs.len()];
        let mut next = 0;
        for &l in &leaves {
            let i = l as usize - 1;
            let a = subdiffs
                .get(i)
                .ok_or_else(|| Error::invalid(format!("no subdifferential assigned to leaf {l}")))?;
            offset[i] = next;
            next += a.vertices().len();
        }
        let mut lp = LinearProgram::new(next);
        let mut size = LpSize { variables: next, ..LpSize::default() };
        for &l in &leaves {
            let i = l as usize - 1;
            let cols = (0..subdiffs[i].vertices().len()).map(|j| (offset[i] + j, Rational::one())).collect();
            lp.add(cols, Relation::Eq, Rational::one());
        }
        let groups: Vec<Vec<u32>> = match mode {
            Mode::Node => {
                if !tree.is_rooted() {
                    return Err(Error::invalid("node mode needs a rooted tree"));
                }
                tree.clusters()
            }
            Mode::Steiner => tree.internal_splits(),
        };
        let row = |group: &[u32], table: &[Vec<Vec<(usize, Rational)>>], r: usize| -> Vec<(usize, Rational)> {
            let mut out = Vec::new();
            for &l in group {
                let i = l as usize - 1;
                out.extend(table[i][r].iter().map(|(j, c)| (offset[i] + j, c.clone())));
            }
            out
        };
        for group in &groups {
            for (r, (_, b)) in ball.inequalities.iter().enumerate() {
                let worst: Rational = group.iter().map(|&l| &self.support[l as usize - 1][r]).sum();
                if worst <= *b {
                    size.dropped_rows += 1;
                    continue;
                }
                lp.add(row(group, &self.ineq, r), Relation::Le, b.clone());
            }
            for (r, (_, b)) in ball.equalities.iter().enumerate() {
                let coeffs = row(group, &self.eq, r);
                if coeffs.is_empty() && b.is_zero() {
                    continue;
                }
                lp.add(coeffs, Relation::Eq, b.clone());
            }
        }
        if mode == Mode::Steiner {
            for t in 0..dim {
                let mut coeffs = Vec::new();
                for &l in &leaves {
                    let i = l as usize - 1;
                    for (j, v) in subdiffs[i].vertices().iter().enumerate() {
                        if !v[t].is_zero() {
                            coeffs.push((offset[i] + j, v[t].clone()));
                        }
                    }
                }
                lp.add(coeffs, Relation::Eq, Rational::zero());
            }
        }
        size.constraints = lp.num_constraints();
        Ok((lp, size))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parens::{enumerate_rooted, enumerate_unrooted, labels};
    use crate::signed_set::proper_faces;
    use crate::zspace::face_point;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| Rational::from_integer(x)).collect()
    }

    fn rs(v: &[&str]) -> Vec<Rational> {
        v.iter().map(|x| x.parse().unwrap()).collect()
    }

    #[test]
    fn dual_ball_examples() {
        let b = dual_ball(&SpaceDescriptor::Linf(2)).unwrap();
        assert_eq!(b.inequalities.len(), 4);
        assert!(b.equalities.is_empty());
        assert!(b.contains(&rs(&["1/2", "-1/2"])));
        assert!(!b.contains(&rs(&["1", "1/2"])));

        let z = dual_ball(&SpaceDescriptor::ZNorm(2)).unwrap();
        assert_eq!(z.inequalities.len(), 8);
        assert_eq!(z.equalities.len(), 1);
        // Every face vertex lies in the ball and is tight on some inequality.
        for x in proper_faces(3) {
            for v in face_vertices(&x).unwrap() {
                assert!(z.contains(v.coords()));
                assert!(z.inequalities.iter().any(|(a, b)| dot(a, v.coords()) == *b));
            }
        }

        let l1 = dual_ball(&SpaceDescriptor::L1(1)).unwrap();
        assert_eq!(l1.inequalities, vec![(r(&[1]), Rational::one()), (r(&[-1]), Rational::one())]);
        assert!(dual_ball(&SpaceDescriptor::L2(2)).is_err());
    }

    #[test]
    fn subdifferential_examples() {
        let s = subdifferential(&SpaceDescriptor::Linf(2), &r(&[1, 1])).unwrap();
        let mut v = s.vertices().to_vec();
        v.sort();
        assert_eq!(v, vec![r(&[0, 1]), r(&[1, 0])]);
        let s = subdifferential(&SpaceDescriptor::Linf(2), &r(&[1, 0])).unwrap();
        assert_eq!(s.vertices(), &[r(&[1, 0])]);
        let z = SpaceDescriptor::ZNorm(3);
        let s = subdifferential(&z, &rs(&["3/2", "-1/2", "-1/2", "-1/2"])).unwrap();
        assert_eq!(s.vertices().len(), 3);
        for v in s.vertices() {
            assert_eq!(v[0], q(1, 2));
        }
        assert_eq!(subdifferential(&z, &r(&[0, 0, 0, 0])), Err(Error::ZeroVector));
        assert!(subdifferential(&z, &r(&[1, 0, 0, 0])).is_err());
        assert!(subdifferential(&z, &r(&[1, -1, 0])).is_err());
    }

    /// Exact filter oracle: maximize `φ(x)` over `B*` given as inequalities
    /// by LP, then compare the attained value and tightness with `∂x`.
    fn lp_max_over_ball(ball: &DualBallHRep, x: &[Rational]) -> Rational {
        let d = x.len();
        // φ = u − w with u, w ≥ 0.
        let mut lp = LinearProgram::new(2 * d);
        let split = |a: &[Rational]| -> Vec<(usize, Rational)> {
            (0..d).flat_map(|i| [(i, a[i].clone()), (d + i, -&a[i])]).collect()
        };
        for (a, b) in &ball.inequalities {
            lp.add(split(a), Relation::Le, b.clone());
        }
        for (a, b) in &ball.equalities {
            lp.add(split(a), Relation::Eq, b.clone());
        }
        let obj: Vec<Rational> = (0..2 * d).map(|i| if i < d { x[i].clone() } else { -&x[i - d] }).collect();
        lp.max_value(&obj).unwrap().unwrap()
    }

    fn random_point(rng: &mut ChaCha8Rng, space: &SpaceDescriptor) -> Vec<Rational> {
        loop {
            let m = space.ambient();
            let mut x: Vec<Rational> = (0..m).map(|_| Rational::from_integer(rng.gen_range(-3..=3))).collect();
            if let SpaceDescriptor::ZNorm(_) = space {
                let s: Rational = x[..m - 1].iter().sum();
                x[m - 1] = -s;
            }
            if x.iter().any(|c| !c.is_zero()) {
                return x;
            }
        }
    }

    fn hexagon() -> SpaceDescriptor {
        SpaceDescriptor::PolytopeBall(vec![
            r(&[1, 0]),
            r(&[-1, 0]),
            r(&[0, 1]),
            r(&[0, -1]),
            r(&[1, 1]),
            r(&[-1, -1]),
        ])
    }

    #[test]
    fn subdifferentials_are_norming() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let spaces = [
            SpaceDescriptor::ZNorm(3),
            SpaceDescriptor::L1(3),
            SpaceDescriptor::Linf(3),
            hexagon(),
        ];
        for space in &spaces {
            let ball = dual_ball(space).unwrap();
            for _ in 0..60 {
                let x = random_point(&mut rng, space);
                let nx = space.norm(&x).unwrap();
                assert_eq!(lp_max_over_ball(&ball, &x), nx, "{space} {x:?}");
                let s = subdifferential(space, &x).unwrap();
                for v in s.vertices() {
                    assert_eq!(dot(v, &x), nx);
                    assert!(ball.contains(v));
                    assert_eq!(space.dual_norm(v).unwrap(), Rational::one());
                }
            }
        }
    }

    #[test]
    fn polytope_dual_vertices() {
        let h = hexagon();
        let d = h.dual_vertices().unwrap();
        assert_eq!(d.len(), 6);
        assert!(d.contains(&r(&[1, 0])));
        assert!(d.contains(&r(&[1, -1])));
        assert_eq!(h.norm(&r(&[2, 2])).unwrap(), Rational::from_integer(2));
        assert_eq!(h.norm(&r(&[1, -1])).unwrap(), Rational::from_integer(2));
        let cube = SpaceDescriptor::PolytopeBall(sign_vectors(3));
        let mut dv = cube.dual_vertices().unwrap();
        dv.sort();
        let mut want = SpaceDescriptor::Linf(3).dual_vertices().unwrap();
        want.sort();
        assert_eq!(dv, want);
        assert!(SpaceDescriptor::PolytopeBall(vec![r(&[1, 0]), r(&[0, 1])]).validate().is_err());
    }

    #[test]
    fn space_strings() {
        assert_eq!("z:3".parse::<SpaceDescriptor>().unwrap(), SpaceDescriptor::ZNorm(3));
        assert_eq!(
            "l1l2:2:7/2".parse::<SpaceDescriptor>().unwrap(),
            SpaceDescriptor::L1PlusLambdaL2(2, q(7, 2))
        );
        assert!("l1l2:2:-1".parse::<SpaceDescriptor>().is_err());
        assert!("q:3".parse::<SpaceDescriptor>().is_err());
        assert!("z:0".parse::<SpaceDescriptor>().is_err());
        let json = serde_json::to_string(&SpaceDescriptor::L1PlusLambdaL2(2, q(7, 2))).unwrap();
        assert_eq!(json, r#"{"kind":"l1l2","n":2,"lambda":"7/2"}"#);
        let back: SpaceDescriptor = serde_json::from_str(r#"{"kind":"z","n":3}"#).unwrap();
        assert_eq!(back, SpaceDescriptor::ZNorm(3));
        assert!(serde_json::from_str::<SpaceDescriptor>(r#"{"kind":"z","n":0}"#).is_err());
    }

    fn singleton(v: &[i64]) -> DualPolytope {
        DualPolytope::point(r(v))
    }

    #[test]
    fn paren_examples() {
        let ball = dual_ball(&SpaceDescriptor::Linf(2)).unwrap();
        let a = vec![singleton(&[1, 0]), singleton(&[-1, 0]), singleton(&[0, 1]), singleton(&[0, -1])];
        let grouped = ParenTree::parse("1-((3 2) 4)").unwrap();
        assert!(!paren_feasible(&grouped, &a, &ball, Mode::Steiner).unwrap());
        let opposite = ParenTree::parse("1-((2 3) 4)").unwrap();
        assert!(!paren_feasible(&opposite, &a, &ball, Mode::Steiner).unwrap());
        let paired = ParenTree::parse("1-(2 (3 4))").unwrap();
        assert!(paren_feasible(&paired, &a, &ball, Mode::Steiner).unwrap());

        let space = SpaceDescriptor::Linf(2);
        let corners: Vec<DualPolytope> = [[1, 1], [1, -1], [-1, 1], [-1, -1]]
            .iter()
            .map(|c| subdifferential(&space, &r(c)).unwrap())
            .collect();
        for t in enumerate_unrooted(&labels(4)).unwrap() {
            assert!(paren_feasible(&t, &corners, &ball, Mode::Steiner).unwrap(), "{t}");
        }

        let t = ParenTree::parse("1").unwrap();
        assert!(paren_feasible(&t, &[singleton(&[1, 0])], &ball, Mode::Node).unwrap());
        assert!(paren_feasible(&t, &[], &ball, Mode::Node).is_err());
        assert!(paren_feasible(&opposite, &a, &ball, Mode::Node).is_err());
    }

    fn random_subdiffs(rng: &mut ChaCha8Rng, space: &SpaceDescriptor, k: usize) -> Vec<DualPolytope> {
        (0..k).map(|_| subdifferential(space, &random_point(rng, space)).unwrap()).collect()
    }

    #[test]
    fn weak_associativity() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..200 {
            let space = if trial % 2 == 0 { SpaceDescriptor::ZNorm(3) } else { SpaceDescriptor::Linf(3) };
            let ball = dual_ball(&space).unwrap();
            let k = rng.gen_range(2..=4);
            let a = random_subdiffs(&mut rng, &space, k);
            let verdicts: Vec<bool> = enumerate_rooted(&labels(k))
                .unwrap()
                .iter()
                .map(|t| paren_feasible(t, &a, &ball, Mode::Steiner).unwrap())
                .collect();
            // All rooted trees sharing an unrooted contraction agree.
            for (t, v) in enumerate_rooted(&labels(k)).unwrap().iter().zip(&verdicts) {
                if k >= 2 {
                    let u = t.contract_root().unwrap();
                    assert_eq!(paren_feasible(&u, &a, &ball, Mode::Steiner).unwrap(), *v);
                }
            }
        }
    }

    #[test]
    fn node_mode_is_monotone_under_subsets() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let space = SpaceDescriptor::ZNorm(3);
        let ball = dual_ball(&space).unwrap();
        for _ in 0..40 {
            let a = random_subdiffs(&mut rng, &space, 4);
            let all = enumerate_rooted(&labels(4))
                .unwrap()
                .iter()
                .all(|t| paren_feasible(t, &a, &ball, Mode::Node).unwrap());
            if all {
                for sub in [vec![1, 2, 3], vec![1, 3], vec![2, 4, 3]] {
                    for t in enumerate_rooted(&sub).unwrap() {
                        assert!(paren_feasible(&t, &a, &ball, Mode::Node).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn z_face_point_norm_is_one() {
        for x in proper_faces(4) {
            let p = face_point(&x);
            let s = subdifferential(&SpaceDescriptor::ZNorm(3), p.coords()).unwrap();
            assert_eq!(s.vertices().len(), (x.pos().count_ones() * x.neg().count_ones()) as usize);
        }
    }
}
