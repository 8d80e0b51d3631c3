//! Decides whether a star is a Steiner minimal tree, with the centre either a
//! given terminal (node) or a Steiner point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dual_ball, subdifferential, ParenLpBuilder, DualBallHRep, DualPolytope, Mode, SpaceDescriptor};
use crate::parens::{for_each_rooted, for_each_unrooted, labels, ParenTree};
use crate::rational::Rational;
use crate::zspace::{face_of, star_criterion, Quadruple, StarVerdict, ZPoint};

/// A star from `center` to `center + rays[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarInstance {
    pub space: SpaceDescriptor,
    pub center: Vec<Rational>,
    pub rays: Vec<Vec<Rational>>,
}

impl StarInstance {
    /// Star centred at the origin.
    pub fn from_rays(space: SpaceDescriptor, rays: Vec<Vec<Rational>>) -> Result<Self> {
        let center = vec![Rational::zero(); space.ambient()];
        let inst = StarInstance { space, center, rays };
        inst.validate()?;
        Ok(inst)
    }

    /// Star from `center` to each of `points`.
    pub fn from_points(space: SpaceDescriptor, center: Vec<Rational>, points: &[Vec<Rational>]) -> Result<Self> {
        space.check_point(&center)?;
        let mut rays = Vec::with_capacity(points.len());
        for p in points {
            space.check_point(p)?;
            rays.push(p.iter().zip(&center).map(|(a, b)| a - b).collect());
        }
        let inst = StarInstance { space, center, rays };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        self.space.validate()?;
        self.space.check_point(&self.center)?;
        for r in &self.rays {
            self.space.check_point(r)?;
            if r.iter().all(Rational::is_zero) {
                return Err(Error::ZeroVector);
            }
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<Vec<Rational>> {
        self.rays
            .iter()
            .map(|r| r.iter().zip(&self.center).map(|(a, b)| a + b).collect())
            .collect()
    }

    pub fn k(&self) -> usize {
        self.rays.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Canonical key of a parenthesization that fails.
    Tree { key: String },
    /// 0-based indices whose functionals sum outside the dual ball.
    Subset { indices: Vec<usize> },
    /// The functionals do not sum to zero.
    NonzeroTotal,
    Quadruple { a: usize, b: usize, c: usize, d: usize },
    /// Two rays sharing a signed coordinate.
    Pair { i: usize, j: usize },
}

impl From<Quadruple> for Witness {
    fn from(w: Quadruple) -> Self {
        Witness::Quadruple { a: w.a, b: w.b, c: w.c, d: w.d }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub trees_checked: u64,
    pub lps_solved: u64,
    pub subsets_checked: u64,
    /// Trees settled by re-checking the previous tree's solution.
    pub points_reused: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Criterion,
    Lp,
    /// LP over every sub-star of at most four rays (valid for `ZNorm`).
    LpSubsets,
    Differentiable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub is_smt: bool,
    pub witness: Option<Witness>,
    pub method: Method,
    pub stats: Stats,
}

impl Verdict {
    fn new(method: Method) -> Self {
        Verdict { is_smt: true, witness: None, method, stats: Stats::default() }
    }

    fn fail(&mut self, w: Witness) {
        self.is_smt = false;
        self.witness = Some(w);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// The criterion for `ZNorm`, LP otherwise.
    Auto,
    Criterion,
    Lp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub route: Route,
    /// Largest star for which all rooted trees are checked in node mode.
    pub node_tree_limit: usize,
    /// Largest star for which all unrooted trees are checked in Steiner mode.
    pub steiner_tree_limit: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { route: Route::Auto, node_tree_limit: 7, steiner_tree_limit: 8 }
    }
}

fn require_polyhedral(space: &SpaceDescriptor) -> Result<()> {
    match space {
        SpaceDescriptor::L2(_) => Err(Error::UnsupportedSpace(
            "l2 stars are decided by verify_differentiable from their norming functionals".into(),
        )),
        SpaceDescriptor::L1PlusLambdaL2(..) => Err(Error::UnsupportedSpace(
            "l1l2 stars are handled by the l1l2 module (node_degree_bound, steiner_star_check)".into(),
        )),
        _ => Ok(()),
    }
}

/// Face patterns of the rays of a `ZNorm` star.
pub fn z_faces(inst: &StarInstance) -> Result<Vec<crate::signed_set::SignedSet>> {
    inst.rays.iter().map(|r| face_of(&ZPoint::new(r.clone())?)).collect()
}

struct LpContext {
    subdiffs: Vec<DualPolytope>,
    ball: DualBallHRep,
}

impl LpContext {
    fn new(inst: &StarInstance) -> Result<Self> {
        let ball = dual_ball(&inst.space)?;
        let subdiffs = inst.rays.iter().map(|r| subdifferential(&inst.space, r)).collect::<Result<_>>()?;
        Ok(LpContext { subdiffs, ball })
    }

    /// Checks every tree produced by `walk` and records the first failure.
    fn run(
        &self,
        mode: Mode,
        verdict: &mut Verdict,
        walk: impl FnOnce(&mut dyn FnMut(&ParenTree) -> bool) -> Result<bool>,
    ) -> Result<()> {
        let mut err = None;
        let mut failed = None;
        let mut last: Option<Vec<Rational>> = None;
        let stats = &mut verdict.stats;
        let builder = ParenLpBuilder::new(&self.subdiffs, &self.ball)?;
        walk(&mut |t: &ParenTree| {
            stats.trees_checked += 1;
            let lp = match builder.build(t, mode) {
                Ok((lp, _)) => lp,
                Err(e) => {
                    err = Some(e);
                    return false;
                }
            };
            if last.as_ref().is_some_and(|p| lp.satisfies(p)) {
                stats.points_reused += 1;
                return true;
            }
            stats.lps_solved += 1;
            match lp.feasible_point() {
                Some(p) => {
                    last = Some(p);
                    true
                }
                None => {
                    failed = Some(t.canonical_key());
                    false
                }
            }
        })?;
        if let Some(e) = err {
            return Err(e);
        }
        if let Some(key) = failed {
            verdict.fail(Witness::Tree { key });
        }
        Ok(())
    }
}

/// All index subsets of `0..k` with sizes in `sizes`, by size then lexicographically.
fn subsets_by_size(k: usize, sizes: std::ops::RangeInclusive<usize>) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for s in sizes {
        if s > k {
            break;
        }
        let mut pick: Vec<usize> = (0..s).collect();
        loop {
            out.push(pick.clone());
            let mut i = s;
            while i > 0 && pick[i - 1] == k - s + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            pick[i - 1] += 1;
            for j in i..s {
                pick[j] = pick[j - 1] + 1;
            }
        }
    }
    out
}

pub fn verify_node_star(inst: &StarInstance) -> Result<Verdict> {
    verify_node_star_with(inst, &VerifyOptions::default())
}

/// Node version: every parenthesization of the ray subdifferentials is
/// nonempty.
pub fn verify_node_star_with(inst: &StarInstance, opts: &VerifyOptions) -> Result<Verdict> {
    inst.validate()?;
    require_polyhedral(&inst.space)?;
    let is_z = matches!(inst.space, SpaceDescriptor::ZNorm(_));
    let k = inst.k();
    let use_criterion = match opts.route {
        Route::Auto => is_z,
        Route::Criterion => {
            if !is_z {
                return Err(Error::UnsupportedSpace("the combinatorial criterion needs a z space".into()));
            }
            true
        }
        Route::Lp => false,
    };
    if use_criterion {
        let mut v = Verdict::new(Method::Criterion);
        if let StarVerdict::NotSmt(w) = star_criterion(&z_faces(inst)?)? {
            v.fail(w.into());
        }
        return Ok(v);
    }
    if k == 0 {
        return Ok(Verdict::new(Method::Lp));
    }
    let ctx = LpContext::new(inst)?;
    if k <= opts.node_tree_limit {
        let mut v = Verdict::new(Method::Lp);
        ctx.run(Mode::Node, &mut v, |f| for_each_rooted(&labels(k), f))?;
        return Ok(v);
    }
    if !is_z {
        return Err(Error::TooLarge(format!(
            "{k} rays exceed the node tree limit {} for {}",
            opts.node_tree_limit, inst.space
        )));
    }
    // In a z space a star is minimal iff all its sub-stars on at most four
    // rays are.
    let mut v = Verdict::new(Method::LpSubsets);
    for subset in subsets_by_size(k, 2..=4) {
        v.stats.subsets_checked += 1;
        let l: Vec<u32> = subset.iter().map(|&i| i as u32 + 1).collect();
        ctx.run(Mode::Node, &mut v, |f| for_each_rooted(&l, f))?;
        if !v.is_smt {
            break;
        }
    }
    Ok(v)
}

/// Steiner-point version: `o` lies in every parenthesization.
pub fn verify_steiner_star(inst: &StarInstance) -> Result<Verdict> {
    verify_steiner_star_with(inst, &VerifyOptions::default())
}

pub fn verify_steiner_star_with(inst: &StarInstance, opts: &VerifyOptions) -> Result<Verdict> {
    inst.validate()?;
    require_polyhedral(&inst.space)?;
    let k = inst.k();
    if k < 2 {
        return Err(Error::invalid("a Steiner-point star needs at least two rays"));
    }
    if k > opts.steiner_tree_limit {
        return Err(Error::TooLarge(format!(
            "{k} rays exceed the Steiner tree limit {}",
            opts.steiner_tree_limit
        )));
    }
    let ctx = LpContext::new(inst)?;
    let mut v = Verdict::new(Method::Lp);
    ctx.run(Mode::Steiner, &mut v, |f| for_each_unrooted(&labels(k), f))?;
    Ok(v)
}

/// Dual norm in floating point, for the spaces where it has a closed form.
pub fn dual_norm_f64(space: &SpaceDescriptor, phi: &[f64]) -> Result<f64> {
    if phi.len() != space.ambient() {
        return Err(Error::DimensionMismatch { expected: space.ambient(), found: phi.len() });
    }
    Ok(match space {
        SpaceDescriptor::L2(_) => phi.iter().map(|x| x * x).sum::<f64>().sqrt(),
        SpaceDescriptor::ZNorm(_) | SpaceDescriptor::Linf(_) => phi.iter().map(|x| x.abs()).sum(),
        SpaceDescriptor::L1(_) => phi.iter().fold(0.0, |a, x| a.max(x.abs())),
        SpaceDescriptor::PolytopeBall(vs) => vs
            .iter()
            .map(|v| v.iter().zip(phi).map(|(a, b)| a.to_f64() * b).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max),
        SpaceDescriptor::L1PlusLambdaL2(..) => {
            return Err(Error::UnsupportedSpace("no closed-form dual norm for l1l2".into()))
        }
    })
}

/// Tolerance used by [`verify_differentiable`], whose inputs are usually
/// irrational and therefore given in floating point.
pub const DIFFERENTIABLE_TOL: f64 = 1e-9;

/// For a differentiable norm with norming functionals `φ_i`: node version
/// checks every subset sum has dual norm at most 1; Steiner version also
/// needs `Σ φ_i = o`.
pub fn verify_differentiable(space: &SpaceDescriptor, norming: &[Vec<f64>], mode: Mode) -> Result<Verdict> {
    let k = norming.len();
    if k > 20 {
        return Err(Error::TooLarge(format!("{k} functionals; subset enumeration is capped at 20")));
    }
    for (i, phi) in norming.iter().enumerate() {
        let d = dual_norm_f64(space, phi)?;
        if (d - 1.0).abs() > DIFFERENTIABLE_TOL {
            return Err(Error::invalid(format!("functional {i} has dual norm {d}, expected 1")));
        }
    }
    let mut v = Verdict::new(Method::Differentiable);
    let dim = space.ambient();
    if mode == Mode::Steiner {
        let total: Vec<f64> = (0..dim).map(|t| norming.iter().map(|p| p[t]).sum()).collect();
        if total.iter().any(|x| x.abs() > DIFFERENTIABLE_TOL) {
            v.fail(Witness::NonzeroTotal);
            return Ok(v);
        }
    }
    let mut subsets: Vec<u32> = (1..1u32 << k).collect();
    subsets.sort_by_key(|m| (m.count_ones(), std::cmp::Reverse(m.reverse_bits())));
    for mask in subsets {
        v.stats.subsets_checked += 1;
        let sum: Vec<f64> = (0..dim)
            .map(|t| (0..k).filter(|i| mask >> i & 1 == 1).map(|i| norming[i][t]).sum())
            .collect();
        if dual_norm_f64(space, &sum)? > 1.0 + DIFFERENTIABLE_TOL {
            v.fail(Witness::Subset { indices: (0..k).filter(|i| mask >> i & 1 == 1).collect() });
            break;
        }
    }
    Ok(v)
}

/// Unit vectors at pairwise distance exactly 2. Exact for polyhedral spaces
/// and for `L2` (compared through squared norms).
pub fn moore_check(space: &SpaceDescriptor, points: &[Vec<Rational>]) -> Result<bool> {
    let two = Rational::from_integer(2);
    let four = Rational::from_integer(4);
    let l2sq = |x: &[Rational]| -> Rational { x.iter().map(|c| c * c).sum() };
    for p in points {
        space.check_point(p)?;
        let on_sphere = match space {
            SpaceDescriptor::L2(_) => l2sq(p) == Rational::one(),
            SpaceDescriptor::L1PlusLambdaL2(..) => {
                return Err(Error::UnsupportedSpace("moore_check needs an exact norm".into()))
            }
            _ => space.norm(p)? == Rational::one(),
        };
        if !on_sphere {
            return Err(Error::invalid(format!("point {p:?} is not on the unit sphere")));
        }
    }
    for (i, p) in points.iter().enumerate() {
        for r in &points[i + 1..] {
            let d: Vec<Rational> = p.iter().zip(r).map(|(a, b)| a - b).collect();
            let ok = match space {
                SpaceDescriptor::L2(_) => l2sq(&d) == four,
                _ => space.norm(&d)? == two,
            };
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::zspace::{antichain_equilateral, extremal_family, face_point, ExtremalVariant};

    fn r(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| Rational::from_integer(x)).collect()
    }

    fn z_rays(n: usize, fam: &[crate::signed_set::SignedSet]) -> StarInstance {
        StarInstance::from_rays(
            SpaceDescriptor::ZNorm(n),
            fam.iter().map(|x| face_point(x).into_coords()).collect(),
        )
        .unwrap()
    }

    fn lp_opts() -> VerifyOptions {
        VerifyOptions { route: Route::Lp, ..VerifyOptions::default() }
    }

    #[test]
    fn node_examples() {
        let inst = z_rays(3, &extremal_family(3, ExtremalVariant::Low).unwrap());
        let v = verify_node_star(&inst).unwrap();
        assert!(v.is_smt);
        assert_eq!(v.method, Method::Criterion);
        assert!(v.witness.is_none());

        let all: Vec<_> = crate::signed_set::proper_faces(4).into_iter().filter(|x| x.zero_set() == 0).collect();
        let v = verify_node_star(&z_rays(3, &all)).unwrap();
        assert!(!v.is_smt);
        assert!(matches!(v.witness, Some(Witness::Quadruple { .. })));

        let plane = StarInstance::from_rays(SpaceDescriptor::Linf(2), vec![r(&[1, 0]), r(&[0, 1])]).unwrap();
        let v = verify_node_star(&plane).unwrap();
        assert!(!v.is_smt);
        assert_eq!(v.witness, Some(Witness::Tree { key: "(1 2)".into() }));
    }

    #[test]
    fn steiner_examples() {
        let corners = StarInstance::from_rays(
            SpaceDescriptor::Linf(2),
            vec![r(&[1, 1]), r(&[1, -1]), r(&[-1, 1]), r(&[-1, -1])],
        )
        .unwrap();
        assert!(verify_steiner_star(&corners).unwrap().is_smt);
        let cross = StarInstance::from_rays(
            SpaceDescriptor::L1(2),
            vec![r(&[1, 0]), r(&[-1, 0]), r(&[0, 1]), r(&[0, -1])],
        )
        .unwrap();
        assert!(verify_steiner_star(&cross).unwrap().is_smt);
        let anti = StarInstance::from_rays(
            SpaceDescriptor::ZNorm(3),
            antichain_equilateral(3).unwrap().into_iter().map(ZPoint::into_coords).collect(),
        )
        .unwrap();
        let v = verify_steiner_star(&anti).unwrap();
        assert!(v.is_smt);
        assert_eq!(v.stats.trees_checked, 105);
        let cross_inf = StarInstance::from_rays(
            SpaceDescriptor::Linf(2),
            vec![r(&[1, 0]), r(&[-1, 0]), r(&[0, 1]), r(&[0, -1])],
        )
        .unwrap();
        assert!(!verify_steiner_star(&cross_inf).unwrap().is_smt);
    }

    #[test]
    fn l2_spaces_are_routed_explicitly() {
        let inst = StarInstance::from_rays(SpaceDescriptor::L2(2), vec![r(&[1, 0])]).unwrap();
        assert!(matches!(verify_node_star(&inst), Err(Error::UnsupportedSpace(_))));
        let inst = StarInstance::from_rays(SpaceDescriptor::L1PlusLambdaL2(2, q(1, 2)), vec![r(&[1, 0])]).unwrap();
        assert!(matches!(verify_steiner_star(&inst), Err(Error::UnsupportedSpace(_))));
        assert!(StarInstance::from_rays(SpaceDescriptor::L1(2), vec![r(&[0, 0])]).is_err());
    }

    #[test]
    fn criterion_and_lp_agree_on_small_z_stars() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let faces = crate::signed_set::proper_faces(4);
        for _ in 0..150 {
            let k = rng.gen_range(1..=5);
            let fam: Vec<_> = (0..k).map(|_| faces[rng.gen_range(0..faces.len())]).collect();
            let inst = z_rays(3, &fam);
            let a = verify_node_star(&inst).unwrap().is_smt;
            let b = verify_node_star_with(&inst, &lp_opts()).unwrap().is_smt;
            assert_eq!(a, b, "{fam:?}");
        }
    }

    #[test]
    fn differentiable_examples() {
        let h = 3f64.sqrt() / 2.0;
        let tri = vec![vec![1.0, 0.0], vec![-0.5, h], vec![-0.5, -h]];
        let v = verify_differentiable(&SpaceDescriptor::L2(2), &tri, Mode::Steiner).unwrap();
        assert!(v.is_smt);
        let v = verify_differentiable(&SpaceDescriptor::L2(2), &[vec![1.0, 0.0], vec![0.0, 1.0]], Mode::Node).unwrap();
        assert!(!v.is_smt);
        assert_eq!(v.witness, Some(Witness::Subset { indices: vec![0, 1] }));
        let s = 1.0 / 3f64.sqrt();
        let tet = vec![vec![s, s, s], vec![s, -s, -s], vec![-s, s, -s], vec![-s, -s, s]];
        let v = verify_differentiable(&SpaceDescriptor::L2(3), &tet, Mode::Steiner).unwrap();
        assert!(!v.is_smt);
        assert!(matches!(v.witness, Some(Witness::Subset { ref indices }) if indices.len() == 2));
        assert!(verify_differentiable(&SpaceDescriptor::L2(2), &[vec![2.0, 0.0]], Mode::Node).is_err());
    }

    #[test]
    fn moore_examples() {
        let z = SpaceDescriptor::ZNorm(3);
        let anti: Vec<_> = antichain_equilateral(3).unwrap().into_iter().map(ZPoint::into_coords).collect();
        assert!(moore_check(&z, &anti).unwrap());
        let corners: Vec<_> = [[1, 1], [1, -1], [-1, 1], [-1, -1]].iter().map(|c| r(c)).collect();
        assert!(moore_check(&SpaceDescriptor::Linf(2), &corners).unwrap());
        let mixed: Vec<_> = [0b0001u64, 0b0011, 0b1100]
            .iter()
            .map(|&m| crate::zspace::vertex(m, 4).unwrap().into_coords())
            .collect();
        assert!(!moore_check(&z, &mixed).unwrap());
        assert!(moore_check(&z, &[r(&[2, -2, 0, 0])]).is_err());
        assert!(moore_check(&SpaceDescriptor::L2(2), &[r(&[1, 0]), r(&[-1, 0])]).unwrap());
    }

    #[test]
    fn subsets_are_ordered() {
        let s = subsets_by_size(4, 2..=3);
        assert_eq!(s.len(), 6 + 4);
        assert_eq!(s[0], vec![0, 1]);
        assert_eq!(s[6], vec![0, 1, 2]);
    }
}
