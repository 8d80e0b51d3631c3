//! Brute-force Steiner minimal trees for a handful of terminals: every full
//! Steiner topology is minimized numerically and the shortest tree wins.
//! Serves as an independent referee for the verifier.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SpaceDescriptor;
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::parens::{enumerate_unrooted, labels, ParenTree};
use crate::rational::Rational;

/// Relative gap below which a tree is not considered shorter than another.
pub const DECISION_MARGIN: f64 = 1e-6;
/// Improvement a refuted star must show.
pub const STRICT_MARGIN: f64 = 1e-8;
/// Relative improvement over the last [`CONVERGENCE_WINDOW`] iterations that
/// counts as converged.
pub const CONVERGENCE_TOL: f64 = 1e-10;
pub const CONVERGENCE_WINDOW: usize = 100;
/// Distance at which a Steiner point is reported as merged with a neighbour.
pub const DEGENERATE_DIST: f64 = 1e-9;

pub const SEED_ENV: &str = "STEINER_LOCAL_SEED";

/// Seed from `STEINER_LOCAL_SEED`, or `default` when unset or unparsable.
pub fn seed_from_env(default: u64) -> u64 {
    std::env::var(SEED_ENV).ok().and_then(|s| s.trim().parse().ok()).unwrap_or(default)
}

/// An abstract Steiner tree on the terminal indices `1..=k`.
pub type Topology = ParenTree;

/// All full Steiner topologies on `k` terminals (`a_{k−1}` of them).
pub fn enumerate_topologies(k: usize) -> Result<Vec<Topology>> {
    if !(2..=7).contains(&k) {
        return Err(Error::invalid(format!("enumerate_topologies needs 2 <= k <= 7, got {k}")));
    }
    enumerate_unrooted(&labels(k))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolvedTree {
    /// Canonical key of the topology.
    pub topology: String,
    /// Positions of the internal vertices, in vertex order.
    pub steiner_positions: Vec<Vec<f64>>,
    pub length: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Steiner points (0-based, in the order above) within
    /// [`DEGENERATE_DIST`] of a terminal or of another Steiner point.
    pub degenerate: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct OracleOptions {
    pub restarts: usize,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { restarts: 5, max_iterations: 20_000, seed: seed_from_env(0x5eed) }
    }
}

/// Norm and subgradient with the dual vertices of a polytope ball cached.
struct NormEval<'a> {
    space: &'a SpaceDescriptor,
    duals: Vec<Vec<f64>>,
}

impl<'a> NormEval<'a> {
    fn new(space: &'a SpaceDescriptor) -> Self {
        let duals = match space {
            SpaceDescriptor::PolytopeBall(_) => space.dual_vertices_f64(),
            _ => Vec::new(),
        };
        NormEval { space, duals }
    }

    fn norm(&self, x: &[f64]) -> f64 {
        match self.space {
            SpaceDescriptor::PolytopeBall(_) => self
                .duals
                .iter()
                .map(|d| d.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max),
            s => s.norm_f64(x),
        }
    }

    fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        self.space.subgradient_f64(x, &self.duals)
    }
}

/// Fixed-topology length functional over the internal vertex positions.
struct LengthFn<'a> {
    eval: NormEval<'a>,
    /// Vertex index to terminal index, or `None` for an internal vertex.
    terminal_of: Vec<Option<usize>>,
    /// Vertex index to internal-variable index.
    var_of: Vec<Option<usize>>,
    edges: Vec<(usize, usize)>,
    terminals: &'a [Vec<f64>],
    dim: usize,
    num_vars: usize,
}

impl<'a> LengthFn<'a> {
    fn new(topo: &Topology, terminals: &'a [Vec<f64>], space: &'a SpaceDescriptor) -> Result<Self> {
        let leaves = topo.leaves();
        if leaves.len() != terminals.len() || leaves != labels(terminals.len()) {
            return Err(Error::invalid(format!(
                "topology has {} leaves but {} terminals were given",
                leaves.len(),
                terminals.len()
            )));
        }
        let dim = space.ambient();
        for t in terminals {
            if t.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: t.len() });
            }
        }
        let nv = topo.num_vertices();
        let mut terminal_of = vec![None; nv];
        let mut var_of = vec![None; nv];
        let mut num_vars = 0;
        for v in 0..nv {
            match topo.vertex_label(v) {
                Some(l) => terminal_of[v] = Some(l as usize - 1),
                None => {
                    var_of[v] = Some(num_vars);
                    num_vars += 1;
                }
            }
        }
        Ok(LengthFn {
            eval: NormEval::new(space),
            terminal_of,
            var_of,
            edges: topo.edges(),
            terminals,
            dim,
            num_vars,
        })
    }

    fn pos<'b>(&'b self, v: usize, x: &'b [f64]) -> &'b [f64] {
        match self.var_of[v] {
            Some(i) => &x[i * self.dim..(i + 1) * self.dim],
            None => &self.terminals[self.terminal_of[v].expect("terminal")],
        }
    }

    fn diff(&self, u: usize, v: usize, x: &[f64]) -> Vec<f64> {
        self.pos(u, x).iter().zip(self.pos(v, x)).map(|(a, b)| a - b).collect()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.edges.iter().map(|&(u, v)| self.eval.norm(&self.diff(u, v, x))).sum()
    }

    fn value_and_subgradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let mut g = vec![0.0; x.len()];
        let mut f = 0.0;
        for &(u, v) in &self.edges {
            let d = self.diff(u, v, x);
            f += self.eval.norm(&d);
            let s = self.eval.subgradient(&d);
            if let Some(i) = self.var_of[u] {
                for (gi, si) in g[i * self.dim..(i + 1) * self.dim].iter_mut().zip(&s) {
                    *gi += si;
                }
            }
            if let Some(j) = self.var_of[v] {
                for (gj, sj) in g[j * self.dim..(j + 1) * self.dim].iter_mut().zip(&s) {
                    *gj -= sj;
                }
            }
        }
        (f, g)
    }

    /// Each internal vertex at a random convex combination of the terminals,
    /// which keeps it in the zero-sum hyperplane for `ZNorm`.
    fn random_start(&self, rng: &mut impl Rng) -> Vec<f64> {
        let mut x = vec![0.0; self.num_vars * self.dim];
        for i in 0..self.num_vars {
            let w: Vec<f64> = self.terminals.iter().map(|_| rng.gen::<f64>().powi(3)).collect();
            let total: f64 = w.iter().sum::<f64>().max(f64::MIN_POSITIVE);
            for (wt, t) in w.iter().zip(self.terminals) {
                for c in 0..self.dim {
                    x[i * self.dim + c] += wt / total * t[c];
                }
            }
        }
        x
    }

    fn centroid_start(&self) -> Vec<f64> {
        let k = self.terminals.len() as f64;
        let mut c = vec![0.0; self.dim];
        for t in self.terminals {
            for (ci, ti) in c.iter_mut().zip(t) {
                *ci += ti / k;
            }
        }
        c.repeat(self.num_vars)
    }

    /// Level-target Polyak steps: aim at `best − δ`, halving `δ` and
    /// returning to the best point when progress stalls.
    fn minimize_from(&self, mut x: Vec<f64>, max_iterations: usize) -> (Vec<f64>, f64, usize, bool) {
        let (mut best_f, _) = self.value_and_subgradient(&x);
        let mut best_x = x.clone();
        let scale = best_f.max(1e-3);
        let mut delta = 0.1 * scale;
        let mut history = vec![best_f];
        let mut stall = 0usize;
        let patience = 30 + 10 * x.len();
        let mut iters = 0;
        while iters < max_iterations && delta > 1e-13 * scale {
            iters += 1;
            let (f, g) = self.value_and_subgradient(&x);
            if f < best_f - 0.5 * delta {
                stall = 0;
            } else {
                stall += 1;
            }
            if f < best_f {
                best_f = f;
                best_x.clone_from(&x);
            }
            history.push(best_f);
            let g2: f64 = g.iter().map(|v| v * v).sum();
            if g2 == 0.0 {
                break;
            }
            if stall > patience {
                delta *= 0.5;
                stall = 0;
                x.clone_from(&best_x);
                continue;
            }
            let step = (f - (best_f - delta)) / g2;
            for (xi, gi) in x.iter_mut().zip(&g) {
                *xi -= step * gi;
            }
        }
        let converged = match history.len().checked_sub(CONVERGENCE_WINDOW + 1) {
            Some(i) => (history[i] - best_f) <= CONVERGENCE_TOL * best_f.max(f64::MIN_POSITIVE),
            None => true,
        };
        (best_x, best_f, iters, converged)
    }
}

fn solved(lf: &LengthFn, topo: &Topology, x: Vec<f64>, iterations: usize, converged: bool) -> SolvedTree {
    let positions: Vec<Vec<f64>> = x.chunks(lf.dim.max(1)).take(lf.num_vars).map(<[f64]>::to_vec).collect();
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    let degenerate = (0..positions.len())
        .filter(|&i| {
            lf.terminals.iter().any(|t| dist(t, &positions[i]) < DEGENERATE_DIST)
                || (0..positions.len()).any(|j| j != i && dist(&positions[j], &positions[i]) < DEGENERATE_DIST)
        })
        .collect();
    SolvedTree {
        topology: topo.canonical_key(),
        length: lf.value(&x),
        steiner_positions: positions,
        converged,
        iterations,
        degenerate,
    }
}

/// Shortest embedding of `topo` found from the centroid start and
/// `opts.restarts` random starts.
pub fn minimize_topology(
    topo: &Topology,
    terminals: &[Vec<f64>],
    space: &SpaceDescriptor,
    opts: &OracleOptions,
) -> Result<SolvedTree> {
    space.validate()?;
    let lf = LengthFn::new(topo, terminals, space)?;
    if lf.num_vars == 0 {
        return Ok(solved(&lf, topo, Vec::new(), 0, true));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ hash_key(&topo.canonical_key()));
    let mut best: Option<(Vec<f64>, f64, usize, bool)> = None;
    let mut total_iters = 0;
    for r in 0..=opts.restarts {
        let start = if r == 0 { lf.centroid_start() } else { lf.random_start(&mut rng) };
        let (x, f, it, conv) = lf.minimize_from(start, opts.max_iterations);
        total_iters += it;
        if best.as_ref().is_none_or(|b| f < b.1) {
            best = Some((x, f, it, conv));
        }
    }
    let (x, _, _, conv) = best.expect("at least one start");
    Ok(solved(&lf, topo, x, total_iters, conv))
}

fn hash_key(s: &str) -> u64 {
    // FNV-1a, so restarts differ across topologies yet stay reproducible.
    s.bytes().fold(0xcbf29ce484222325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100000001b3))
}

/// Length of a Steiner minimal tree on `terminals`, with the tree attaining it.
pub fn smt_length(terminals: &[Vec<f64>], space: &SpaceDescriptor, opts: &OracleOptions) -> Result<(f64, SolvedTree)> {
    let k = terminals.len();
    let mut best: Option<SolvedTree> = None;
    for topo in enumerate_topologies(k)? {
        let t = minimize_topology(&topo, terminals, space, opts)?;
        if best.as_ref().is_none_or(|b| t.length < b.length) {
            best = Some(t);
        }
    }
    let best = best.expect("at least one topology");
    Ok((best.length, best))
}

/// Total length of the star joining `center` to every point.
pub fn star_length(center: &[f64], points: &[Vec<f64>], space: &SpaceDescriptor) -> f64 {
    let eval = NormEval::new(space);
    points
        .iter()
        .map(|p| eval.norm(&p.iter().zip(center).map(|(a, b)| a - b).collect::<Vec<_>>()))
        .sum()
}

/// How the oracle's best tree compares with the star.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StarComparison {
    pub star_length: f64,
    pub smt_length: f64,
    /// `smt_length` is not below the star length by more than the decision margin.
    pub star_is_smt: bool,
    pub best: SolvedTree,
}

/// Runs the oracle on `{center} ∪ points` and compares with the star.
pub fn compare_with_star(
    space: &SpaceDescriptor,
    center: &[Rational],
    points: &[Vec<Rational>],
    opts: &OracleOptions,
) -> Result<StarComparison> {
    let to_f = |v: &[Rational]| v.iter().map(Rational::to_f64).collect::<Vec<f64>>();
    let c = to_f(center);
    let pts: Vec<Vec<f64>> = points.iter().map(|p| to_f(p)).collect();
    let star = star_length(&c, &pts, space);
    let mut terminals = vec![c];
    terminals.extend(pts);
    let (len, best) = smt_length(&terminals, space, opts)?;
    Ok(StarComparison {
        star_length: star,
        smt_length: len,
        star_is_smt: len >= star * (1.0 - DECISION_MARGIN),
        best,
    })
}

/// Exact minimum length of a fixed topology in a polyhedral space, as a
/// linear program over split coordinates.
pub fn minimize_topology_exact(topo: &Topology, terminals: &[Vec<Rational>], space: &SpaceDescriptor) -> Result<Rational> {
    space.validate()?;
    let duals = space.dual_vertices()?;
    let dim = space.ambient();
    let leaves = topo.leaves();
    if leaves != labels(terminals.len()) {
        return Err(Error::invalid("topology leaves do not match the terminals"));
    }
    for t in terminals {
        space.check_point(t)?;
    }
    let nv = topo.num_vertices();
    let mut var_of = vec![None; nv];
    let mut s = 0;
    for (v, slot) in var_of.iter_mut().enumerate() {
        if topo.vertex_label(v).is_none() {
            *slot = Some(s);
            s += 1;
        }
    }
    let edges = topo.edges();
    // Variables: x⁺ and x⁻ for each Steiner coordinate, then one bound per edge.
    let nx = s * dim;
    let nvars = 2 * nx + edges.len();
    let mut lp = LinearProgram::new(nvars);
    let coord = |i: usize, c: usize, sign: i64| -> Vec<(usize, Rational)> {
        let j = i * dim + c;
        vec![(j, Rational::from_integer(sign)), (nx + j, Rational::from_integer(-sign))]
    };
    for (e, &(u, v)) in edges.iter().enumerate() {
        for d in &duals {
            // ⟨d, x_u − x_v⟩ ≤ t_e with terminal positions moved to the right.
            let mut coeffs = vec![(2 * nx + e, -Rational::one())];
            let mut rhs = Rational::zero();
            for (w, sign) in [(u, 1i64), (v, -1)] {
                match var_of[w] {
                    Some(i) => {
                        for (c, dc) in d.iter().enumerate() {
                            coeffs.extend(coord(i, c, sign).into_iter().map(|(j, a)| (j, a * dc)));
                        }
                    }
                    None => {
                        let t = &terminals[topo.vertex_label(w).expect("leaf") as usize - 1];
                        let dt: Rational = d.iter().zip(t).map(|(a, b)| a * b).sum();
                        rhs -= dt * Rational::from_integer(sign);
                    }
                }
            }
            lp.add(coeffs, Relation::Le, rhs);
        }
    }
    if matches!(space, SpaceDescriptor::ZNorm(_)) {
        for i in 0..s {
            let coeffs = (0..dim).flat_map(|c| coord(i, c, 1)).collect();
            lp.add(coeffs, Relation::Eq, Rational::zero());
        }
    }
    let mut objective = vec![Rational::zero(); nvars];
    for e in 0..edges.len() {
        objective[2 * nx + e] = Rational::one();
    }
    match lp.minimize(&objective) {
        LpOutcome::Optimal { value, .. } => Ok(value),
        other => Err(Error::invalid(format!("length program ended as {other:?}"))),
    }
}
