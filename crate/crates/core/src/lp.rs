//! Dense two-phase simplex over exact rationals.
//!
//! All variables are non-negative. Feasibility and optimality verdicts are
//! exact. Feasibility checks first try a floating-point phase one to guess a
//! point, which is only accepted after an exact check of every constraint;
//! otherwise the exact simplex decides.

use crate::error::{Error, Result};
use crate::linalg::solve_full_column_rank;
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    /// Sparse `(variable, coefficient)` pairs.
    pub coeffs: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    num_vars: usize,
    constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal { value: Rational, point: Vec<Rational> },
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram { num_vars, constraints: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Adds `Σ coeffs·x (rel) rhs`. Zero coefficients are dropped; duplicate
    /// variable entries are summed.
    pub fn add(&mut self, coeffs: Vec<(usize, Rational)>, relation: Relation, rhs: Rational) {
        let mut dense: Vec<(usize, Rational)> = Vec::with_capacity(coeffs.len());
        let mut sorted = coeffs;
        sorted.sort_by_key(|(j, _)| *j);
        for (j, c) in sorted {
            assert!(j < self.num_vars, "variable {j} out of range");
            match dense.last_mut() {
                Some((k, acc)) if *k == j => *acc += c,
                _ => dense.push((j, c)),
            }
        }
        dense.retain(|(_, c)| !c.is_zero());
        self.constraints.push(Constraint { coeffs: dense, relation, rhs });
    }

    /// Some feasible point, or `None` when the system is infeasible.
    pub fn feasible_point(&self) -> Option<Vec<Rational>> {
        if let Some(x) = self.guessed_point() {
            return Some(x);
        }
        self.exact_feasible_point()
    }

    /// As [`LinearProgram::feasible_point`] without the floating-point guess.
    pub fn exact_feasible_point(&self) -> Option<Vec<Rational>> {
        let mut tab = Tableau::build(self)?;
        if !tab.phase_one() {
            return None;
        }
        Some(tab.point())
    }

    /// Whether `x ≥ 0` satisfies every constraint exactly.
    pub fn satisfies(&self, x: &[Rational]) -> bool {
        if x.len() != self.num_vars || x.iter().any(Rational::is_negative) {
            return false;
        }
        self.constraints.iter().all(|c| {
            let lhs: Rational = c.coeffs.iter().map(|(j, a)| a * &x[*j]).sum();
            match c.relation {
                Relation::Le => lhs <= c.rhs,
                Relation::Ge => lhs >= c.rhs,
                Relation::Eq => lhs == c.rhs,
            }
        })
    }

    /// A point found by a floating-point phase one and certified exactly:
    /// first by rounding to nearby small-denominator rationals, then by
    /// re-solving the final basis in exact arithmetic.
    fn guessed_point(&self) -> Option<Vec<Rational>> {
        let rows = normalize(self)?;
        let (x, basis) = float_phase_one(self.num_vars, &rows)?;
        let rounded: Option<Vec<Rational>> =
            x.iter().map(|&v| Rational::approximate(v, 1 << 20, 1e-9)).collect();
        if let Some(r) = rounded {
            if self.satisfies(&r) {
                return Some(r);
            }
        }
        // Exact values of the basic columns (structural and slack).
        let n = self.num_vars;
        let mut slack_of_row = vec![usize::MAX; rows.len()];
        let mut next = n;
        for (i, (_, rel, _)) in rows.iter().enumerate() {
            if *rel != Relation::Eq {
                slack_of_row[i] = next;
                next += 1;
            }
        }
        let cols: Vec<usize> = basis.into_iter().filter(|&b| b < next).collect();
        let a: Vec<Vec<Rational>> = rows
            .iter()
            .enumerate()
            .map(|(i, (coeffs, rel, _))| {
                cols.iter()
                    .map(|&c| {
                        if c < n {
                            coeffs.iter().find(|(j, _)| *j == c).map_or_else(Rational::zero, |(_, v)| v.clone())
                        } else if c == slack_of_row[i] {
                            Rational::from_integer(if *rel == Relation::Le { 1 } else { -1 })
                        } else {
                            Rational::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        let b: Vec<Rational> = rows.iter().map(|(_, _, r)| r.clone()).collect();
        let vals = solve_full_column_rank(&a, &b)?;
        let mut point = vec![Rational::zero(); n];
        for (&c, v) in cols.iter().zip(vals) {
            if c < n {
                point[c] = v;
            }
        }
        self.satisfies(&point).then_some(point)
    }

    pub fn is_feasible(&self) -> bool {
        self.feasible_point().is_some()
    }

    /// Minimizes `objective · x`.
    pub fn minimize(&self, objective: &[Rational]) -> LpOutcome {
        assert_eq!(objective.len(), self.num_vars);
        let Some(mut tab) = Tableau::build(self) else {
            return LpOutcome::Infeasible;
        };
        if !tab.phase_one() {
            return LpOutcome::Infeasible;
        }
        match tab.phase_two(objective) {
            Some(value) => LpOutcome::Optimal { value, point: tab.point() },
            None => LpOutcome::Unbounded,
        }
    }

    pub fn maximize(&self, objective: &[Rational]) -> LpOutcome {
        let neg: Vec<Rational> = objective.iter().map(|c| -c).collect();
        match self.minimize(&neg) {
            LpOutcome::Optimal { value, point } => LpOutcome::Optimal { value: -value, point },
            other => other,
        }
    }

    /// Optimal value of `maximize`, with unboundedness as an error.
    pub fn max_value(&self, objective: &[Rational]) -> Result<Option<Rational>> {
        match self.maximize(objective) {
            LpOutcome::Infeasible => Ok(None),
            LpOutcome::Unbounded => Err(Error::Unbounded),
            LpOutcome::Optimal { value, .. } => Ok(Some(value)),
        }
    }
}

type Row = (Vec<(usize, Rational)>, Relation, Rational);

/// Constraints with non-negative right-hand sides; `None` when a constraint
/// without variables is violated.
fn normalize(lp: &LinearProgram) -> Option<Vec<Row>> {
    let mut normalized = Vec::with_capacity(lp.constraints.len());
    for c in &lp.constraints {
        if c.coeffs.is_empty() {
            let ok = match c.relation {
                Relation::Le => !c.rhs.is_negative(),
                Relation::Ge => !c.rhs.is_positive(),
                Relation::Eq => c.rhs.is_zero(),
            };
            if !ok {
                return None;
            }
            continue;
        }
        if c.rhs.is_negative() {
            let coeffs = c.coeffs.iter().map(|(j, a)| (*j, -a)).collect();
            let rel = match c.relation {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
            normalized.push((coeffs, rel, -&c.rhs));
        } else {
            normalized.push((c.coeffs.clone(), c.relation, c.rhs.clone()));
        }
    }
    Some(normalized)
}

/// Phase one in floating point with the same column layout as [`Tableau`].
/// Returns the structural values and the final basis when the artificial sum
/// reaches (numerically) zero.
fn float_phase_one(n: usize, rows: &[Row]) -> Option<(Vec<f64>, Vec<usize>)> {
    const EPS: f64 = 1e-10;
    let m = rows.len();
    let slacks = rows.iter().filter(|(_, r, _)| *r != Relation::Eq).count();
    let first_art = n + slacks;
    let cols = first_art + rows.iter().filter(|(_, r, _)| *r != Relation::Le).count();
    let w = cols + 1;
    let mut t = vec![0.0f64; m * w];
    let mut basis = Vec::with_capacity(m);
    let (mut ns, mut na) = (n, first_art);
    for (i, (coeffs, rel, rhs)) in rows.iter().enumerate() {
        let row = &mut t[i * w..(i + 1) * w];
        for (j, a) in coeffs {
            row[*j] = a.to_f64();
        }
        row[cols] = rhs.to_f64();
        match rel {
            Relation::Le => {
                row[ns] = 1.0;
                basis.push(ns);
                ns += 1;
            }
            Relation::Ge => {
                row[ns] = -1.0;
                ns += 1;
                row[na] = 1.0;
                basis.push(na);
                na += 1;
            }
            Relation::Eq => {
                row[na] = 1.0;
                basis.push(na);
                na += 1;
            }
        }
    }
    let mut cost = vec![0.0f64; w];
    for c in cost[first_art..cols].iter_mut() {
        *c = 1.0;
    }
    for i in 0..m {
        if basis[i] >= first_art {
            for k in 0..w {
                cost[k] -= t[i * w + k];
            }
        }
    }
    let max_iter = 20 * (m + cols) + 100;
    let mut stalled = 0;
    for _ in 0..max_iter {
        if cost[cols].abs() <= 1e-9 {
            break;
        }
        let entering = if stalled >= 8 {
            (0..cols).find(|&j| cost[j] < -EPS)
        } else {
            (0..cols).filter(|&j| cost[j] < -EPS).min_by(|&a, &b| cost[a].total_cmp(&cost[b]))
        };
        let Some(j) = entering else { break };
        let mut best: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = t[i * w + j];
            if a > EPS {
                let ratio = t[i * w + cols] / a;
                if best.map_or(true, |(bi, br)| ratio < br - EPS || (ratio <= br + EPS && basis[i] < basis[bi])) {
                    best = Some((i, ratio));
                }
            }
        }
        let (r, ratio) = best?;
        stalled = if ratio.abs() <= EPS { stalled + 1 } else { 0 };
        let inv = 1.0 / t[r * w + j];
        for k in 0..w {
            t[r * w + k] *= inv;
        }
        let (before, rest) = t.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_mut(w).chain(after.chunks_mut(w)) {
            let f = row[j];
            if f != 0.0 {
                for k in 0..w {
                    row[k] -= f * prow[k];
                }
            }
        }
        let f = cost[j];
        for k in 0..w {
            cost[k] -= f * prow[k];
        }
        basis[r] = j;
    }
    if cost[cols].abs() > 1e-7 {
        return None;
    }
    let mut x = vec![0.0; n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            x[b] = t[i * w + cols].max(0.0);
        }
    }
    Some((x, basis))
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    /// Reduced-cost row; the last entry holds minus the objective value.
    cost: Vec<Rational>,
    basis: Vec<usize>,
    num_vars: usize,
    /// First artificial column; columns at or beyond it are artificial.
    first_artificial: usize,
    num_cols: usize,
}

impl Tableau {
    /// `None` when a constraint with no variables is violated.
    fn build(lp: &LinearProgram) -> Option<Self> {
        let normalized = normalize(lp)?;
        let n = lp.num_vars;
        let slacks = normalized.iter().filter(|(_, r, _)| *r != Relation::Eq).count();
        let artificials = normalized.iter().filter(|(_, r, _)| *r != Relation::Le).count();
        let first_artificial = n + slacks;
        let num_cols = first_artificial + artificials;
        let mut rows = Vec::with_capacity(normalized.len());
        let mut basis = Vec::with_capacity(normalized.len());
        let mut next_slack = n;
        let mut next_art = first_artificial;
        for (coeffs, rel, rhs) in normalized {
            let mut row = vec![Rational::zero(); num_cols + 1];
            for (j, a) in coeffs {
                row[j] = a;
            }
            row[num_cols] = rhs;
            match rel {
                Relation::Le => {
                    row[next_slack] = Rational::one();
                    basis.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -Rational::one();
                    next_slack += 1;
                    row[next_art] = Rational::one();
                    basis.push(next_art);
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = Rational::one();
                    basis.push(next_art);
                    next_art += 1;
                }
            }
            rows.push(row);
        }
        Some(Tableau {
            rows,
            cost: vec![Rational::zero(); num_cols + 1],
            basis,
            num_vars: n,
            first_artificial,
            num_cols,
        })
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let width = self.num_cols + 1;
        let inv = self.rows[r][j].recip();
        let mut nonzero = Vec::new();
        for k in 0..width {
            if !self.rows[r][k].is_zero() {
                let v = &self.rows[r][k] * &inv;
                self.rows[r][k] = v;
                nonzero.push(k);
            }
        }
        let pivot_row = std::mem::take(&mut self.rows[r]);
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[j].is_zero() {
                continue;
            }
            let factor = row[j].clone();
            for &k in &nonzero {
                let delta = &factor * &pivot_row[k];
                row[k] -= delta;
            }
        }
        if !self.cost[j].is_zero() {
            let factor = self.cost[j].clone();
            for &k in &nonzero {
                let delta = &factor * &pivot_row[k];
                self.cost[k] -= delta;
            }
        }
        self.rows[r] = pivot_row;
        self.basis[r] = j;
    }

    /// Simplex iterations over columns `< limit`. Entering columns follow
    /// Dantzig's rule; after `DEGENERATE_LIMIT` pivots without progress the
    /// rule switches to Bland's until the objective strictly improves, which
    /// rules out cycling. Returns false when unbounded.
    fn iterate(&mut self, limit: usize, stop_at_zero: bool) -> bool {
        const DEGENERATE_LIMIT: usize = 8;
        let rhs = self.num_cols;
        let mut stalled = 0;
        loop {
            if stop_at_zero && self.cost[rhs].is_zero() {
                return true;
            }
            let bland = stalled >= DEGENERATE_LIMIT;
            let entering = if bland {
                (0..limit).find(|&j| self.cost[j].is_negative())
            } else {
                (0..limit)
                    .filter(|&j| self.cost[j].is_negative())
                    .min_by(|&a, &b| self.cost[a].cmp(&self.cost[b]).then(a.cmp(&b)))
            };
            let Some(j) = entering else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[j].is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / &row[j];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((i, ratio)) => {
                    if ratio.is_zero() {
                        stalled += 1;
                    } else {
                        stalled = 0;
                    }
                    self.pivot(i, j)
                }
                None => return false,
            }
        }
    }

    /// Minimizes the sum of artificials; true when it reaches zero.
    fn phase_one(&mut self) -> bool {
        let rhs = self.num_cols;
        if self.first_artificial == self.num_cols {
            return true;
        }
        for c in self.cost.iter_mut() {
            *c = Rational::zero();
        }
        for j in self.first_artificial..self.num_cols {
            self.cost[j] = Rational::one();
        }
        for (i, row) in self.rows.iter().enumerate() {
            if self.basis[i] >= self.first_artificial {
                for k in 0..=rhs {
                    if !row[k].is_zero() {
                        self.cost[k] -= &row[k];
                    }
                }
            }
        }
        // Phase one is bounded below by zero so iterate cannot report unbounded.
        self.iterate(self.num_cols, true);
        if !self.cost[rhs].is_zero() {
            return false;
        }
        self.drive_out_artificials();
        true
    }

    fn drive_out_artificials(&mut self) {
        let mut r = 0;
        while r < self.rows.len() {
            if self.basis[r] >= self.first_artificial {
                match (0..self.first_artificial).find(|&j| !self.rows[r][j].is_zero()) {
                    Some(j) => {
                        self.pivot(r, j);
                        r += 1;
                    }
                    None => {
                        // Redundant row.
                        self.rows.remove(r);
                        self.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
    }

    /// Returns the optimal value, or `None` when unbounded.
    fn phase_two(&mut self, objective: &[Rational]) -> Option<Rational> {
        let rhs = self.num_cols;
        for c in self.cost.iter_mut() {
            *c = Rational::zero();
        }
        for (j, c) in objective.iter().enumerate() {
            self.cost[j] = c.clone();
        }
        for (i, row) in self.rows.iter().enumerate() {
            let b = self.basis[i];
            if b < self.num_vars && !objective[b].is_zero() {
                let cb = objective[b].clone();
                for k in 0..=rhs {
                    if !row[k].is_zero() {
                        let delta = &cb * &row[k];
                        self.cost[k] -= delta;
                    }
                }
            }
        }
        if !self.iterate(self.first_artificial, false) {
            return None;
        }
        Some(-self.cost[rhs].clone())
    }

    fn point(&self) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); self.num_vars];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.num_vars {
                x[b] = self.rows[i][self.num_cols].clone();
            }
        }
        x
    }
}
