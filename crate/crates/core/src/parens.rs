//! Parenthesizations of reduced Minkowski sums up to equivalence, as rooted
//! and unrooted abstract Steiner trees.
//!
//! Both kinds are stored as a parent array hanging from a distinguished leaf
//! (vertex 0). For a rooted tree on `I` that leaf carries the label `0`; an
//! unrooted tree on `I` is stored hanging from its smallest label `min I`,
//! which makes the stored form canonical up to the order of children.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use crate::error::{Error, Result};

const NO_PARENT: usize = usize::MAX;
const INTERNAL: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TreeKind {
    Rooted,
    Unrooted,
}

/// Canonical form of a subtree: children sorted, subtrees before leaves.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Key {
    Node(Vec<Key>),
    Leaf(u32),
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Key::Leaf(l) => write!(f, "{l}"),
            Key::Node(children) => {
                f.write_str("(")?;
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct ParenTree {
    kind: TreeKind,
    parent: Vec<usize>,
    label: Vec<u32>,
}

impl ParenTree {
    /// The rooted tree on `{i}`: the single edge `0 – i`.
    pub fn rooted_leaf(i: u32) -> Result<Self> {
        if i == 0 || i == INTERNAL {
            return Err(Error::invalid(format!("leaf label {i} is reserved")));
        }
        Ok(ParenTree { kind: TreeKind::Rooted, parent: vec![NO_PARENT, 0], label: vec![0, i] })
    }

    fn unrooted_edge(a: u32, b: u32) -> Self {
        ParenTree { kind: TreeKind::Unrooted, parent: vec![NO_PARENT, 0], label: vec![a, b] }
    }

    pub fn kind(&self) -> TreeKind {
        self.kind
    }

    pub fn is_rooted(&self) -> bool {
        self.kind == TreeKind::Rooted
    }

    /// Leaf labels that stand for operands (excludes the root `0`), ascending.
    pub fn leaves(&self) -> Vec<u32> {
        let mut out: Vec<u32> = self
            .label
            .iter()
            .enumerate()
            .filter(|&(v, &l)| l != INTERNAL && (v != 0 || !self.is_rooted()))
            .map(|(_, &l)| l)
            .collect();
        out.sort_unstable();
        out
    }

    pub fn num_internal(&self) -> usize {
        self.label.iter().filter(|&&l| l == INTERNAL).count()
    }

    pub fn num_vertices(&self) -> usize {
        self.parent.len()
    }

    /// Undirected edges as `(parent, child)` vertex pairs.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (1..self.parent.len()).map(|v| (self.parent[v], v)).collect()
    }

    /// Label of vertex `v`, or `None` for an internal vertex.
    pub fn vertex_label(&self, v: usize) -> Option<u32> {
        let l = self.label[v];
        (l != INTERNAL).then_some(l)
    }

    fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.parent.len()];
        for v in 1..self.parent.len() {
            ch[self.parent[v]].push(v);
        }
        ch
    }

    fn subtree_key(&self, v: usize, ch: &[Vec<usize>]) -> Key {
        if self.label[v] != INTERNAL {
            return Key::Leaf(self.label[v]);
        }
        let mut keys: Vec<Key> = ch[v].iter().map(|&c| self.subtree_key(c, ch)).collect();
        keys.sort();
        Key::Node(keys)
    }

    /// Key of the part hanging below the distinguished leaf.
    pub fn key(&self) -> Key {
        let ch = self.children();
        self.subtree_key(ch[0][0], &ch)
    }

    /// `((1 2) 3)` for rooted trees; `1-((2 3) 4)` for unrooted trees, where
    /// the prefix is the smallest leaf.
    pub fn canonical_key(&self) -> String {
        match self.kind {
            TreeKind::Rooted => self.key().to_string(),
            TreeKind::Unrooted => format!("{}-{}", self.label[0], self.key()),
        }
    }

    /// Label sets below every internal vertex, in post-order with children
    /// visited by key. For a rooted tree these are the supports of all
    /// subexpressions with at least two operands, ending with the whole set.
    pub fn clusters(&self) -> Vec<Vec<u32>> {
        let ch = self.children();
        let mut out = Vec::new();
        self.collect_clusters(ch[0][0], &ch, &mut out);
        out
    }

    fn collect_clusters(&self, v: usize, ch: &[Vec<usize>], out: &mut Vec<Vec<u32>>) -> Vec<u32> {
        if self.label[v] != INTERNAL {
            return vec![self.label[v]];
        }
        let mut kids: Vec<(Key, usize)> = ch[v].iter().map(|&c| (self.subtree_key(c, ch), c)).collect();
        kids.sort();
        let mut all = Vec::new();
        for (_, c) in kids {
            all.extend(self.collect_clusters(c, ch, out));
        }
        all.sort_unstable();
        out.push(all.clone());
        all
    }

    /// For an unrooted tree, one side of every edge joining two internal
    /// vertices (the side away from the smallest leaf). For a rooted tree,
    /// the supports of all proper subexpressions with at least two operands.
    pub fn internal_splits(&self) -> Vec<Vec<u32>> {
        let mut c = self.clusters();
        c.pop();
        c
    }

    fn edges_by_key(&self) -> Vec<usize> {
        let ch = self.children();
        let mut v: Vec<(Key, usize)> = (1..self.parent.len()).map(|v| (self.subtree_key(v, &ch), v)).collect();
        v.sort();
        v.into_iter().map(|(_, v)| v).collect()
    }

    /// Subdivides the edge above `v` and hangs a new leaf `l` from the new vertex.
    fn subdivide(&self, v: usize, l: u32) -> Self {
        let mut t = self.clone();
        let w = t.parent.len();
        t.parent.push(self.parent[v]);
        t.label.push(INTERNAL);
        t.parent[v] = w;
        t.parent.push(w);
        t.label.push(l);
        t
    }

    /// The abstract Steiner tree obtained by contracting the root and its edge.
    pub fn contract_root(&self) -> Result<ParenTree> {
        if !self.is_rooted() {
            return Err(Error::invalid("contract_root needs a rooted tree"));
        }
        let leaves = self.leaves();
        if leaves.len() < 2 {
            return Err(Error::invalid("contracting the root needs at least two leaves"));
        }
        let n = self.parent.len();
        let mut adj = vec![Vec::new(); n];
        for v in 1..n {
            adj[v].push(self.parent[v]);
            adj[self.parent[v]].push(v);
        }
        // Remove the root and suppress its neighbour, now of degree 2.
        let top = adj[0][0];
        let others: Vec<usize> = adj[top].iter().copied().filter(|&u| u != 0).collect();
        let (a, b) = (others[0], others[1]);
        for u in [a, b] {
            adj[u].retain(|&x| x != top);
        }
        adj[a].push(b);
        adj[b].push(a);
        adj[0].clear();
        adj[top].clear();
        let start = (0..n).find(|&v| self.label[v] == leaves[0]).expect("leaf present");
        Ok(Self::hang_from(&adj, &self.label, start))
    }

    fn hang_from(adj: &[Vec<usize>], labels: &[u32], start: usize) -> ParenTree {
        let mut parent = vec![NO_PARENT];
        let mut label = vec![labels[start]];
        let mut stack = vec![(start, NO_PARENT, 0usize)];
        while let Some((v, from, id)) = stack.pop() {
            for &u in &adj[v] {
                if u == from {
                    continue;
                }
                let nid = parent.len();
                parent.push(id);
                label.push(labels[u]);
                stack.push((u, v, nid));
            }
        }
        ParenTree { kind: TreeKind::Unrooted, parent, label }
    }

    /// Every rooted tree whose root contraction is this unrooted tree: one
    /// per edge on which the root may sit.
    pub fn rootings(&self) -> Result<Vec<ParenTree>> {
        if self.is_rooted() {
            return Err(Error::invalid("rootings needs an unrooted tree"));
        }
        let mut out = Vec::new();
        for v in 1..self.parent.len() {
            // Undirected adjacency with the edge (parent[v], v) subdivided by a
            // new vertex carrying the root leaf 0.
            let n = self.parent.len();
            let mut adj = vec![Vec::new(); n + 2];
            for u in 1..n {
                if u == v {
                    continue;
                }
                adj[u].push(self.parent[u]);
                adj[self.parent[u]].push(u);
            }
            let (s, r) = (n, n + 1);
            for x in [v, self.parent[v], r] {
                adj[s].push(x);
                adj[x].push(s);
            }
            let mut labels = self.label.clone();
            labels.push(INTERNAL);
            labels.push(0);
            let mut t = Self::hang_from(&adj, &labels, r);
            t.kind = TreeKind::Rooted;
            out.push(t);
        }
        Ok(out)
    }

    /// Parses the text produced by [`ParenTree::canonical_key`].
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let (kind, root, body) = match text.split_once('-') {
            Some((r, body)) => {
                let r: u32 = r.trim().parse().map_err(|_| Error::Parse(format!("bad root label in {text:?}")))?;
                (TreeKind::Unrooted, r, body)
            }
            None => (TreeKind::Rooted, 0, text),
        };
        let mut parser = ExprParser { s: body.as_bytes(), i: 0 };
        let mut t = ParenTree { kind, parent: vec![NO_PARENT], label: vec![root] };
        parser.parse_into(&mut t, 0)?;
        parser.skip_ws();
        if parser.i != parser.s.len() {
            return Err(Error::Parse(format!("trailing input in {text:?}")));
        }
        let mut seen = t.leaves();
        let total = seen.len();
        seen.dedup();
        if seen.len() != total || (kind == TreeKind::Rooted && seen.contains(&0)) {
            return Err(Error::Parse(format!("repeated or reserved label in {text:?}")));
        }
        if kind == TreeKind::Unrooted {
            // Re-hang from the smallest label so that keys are canonical.
            let n = t.parent.len();
            let mut adj = vec![Vec::new(); n];
            for v in 1..n {
                adj[v].push(t.parent[v]);
                adj[t.parent[v]].push(v);
            }
            let min = t.leaves()[0];
            let start = (0..n).find(|&v| t.label[v] == min).expect("leaf present");
            t = Self::hang_from(&adj, &t.label, start);
        }
        Ok(t)
    }
}

struct ExprParser<'a> {
    s: &'a [u8],
    i: usize,
}

impl ExprParser<'_> {
    fn skip_ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn parse_into(&mut self, t: &mut ParenTree, parent: usize) -> Result<()> {
        self.skip_ws();
        let id = t.parent.len();
        t.parent.push(parent);
        if self.s.get(self.i) == Some(&b'(') {
            self.i += 1;
            t.label.push(INTERNAL);
            self.parse_into(t, id)?;
            self.parse_into(t, id)?;
            self.skip_ws();
            if self.s.get(self.i) != Some(&b')') {
                return Err(Error::Parse("expected ')' after two operands".into()));
            }
            self.i += 1;
            return Ok(());
        }
        let start = self.i;
        while self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
            self.i += 1;
        }
        let digits = std::str::from_utf8(&self.s[start..self.i]).expect("ascii");
        let l: u32 = digits.parse().map_err(|_| Error::Parse(format!("expected a label at byte {start}")))?;
        if l == INTERNAL {
            return Err(Error::Parse("label too large".into()));
        }
        t.label.push(l);
        Ok(())
    }
}

impl PartialEq for ParenTree {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.label[0] == other.label[0] && self.key() == other.key()
    }
}

impl Eq for ParenTree {}

impl Hash for ParenTree {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.kind.hash(h);
        self.label[0].hash(h);
        self.key().hash(h);
    }
}

impl PartialOrd for ParenTree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ParenTree {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.kind, self.label[0], self.key()).cmp(&(other.kind, other.label[0], other.key()))
    }
}

impl fmt::Display for ParenTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_key())
    }
}

impl FromStr for ParenTree {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ParenTree::parse(s)
    }
}

fn sorted_labels(labels: &[u32]) -> Result<Vec<u32>> {
    let mut v = labels.to_vec();
    v.sort_unstable();
    let n = v.len();
    v.dedup();
    if v.len() != n {
        return Err(Error::invalid("label set has repeated labels"));
    }
    if v.contains(&0) || v.contains(&INTERNAL) {
        return Err(Error::invalid("labels 0 and u32::MAX are reserved"));
    }
    Ok(v)
}

/// Depth-first visit of all trees built from `start` by subdividing an edge
/// (in key order) for each successive label.
fn grow(start: ParenTree, rest: &[u32], visit: &mut dyn FnMut(&ParenTree) -> bool) -> bool {
    let Some((&l, tail)) = rest.split_first() else {
        return visit(&start);
    };
    for v in start.edges_by_key() {
        if !grow(start.subdivide(v, l), tail, visit) {
            return false;
        }
    }
    true
}

/// Calls `visit` on each rooted tree on `labels` in generation order until it
/// returns `false`. Returns whether the walk completed.
pub fn for_each_rooted(labels: &[u32], visit: &mut dyn FnMut(&ParenTree) -> bool) -> Result<bool> {
    let v = sorted_labels(labels)?;
    let Some((&first, rest)) = v.split_first() else {
        return Err(Error::invalid("enumerate_rooted needs a nonempty label set"));
    };
    Ok(grow(ParenTree::rooted_leaf(first)?, rest, visit))
}

/// As [`for_each_rooted`] for unrooted trees on at least two labels.
pub fn for_each_unrooted(labels: &[u32], visit: &mut dyn FnMut(&ParenTree) -> bool) -> Result<bool> {
    let v = sorted_labels(labels)?;
    if v.len() < 2 {
        return Err(Error::invalid("enumerate_unrooted needs at least two labels"));
    }
    Ok(grow(ParenTree::unrooted_edge(v[0], v[1]), &v[2..], visit))
}

/// One representative per equivalence class of parenthesizations of the
/// operands indexed by `labels`.
pub fn enumerate_rooted(labels: &[u32]) -> Result<Vec<ParenTree>> {
    let mut out = Vec::new();
    for_each_rooted(labels, &mut |t| {
        out.push(t.clone());
        true
    })?;
    Ok(out)
}

/// One representative per weak-equivalence class.
pub fn enumerate_unrooted(labels: &[u32]) -> Result<Vec<ParenTree>> {
    let mut out = Vec::new();
    for_each_unrooted(labels, &mut |t| {
        out.push(t.clone());
        true
    })?;
    Ok(out)
}

/// `a_k`, the product of the first `k − 1` odd numbers.
pub fn count_rooted(k: usize) -> Result<u128> {
    if k < 1 {
        return Err(Error::invalid("count_rooted needs k >= 1"));
    }
    let mut a: u128 = 1;
    for i in 1..k as u128 {
        a = a
            .checked_mul(2 * i - 1)
            .ok_or_else(|| Error::TooLarge(format!("a_{k} overflows u128")))?;
    }
    Ok(a)
}

/// `a_{k−1}`.
pub fn count_unrooted(k: usize) -> Result<u128> {
    if k < 2 {
        return Err(Error::invalid("count_unrooted needs k >= 2"));
    }
    count_rooted(k - 1)
}

/// `[1, 2, ..., k]`.
pub fn labels(k: usize) -> Vec<u32> {
    (1..=k as u32).collect()
}
