//! Ordered N-ary trees with radially decaying weights.
//!
//! Nodes are identified by digit strings over `{0, …, N-1}`; the root is the
//! empty string and each child appends one digit to its parent's id. Nodes are
//! stored in depth-first preorder with children sorted by their last digit, so
//! the stored leaf order is the tree order used throughout the crate.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::math;

/// Smallest admissible leaf weight, `2^-40`.
pub const MIN_LEAF_WEIGHT: f64 = 9.094_947_017_729_282e-13;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TreeError {
    #[error("arity N = {0} outside 2..=10")]
    Arity(usize),
    #[error("epsilon {0} outside (0, 1)")]
    Epsilon(f64),
    #[error("tree has no root node (empty id)")]
    MissingRoot,
    #[error("node id {0:?} contains a digit outside 0..N")]
    InvalidDigit(String),
    #[error("duplicate node id {0:?}")]
    Duplicate(String),
    #[error("node {0:?} has no parent in the tree (ids must be prefix-closed)")]
    MissingParent(String),
    #[error("node {id:?} has non-positive or non-finite weight {weight}")]
    Weight { id: String, weight: f64 },
    #[error("minimum leaf weight {0:e} is below the floor 2^-40")]
    DeltaBelowFloor(f64),
    #[error("unknown node id {0:?}")]
    UnknownNode(String),
    #[error("function has {got} values, expected {expected}")]
    Length { expected: usize, got: usize },
    #[error("exponent p = {0} outside the admissible range")]
    Exponent(f64),
    #[error("depth must be at least 1, got {0}")]
    Depth(usize),
}

/// Index of a node in preorder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub(crate) u32);

impl NodeId {
    pub const ROOT: NodeId = NodeId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_index(i: usize) -> Self {
        NodeId(i as u32)
    }
}

#[derive(Clone, Debug)]
pub struct Node {
    digits: Vec<u8>,
    parent: Option<NodeId>,
    children: Vec<NodeId>,
    weight: f64,
}

impl Node {
    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn depth(&self) -> usize {
        self.digits.len()
    }

    pub fn parent(&self) -> Option<NodeId> {
        self.parent
    }

    pub fn children(&self) -> &[NodeId] {
        &self.children
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Last digit, `v_{d(v)}`; `None` for the root.
    pub fn last_digit(&self) -> Option<u8> {
        self.digits.last().copied()
    }
}

#[derive(Clone, Debug)]
pub struct WeightedTree {
    arity: usize,
    epsilon: f64,
    nodes: Vec<Node>,
    leaves: Vec<NodeId>,
    leaf_pos: Vec<Option<u32>>,
    shadows: Vec<Range<usize>>,
}

/// One broken tree invariant, reported by [`WeightedTree::validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub node: String,
    pub kind: ViolationKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ViolationKind {
    RootWeight(f64),
    TooFewChildren(usize),
    TooManyChildren(usize),
    NotDecaying { weight: f64, bound: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let id = if self.node.is_empty() { "<root>" } else { self.node.as_str() };
        match &self.kind {
            ViolationKind::RootWeight(w) => write!(f, "{id}: root weight {w} != 1"),
            ViolationKind::TooFewChildren(k) => write!(f, "{id}: {k} children, need at least 2"),
            ViolationKind::TooManyChildren(k) => write!(f, "{id}: {k} children exceeds arity"),
            ViolationKind::NotDecaying { weight, bound } => {
                write!(f, "{id}: weight {weight:e} exceeds eps * parent weight {bound:e}")
            }
        }
    }
}

impl WeightedTree {
    /// Builds a tree from `(id, weight)` pairs in any order.
    ///
    /// Structural problems (bad digits, missing parents, duplicates,
    /// non-positive weights, `Δ < 2^-40`) are rejected here; the weight and
    /// branching invariants are reported by [`validate`](Self::validate).
    pub fn from_nodes<S: AsRef<str>>(arity: usize, epsilon: f64, nodes: impl IntoIterator<Item = (S, f64)>) -> Result<Self, TreeError> {
        if !(2..=10).contains(&arity) {
            return Err(TreeError::Arity(arity));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(TreeError::Epsilon(epsilon));
        }
        let mut raw: Vec<(Vec<u8>, f64)> = Vec::new();
        for (id, w) in nodes {
            let id = id.as_ref();
            let mut digits = Vec::with_capacity(id.len());
            for ch in id.chars() {
                match ch.to_digit(10) {
                    Some(d) if (d as usize) < arity => digits.push(d as u8),
                    _ => return Err(TreeError::InvalidDigit(id.into())),
                }
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(TreeError::Weight { id: id.into(), weight: w });
            }
            raw.push((digits, w));
        }
        // Lexicographic order on digit strings is depth-first preorder with
        // children sorted by last digit.
        raw.sort_by(|a, b| a.0.cmp(&b.0));
        if raw.first().map(|r| !r.0.is_empty()).unwrap_or(true) {
            return Err(TreeError::MissingRoot);
        }
        for pair in raw.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(TreeError::Duplicate(digits_to_id(&pair[0].0)));
            }
        }
        let mut nodes: Vec<Node> =
            raw.into_iter().map(|(digits, weight)| Node { digits, parent: None, children: Vec::new(), weight }).collect();
        for i in 1..nodes.len() {
            let parent_digits = &nodes[i].digits[..nodes[i].digits.len() - 1];
            let parent = nodes[..i]
                .binary_search_by(|n| n.digits.as_slice().cmp(parent_digits))
                .map_err(|_| TreeError::MissingParent(digits_to_id(&nodes[i].digits)))?;
            nodes[i].parent = Some(NodeId::from_index(parent));
            nodes[parent].children.push(NodeId::from_index(i));
        }
        let leaves: Vec<NodeId> = (0..nodes.len()).filter(|&i| nodes[i].children.is_empty()).map(NodeId::from_index).collect();
        let delta = leaves.iter().map(|l| nodes[l.index()].weight).fold(f64::INFINITY, f64::min);
        if delta < MIN_LEAF_WEIGHT {
            return Err(TreeError::DeltaBelowFloor(delta));
        }
        let mut leaf_pos = alloc::vec![None; nodes.len()];
        for (k, l) in leaves.iter().enumerate() {
            leaf_pos[l.index()] = Some(k as u32);
        }
        // Shadows are contiguous runs of the leaf order; fill bottom-up.
        let mut shadows: Vec<Range<usize>> = alloc::vec![Range { start: usize::MAX, end: 0 }; nodes.len()];
        for i in (0..nodes.len()).rev() {
            if let Some(k) = leaf_pos[i] {
                shadows[i] = k as usize..k as usize + 1;
            }
            if let Some(p) = nodes[i].parent {
                let (lo, hi) = (shadows[i].start, shadows[i].end);
                let s = &mut shadows[p.index()];
                s.start = s.start.min(lo);
                s.end = s.end.max(hi);
            }
        }
        Ok(Self { arity, epsilon, nodes, leaves, leaf_pos, shadows })
    }

    /// Random tree with every leaf at depth `depth`.
    ///
    /// Each interior node gets a uniform number of children in `2..=N` with
    /// a random subset of digits; weights are `W_v = U·ε·W_π(v)` with
    /// `U ~ Uniform[0.5, 1]`.
    pub fn random(arity: usize, depth: usize, epsilon: f64, seed: u64) -> Result<Self, TreeError> {
        if !(2..=10).contains(&arity) {
            return Err(TreeError::Arity(arity));
        }
        if depth == 0 {
            return Err(TreeError::Depth(depth));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(TreeError::Epsilon(epsilon));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out: Vec<(String, f64)> = alloc::vec![(String::new(), 1.0)];
        let mut frontier: Vec<(Vec<u8>, f64)> = alloc::vec![(Vec::new(), 1.0)];
        while let Some((digits, w)) = frontier.pop() {
            if digits.len() == depth {
                continue;
            }
            let k = rng.random_range(2..=arity);
            let mut all: Vec<u8> = (0..arity as u8).collect();
            all.shuffle(&mut rng);
            let mut chosen: Vec<u8> = all[..k].to_vec();
            chosen.sort_unstable();
            for d in chosen {
                let u: f64 = rng.random_range(0.5..=1.0);
                let cw = u * epsilon * w;
                let mut cd = digits.clone();
                cd.push(d);
                out.push((digits_to_id(&cd), cw));
                frontier.push((cd, cw));
            }
        }
        Self::from_nodes(arity, epsilon, out)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, v: NodeId) -> &Node {
        &self.nodes[v.index()]
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).map(NodeId::from_index)
    }

    /// Non-root nodes, `V₀`.
    pub fn non_root(&self) -> impl Iterator<Item = NodeId> + '_ {
        (1..self.nodes.len()).map(NodeId::from_index)
    }

    pub fn leaves(&self) -> &[NodeId] {
        &self.leaves
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    /// Position of `v` in the leaf order, if `v` is a leaf.
    pub fn leaf_position(&self, v: NodeId) -> Option<usize> {
        self.leaf_pos[v.index()].map(|k| k as usize)
    }

    /// Leaf positions descending from `v` (the shadow `S_v`).
    pub fn shadow(&self, v: NodeId) -> Range<usize> {
        self.shadows[v.index()].clone()
    }

    pub fn weight(&self, v: NodeId) -> f64 {
        self.nodes[v.index()].weight
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.nodes[v.index()].parent
    }

    pub fn depth(&self, v: NodeId) -> usize {
        self.nodes[v.index()].digits.len()
    }

    /// Depth `L` of the tree.
    pub fn height(&self) -> usize {
        self.nodes.iter().map(|n| n.digits.len()).max().unwrap_or(0)
    }

    /// Minimum leaf weight `Δ`.
    pub fn min_leaf_weight(&self) -> f64 {
        self.leaves.iter().map(|l| self.weight(*l)).fold(f64::INFINITY, f64::min)
    }

    pub fn id(&self, v: NodeId) -> String {
        digits_to_id(&self.nodes[v.index()].digits)
    }

    pub fn find(&self, id: &str) -> Result<NodeId, TreeError> {
        let mut digits = Vec::with_capacity(id.len());
        for ch in id.chars() {
            match ch.to_digit(10) {
                Some(d) => digits.push(d as u8),
                None => return Err(TreeError::UnknownNode(id.into())),
            }
        }
        self.nodes
            .binary_search_by(|n| n.digits.as_slice().cmp(&digits))
            .map(NodeId::from_index)
            .map_err(|_| TreeError::UnknownNode(id.into()))
    }

    /// Ancestor of `v` at depth `k` (`π_k(v)`), or `None` if `k > d(v)`.
    pub fn ancestor_at(&self, v: NodeId, k: usize) -> Option<NodeId> {
        let mut cur = v;
        if self.depth(v) < k {
            return None;
        }
        while self.depth(cur) > k {
            cur = self.parent(cur)?;
        }
        Some(cur)
    }

    pub fn is_ancestor(&self, anc: NodeId, v: NodeId) -> bool {
        self.ancestor_at(v, self.depth(anc)) == Some(anc)
    }

    /// Lowest common ancestor; `lca(u, u) = u`.
    pub fn lca(&self, u: NodeId, v: NodeId) -> NodeId {
        let (mut a, mut b) = (u, v);
        while self.depth(a) > self.depth(b) {
            a = self.parent(a).expect("non-root has a parent");
        }
        while self.depth(b) > self.depth(a) {
            b = self.parent(b).expect("non-root has a parent");
        }
        while a != b {
            a = self.parent(a).expect("distinct nodes below root");
            b = self.parent(b).expect("distinct nodes below root");
        }
        a
    }

    /// Checks every weight and branching invariant and lists the offenders.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let root_w = self.nodes[0].weight;
        if root_w != 1.0 {
            out.push(Violation { node: String::new(), kind: ViolationKind::RootWeight(root_w) });
        }
        for (i, n) in self.nodes.iter().enumerate() {
            let k = n.children.len();
            if k == 1 {
                out.push(Violation { node: self.id(NodeId::from_index(i)), kind: ViolationKind::TooFewChildren(k) });
            }
            if k > self.arity {
                out.push(Violation { node: self.id(NodeId::from_index(i)), kind: ViolationKind::TooManyChildren(k) });
            }
            if let Some(p) = n.parent {
                let bound = self.epsilon * self.weight(p);
                if n.weight > bound {
                    out.push(Violation {
                        node: self.id(NodeId::from_index(i)),
                        kind: ViolationKind::NotDecaying { weight: n.weight, bound },
                    });
                }
            }
        }
        out
    }

    /// Copy of the tree with one weight replaced (used to probe validation).
    pub fn with_weight(&self, v: NodeId, weight: f64) -> Result<Self, TreeError> {
        let pairs: Vec<(String, f64)> = self.nodes().map(|u| (self.id(u), if u == v { weight } else { self.weight(u) })).collect();
        Self::from_nodes(self.arity, self.epsilon, pairs)
    }
}

pub(crate) fn digits_to_id(d: &[u8]) -> String {
    d.iter().map(|x| char::from(b'0' + *x)).collect()
}

/// Real function on all nodes, indexed by [`NodeId`].
#[derive(Clone, Debug, PartialEq)]
pub struct NodeFunction {
    values: Vec<f64>,
}

impl NodeFunction {
    pub fn new(tree: &WeightedTree, values: Vec<f64>) -> Result<Self, TreeError> {
        if values.len() != tree.len() {
            return Err(TreeError::Length { expected: tree.len(), got: values.len() });
        }
        Ok(Self { values })
    }

    pub fn constant(tree: &WeightedTree, c: f64) -> Self {
        Self { values: alloc::vec![c; tree.len()] }
    }

    pub fn get(&self, v: NodeId) -> f64 {
        self.values[v.index()]
    }

    pub fn set(&mut self, v: NodeId, x: f64) {
        self.values[v.index()] = x;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Restriction to the leaves.
    pub fn restrict(&self, tree: &WeightedTree) -> LeafFunction {
        LeafFunction { values: tree.leaves().iter().map(|l| self.get(*l)).collect() }
    }
}

/// Real function on the leaves, indexed by leaf position.
#[derive(Clone, Debug, PartialEq)]
pub struct LeafFunction {
    values: Vec<f64>,
}

impl LeafFunction {
    pub fn new(tree: &WeightedTree, values: Vec<f64>) -> Result<Self, TreeError> {
        if values.len() != tree.leaf_count() {
            return Err(TreeError::Length { expected: tree.leaf_count(), got: values.len() });
        }
        Ok(Self { values })
    }

    pub fn constant(tree: &WeightedTree, c: f64) -> Self {
        Self { values: alloc::vec![c; tree.leaf_count()] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, leaf_pos: usize) -> f64 {
        self.values[leaf_pos]
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { values: self.values.iter().map(|v| a * v).collect() }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `Σ_{v ∈ V₀} |Φ(v) − Φ(π(v))|^p · W_v^{2−p}` for `p ∈ (1, 2]`.
pub fn tree_energy(tree: &WeightedTree, phi: &[f64], p: f64) -> f64 {
    tree.non_root()
        .map(|v| {
            let parent = tree.parent(v).expect("non-root");
            let d = phi[v.index()] - phi[parent.index()];
            math::abs_pow(d, p) * math::powf(tree.weight(v), 2.0 - p)
        })
        .sum()
}

/// The `L^{1,p}(V)` seminorm, `p ∈ (1, 2)`.
pub fn seminorm_tree(tree: &WeightedTree, phi: &NodeFunction, p: f64) -> Result<f64, TreeError> {
    if !(p > 1.0 && p < 2.0) {
        return Err(TreeError::Exponent(p));
    }
    Ok(math::powf(tree_energy(tree, phi.values(), p), 1.0 / p))
}
