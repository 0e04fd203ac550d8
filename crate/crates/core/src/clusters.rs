//! Clusters of `E2`, their balls `B_C`, and the square-to-cluster map.
//!
//! The cluster `C_v` is the image of the shadow of `v`; since E2 is stored in
//! leaf order it is a contiguous index range. Clusters are indexed by the
//! [`NodeId`] of their node, so the cluster tree is the input tree.

use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use thiserror::Error;

use crate::embedding::PlanarSet;
use crate::geometry::{Disk, Point};
use crate::math;
use crate::tree::{NodeId, WeightedTree};
use crate::whitney::{DyadicSquare, SquareType, WhitneyDecomposition, DILATE_TOL};

/// Ball-family constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallConfig {
    /// `κ`, must exceed 10.
    pub kappa: f64,
    /// `K₁`; computed from the instance when `None`.
    pub k1: Option<f64>,
    /// `K₀`, the dilation in the disjointness properties.
    pub k0: f64,
    /// Safety factor applied to the computed `K₁`.
    pub k1_margin: f64,
}

impl Default for BallConfig {
    fn default() -> Self {
        Self { kappa: 20.0, k1: None, k0: 50.0, k1_margin: 1.1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BallProperty {
    /// `C ⊂ κ⁻¹B_C`.
    B1,
    /// `κB_C ⊂ B_{π(C)}`.
    B2,
    /// `diam B_C = 2K₁κW_C`.
    B3,
    /// Positive gap between `K₀`-dilates of disjoint non-root clusters.
    B4,
    /// Leaf `K₀`-dilates pairwise disjoint.
    B5,
    /// Same-depth `K₀`-dilates pairwise disjoint.
    B6,
    /// `Q⁰ ⊂ B_{E2}`.
    RootCoversQ0,
}

impl BallProperty {
    pub fn label(&self) -> &'static str {
        match self {
            BallProperty::B1 => "B1",
            BallProperty::B2 => "B2",
            BallProperty::B3 => "B3",
            BallProperty::B4 => "B4",
            BallProperty::B5 => "B5",
            BallProperty::B6 => "B6",
            BallProperty::RootCoversQ0 => "Q0-in-root-ball",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BallViolation {
    pub property: BallProperty,
    pub cluster: String,
    pub other: Option<String>,
}

/// Outcome of every ball property on one instance.
#[derive(Clone, Debug, PartialEq)]
pub struct BallReport {
    pub violations: Vec<BallViolation>,
    /// `min N·dist(K₀B_C, K₀B_{C′}) / (W_{π(C)} + W_{π(C′)})` over disjoint
    /// non-root pairs (clamped at 0 when the dilates overlap).
    pub b4_min_ratio: f64,
    /// Same quantity with undilated balls.
    pub b4_min_ratio_plain: f64,
    /// Same-depth balls `B_C` (not dilated) pairwise disjoint.
    pub plain_same_depth_disjoint: bool,
    /// `[min, max]` of `diam(C)/W_C` over non-leaf clusters.
    pub diam_ratio: (f64, f64),
}

impl BallReport {
    pub fn holds(&self, p: BallProperty) -> bool {
        !self.violations.iter().any(|v| v.property == p)
    }

    pub fn count(&self, p: BallProperty) -> usize {
        self.violations.iter().filter(|v| v.property == p).count()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClusterError {
    #[error("kappa = {0} must exceed 10")]
    Kappa(f64),
    #[error("K1 = {0} must be at least 1")]
    K1(f64),
    #[error("ball properties violated: {}", summarize(.0))]
    Balls(Vec<BallViolation>),
}

fn summarize(v: &[BallViolation]) -> String {
    use core::fmt::Write;
    let mut s = String::new();
    for (i, x) in v.iter().take(8).enumerate() {
        if i > 0 {
            s.push_str("; ");
        }
        let _ = match &x.other {
            Some(o) => write!(s, "{} at ({:?}, {:?})", x.property.label(), x.cluster, o),
            None => write!(s, "{} at {:?}", x.property.label(), x.cluster),
        };
    }
    if v.len() > 8 {
        let _ = write!(s, "; and {} more", v.len() - 8);
    }
    s
}

/// `diam(C)` for a contiguous range of E2 indices.
pub fn cluster_diameter(ps: &PlanarSet, members: &Range<usize>) -> f64 {
    let mut d = 0.0f64;
    for i in members.clone() {
        for j in i + 1..members.end {
            d = d.max(ps.e2_point(i).dist(ps.e2_point(j)));
        }
    }
    d
}

#[derive(Clone, Debug)]
pub struct ClusterTree {
    members: Vec<Range<usize>>,
    weight: Vec<f64>,
    rep: Vec<usize>,
    rep_point: Vec<Point>,
    radius: Vec<f64>,
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    depth: Vec<usize>,
    ids: Vec<String>,
    arity: usize,
    kappa: f64,
    k1: f64,
    k0: f64,
    report: BallReport,
}

impl ClusterTree {
    /// Builds the clusters and balls; fails when (B1)–(B3) or `Q⁰ ⊂ B_{E2}`
    /// break. The disjointness properties (B4)–(B6) are measured and kept
    /// in [`report`](Self::report).
    pub fn build(tree: &WeightedTree, ps: &PlanarSet, cfg: &BallConfig) -> Result<Self, ClusterError> {
        let ct = Self::build_unchecked(tree, ps, cfg)?;
        let hard: Vec<BallViolation> = ct
            .report
            .violations
            .iter()
            .filter(|v| matches!(v.property, BallProperty::B1 | BallProperty::B2 | BallProperty::B3 | BallProperty::RootCoversQ0))
            .cloned()
            .collect();
        if !hard.is_empty() {
            return Err(ClusterError::Balls(hard));
        }
        Ok(ct)
    }

    /// Builds and measures without failing on any ball property.
    pub fn build_unchecked(tree: &WeightedTree, ps: &PlanarSet, cfg: &BallConfig) -> Result<Self, ClusterError> {
        if !(cfg.kappa > 10.0) {
            return Err(ClusterError::Kappa(cfg.kappa));
        }
        let n = tree.len();
        let members: Vec<Range<usize>> = tree.nodes().map(|v| tree.shadow(v)).collect();
        let weight: Vec<f64> = tree.nodes().map(|v| tree.weight(v)).collect();
        let rep: Vec<usize> = members.iter().map(|m| m.start).collect();
        let rep_point: Vec<Point> = rep.iter().map(|i| ps.e2_point(*i)).collect();
        let k1 = match cfg.k1 {
            Some(k) => k,
            None => {
                // diam(C) bounds every |x − y_C|, so this guarantees (B1).
                let spread = (0..n).map(|v| cluster_diameter(ps, &members[v]) / weight[v]).fold(0.0, f64::max);
                let q0 = DyadicSquare::ROOT.rect().corners().iter().map(|c| c.dist(rep_point[0])).fold(0.0, f64::max);
                (cfg.k1_margin * spread.max(q0 / cfg.kappa)).max(1.0)
            }
        };
        if !(k1 >= 1.0) {
            return Err(ClusterError::K1(k1));
        }
        let radius: Vec<f64> = weight.iter().map(|w| cfg.kappa * k1 * w).collect();
        let mut ct = Self {
            members,
            weight,
            rep,
            rep_point,
            radius,
            parent: tree.nodes().map(|v| tree.parent(v)).collect(),
            children: tree.nodes().map(|v| tree.node(v).children().to_vec()).collect(),
            depth: tree.nodes().map(|v| tree.depth(v)).collect(),
            ids: tree.nodes().map(|v| tree.id(v)).collect(),
            arity: tree.arity(),
            kappa: cfg.kappa,
            k1,
            k0: cfg.k0,
            report: BallReport {
                violations: Vec::new(),
                b4_min_ratio: f64::INFINITY,
                b4_min_ratio_plain: f64::INFINITY,
                plain_same_depth_disjoint: true,
                diam_ratio: (f64::INFINITY, 0.0),
            },
        };
        ct.report = ct.measure(ps);
        Ok(ct)
    }

    fn measure(&self, ps: &PlanarSet) -> BallReport {
        let n = self.len();
        let mut viol = Vec::new();
        let id = |v: usize| self.ids[v].clone();
        let push = |viol: &mut Vec<BallViolation>, p, a: usize, b: Option<usize>| {
            viol.push(BallViolation { property: p, cluster: id(a), other: b.map(id) });
        };
        for v in 0..n {
            let inner = self.ball(v).scaled(1.0 / self.kappa);
            let tol = 1e-12 * inner.radius;
            if self.members[v].clone().any(|i| ps.e2_point(i).dist(inner.center) > inner.radius + tol) {
                push(&mut viol, BallProperty::B1, v, None);
            }
            let want = 2.0 * self.k1 * self.kappa * self.weight[v];
            if math::abs(2.0 * self.radius[v] - want) > 1e-12 * want {
                push(&mut viol, BallProperty::B3, v, None);
            }
            if let Some(p) = self.parent[v] {
                let big = self.ball(p.index());
                let small = self.ball(v).scaled(self.kappa);
                if small.center.dist(big.center) + small.radius > big.radius * (1.0 + 1e-12) {
                    push(&mut viol, BallProperty::B2, v, Some(p.index()));
                }
            }
        }
        let root = self.ball(0);
        let q0 = DyadicSquare::ROOT.rect();
        if !root.contains_rect(&q0, 1e-12 * root.radius) {
            push(&mut viol, BallProperty::RootCoversQ0, 0, None);
        }
        let mut b4_min = f64::INFINITY;
        let mut b4_plain = f64::INFINITY;
        let mut plain_disjoint = true;
        let nf = self.arity as f64;
        for a in 1..n {
            for b in a + 1..n {
                if !self.disjoint(a, b) {
                    continue;
                }
                let (ka, kb) = (self.ball(a).scaled(self.k0), self.ball(b).scaled(self.k0));
                let gap = ka.center.dist(kb.center) - ka.radius - kb.radius;
                let wsum = self.weight[self.parent[a].unwrap().index()] + self.weight[self.parent[b].unwrap().index()];
                b4_min = b4_min.min(nf * gap.max(0.0) / wsum);
                let plain_gap = self.ball(a).dist(&self.ball(b));
                b4_plain = b4_plain.min(nf * plain_gap / wsum);
                if gap <= 0.0 {
                    push(&mut viol, BallProperty::B4, a, Some(b));
                    if self.children[a].is_empty() && self.children[b].is_empty() {
                        push(&mut viol, BallProperty::B5, a, Some(b));
                    }
                    if self.depth[a] == self.depth[b] {
                        push(&mut viol, BallProperty::B6, a, Some(b));
                    }
                }
                if self.depth[a] == self.depth[b] && plain_gap <= 0.0 {
                    plain_disjoint = false;
                }
            }
        }
        let mut diam = (f64::INFINITY, 0.0f64);
        for v in 0..n {
            if self.children[v].is_empty() {
                continue;
            }
            let r = cluster_diameter(ps, &self.members[v]) / self.weight[v];
            diam = (diam.0.min(r), diam.1.max(r));
        }
        BallReport {
            violations: viol,
            b4_min_ratio: b4_min,
            b4_min_ratio_plain: b4_plain,
            plain_same_depth_disjoint: plain_disjoint,
            diam_ratio: diam,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn report(&self) -> &BallReport {
        &self.report
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }

    pub fn k0(&self) -> f64 {
        self.k0
    }

    /// E2 indices of `C_v`.
    pub fn members(&self, v: NodeId) -> Range<usize> {
        self.members[v.index()].clone()
    }

    /// `W_C`.
    pub fn weight(&self, v: NodeId) -> f64 {
        self.weight[v.index()]
    }

    /// E2 index of `y_C` (the first leaf of the cluster).
    pub fn representative(&self, v: NodeId) -> usize {
        self.rep[v.index()]
    }

    /// `B_C = B(y_C, κK₁W_C)`.
    pub fn ball(&self, v: usize) -> Disk {
        Disk { center: self.rep_point[v], radius: self.radius[v] }
    }

    pub fn ball_of(&self, v: NodeId) -> Disk {
        self.ball(v.index())
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.parent[v.index()]
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.children[v.index()]
    }

    pub fn depth(&self, v: NodeId) -> usize {
        self.depth[v.index()]
    }

    pub fn id(&self, v: NodeId) -> &str {
        &self.ids[v.index()]
    }

    pub fn is_leaf(&self, v: NodeId) -> bool {
        self.children[v.index()].is_empty()
    }

    /// `C_a ∩ C_b = ∅`.
    pub fn disjoint(&self, a: usize, b: usize) -> bool {
        let (x, y) = (&self.members[a], &self.members[b]);
        x.end <= y.start || y.end <= x.start
    }

    /// `C_u ⊂ C_v`.
    pub fn contained_in(&self, u: NodeId, v: NodeId) -> bool {
        let (x, y) = (&self.members[u.index()], &self.members[v.index()]);
        y.start <= x.start && x.end <= y.end
    }

    /// The leaf cluster `{x}` for E2 index `i`.
    pub fn leaf_cluster(&self, tree: &WeightedTree, i: usize) -> NodeId {
        tree.leaves()[i]
    }

    fn square_in_ball(&self, v: usize, sq: &DyadicSquare) -> bool {
        self.ball(v).contains_rect(&sq.rect(), DILATE_TOL * sq.side())
    }

    /// `C_Q` by root-to-leaf descent.
    ///
    /// When several children contain `Q` the one whose representative is
    /// nearest the square's centre is taken (ties to tree order); such
    /// events are counted in [`ClusterAssignment::ambiguous`].
    pub fn assign(&self, wd: &WhitneyDecomposition) -> ClusterAssignment {
        let mut of_square = Vec::with_capacity(wd.len());
        let mut ambiguous = 0usize;
        for s in wd.squares() {
            let sq = &s.square;
            let c = sq.center();
            let mut cur = 0usize;
            loop {
                let mut best: Option<(usize, f64)> = None;
                let mut hits = 0;
                for ch in &self.children[cur] {
                    let k = ch.index();
                    if self.square_in_ball(k, sq) {
                        hits += 1;
                        let d = self.rep_point[k].dist(c);
                        if best.is_none_or(|(_, bd)| d < bd) {
                            best = Some((k, d));
                        }
                    }
                }
                if hits > 1 {
                    ambiguous += 1;
                }
                match best {
                    Some((k, _)) => cur = k,
                    None => break,
                }
            }
            of_square.push(NodeId::from_index(cur));
        }
        ClusterAssignment { of_square, ambiguous }
    }

    /// Deepest cluster whose ball contains `Q`, by scanning every cluster
    /// (ties: nearest representative, then tree order).
    pub fn assign_brute_force(&self, sq: &DyadicSquare) -> NodeId {
        let c = sq.center();
        let mut best: Option<(usize, usize, f64)> = None;
        for v in 0..self.len() {
            if !self.square_in_ball(v, sq) {
                continue;
            }
            let d = self.rep_point[v].dist(c);
            let better = match best {
                None => true,
                Some((_, bd, bdist)) => self.depth[v] > bd || (self.depth[v] == bd && d < bdist),
            };
            if better {
                best = Some((v, self.depth[v], d));
            }
        }
        NodeId::from_index(best.map_or(0, |b| b.0))
    }
}

/// `Q ↦ C_Q` for every Whitney square.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterAssignment {
    pub of_square: Vec<NodeId>,
    /// Descent steps where more than one child ball contained the square.
    pub ambiguous: usize,
}

/// Outcome of the cluster-map lemma checks.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterLemmaReport {
    /// Type II squares with `C_Q ≠ {x_Q}`.
    pub a_failures: usize,
    pub type_ii: usize,
    /// Boundary squares with `C_Q ≠ E2`.
    pub b_failures: usize,
    pub boundary: usize,
    /// Neighbour pairs with `C_Q ≠ C_{Q′}` and neither a parent of the other.
    pub c_failures: usize,
    pub straddling_pairs: usize,
}

impl ClusterLemmaReport {
    pub fn all(&self) -> bool {
        self.a_failures == 0 && self.b_failures == 0 && self.c_failures == 0
    }
}

/// `𝒬_C` for every non-root cluster and the normalised sums `R_C`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairSets {
    /// `(Q, Q′)` square-index pairs, indexed by cluster.
    pub pairs: Vec<Vec<(usize, usize)>>,
    /// `(p, R_C per cluster)`; the root entry is 0.
    pub ratios: Vec<(f64, Vec<f64>)>,
}

impl PairSets {
    /// `max_C R_C` for the `k`-th exponent.
    pub fn max_ratio(&self, k: usize) -> f64 {
        self.ratios[k].1.iter().copied().fold(0.0, f64::max)
    }
}

impl ClusterAssignment {
    pub fn cluster_of(&self, q: usize) -> NodeId {
        self.of_square[q]
    }

    pub fn check_lemma(&self, ct: &ClusterTree, tree: &WeightedTree, wd: &WhitneyDecomposition) -> ClusterLemmaReport {
        let mut r = ClusterLemmaReport { a_failures: 0, type_ii: 0, b_failures: 0, boundary: 0, c_failures: 0, straddling_pairs: 0 };
        for (i, s) in wd.squares().iter().enumerate() {
            let cq = self.of_square[i];
            if s.kind == SquareType::II {
                r.type_ii += 1;
                if cq != ct.leaf_cluster(tree, s.witness.expect("type II witness")) {
                    r.a_failures += 1;
                }
            }
            if s.boundary {
                r.boundary += 1;
                if cq != NodeId::ROOT {
                    r.b_failures += 1;
                }
            }
            for j in wd.neighbors(i) {
                if j <= i {
                    continue;
                }
                let cp = self.of_square[j];
                if cq == cp {
                    continue;
                }
                r.straddling_pairs += 1;
                if ct.parent(cq) != Some(cp) && ct.parent(cp) != Some(cq) {
                    r.c_failures += 1;
                }
            }
        }
        r
    }

    /// Builds `𝒬_C` and `R_C = Σ δ_Q^{2−p} / W_C^{2−p}` for each `p`.
    pub fn pair_sets(&self, ct: &ClusterTree, wd: &WhitneyDecomposition, ps: &[f64]) -> PairSets {
        let mut pairs = alloc::vec![Vec::new(); ct.len()];
        for i in 0..wd.len() {
            let c = self.of_square[i];
            let Some(pc) = ct.parent(c) else { continue };
            for j in wd.neighbors(i) {
                if self.of_square[j] == pc {
                    pairs[c.index()].push((i, j));
                }
            }
        }
        let ratios = ps
            .iter()
            .map(|&p| {
                let r = (0..ct.len())
                    .map(|v| {
                        let w = math::powf(ct.weight[v], 2.0 - p);
                        pairs[v].iter().map(|(q, _)| math::powf(wd.square(*q).square.side(), 2.0 - p)).sum::<f64>() / w
                    })
                    .collect();
                (p, r)
            })
            .collect();
        PairSets { pairs, ratios }
    }
}
