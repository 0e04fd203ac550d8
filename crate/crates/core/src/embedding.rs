//! The planar set `E = E1 ∪ E2` attached to a weighted tree.
//!
//! `E1 = {(kΔ, 0) : 0 ≤ k, kΔ < 2}` is never materialised; every query on it
//! is arithmetic in `k`. `E2` holds one point `(Ψ(v), W_v)` per leaf, stored in
//! leaf order, so E2 index and leaf position coincide.

use alloc::vec::Vec;

use thiserror::Error;

use crate::geometry::{Point, Rect};
use crate::math;
use crate::tree::{NodeId, WeightedTree, MIN_LEAF_WEIGHT};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmbeddingError {
    #[error("minimum leaf weight {0:e} is below the floor 2^-40")]
    DeltaBelowFloor(f64),
}

/// `Ψ` on every node, by the parent recursion, indexed by [`NodeId`].
pub fn psi_all(tree: &WeightedTree) -> Vec<f64> {
    let denom = (tree.arity() - 1) as f64;
    let mut out = alloc::vec![0.0; tree.len()];
    // Preorder lists parents before children.
    for v in tree.non_root() {
        let pa = tree.parent(v).expect("non-root");
        let digit = tree.node(v).last_digit().expect("non-root") as f64;
        out[v.index()] = out[pa.index()] + tree.weight(pa) * digit / denom;
    }
    out
}

/// `Ψ(v) = Ψ(π(v)) + W_{π(v)}·v_{d(v)}/(N−1)`, `Ψ(root) = 0`.
pub fn psi(tree: &WeightedTree, v: NodeId) -> f64 {
    let mut chain = Vec::new();
    let mut cur = v;
    while let Some(pa) = tree.parent(cur) {
        chain.push((pa, tree.node(cur).last_digit().unwrap()));
        cur = pa;
    }
    let denom = (tree.arity() - 1) as f64;
    chain.iter().rev().fold(0.0, |acc, (pa, d)| acc + tree.weight(*pa) * *d as f64 / denom)
}

/// `Ψ(v)` as the closed sum `Σ_{i=1}^{d(v)} W_{π_{i−1}(v)}·v_i/(N−1)`.
pub fn psi_closed_sum(tree: &WeightedTree, v: NodeId) -> f64 {
    let digits = tree.node(v).digits();
    let denom = (tree.arity() - 1) as f64;
    (1..=digits.len())
        .map(|i| {
            let anc = tree.ancestor_at(v, i - 1).expect("i − 1 < d(v)");
            tree.weight(anc) * digits[i - 1] as f64 / denom
        })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct E2Point {
    pub leaf: NodeId,
    pub point: Point,
}

/// Counts of `E1` and `E2` points inside a closed rectangle.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RangeCount {
    pub e1: usize,
    pub e2: usize,
    /// Smallest grid index in the rectangle.
    pub e1_first: Option<usize>,
    /// First E2 index (in leaf order) found in the rectangle.
    pub e2_first: Option<usize>,
}

impl RangeCount {
    pub fn total(&self) -> usize {
        self.e1 + self.e2
    }
}

#[derive(Clone, Debug)]
pub struct PlanarSet {
    delta: f64,
    e1_count: usize,
    e2: Vec<E2Point>,
    /// E2 indices sorted by first coordinate.
    by_x: Vec<usize>,
    by_x_keys: Vec<f64>,
    /// Inverse of `by_x`.
    rank: Vec<usize>,
}

impl PlanarSet {
    pub fn build(tree: &WeightedTree) -> Result<Self, EmbeddingError> {
        let delta = tree.min_leaf_weight();
        if !(delta >= MIN_LEAF_WEIGHT) {
            return Err(EmbeddingError::DeltaBelowFloor(delta));
        }
        let psi = psi_all(tree);
        let e2: Vec<E2Point> =
            tree.leaves().iter().map(|l| E2Point { leaf: *l, point: Point::new(psi[l.index()], tree.weight(*l)) }).collect();
        Ok(Self::from_parts(delta, e2))
    }

    fn from_parts(delta: f64, e2: Vec<E2Point>) -> Self {
        let mut k = math::ceil(2.0 / delta) as usize;
        while k > 0 && (k - 1) as f64 * delta >= 2.0 {
            k -= 1;
        }
        while (k as f64) * delta < 2.0 {
            k += 1;
        }
        let mut by_x: Vec<usize> = (0..e2.len()).collect();
        by_x.sort_by(|a, b| e2[*a].point.x.total_cmp(&e2[*b].point.x));
        let by_x_keys = by_x.iter().map(|i| e2[*i].point.x).collect();
        let mut rank = alloc::vec![0; e2.len()];
        for (r, i) in by_x.iter().enumerate() {
            rank[*i] = r;
        }
        Self { delta, e1_count: k, e2, by_x, by_x_keys, rank }
    }

    /// `Δ`, the E1 spacing and the minimum leaf weight.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `#{k ≥ 0 : kΔ < 2}`.
    pub fn e1_count(&self) -> usize {
        self.e1_count
    }

    pub fn e1_point(&self, k: usize) -> Point {
        Point::new(k as f64 * self.delta, 0.0)
    }

    pub fn e2(&self) -> &[E2Point] {
        &self.e2
    }

    pub fn e2_point(&self, i: usize) -> Point {
        self.e2[i].point
    }

    /// E2 index of a leaf; E2 is stored in leaf order.
    pub fn leaf_index(&self, tree: &WeightedTree, leaf: NodeId) -> Option<usize> {
        tree.leaf_position(leaf)
    }

    /// Grid index of the E1 point nearest to `q`, ties to the smaller one.
    pub fn nearest_e1_index(&self, q: Point) -> usize {
        let last = self.e1_count - 1;
        let t = q.x / self.delta;
        if !(t > 0.0) {
            return 0;
        }
        if t >= last as f64 {
            return last;
        }
        let k0 = math::floor(t) as usize;
        let k1 = (k0 + 1).min(last);
        let d0 = math::abs(q.x - self.e1_point(k0).x);
        let d1 = math::abs(self.e1_point(k1).x - q.x);
        if d1 < d0 {
            k1
        } else {
            k0
        }
    }

    pub fn nearest_e1(&self, q: Point) -> Point {
        self.e1_point(self.nearest_e1_index(q))
    }

    /// `dist(q, E1)`.
    pub fn dist_e1(&self, q: Point) -> f64 {
        q.dist(self.nearest_e1(q))
    }

    /// Range of grid indices `k` with `x0 ≤ kΔ ≤ x1`, clipped to the grid.
    pub fn e1_index_range(&self, x0: f64, x1: f64) -> Option<(usize, usize)> {
        if x1 < 0.0 || x0 > self.e1_point(self.e1_count - 1).x || x0 > x1 {
            return None;
        }
        let last = self.e1_count as i64 - 1;
        let mut lo = (math::ceil(x0 / self.delta) as i64).clamp(0, last);
        while lo > 0 && ((lo - 1) as f64) * self.delta >= x0 {
            lo -= 1;
        }
        while lo <= last && (lo as f64) * self.delta < x0 {
            lo += 1;
        }
        let mut hi = (math::floor(x1 / self.delta) as i64).clamp(0, last);
        while hi < last && ((hi + 1) as f64) * self.delta <= x1 {
            hi += 1;
        }
        while hi >= 0 && (hi as f64) * self.delta > x1 {
            hi -= 1;
        }
        if lo > hi || hi < 0 {
            None
        } else {
            Some((lo as usize, hi as usize))
        }
    }

    /// Counts of `E ∩ r` for a closed rectangle, stopping once `limit` points
    /// are found (the returned total is then `≥ limit`).
    pub fn count_in(&self, r: &Rect, limit: usize) -> RangeCount {
        let mut out = RangeCount::default();
        if r.y0 <= 0.0 && 0.0 <= r.y1 {
            if let Some((lo, hi)) = self.e1_index_range(r.x0, r.x1) {
                out.e1 = hi - lo + 1;
                out.e1_first = Some(lo);
            }
        }
        if out.e1 >= limit {
            return out;
        }
        let start = self.by_x_keys.partition_point(|x| *x < r.x0);
        for j in start..self.by_x.len() {
            if self.by_x_keys[j] > r.x1 {
                break;
            }
            let i = self.by_x[j];
            let pt = self.e2[i].point;
            if pt.y >= r.y0 && pt.y <= r.y1 {
                out.e2 += 1;
                out.e2_first = Some(out.e2_first.map_or(i, |f: usize| f.min(i)));
                if out.total() >= limit {
                    break;
                }
            }
        }
        out
    }

    /// `min dist(x, E2 ∖ {x})` for E2 index `i` (infinite for a single point).
    pub fn dist_to_other_e2(&self, i: usize) -> f64 {
        let x = self.e2[i].point;
        let pos = self.rank[i];
        let mut best = f64::INFINITY;
        for j in (0..pos).rev() {
            if x.x - self.by_x_keys[j] > best {
                break;
            }
            best = best.min(x.dist(self.e2[self.by_x[j]].point));
        }
        for j in pos + 1..self.by_x.len() {
            if self.by_x_keys[j] - x.x > best {
                break;
            }
            best = best.min(x.dist(self.e2[self.by_x[j]].point));
        }
        best
    }
}

/// Outcome of the order and lca-comparability checks on `Ψ`.
#[derive(Clone, Debug, PartialEq)]
pub struct LemmaPsiReport {
    pub order_preserving: bool,
    /// Smallest `K ≥ 1` with `K⁻¹W_lca/N ≤ |ΔΨ| ≤ K·W_lca` over all leaf pairs.
    pub k_measured: f64,
    /// `0 ≤ Ψ < 2` on every leaf.
    pub in_range: bool,
}

/// Checks `Ψ` on all pairs of leaves.
pub fn verify_lemma_psi(tree: &WeightedTree, ps: &PlanarSet) -> LemmaPsiReport {
    let n = tree.arity() as f64;
    let leaves = tree.leaves();
    let mut order = true;
    let mut k: f64 = 1.0;
    for a in 0..leaves.len() {
        let pa = ps.e2[a].point.x;
        for b in a + 1..leaves.len() {
            let pb = ps.e2[b].point.x;
            if !(pa < pb) {
                order = false;
            }
            let w = tree.weight(tree.lca(leaves[a], leaves[b]));
            let d = math::abs(pb - pa);
            k = k.max(d / w).max(if d > 0.0 { w / (n * d) } else { f64::INFINITY });
        }
    }
    let in_range = ps.e2.iter().all(|e| e.point.x >= 0.0 && e.point.x < 2.0);
    LemmaPsiReport { order_preserving: order, k_measured: k, in_range }
}

/// Per-part result of the separation checks.
#[derive(Clone, Debug, PartialEq)]
pub struct LemmaSepReport {
    /// `E ⊂ [0, 2) × [0, 2)`.
    pub contained: bool,
    /// Distinct points of `E` are at distance `≥ Δ`.
    pub separated: bool,
    /// `Δ ≤ x⁽²⁾ ≤ dist(x, E1) ≤ 2x⁽²⁾` for every `x ∈ E2`.
    pub height_vs_e1: bool,
    /// `x⁽²⁾ ≤ dist(x, E2 ∖ {x})` for every `x ∈ E2`.
    pub height_vs_e2: bool,
    /// Minimum pairwise distance observed over `E` divided by `Δ`.
    pub min_separation_ratio: f64,
}

impl LemmaSepReport {
    pub fn all(&self) -> bool {
        self.contained && self.separated && self.height_vs_e1 && self.height_vs_e2
    }
}

pub fn verify_lemma_sep(ps: &PlanarSet) -> LemmaSepReport {
    let delta = ps.delta;
    let last = ps.e1_point(ps.e1_count - 1).x;
    let mut contained = last < 2.0;
    let mut h1 = true;
    let mut h2 = true;
    // E1 spacing is exactly Δ up to rounding of kΔ; measure it on the ends.
    let mut min_sep = if ps.e1_count > 1 { ps.e1_point(1).x - ps.e1_point(0).x } else { f64::INFINITY };
    if ps.e1_count > 1 {
        min_sep = min_sep.min(last - ps.e1_point(ps.e1_count - 2).x);
    }
    for (i, e) in ps.e2.iter().enumerate() {
        let x = e.point;
        contained &= x.x >= 0.0 && x.x < 2.0 && x.y >= 0.0 && x.y < 2.0;
        let d1 = ps.dist_e1(x);
        h1 &= delta <= x.y && x.y <= d1 && d1 <= 2.0 * x.y;
        let d2 = ps.dist_to_other_e2(i);
        h2 &= x.y <= d2;
        min_sep = min_sep.min(d1).min(d2);
    }
    LemmaSepReport {
        contained,
        // Coordinates are O(1) sums, so rounding is absolute, not relative to Δ.
        separated: min_sep >= delta * (1.0 - 1e-12) - 32.0 * f64::EPSILON,
        height_vs_e1: h1,
        height_vs_e2: h2,
        min_separation_ratio: min_sep / delta,
    }
}
