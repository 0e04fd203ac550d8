//! Dyadic Whitney decomposition of `Q⁰ = [−3, 5)²` relative to a planar set.
//!
//! A square is split while its triple `3Q` holds at least two points of `E`.
//! Square arithmetic is exact: every square is `(level, ix, iy)` and all
//! partition and parent/child questions are answered with integers. Only
//! point-membership predicates use floating point, with closed dilates
//! inflated outward by `1e-12·δ_Q`.

mod basepoints;
mod pou;

pub use basepoints::{e2_anchors, AnchorError, Anchors};
pub use pou::{profile, PouTerm};

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::embedding::PlanarSet;
use crate::geometry::{Point, Rect};

/// Lower-left corner of `Q⁰`.
pub const Q0_MIN: f64 = -3.0;
/// Side of `Q⁰`.
pub const Q0_SIDE: f64 = 8.0;
/// Outward tolerance of closed dilates, relative to the square side.
pub const DILATE_TOL: f64 = 1e-12;
/// Default cap on the number of Whitney squares.
pub const DEFAULT_MAX_SQUARES: usize = 5_000_000;

/// Finest level representable by the Morton keys (`δ = 8·2^-60`).
const MAX_LEVEL: u8 = 60;

/// Dyadic square `[−3 + ix·δ, −3 + (ix+1)·δ) × [−3 + iy·δ, −3 + (iy+1)·δ)`
/// with `δ = 8·2^{−level}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicSquare {
    pub level: u8,
    pub ix: u64,
    pub iy: u64,
}

impl DyadicSquare {
    pub const ROOT: DyadicSquare = DyadicSquare { level: 0, ix: 0, iy: 0 };

    pub fn new(level: u8, ix: u64, iy: u64) -> Option<Self> {
        let n = 1u64.checked_shl(level as u32)?;
        (level <= MAX_LEVEL && ix < n && iy < n).then_some(Self { level, ix, iy })
    }

    /// `δ_Q`, exact (a power of two).
    pub fn side(&self) -> f64 {
        Q0_SIDE / (1u64 << self.level) as f64
    }

    pub fn corner(&self) -> Point {
        let s = self.side();
        Point::new(Q0_MIN + self.ix as f64 * s, Q0_MIN + self.iy as f64 * s)
    }

    pub fn center(&self) -> Point {
        let c = self.corner();
        let h = 0.5 * self.side();
        Point::new(c.x + h, c.y + h)
    }

    /// Closure of the square.
    pub fn rect(&self) -> Rect {
        let c = self.corner();
        let s = self.side();
        Rect::new(c.x, c.x + s, c.y, c.y + s)
    }

    /// Closed `kQ` (same centre, side `k·δ_Q`) with the outward tolerance.
    pub fn dilate(&self, k: f64) -> Rect {
        Rect::centered(self.center(), k * self.side()).inflate(DILATE_TOL * self.side())
    }

    /// Half-open membership `x ∈ Q`.
    pub fn contains(&self, x: Point) -> bool {
        let r = self.rect();
        x.x >= r.x0 && x.x < r.x1 && x.y >= r.y0 && x.y < r.y1
    }

    /// `Q⁺`, defined for `level ≥ 1`.
    pub fn parent(&self) -> Option<DyadicSquare> {
        (self.level > 0).then(|| DyadicSquare { level: self.level - 1, ix: self.ix >> 1, iy: self.iy >> 1 })
    }

    /// Child `k ∈ 0..4`, Morton order: bit 0 selects the right half, bit 1
    /// the upper half.
    pub fn child(&self, k: usize) -> DyadicSquare {
        DyadicSquare { level: self.level + 1, ix: 2 * self.ix + (k as u64 & 1), iy: 2 * self.iy + ((k as u64 >> 1) & 1) }
    }

    pub fn children(&self) -> [DyadicSquare; 4] {
        [self.child(0), self.child(1), self.child(2), self.child(3)]
    }

    /// Whether the closed square meets `∂Q⁰`.
    pub fn touches_boundary(&self) -> bool {
        let last = (1u64 << self.level) - 1;
        self.ix == 0 || self.iy == 0 || self.ix == last || self.iy == last
    }

    /// Half-open Morton interval covered at the finest level.
    pub fn morton_interval(&self) -> (u128, u128) {
        let shift = 2 * (MAX_LEVEL - self.level) as u32;
        let start = interleave(self.ix, self.iy) << shift;
        (start, start + (1u128 << shift))
    }

    /// Whether the closed squares share a boundary point (exact).
    pub fn closures_meet(&self, o: &DyadicSquare) -> bool {
        // Compare at the finer level with integer coordinates.
        let l = self.level.max(o.level);
        let (a0x, a0y, a1) = scaled(self, l);
        let (b0x, b0y, b1) = scaled(o, l);
        a0x <= b0x + b1 && b0x <= a0x + a1 && a0y <= b0y + b1 && b0y <= a0y + a1
    }
}

fn scaled(q: &DyadicSquare, l: u8) -> (u128, u128, u128) {
    let s = (l - q.level) as u32;
    ((q.ix as u128) << s, (q.iy as u128) << s, 1u128 << s)
}

fn interleave(x: u64, y: u64) -> u128 {
    let mut out = 0u128;
    for b in 0..64 {
        out |= (((x >> b) & 1) as u128) << (2 * b);
        out |= (((y >> b) & 1) as u128) << (2 * b + 1);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SquareType {
    /// `1.1Q` holds exactly one point of `E1`.
    I,
    /// `1.1Q` holds exactly one point of `E2`.
    II,
    /// `1.1Q` holds no point of `E`.
    III,
}

impl SquareType {
    pub fn label(&self) -> &'static str {
        match self {
            SquareType::I => "I",
            SquareType::II => "II",
            SquareType::III => "III",
        }
    }
}

/// Per-square record.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WhitneySquare {
    pub square: DyadicSquare,
    pub kind: SquareType,
    /// Grid index of the E1 witness (Type I) or E2 index of `x_Q` (Type II).
    pub witness: Option<usize>,
    pub boundary: bool,
    /// Grid indices of `z_Q` and `w_Q`.
    pub z: usize,
    pub w: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WhitneyError {
    #[error("decomposition needs {required}{} squares, cap is {cap}; raise the cap to at least that", if *.exact { "" } else { "+" })]
    TooManySquares { required: usize, exact: bool, cap: usize },
    #[error("the planar set has {0} points; a decomposition needs at least 2")]
    TooFewPoints(usize),
    #[error("square {square:?}: 1.1Q holds {count} points of E")]
    Classification { square: DyadicSquare, count: usize },
    #[error("refinement reached level {0}, finer than representable")]
    TooDeep(u8),
    #[error(transparent)]
    Anchor(#[from] AnchorError),
}

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug)]
struct QNode {
    children: [u32; 4],
    /// Square index for leaves, `NONE` for internal nodes.
    leaf: u32,
}

#[derive(Clone, Debug)]
pub struct WhitneyDecomposition {
    squares: Vec<WhitneySquare>,
    nodes: Vec<QNode>,
    nbr_offsets: Vec<u32>,
    nbr_list: Vec<u32>,
    e1_count: usize,
    anchors: Vec<Anchors>,
}

impl WhitneyDecomposition {
    /// Decomposes `Q⁰` relative to `E` with the default square cap.
    pub fn build(ps: &PlanarSet) -> Result<Self, WhitneyError> {
        Self::build_with_cap(ps, DEFAULT_MAX_SQUARES)
    }

    pub fn build_with_cap(ps: &PlanarSet, cap: usize) -> Result<Self, WhitneyError> {
        let npts = ps.e1_count() + ps.e2().len();
        if npts < 2 {
            return Err(WhitneyError::TooFewPoints(npts));
        }
        let mut b = Builder { ps, cap, squares: Vec::new(), nodes: Vec::new(), overflow: 0, deepest: 0 };
        b.visit(DyadicSquare::ROOT);
        if b.deepest > MAX_LEVEL {
            return Err(WhitneyError::TooDeep(b.deepest));
        }
        if b.overflow > 0 {
            let required = b.squares.len() + b.overflow;
            return Err(WhitneyError::TooManySquares { required, exact: b.overflow < COUNT_LIMIT, cap });
        }
        let squares_raw = b.squares;
        let nodes = b.nodes;
        let anchors: Vec<Anchors> = (0..ps.e2().len()).map(|i| e2_anchors(ps, ps.e2_point(i))).collect::<Result<_, _>>()?;
        let mut squares = Vec::with_capacity(squares_raw.len());
        for sq in squares_raw {
            let c = ps.count_in(&sq.dilate(1.1), 2);
            let (kind, witness) = match (c.e1, c.e2) {
                (0, 0) => (SquareType::III, None),
                (1, 0) => (SquareType::I, c.e1_first),
                (0, 1) => (SquareType::II, c.e2_first),
                _ => return Err(WhitneyError::Classification { square: sq, count: c.total() }),
            };
            let boundary = sq.touches_boundary();
            let (z, w) = basepoints::assign(ps, &sq, kind, witness, boundary, &anchors);
            squares.push(WhitneySquare { square: sq, kind, witness, boundary, z, w });
        }
        let mut wd = Self { squares, nodes, nbr_offsets: Vec::new(), nbr_list: Vec::new(), e1_count: ps.e1_count(), anchors };
        wd.build_neighbors();
        Ok(wd)
    }

    fn build_neighbors(&mut self) {
        let mut offsets = Vec::with_capacity(self.squares.len() + 1);
        let mut list = Vec::with_capacity(self.squares.len() * 9);
        let mut buf = Vec::new();
        offsets.push(0u32);
        for i in 0..self.squares.len() {
            buf.clear();
            let r = self.squares[i].square.dilate(1.1);
            self.query_dilates(&r, 1.1, &mut buf);
            buf.sort_unstable();
            list.extend(buf.iter().map(|j| *j as u32));
            offsets.push(list.len() as u32);
        }
        self.nbr_offsets = offsets;
        self.nbr_list = list;
    }

    pub fn len(&self) -> usize {
        self.squares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.squares.is_empty()
    }

    pub fn squares(&self) -> &[WhitneySquare] {
        &self.squares
    }

    pub fn square(&self, i: usize) -> &WhitneySquare {
        &self.squares[i]
    }

    /// Number of points of `E1`.
    pub fn e1_count(&self) -> usize {
        self.e1_count
    }

    /// `(z_x, w_x)` for every point of `E2`, in E2 order.
    pub fn e2_anchors(&self) -> &[Anchors] {
        &self.anchors
    }

    /// Squares `Q′` with `1.1Q ∩ 1.1Q′ ≠ ∅`, including `Q` itself, sorted.
    pub fn neighbors(&self, i: usize) -> impl ExactSizeIterator<Item = usize> + '_ {
        let (a, b) = (self.nbr_offsets[i] as usize, self.nbr_offsets[i + 1] as usize);
        self.nbr_list[a..b].iter().map(|j| *j as usize)
    }

    pub fn neighbor_count(&self, i: usize) -> usize {
        (self.nbr_offsets[i + 1] - self.nbr_offsets[i]) as usize
    }

    /// Index of the square containing `x`, or `None` outside `Q⁰`.
    pub fn locate(&self, x: Point) -> Option<usize> {
        if !DyadicSquare::ROOT.contains(x) {
            return None;
        }
        let mut node = 0usize;
        let mut sq = DyadicSquare::ROOT;
        loop {
            let n = self.nodes[node];
            if n.leaf != NONE {
                return Some(n.leaf as usize);
            }
            let c = sq.center();
            let k = (x.x >= c.x) as usize | (((x.y >= c.y) as usize) << 1);
            sq = sq.child(k);
            node = n.children[k] as usize;
        }
    }

    /// Index of an exact square of the decomposition.
    pub fn find(&self, q: &DyadicSquare) -> Option<usize> {
        let i = self.locate(q.center())?;
        (self.squares[i].square == *q).then_some(i)
    }

    /// Appends every square whose closed `k`-dilate meets `r` (`k ≥ 1`).
    pub fn query_dilates(&self, r: &Rect, k: f64, out: &mut Vec<usize>) {
        let grow = 0.5 * (k - 1.0) + DILATE_TOL;
        let mut stack = vec![(0usize, DyadicSquare::ROOT)];
        while let Some((node, sq)) = stack.pop() {
            let region = sq.rect().inflate(grow * sq.side());
            if !region.intersects(r) {
                continue;
            }
            let n = self.nodes[node];
            if n.leaf != NONE {
                if sq.dilate(k).intersects(r) {
                    out.push(n.leaf as usize);
                }
                continue;
            }
            for (c, child) in n.children.iter().zip(sq.children()) {
                stack.push((*c as usize, child));
            }
        }
    }

    /// Exact partition check: the Morton intervals of the squares tile
    /// `Q⁰`'s interval with no gap or overlap.
    pub fn partition_is_exact(&self) -> bool {
        let mut iv: Vec<(u128, u128)> = self.squares.iter().map(|s| s.square.morton_interval()).collect();
        iv.sort_unstable();
        let (start, end) = DyadicSquare::ROOT.morton_interval();
        let mut cur = start;
        for (a, b) in iv {
            if a != cur {
                return false;
            }
            cur = b;
        }
        cur == end
    }
}

/// Counting past the cap stops here.
const COUNT_LIMIT: usize = 1 << 30;

struct Builder<'a> {
    ps: &'a PlanarSet,
    cap: usize,
    squares: Vec<DyadicSquare>,
    nodes: Vec<QNode>,
    overflow: usize,
    deepest: u8,
}

impl Builder<'_> {
    fn split(&self, sq: &DyadicSquare) -> bool {
        self.ps.count_in(&sq.dilate(3.0), 2).total() >= 2
    }

    fn visit(&mut self, sq: DyadicSquare) -> u32 {
        if sq.level > MAX_LEVEL {
            self.deepest = sq.level;
            return NONE;
        }
        let idx = self.nodes.len() as u32;
        let storing = self.overflow == 0;
        if storing {
            self.nodes.push(QNode { children: [NONE; 4], leaf: NONE });
        }
        if self.split(&sq) {
            for k in 0..4 {
                let c = self.visit(sq.child(k));
                if self.overflow == 0 {
                    self.nodes[idx as usize].children[k] = c;
                }
                if self.overflow >= COUNT_LIMIT || self.deepest > MAX_LEVEL {
                    return idx;
                }
            }
        } else if self.squares.len() < self.cap && storing {
            self.nodes[idx as usize].leaf = self.squares.len() as u32;
            self.squares.push(sq);
        } else {
            self.overflow += 1;
        }
        idx
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::WeightedTree;

    fn depth1(eps: f64) -> (WeightedTree, PlanarSet) {
        let t = WeightedTree::from_nodes(2, eps, vec![("", 1.0), ("0", eps), ("1", eps)]).unwrap();
        let ps = PlanarSet::build(&t).unwrap();
        (t, ps)
    }

    #[test]
    fn square_geometry_is_exact() {
        let q = DyadicSquare::new(3, 5, 2).unwrap();
        assert_eq!(q.side(), 1.0);
        assert_eq!(q.corner(), Point::new(2.0, -1.0));
        assert_eq!(q.parent(), DyadicSquare::new(2, 2, 1));
        assert!(q.children().iter().all(|c| c.parent() == Some(q)));
        assert!(DyadicSquare::new(2, 4, 0).is_none());
        assert!(DyadicSquare::ROOT.parent().is_none());
    }

    #[test]
    fn decomposition_invariants_depth1() {
        let (_, ps) = depth1(0.05);
        let wd = WhitneyDecomposition::build(&ps).unwrap();
        assert!(wd.partition_is_exact());
        let delta = ps.delta();
        for (i, s) in wd.squares().iter().enumerate() {
            assert!(s.square.side() >= delta / 20.0);
            if s.boundary {
                assert!(s.square.side() >= 1.0);
                assert_eq!(s.kind, SquareType::III);
                assert_eq!((s.z, s.w), (0, ps.e1_count() - 1));
            }
            assert!(wd.neighbors(i).any(|j| j == i));
            for j in wd.neighbors(i) {
                let (a, b) = (s.square.side(), wd.square(j).square.side());
                assert!(a <= 2.0 * b && b <= 2.0 * a);
                assert!(s.square.closures_meet(&wd.square(j).square));
                assert!(wd.neighbors(j).any(|k| k == i));
            }
            assert_eq!(wd.locate(s.square.center()), Some(i));
        }
    }

    #[test]
    fn too_small_cap_reports_requirement() {
        let (_, ps) = depth1(0.05);
        let n = WhitneyDecomposition::build(&ps).unwrap().len();
        match WhitneyDecomposition::build_with_cap(&ps, 10) {
            Err(WhitneyError::TooManySquares { required, exact: true, cap: 10 }) => assert_eq!(required, n),
            other => panic!("{other:?}"),
        }
    }
}
