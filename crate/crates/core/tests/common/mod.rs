//! Independent brute-force oracles shared by the integration tests.

use treeplane_core::geometry::{Point, Rect};
use treeplane_core::whitney::DILATE_TOL;
use treeplane_core::{DyadicSquare, PlanarSet, WeightedTree, WhitneyDecomposition};

/// Trees whose smallest leaf weight is at least 1/64, so `E1` has at most
/// 129 points and brute force over `E` is cheap.
pub fn coarse_trees() -> Vec<WeightedTree> {
    vec![
        WeightedTree::from_nodes(2, 0.025, [("", 1.0), ("0", 0.02), ("1", 0.025)]).unwrap(),
        WeightedTree::from_nodes(3, 0.02, [("", 1.0), ("0", 0.0166), ("1", 0.02), ("2", 0.018)]).unwrap(),
        WeightedTree::from_nodes(2, 0.4, [("", 1.0), ("0", 0.3), ("1", 0.4), ("00", 0.1), ("01", 0.08), ("10", 0.0625), ("11", 0.16)])
            .unwrap(),
        WeightedTree::from_nodes(
            3,
            0.3,
            [("", 1.0), ("0", 0.25), ("2", 0.2), ("00", 0.07), ("02", 0.05), ("20", 0.04), ("21", 0.05), ("22", 0.06)],
        )
        .unwrap(),
    ]
}

pub fn materialize(ps: &PlanarSet) -> Vec<Point> {
    (0..ps.e1_count()).map(|k| ps.e1_point(k)).chain(ps.e2().iter().map(|e| e.point)).collect()
}

/// Closed `kQ` widened by the shared `1e-12·δ` convention.
pub fn closed_dilate(q: &DyadicSquare, k: f64) -> Rect {
    let c = q.center();
    let h = 0.5 * k * q.side() + DILATE_TOL * q.side();
    Rect::new(c.x - h, c.x + h, c.y - h, c.y + h)
}

pub fn count(pts: &[Point], r: &Rect) -> usize {
    pts.iter().filter(|p| p.x >= r.x0 && p.x <= r.x1 && p.y >= r.y0 && p.y <= r.y1).count()
}

/// Stopping rule applied square by square from `Q⁰`: split while `3Q` holds
/// two points of `E`.
pub fn naive_squares(pts: &[Point]) -> Vec<DyadicSquare> {
    fn go(pts: &[Point], q: DyadicSquare, out: &mut Vec<DyadicSquare>) {
        if count(pts, &closed_dilate(&q, 3.0)) >= 2 {
            for k in 0..4 {
                go(pts, q.child(k), out);
            }
        } else {
            out.push(q);
        }
    }
    let mut out = Vec::new();
    go(pts, DyadicSquare::ROOT, &mut out);
    out.sort_by_key(|q| (q.level, q.ix, q.iy));
    out
}

pub fn sorted_squares(wd: &WhitneyDecomposition) -> Vec<DyadicSquare> {
    let mut got: Vec<DyadicSquare> = wd.squares().iter().map(|s| s.square).collect();
    got.sort_by_key(|q| (q.level, q.ix, q.iy));
    got
}
