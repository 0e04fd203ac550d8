use treeplane_core::embedding::{psi_all, psi_closed_sum, verify_lemma_psi, verify_lemma_sep};
mod common;

use common::{closed_dilate, coarse_trees, count, materialize, naive_squares, sorted_squares};
use treeplane_core::geometry::Rect;
use treeplane_core::{DyadicSquare, PlanarSet, SquareType, WeightedTree, WhitneyDecomposition};

#[test]
fn decomposition_matches_naive_enumerator() {
    for t in coarse_trees() {
        let ps = PlanarSet::build(&t).unwrap();
        assert!(ps.delta() >= 1.0 / 64.0);
        let pts = materialize(&ps);
        let wd = WhitneyDecomposition::build(&ps).unwrap();
        assert_eq!(sorted_squares(&wd), naive_squares(&pts));
        let n1 = ps.e1_count();
        for s in wd.squares() {
            let r = closed_dilate(&s.square, 1.1);
            let e1 = count(&pts[..n1], &r);
            let e2 = count(&pts[n1..], &r);
            let kind = match (e1, e2) {
                (0, 0) => SquareType::III,
                (1, 0) => SquareType::I,
                (0, 1) => SquareType::II,
                _ => panic!("1.1Q holds {} points", e1 + e2),
            };
            assert_eq!(s.kind, kind, "{:?}", s.square);
            if kind == SquareType::II {
                let w = s.witness.unwrap();
                assert_eq!(count(&[pts[n1 + w]], &r), 1);
            }
        }
    }
}

#[test]
fn neighbours_match_pairwise_scan() {
    for t in coarse_trees().into_iter().take(2) {
        let ps = PlanarSet::build(&t).unwrap();
        let wd = WhitneyDecomposition::build(&ps).unwrap();
        let rects: Vec<Rect> = wd.squares().iter().map(|s| closed_dilate(&s.square, 1.1)).collect();
        for i in 0..wd.len() {
            let want: Vec<usize> = (0..wd.len()).filter(|&j| rects[i].intersects(&rects[j])).collect();
            let got: Vec<usize> = wd.neighbors(i).collect();
            assert_eq!(got, want, "square {i}");
        }
    }
}

#[test]
fn interior_square_of_uniform_block_has_nine_neighbours() {
    let t = &coarse_trees()[0];
    let ps = PlanarSet::build(t).unwrap();
    let wd = WhitneyDecomposition::build(&ps).unwrap();
    let mut found = 0;
    for (i, s) in wd.squares().iter().enumerate() {
        let q = s.square;
        let n = 1i64 << q.level;
        let block = (-1i64..=1).all(|dx| {
            (-1i64..=1).all(|dy| {
                let (x, y) = (q.ix as i64 + dx, q.iy as i64 + dy);
                (0..n).contains(&x) && (0..n).contains(&y) && wd.find(&DyadicSquare::new(q.level, x as u64, y as u64).unwrap()).is_some()
            })
        });
        // The 5×5 ring around the block must hold no smaller square touching
        // the 1.1-dilate; requiring it to be same-size or larger suffices.
        let ring_ok = (-2i64..=2).all(|dx| {
            (-2i64..=2).all(|dy| {
                let (x, y) = (q.ix as i64 + dx, q.iy as i64 + dy);
                if !(0..n).contains(&x) || !(0..n).contains(&y) {
                    return true;
                }
                let c = DyadicSquare::new(q.level, x as u64, y as u64).unwrap().center();
                wd.square(wd.locate(c).unwrap()).square.level <= q.level
            })
        });
        if block && ring_ok {
            assert_eq!(wd.neighbor_count(i), 9, "{q:?}");
            found += 1;
        }
    }
    assert!(found > 0);
}

#[test]
fn decomposition_lemmas_on_canonical_depth1() {
    for n in [2usize, 3] {
        for e in [0.01, 0.02, 0.05] {
            let t = WeightedTree::random(n, 1, e / n as f64, 1).unwrap();
            let ps = PlanarSet::build(&t).unwrap();
            let wd = WhitneyDecomposition::build(&ps).unwrap();
            let (checks, stats) = treeplane_core::verify::whitney_checks(&ps, &wd);
            for c in &checks {
                assert!(c.passed, "{}: {}", c.name, c.detail);
            }
            assert!(stats.max_neighbors <= 12);
            assert!(stats.min_side_over_delta >= 1.0 / 20.0);
            assert!(stats.dist_bd.0 > 0.0 && stats.dist_bd.1.is_finite());
        }
    }
}

#[test]
fn psi_recursion_matches_closed_sum() {
    for seed in 0..10 {
        let t = WeightedTree::random(3, 4, 0.01, seed).unwrap();
        let all = psi_all(&t);
        for v in t.nodes() {
            let a = all[v.index()];
            let b = psi_closed_sum(&t, v);
            assert!((a - b).abs() <= 1e-15 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }
}

#[test]
fn psi_and_separation_lemmas_hold_on_random_trees() {
    for seed in 0..20 {
        for (n, depth) in [(2, 3), (3, 3), (4, 2)] {
            let t = WeightedTree::random(n, depth, 0.05 / n as f64, seed).unwrap();
            let ps = PlanarSet::build(&t).unwrap();
            let psi = verify_lemma_psi(&t, &ps);
            assert!(psi.order_preserving && psi.in_range);
            assert!(psi.k_measured <= 10.0, "K = {}", psi.k_measured);
            let sep = verify_lemma_sep(&ps);
            assert!(sep.all(), "{sep:?}");
        }
    }
}
