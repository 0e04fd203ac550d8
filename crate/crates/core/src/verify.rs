//! One-shot verification of every geometric property of an instance.
//!
//! Exact checks are zero-tolerance predicates (with the `1e-12·δ` dilate
//! convention); measured checks compare an observed constant against a
//! pinned bound.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::clusters::BallProperty;
use crate::embedding::{verify_lemma_psi, verify_lemma_sep, PlanarSet};
use crate::geometry::{Point, Rect};
use crate::math;
use crate::operators::Instance;
use crate::whitney::{SquareType, WhitneyDecomposition};

/// Dilation containing every basepoint.
pub const BASEPOINT_DILATION: f64 = 50.0;
/// Pinned bounds of the measured constants.
pub const MAX_PSI_K: f64 = 10.0;
pub const MAX_NEIGHBORS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckKind {
    Exact,
    Measured,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub kind: CheckKind,
    pub passed: bool,
    pub detail: String,
}

/// Measured constants of the Whitney decomposition.
#[derive(Clone, Debug, PartialEq)]
pub struct WhitneyStats {
    pub squares: usize,
    pub min_side_over_delta: f64,
    /// Neighbours excluding the square itself.
    pub max_neighbors: usize,
    /// Largest number of closed `1.1Q` containing one square's centre or
    /// corners.
    pub max_cover: usize,
    /// `δ_Q / (Δ + dist(Q, E1))` extremes over all squares.
    pub dist_bd: (f64, f64),
    /// `δ_Q / dist(Q, E)` extremes over non-boundary Type III squares.
    pub type3_ratio: (f64, f64),
    /// `|z_Q − w_Q| / δ_Q` extremes.
    pub basepoint_ratio: (f64, f64),
    pub counts: [usize; 3],
    pub boundary: usize,
}

/// `dist(r, E1)`.
pub fn rect_dist_e1(ps: &PlanarSet, r: &Rect) -> f64 {
    let dy = if r.y0 <= 0.0 && 0.0 <= r.y1 { 0.0 } else { r.y0.abs().min(r.y1.abs()) };
    let dx = if ps.e1_index_range(r.x0, r.x1).is_some() {
        0.0
    } else {
        let a = math::abs(ps.nearest_e1(Point::new(r.x0, 0.0)).x - r.x0);
        let b = math::abs(ps.nearest_e1(Point::new(r.x1, 0.0)).x - r.x1);
        a.min(b)
    };
    math::hypot(dx, dy)
}

/// `dist(r, E)`.
pub fn rect_dist_e(ps: &PlanarSet, r: &Rect) -> f64 {
    ps.e2().iter().map(|e| r.dist_to_point(e.point)).fold(rect_dist_e1(ps, r), f64::min)
}

fn extremes(it: impl Iterator<Item = f64>) -> (f64, f64) {
    it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)))
}

/// Exact decomposition checks plus the measured constants.
pub fn whitney_checks(ps: &PlanarSet, wd: &WhitneyDecomposition) -> (Vec<Check>, WhitneyStats) {
    let delta = ps.delta();
    let mut out = Vec::new();
    let mut check = |name, passed, detail: String| out.push(Check { name, kind: CheckKind::Exact, passed, detail });
    check("whitney partition exact", wd.partition_is_exact(), format!("{} squares", wd.len()));

    let (mut cz1, mut parent3, mut cz2, mut sides, mut bdry, mut bdry3, mut inside, mut type1) =
        (0usize, 0usize, 0usize, 0usize, 0usize, 0usize, 0usize, 0usize);
    let mut max_nb = 0usize;
    let mut counts = [0usize; 3];
    let mut nboundary = 0;
    let mut buf = Vec::new();
    let mut max_cover = 0usize;
    for (i, s) in wd.squares().iter().enumerate() {
        let sq = s.square;
        let side = sq.side();
        if ps.count_in(&sq.dilate(1.1), 2).total() > 1 {
            cz1 += 1;
        }
        if let Some(parent) = sq.parent() {
            if ps.count_in(&parent.dilate(3.0), 2).total() < 2 {
                parent3 += 1;
            }
        }
        for j in wd.neighbors(i) {
            let o = wd.square(j).square;
            if !(o.side() * 2.0 >= side && o.side() <= 2.0 * side && sq.closures_meet(&o)) {
                cz2 += 1;
            }
        }
        max_nb = max_nb.max(wd.neighbor_count(i) - 1);
        if side < delta / 20.0 {
            sides += 1;
        }
        counts[match s.kind {
            SquareType::I => 0,
            SquareType::II => 1,
            SquareType::III => 2,
        }] += 1;
        if s.boundary {
            nboundary += 1;
            if side < 1.0 {
                bdry += 1;
            }
            if s.kind != SquareType::III {
                bdry3 += 1;
            }
        }
        let big = sq.dilate(BASEPOINT_DILATION);
        if !(big.contains(ps.e1_point(s.z)) && big.contains(ps.e1_point(s.w))) {
            inside += 1;
        }
        if s.kind == SquareType::I && !s.boundary {
            let z = ps.e1_point(s.z);
            let gap = math::abs(ps.e1_point(s.w).x - z.x);
            if !(sq.dilate(1.1).contains(z) && math::abs(gap - delta) <= 1e-12 * delta.max(z.x)) {
                type1 += 1;
            }
        }
        let r = sq.rect();
        for pt in r.corners().into_iter().chain([r.center()]) {
            buf.clear();
            wd.query_dilates(&Rect::new(pt.x, pt.x, pt.y, pt.y), 1.1, &mut buf);
            max_cover = max_cover.max(buf.len());
        }
    }
    check("cz1: #(1.1Q ∩ E) <= 1", cz1 == 0, format!("{cz1} violations"));
    check("cz1: #(3Q+ ∩ E) >= 2", parent3 == 0, format!("{parent3} violations"));
    check("cz2: neighbour sides within 2x and touching", cz2 == 0, format!("{cz2} violations"));
    check("side >= Delta/20", sides == 0, format!("{sides} violations"));
    check("boundary side >= 1", bdry == 0, format!("{bdry} violations"));
    check("boundary squares are type III", bdry3 == 0, format!("{bdry3} violations"));
    check("basepoints in 50Q", inside == 0, format!("{inside} violations"));
    check("type I basepoints adjacent", type1 == 0, format!("{type1} violations"));

    let dist_bd = extremes(wd.squares().iter().map(|s| s.square.side() / (delta + rect_dist_e1(ps, &s.square.rect()))));
    let type3_ratio = extremes(
        wd.squares()
            .iter()
            .filter(|s| s.kind == SquareType::III && !s.boundary)
            .map(|s| s.square.side() / rect_dist_e(ps, &s.square.rect())),
    );
    let basepoint_ratio = extremes(wd.squares().iter().map(|s| ps.e1_point(s.z).dist(ps.e1_point(s.w)) / s.square.side()));
    let min_side = wd.squares().iter().map(|s| s.square.side()).fold(f64::INFINITY, f64::min);
    let stats = WhitneyStats {
        squares: wd.len(),
        min_side_over_delta: min_side / delta,
        max_neighbors: max_nb,
        max_cover,
        dist_bd,
        type3_ratio,
        basepoint_ratio,
        counts,
        boundary: nboundary,
    };
    (out, stats)
}

/// Measured constants of the whole instance.
#[derive(Clone, Debug, PartialEq)]
pub struct Measured {
    pub psi_k: f64,
    pub whitney: WhitneyStats,
    pub k1: f64,
    pub b4_min_ratio: f64,
    pub diam_ratio: (f64, f64),
    pub ambiguous_descents: usize,
    /// `(p, max_C R_C)`.
    pub max_rc: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub measured: Measured,
}

impl VerifyReport {
    pub fn exact_passed(&self) -> bool {
        self.checks.iter().filter(|c| c.kind == CheckKind::Exact).all(|c| c.passed)
    }

    pub fn measured_passed(&self) -> bool {
        self.checks.iter().filter(|c| c.kind == CheckKind::Measured).all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Runs every exact lemma check and records the measured constants; `ps`
/// lists the exponents for the `R_C` sums.
pub fn verify_instance(inst: &Instance, exponents: &[f64]) -> VerifyReport {
    let (tree, ps, wd, ct, asg) = (&inst.tree, &inst.ps, &inst.wd, &inst.ct, &inst.asg);
    let mut checks = Vec::new();
    let exact = |name, passed, detail| Check { name, kind: CheckKind::Exact, passed, detail };

    let psi = verify_lemma_psi(tree, ps);
    checks.push(exact("psi order preserving", psi.order_preserving && psi.in_range, format!("K = {:.4}", psi.k_measured)));
    let sep = verify_lemma_sep(ps);
    checks.push(exact("sep 1: E in [0,2)^2", sep.contained, String::new()));
    checks.push(exact("sep 2: separation >= Delta", sep.separated, format!("min/Delta = {:.4}", sep.min_separation_ratio)));
    checks.push(exact("sep 3: heights vs E1 and E2", sep.height_vs_e1 && sep.height_vs_e2, String::new()));

    let (wchecks, wstats) = whitney_checks(ps, wd);
    checks.extend(wchecks);

    let rep = ct.report();
    for (p, name) in [
        (BallProperty::B1, "B1: C in B_C / kappa"),
        (BallProperty::B2, "B2: kappa B_C in B_parent"),
        (BallProperty::B3, "B3: diam B_C = 2 K1 kappa W_C"),
        (BallProperty::B4, "B4: K0-dilates of disjoint clusters separated"),
        (BallProperty::B5, "B5: leaf K0-dilates disjoint"),
        (BallProperty::B6, "B6: same-depth K0-dilates disjoint"),
        (BallProperty::RootCoversQ0, "Q0 in B_E2"),
    ] {
        let n = rep.count(p);
        checks.push(exact(name, n == 0, format!("{n} violations")));
    }
    let lem = asg.check_lemma(ct, tree, wd);
    checks.push(exact("cluster A: type II maps to its leaf", lem.a_failures == 0, format!("{}/{}", lem.a_failures, lem.type_ii)));
    checks.push(exact("cluster B: boundary maps to root", lem.b_failures == 0, format!("{}/{}", lem.b_failures, lem.boundary)));
    checks.push(exact(
        "cluster C: straddling neighbours are parent/child",
        lem.c_failures == 0,
        format!("{}/{}", lem.c_failures, lem.straddling_pairs),
    ));

    let measured = |name, passed, detail| Check { name, kind: CheckKind::Measured, passed, detail };
    checks.push(measured("psi K <= 10", psi.k_measured <= MAX_PSI_K, format!("K = {:.4}", psi.k_measured)));
    checks.push(measured("neighbour count <= 12", wstats.max_neighbors <= MAX_NEIGHBORS, format!("max {}", wstats.max_neighbors)));
    checks.push(measured("cover multiplicity <= 12", wstats.max_cover <= MAX_NEIGHBORS, format!("max {}", wstats.max_cover)));

    let sets = asg.pair_sets(ct, wd, exponents);
    let max_rc = (0..exponents.len()).map(|k| (exponents[k], sets.max_ratio(k))).collect();
    VerifyReport {
        checks,
        measured: Measured {
            psi_k: psi.k_measured,
            whitney: wstats,
            k1: ct.k1(),
            b4_min_ratio: rep.b4_min_ratio,
            diam_ratio: rep.diam_ratio,
            ambiguous_descents: asg.ambiguous,
            max_rc,
        },
    }
}
