//! Acceptance criteria 1–6 on the canonical suite.
//!
//! Prints one `PASS`/`FAIL` line per criterion and exits non-zero when any
//! criterion fails. Infeasible configurations are listed with the Whitney
//! square cap they would need.

#![allow(clippy::needless_range_loop)]

mod common;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use treeplane_core::analysis::{
    ball_average_monte_carlo, ball_estimate_sums, patching_constant, random_affine_family, Derivative, DiskRule, GaussianBumpField,
};
use treeplane_core::extension::{brute_force_extension, harmonic_extension_p2, optimal_extension};
use treeplane_core::geometry::Point;
use treeplane_core::interpolant::Field;
use treeplane_core::operators::{
    lift_to_tree, planar_extend, restriction_error, run_trial, tree_extend_from_planar, ExperimentConfig, Instance, InstanceConfig,
    OperatorError, PlanarData, TrialRow,
};
use treeplane_core::tree::{tree_energy, LeafFunction, NodeId};
use treeplane_core::verify::verify_instance;
use treeplane_core::whitney::WhitneyError;
use treeplane_core::{AffinePolynomial, ExtensionBackend, PlanarSet, SolverConfig, WeightedTree, WhitneyDecomposition};

/// Pinned tolerances; none is tuned to observed values.
mod tol {
    pub const TREE_SEED: u64 = 7;
    pub const TRIAL_SEED: u64 = 2024;
    pub const EXPONENTS: [f64; 3] = [1.25, 1.5, 1.75];
    pub const ARITIES: [usize; 2] = [2, 3];
    pub const DEPTHS: [usize; 3] = [1, 2, 3];
    /// `ε = m / N`.
    pub const EPS_MULTIPLIERS: [f64; 3] = [0.01, 0.02, 0.05];

    pub const PSI_K: f64 = 10.0;
    pub const NEIGHBORS: usize = 12;
    pub const RC_SPREAD: f64 = 2.0;
    pub const CMEAS_SPREAD: f64 = 3.0;
    pub const CMEAS_FAMILIES: u64 = 5;

    pub const SOLVER_GAP: f64 = 1e-3;
    pub const P2_LINEAR: f64 = 1e-8;
    pub const MC_SAMPLES: usize = 1_000_000;
    /// Three significant digits.
    pub const MC_REL: f64 = 5e-3;
    pub const FD_STEP: f64 = 1e-5;
    pub const FD_REL: f64 = 1e-4;
    pub const FD_POINTS: usize = 1_000;
    pub const POU_SUM: f64 = 1e-12;
    pub const POU_POINTS: usize = 10_000;

    pub const RESTRICTION: f64 = 1e-9;
    pub const E1_SAMPLES: usize = 10_000;
    pub const AFFINE: f64 = 1e-10;
    pub const ZERO: f64 = 1e-12;

    pub const TRIALS: usize = 50;
    pub const RHO_TREE_FLOOR: f64 = 1.0 - 1e-6;
    pub const RHO_SPREAD: f64 = 5.0;

    pub const QUAD_REL: f64 = 0.01;
    pub const BUMP_FIELDS: u64 = 10;
    pub const BUMPS: usize = 6;
    /// Fixed before any run: the ball-estimate ratio may vary across fields
    /// by at most this factor (max over median).
    pub const BALL_EST_SPREAD: f64 = 10.0;
}

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self { passed, detail: detail.into() }
    }
}

/// Accumulates sub-checks of one criterion.
#[derive(Default)]
struct Criterion {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Criterion {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if ok {
            self.notes.push(what);
        } else {
            self.failures.push(what);
        }
    }

    fn finish(self) -> Outcome {
        let passed = self.failures.is_empty();
        let mut lines = self.failures.iter().map(|f| format!("FAILED {f}")).collect::<Vec<_>>();
        lines.extend(self.notes.iter().map(|n| format!("ok {n}")));
        Outcome::new(passed, lines.join("\n    "))
    }
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn spread(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

fn canonical_tree(n: usize, depth: usize, mult: f64) -> WeightedTree {
    WeightedTree::random(n, depth, mult / n as f64, tol::TREE_SEED).expect("canonical tree")
}

fn uniform_q0(rng: &mut ChaCha8Rng, n: usize) -> Vec<Point> {
    (0..n).map(|_| Point::new(rng.random_range(-3.0..5.0), rng.random_range(-3.0..5.0))).collect()
}

/// Everything measured on one feasible canonical instance.
struct SuiteEntry {
    n: usize,
    depth: usize,
    mult: f64,
    squares: usize,
    exact_failures: Vec<String>,
    psi_k: f64,
    max_neighbors: usize,
    max_rc: Vec<(f64, f64)>,
    rows: Vec<TrialRow>,
    trial_errors: Vec<String>,
}

struct Skipped {
    n: usize,
    depth: usize,
    mult: f64,
    reason: String,
}

fn run_suite() -> (Vec<SuiteEntry>, Vec<Skipped>) {
    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    let backend = ExtensionBackend::Optimal(SolverConfig::default());
    let cfg = ExperimentConfig::default();
    for &depth in &tol::DEPTHS {
        for &n in &tol::ARITIES {
            for &mult in &tol::EPS_MULTIPLIERS {
                let t0 = Instant::now();
                let inst = match Instance::build(canonical_tree(n, depth, mult), &InstanceConfig::default()) {
                    Ok(i) => i,
                    Err(OperatorError::Whitney(e @ WhitneyError::TooManySquares { .. })) => {
                        skipped.push(Skipped { n, depth, mult, reason: e.to_string() });
                        continue;
                    }
                    Err(e) => panic!("N={n} depth={depth} eps={mult}/N: {e}"),
                };
                let report = verify_instance(&inst, &tol::EXPONENTS);
                let mut rows = Vec::new();
                let mut trial_errors = Vec::new();
                for &p in &tol::EXPONENTS {
                    let out: Vec<_> =
                        (0..tol::TRIALS).into_par_iter().map(|t| run_trial(&inst, p, tol::TRIAL_SEED, t, &backend, &cfg)).collect();
                    for (t, r) in out.into_iter().enumerate() {
                        match r {
                            Ok(row) => rows.push(row),
                            Err(e) => trial_errors.push(format!("N={n} depth={depth} eps={mult}/N p={p} trial {t}: {e}")),
                        }
                    }
                }
                eprintln!("  instance N={n} depth={depth} eps={mult}/N: {} squares, {:.1}s", inst.wd.len(), t0.elapsed().as_secs_f64());
                entries.push(SuiteEntry {
                    n,
                    depth,
                    mult,
                    squares: inst.wd.len(),
                    exact_failures: report
                        .failures()
                        .filter(|c| c.kind == treeplane_core::verify::CheckKind::Exact)
                        .map(|c| format!("{} ({})", c.name, c.detail))
                        .collect(),
                    psi_k: report.measured.psi_k,
                    max_neighbors: report.measured.whitney.max_neighbors,
                    max_rc: report.measured.max_rc.clone(),
                    rows,
                    trial_errors,
                });
            }
        }
    }
    (entries, skipped)
}

fn criterion1(entries: &[SuiteEntry], skipped: &[Skipped]) -> Outcome {
    let mut c = Criterion::default();
    for e in entries {
        c.check(
            e.exact_failures.is_empty(),
            format!(
                "N={} depth={} eps={}/N ({} squares): {}",
                e.n,
                e.depth,
                e.mult,
                e.squares,
                if e.exact_failures.is_empty() { "all exact checks".to_string() } else { e.exact_failures.join("; ") }
            ),
        );
    }
    for s in skipped {
        c.notes.push(format!("skipped N={} depth={} eps={}/N: {}", s.n, s.depth, s.mult, s.reason));
    }
    c.finish()
}

fn criterion2(entries: &[SuiteEntry]) -> Outcome {
    let mut c = Criterion::default();
    let k = entries.iter().map(|e| e.psi_k).fold(0.0, f64::max);
    c.check(k <= tol::PSI_K, format!("psi K max {k:.4} <= {}", tol::PSI_K));
    let nb = entries.iter().map(|e| e.max_neighbors).max().unwrap_or(0);
    c.check(nb <= tol::NEIGHBORS, format!("neighbour count max {nb} <= {}", tol::NEIGHBORS));
    for (j, &p) in tol::EXPONENTS.iter().enumerate() {
        let rc: Vec<f64> = entries.iter().map(|e| e.max_rc[j].1).collect();
        let s = spread(&rc);
        c.check(
            s < tol::RC_SPREAD,
            format!(
                "p={p}: max_C R_C in [{:.2}, {:.2}], spread {s:.3} < {}",
                rc.iter().copied().fold(f64::INFINITY, f64::min),
                rc.iter().copied().fold(0.0, f64::max),
                tol::RC_SPREAD
            ),
        );
    }
    // Random affine families on the two smallest depth-1 instances.
    let mut cm = Vec::new();
    for (n, mult) in [(2usize, 0.05), (3, 0.05)] {
        let t = canonical_tree(n, 1, mult);
        let ps = PlanarSet::build(&t).unwrap();
        let wd = WhitneyDecomposition::build(&ps).unwrap();
        let vals: Vec<f64> = (0..tol::CMEAS_FAMILIES)
            .into_par_iter()
            .map(|f| patching_constant(&random_affine_family(&wd, tol::TRIAL_SEED, f), 1.5, 12).unwrap())
            .collect();
        cm.extend(vals);
    }
    let s = spread(&cm);
    c.check(
        s < tol::CMEAS_SPREAD,
        format!(
            "patching C_meas over {} families in [{:.2}, {:.2}], spread {s:.3} < {}",
            cm.len(),
            cm.iter().copied().fold(f64::INFINITY, f64::min),
            cm.iter().copied().fold(0.0, f64::max),
            tol::CMEAS_SPREAD
        ),
    );
    c.finish()
}

fn leaf_values(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-2.0..2.0)).collect()
}

fn criterion3() -> Outcome {
    let mut c = Criterion::default();
    let solver = SolverConfig::default();

    let mut gap = 0.0f64;
    let mut count = 0;
    for seed in 0..6 {
        for (n, depth) in [(2, 1), (3, 1), (2, 2), (3, 2)] {
            let t = WeightedTree::random(n, depth, 0.02 / n as f64, seed).unwrap();
            let interior = t.len() - t.leaf_count();
            if interior > 4 {
                continue;
            }
            for &p in &tol::EXPONENTS {
                let phi = LeafFunction::new(&t, leaf_values(t.leaf_count(), seed)).unwrap();
                let opt = optimal_extension(&t, &phi, p, &solver).unwrap();
                let bf = brute_force_extension(&t, &phi, p, 0.5, if interior <= 2 { 40 } else { 12 }).unwrap();
                gap = gap.max((tree_energy(&t, opt.values(), p) - tree_energy(&t, bf.values(), p)).abs());
                count += 1;
            }
        }
    }
    c.check(gap <= tol::SOLVER_GAP, format!("solver vs grid on {count} small problems: max gap {gap:.2e} <= {:.0e}", tol::SOLVER_GAP));

    let mut diff = 0.0f64;
    for seed in 0..8 {
        let t = WeightedTree::random(3, 3, 0.01, seed).unwrap();
        let phi = LeafFunction::new(&t, leaf_values(t.leaf_count(), seed)).unwrap();
        let a = optimal_extension(&t, &phi, 2.0, &solver).unwrap();
        let b = harmonic_extension_p2(&t, &phi);
        diff = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(diff, f64::max);
    }
    c.check(diff <= tol::P2_LINEAR, format!("p=2 solver vs linear solve: max {diff:.2e} <= {:.0e}", tol::P2_LINEAR));

    let mut mismatches = 0;
    let trees = common::coarse_trees();
    for t in &trees {
        let ps = PlanarSet::build(t).unwrap();
        let wd = WhitneyDecomposition::build(&ps).unwrap();
        if common::sorted_squares(&wd) != common::naive_squares(&common::materialize(&ps)) {
            mismatches += 1;
        }
    }
    c.check(mismatches == 0, format!("Whitney vs naive enumerator: {mismatches}/{} instances differ", trees.len()));

    // Nonzero-mean leaf data so every ball average is far from zero.
    let inst = Instance::build(canonical_tree(2, 1, 0.02), &InstanceConfig::default()).unwrap();
    let phi = LeafFunction::new(&inst.tree, vec![0.3, 1.1]).unwrap();
    let f = PlanarData::from_leaf_function(&inst.ps, &phi);
    let field = planar_extend(&inst, &f, 1.5, &ExtensionBackend::Averaging).unwrap().interpolant;
    let rule = DiskRule::new(treeplane_core::analysis::DEFAULT_RINGS, treeplane_core::analysis::DEFAULT_ANGLES).unwrap();
    let mut worst = 0.0f64;
    for v in inst.tree.nodes() {
        let disk = inst.ct.ball_of(v);
        let q = rule.average(&disk, |x| field.jet(x).grad[1]);
        let mc = ball_average_monte_carlo(&field, &disk, Derivative::D2, tol::MC_SAMPLES, v.index() as u64);
        worst = worst.max((q - mc).abs() / mc.abs());
    }
    c.check(
        worst <= tol::MC_REL,
        format!("disk rule vs {} Monte Carlo samples: max relative {worst:.2e} <= {:.0e}", tol::MC_SAMPLES, tol::MC_REL),
    );

    let inst = Instance::build(canonical_tree(2, 1, 0.01), &InstanceConfig::default()).unwrap();
    let family = random_affine_family(&inst.wd, tol::TRIAL_SEED, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(tol::TRIAL_SEED);
    let pts = uniform_q0(&mut rng, tol::FD_POINTS);
    let fd = |h: f64| {
        let jets: Vec<_> = pts.iter().map(|x| family.jet(*x)).collect();
        let scale = jets.iter().map(|j| j.hess_norm()).fold(0.0, f64::max);
        let mut worst = 0.0f64;
        for (x, j) in pts.iter().zip(&jets) {
            let g = |dx: f64, dy: f64| family.jet(Point::new(x.x + dx, x.y + dy)).grad;
            let (xp, xm, yp, ym) = (g(h, 0.0), g(-h, 0.0), g(0.0, h), g(0.0, -h));
            let d = [[xp[0] - xm[0], xp[1] - xm[1]], [yp[0] - ym[0], yp[1] - ym[1]]];
            for a in 0..2 {
                for b in 0..2 {
                    worst = worst.max((d[a][b] / (2.0 * h) - j.hess[a][b]).abs() / scale);
                }
            }
        }
        worst
    };
    let (at_step, finer) = (fd(tol::FD_STEP), fd(0.1 * tol::FD_STEP));
    c.check(
        at_step <= tol::FD_REL,
        format!(
            "Hessian vs central differences h={:.0e}: max relative {at_step:.2e} <= {:.0e} (h={:.0e} gives {finer:.2e})",
            tol::FD_STEP,
            tol::FD_REL,
            0.1 * tol::FD_STEP
        ),
    );

    let mut terms = Vec::new();
    let mut sum_err = 0.0f64;
    for x in uniform_q0(&mut rng, tol::POU_POINTS) {
        inst.wd.pou_terms(x, &mut terms).unwrap();
        sum_err = sum_err.max((terms.iter().map(|t| t.theta.value).sum::<f64>() - 1.0).abs());
    }
    c.check(
        sum_err <= tol::POU_SUM,
        format!("sum of theta at {} points: max |sum - 1| {sum_err:.2e} <= {:.0e}", tol::POU_POINTS, tol::POU_SUM),
    );
    c.finish()
}

fn criterion4() -> Outcome {
    let mut c = Criterion::default();
    let inst = Instance::build(canonical_tree(3, 1, 0.02), &InstanceConfig::default()).unwrap();
    let ps = &inst.ps;
    let mut rng = ChaCha8Rng::seed_from_u64(tol::TRIAL_SEED);
    let rule_fn = AffinePolynomial::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 0.0);
    let e2 = (0..ps.e2().len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut f = PlanarData::new(ps, rule_fn, e2).unwrap();
    for k in (0..ps.e1_count()).step_by(5) {
        f.set_e1(ps, k, rng.random_range(-1.0..1.0)).unwrap();
    }
    let samples: Vec<usize> = if ps.e1_count() <= tol::E1_SAMPLES {
        (0..ps.e1_count()).collect()
    } else {
        (0..tol::E1_SAMPLES).map(|_| rng.random_range(0..ps.e1_count())).collect()
    };
    let backends = [ExtensionBackend::Averaging, ExtensionBackend::Optimal(SolverConfig::default())];
    for b in &backends {
        let ext = planar_extend(&inst, &f, 1.5, b).unwrap();
        let err = restriction_error(&inst, &ext.interpolant, &f, &samples);
        c.check(err <= tol::RESTRICTION, format!("restriction ({}): relative {err:.2e} <= {:.0e}", b.name(), tol::RESTRICTION));
    }

    let a = AffinePolynomial::new(0.7, -1.3, 2.1);
    let ext = planar_extend(&inst, &PlanarData::from_affine(ps, a), 1.5, &ExtensionBackend::Averaging).unwrap();
    let pts = uniform_q0(&mut rng, 2000);
    let near: Vec<Point> = (0..2000).map(|_| Point::new(rng.random_range(-0.05..2.05), rng.random_range(-0.02..0.1))).collect();
    let worst =
        pts.iter().chain(&near).map(|x| (ext.interpolant.value(*x) - a.eval(*x)).abs() / (1.0 + a.eval(*x).abs())).fold(0.0, f64::max);
    c.check(worst <= tol::AFFINE, format!("affine reproduction (averaging): max {worst:.2e} <= {:.0e}", tol::AFFINE));

    let drule = DiskRule::new(treeplane_core::analysis::DEFAULT_RINGS, treeplane_core::analysis::DEFAULT_ANGLES).unwrap();
    let phi = treeplane_core::operators::random_leaf_function(&inst.tree, tol::TRIAL_SEED, 0);
    let mut leaf_exact = true;
    for b in &backends {
        let big = tree_extend_from_planar(&inst, &phi, 1.5, b, &drule).unwrap();
        leaf_exact &= inst.tree.leaves().iter().enumerate().all(|(i, l)| big.get(*l) == phi.get(i));
    }
    c.check(leaf_exact, "tree_extend_from_planar leaf restriction exact");

    let mut zero = 0.0f64;
    for b in &backends {
        let ext = planar_extend(&inst, &PlanarData::zero(ps), 1.5, b).unwrap();
        for x in pts.iter().chain(&near) {
            let j = ext.interpolant.jet(*x);
            zero = zero.max(j.value.abs()).max(j.grad[0].abs()).max(j.grad[1].abs());
        }
        let big = tree_extend_from_planar(&inst, &LeafFunction::constant(&inst.tree, 0.0), 1.5, b, &drule).unwrap();
        zero = big.values().iter().fold(zero, |m, v| m.max(v.abs()));
        let lifted = lift_to_tree(&inst, &LeafFunction::constant(&inst.tree, 0.0), &ext.interpolant, &drule);
        zero = lifted.get(NodeId::ROOT).abs().max(zero);
    }
    c.check(zero <= tol::ZERO, format!("zero data gives zero (planar and tree): max {zero:.2e} <= {:.0e}", tol::ZERO));
    c.finish()
}

fn criterion5(entries: &[SuiteEntry]) -> Outcome {
    let mut c = Criterion::default();
    let rows: Vec<&TrialRow> = entries.iter().flat_map(|e| &e.rows).collect();
    let errors: Vec<&String> = entries.iter().flat_map(|e| &e.trial_errors).collect();
    c.check(
        errors.is_empty(),
        format!(
            "{} trials ran, {} errors{}",
            rows.len(),
            errors.len(),
            errors.first().map(|e| format!(" (first: {e})")).unwrap_or_default()
        ),
    );
    let finite = rows.iter().all(|r| r.rho_plane.is_finite() && r.rho_tree.is_finite());
    c.check(finite, "rho_plane and rho_tree finite on every trial");
    let low = rows.iter().map(|r| r.rho_tree).fold(f64::INFINITY, f64::min);
    c.check(low >= tol::RHO_TREE_FLOOR, format!("min rho_tree {low:.8} >= 1 - 1e-6"));
    for &depth in &tol::DEPTHS {
        for &n in &tol::ARITIES {
            for &p in &tol::EXPONENTS {
                let group: Vec<&&TrialRow> = rows.iter().filter(|r| r.n == n && r.depth == depth && r.p == p).collect();
                if group.is_empty() {
                    continue;
                }
                let eps = entries.iter().filter(|e| e.n == n && e.depth == depth).count();
                for (name, get) in
                    [("rho_plane", (|r: &TrialRow| r.rho_plane) as fn(&TrialRow) -> f64), ("rho_tree", |r: &TrialRow| r.rho_tree)]
                {
                    let mut v: Vec<f64> = group.iter().map(|r| get(r)).collect();
                    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let med = median(&mut v);
                    let s = max / med;
                    c.check(
                        s < tol::RHO_SPREAD,
                        format!(
                            "N={n} depth={depth} p={p} ({eps} eps values, {} trials): {name} median {med:.4}, max/median {s:.3} < {}",
                            group.len(),
                            tol::RHO_SPREAD
                        ),
                    );
                }
            }
        }
    }
    c.finish()
}

fn criterion6(entries: &[SuiteEntry]) -> Outcome {
    let mut c = Criterion::default();
    let worst = entries.iter().flat_map(|e| &e.rows).map(|r| r.quad_error).fold(0.0, f64::max);
    c.check(worst <= tol::QUAD_REL, format!("fine/coarse seminorm discrepancy max {worst:.2e} <= {}", tol::QUAD_REL));

    let inst = Instance::build(canonical_tree(2, 1, 0.02), &InstanceConfig::default()).unwrap();
    let rule = DiskRule::new(treeplane_core::analysis::DEFAULT_RINGS, treeplane_core::analysis::DEFAULT_ANGLES).unwrap();
    let p = 1.5;
    let ratios: Vec<f64> = (0..tol::BUMP_FIELDS)
        .into_par_iter()
        .map(|k| {
            let g = GaussianBumpField::random(tol::BUMPS, k);
            let (s1, s2) = ball_estimate_sums(&inst.tree, &inst.ps, &inst.wd, &inst.ct, &g, p, &rule).unwrap();
            (s1 + s2) / g.seminorm_power(p, 12)
        })
        .collect();
    let finite = ratios.iter().all(|r| r.is_finite() && *r >= 0.0);
    let mut sorted = ratios.clone();
    let med = median(&mut sorted);
    let max = sorted.last().copied().unwrap_or(f64::NAN);
    c.check(
        finite && max / med < tol::BALL_EST_SPREAD,
        format!(
            "ball-estimate sums / ||G||^p over {} bump fields: median {med:.3e}, max {max:.3e}, max/median {:.3} < {}",
            ratios.len(),
            max / med,
            tol::BALL_EST_SPREAD
        ),
    );
    c.finish()
}

fn main() {
    let start = Instant::now();
    eprintln!(
        "acceptance: canonical suite (N in {:?}, depth in {:?}, eps in {:?}/N, p in {:?})",
        tol::ARITIES,
        tol::DEPTHS,
        tol::EPS_MULTIPLIERS,
        tol::EXPONENTS
    );
    let (entries, skipped) = run_suite();
    let outcomes =
        [criterion1(&entries, &skipped), criterion2(&entries), criterion3(), criterion4(), criterion5(&entries), criterion6(&entries)];
    let titles = [
        "exact lemma suite",
        "measured-constant stability",
        "oracle equivalences",
        "extension identities",
        "norm-ratio experiment",
        "quadrature self-consistency",
    ];
    for (k, (o, t)) in outcomes.iter().zip(titles).enumerate() {
        println!("criterion {} ({t}): {}", k + 1, if o.passed { "PASS" } else { "FAIL" });
        println!("    {}", o.detail);
    }
    println!("acceptance finished in {:.0}s", start.elapsed().as_secs_f64());
    if outcomes.iter().any(|o| !o.passed) {
        std::process::exit(1);
    }
}
