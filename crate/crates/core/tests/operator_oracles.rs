use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treeplane_core::analysis::{
    ball_average, ball_average_monte_carlo, ball_estimate_sums, planar_seminorm, Derivative, DiskRule, GaussianBumpField,
};
use treeplane_core::geometry::{Disk, Point};
use treeplane_core::interpolant::Field;
use treeplane_core::operators::{
    lift_to_tree, planar_extend, restriction_error, tree_extend_from_planar, Instance, InstanceConfig, PlanarData,
};
use treeplane_core::tree::{LeafFunction, NodeId};
use treeplane_core::{AffinePolynomial, ExtensionBackend, SolverConfig, WeightedTree};

fn instance(n: usize, depth: usize, eps: f64, seed: u64) -> Instance {
    Instance::build(WeightedTree::random(n, depth, eps, seed).unwrap(), &InstanceConfig::default()).unwrap()
}

fn backends() -> [ExtensionBackend; 2] {
    [ExtensionBackend::Averaging, ExtensionBackend::Optimal(SolverConfig::default())]
}

fn random_data(inst: &Instance, seed: u64) -> PlanarData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ps = &inst.ps;
    let rule = AffinePolynomial::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 0.0);
    let e2 = (0..ps.e2().len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut f = PlanarData::new(ps, rule, e2).unwrap();
    for k in (0..ps.e1_count()).step_by(5) {
        f.set_e1(ps, k, rng.random_range(-1.0..1.0)).unwrap();
    }
    f
}

fn sample_points(seed: u64, n: usize) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|k| {
            if k % 3 == 0 {
                Point::new(rng.random_range(-4.0..6.0), rng.random_range(-4.0..6.0))
            } else {
                Point::new(rng.random_range(-0.05..2.05), rng.random_range(-0.02..0.1))
            }
        })
        .collect()
}

#[test]
fn extension_restricts_to_the_data() {
    for (n, depth, eps, seed) in [(2, 1, 0.01, 1), (3, 1, 0.0167, 2), (2, 2, 0.025, 3)] {
        let inst = instance(n, depth, eps, seed);
        let f = random_data(&inst, seed);
        let e1: Vec<usize> = (0..inst.ps.e1_count()).collect();
        for b in &backends() {
            let ext = planar_extend(&inst, &f, 1.5, b).unwrap();
            let err = restriction_error(&inst, &ext.interpolant, &f, &e1);
            assert!(err <= 1e-9, "{} n={n} depth={depth}: {err:e}", b.name());
        }
    }
}

#[test]
fn affine_data_is_reproduced() {
    let inst = instance(3, 1, 0.0167, 4);
    let a = AffinePolynomial::new(0.7, -1.3, 2.1);
    let f = PlanarData::from_affine(&inst.ps, a);
    for b in &backends() {
        let ext = planar_extend(&inst, &f, 1.5, b).unwrap();
        for x in sample_points(5, 3000) {
            let j = ext.interpolant.jet(x);
            assert!((j.value - a.eval(x)).abs() <= 1e-10 * (1.0 + a.eval(x).abs()), "{}", b.name());
            assert!((j.grad[0] - a.b).abs() <= 1e-10 && (j.grad[1] - a.c).abs() <= 1e-10);
        }
        // Exactly zero in exact arithmetic; in floating point the pieces differ
        // by ulps that θ's Hessian (~1/δ²) amplifies. Measure against the
        // seminorm of same-size data that is not affine.
        let s = planar_seminorm(&ext.interpolant, 1.5, 12, f64::INFINITY).unwrap();
        let mut g = f.clone();
        g.set_e1(&inst.ps, 1, f.e1(&inst.ps, 1) + 1.0).unwrap();
        let r = planar_seminorm(&planar_extend(&inst, &g, 1.5, b).unwrap().interpolant, 1.5, 12, f64::INFINITY).unwrap();
        assert!(s.value <= 1e-10 * r.value, "{} vs {}", s.value, r.value);
    }
}

#[test]
fn zero_data_gives_zero_everywhere() {
    let inst = instance(2, 1, 0.02, 6);
    for b in &backends() {
        let ext = planar_extend(&inst, &PlanarData::zero(&inst.ps), 1.5, b).unwrap();
        for x in sample_points(7, 2000) {
            let j = ext.interpolant.jet(x);
            assert!(j.value.abs() <= 1e-12 && j.grad[0].abs() <= 1e-12 && j.grad[1].abs() <= 1e-12);
        }
    }
}

#[test]
fn averaging_operator_is_linear() {
    let inst = instance(3, 1, 0.01, 8);
    let (f, g) = (random_data(&inst, 1), random_data(&inst, 2));
    let (a, b) = (1.7, -0.4);
    let h = f.combine(a, &g, b, &inst.ps);
    let be = ExtensionBackend::Averaging;
    let (ef, eg, eh) = (
        planar_extend(&inst, &f, 1.5, &be).unwrap(),
        planar_extend(&inst, &g, 1.5, &be).unwrap(),
        planar_extend(&inst, &h, 1.5, &be).unwrap(),
    );
    for x in sample_points(9, 3000) {
        let (jf, jg, jh) = (ef.interpolant.jet(x), eg.interpolant.jet(x), eh.interpolant.jet(x));
        let want = a * jf.value + b * jg.value;
        let scale = 1.0 + jf.value.abs() + jg.value.abs();
        assert!((jh.value - want).abs() <= 1e-12 * scale, "{} vs {want}", jh.value);
        for k in 0..2 {
            let s = 1.0 + jf.grad[k].abs() + jg.grad[k].abs();
            assert!((jh.grad[k] - (a * jf.grad[k] + b * jg.grad[k])).abs() <= 1e-12 * s);
        }
    }
}

#[test]
fn seminorm_is_invariant_under_adding_an_affine_function() {
    let inst = instance(2, 1, 0.02, 10);
    let f = random_data(&inst, 3);
    let a = AffinePolynomial::new(0.5, 2.0, -3.0);
    let fa = f.combine(1.0, &PlanarData::from_affine(&inst.ps, a), 1.0, &inst.ps);
    let be = ExtensionBackend::Averaging;
    let s0 = planar_seminorm(&planar_extend(&inst, &f, 1.5, &be).unwrap().interpolant, 1.5, 12, f64::INFINITY).unwrap();
    let s1 = planar_seminorm(&planar_extend(&inst, &fa, 1.5, &be).unwrap().interpolant, 1.5, 12, f64::INFINITY).unwrap();
    assert!(s0.value > 0.0);
    assert!((s0.value - s1.value).abs() <= 1e-10 * s0.value, "{} vs {}", s0.value, s1.value);
}

#[test]
fn tree_pipeline_keeps_leaf_values_and_averages_elsewhere() {
    let inst = instance(2, 1, 0.02, 11);
    // Nonzero mean, so the root average is far from zero and relative digits mean something.
    let phi = LeafFunction::new(&inst.tree, vec![0.3, 1.1]).unwrap();
    let rule = DiskRule::new(32, 64).unwrap();
    let be = ExtensionBackend::Averaging;
    let lifted = tree_extend_from_planar(&inst, &phi, 1.5, &be, &rule).unwrap();
    for (i, leaf) in inst.tree.leaves().iter().enumerate() {
        assert_eq!(lifted.get(*leaf), phi.get(i));
    }
    let f = PlanarData::from_leaf_function(&inst.ps, &phi);
    let field = planar_extend(&inst, &f, 1.5, &be).unwrap().interpolant;
    assert_eq!(lift_to_tree(&inst, &phi, &field, &rule), lifted);
    let disk = inst.ct.ball_of(NodeId::ROOT);
    let mc = ball_average_monte_carlo(&field, &disk, Derivative::D2, 1_000_000, 13);
    let root = lifted.get(NodeId::ROOT);
    assert!((root - mc).abs() <= 5e-3 * root.abs(), "{root} vs {mc}");
    // The root circle lies outside Q⁰, where F̃ is the tail, so by the
    // divergence theorem the exact average is the tail's vertical slope.
    let exact = field.tail().c;
    assert!((root - exact).abs() <= 5e-3 * exact.abs(), "{root} vs {exact}");
}

#[test]
fn disk_rule_matches_monte_carlo_on_bumps() {
    let g = GaussianBumpField::random(6, 21);
    for (k, (c, r)) in [(Point::new(0.4, 0.05), 0.3), (Point::new(1.2, 0.1), 0.8), (Point::new(1.0, 0.0), 2.5)].into_iter().enumerate() {
        for d in [Derivative::D1, Derivative::D2] {
            let q = ball_average(&g, c, r, d, 32, 64).unwrap();
            let mc = ball_average_monte_carlo(&g, &Disk { center: c, radius: r }, d, 1_000_000, k as u64);
            let scale = g.bumps.iter().map(|b| b.2.abs() / b.1).sum::<f64>();
            assert!((q - mc).abs() <= 5e-3 * q.abs().max(1e-2 * scale), "{q} vs {mc}");
        }
    }
}

#[test]
fn ball_estimate_sums_vanish_on_affine_fields() {
    let inst = instance(3, 1, 0.0167, 12);
    let a = AffinePolynomial::new(0.2, 1.1, -0.8);
    let f = PlanarData::from_affine(&inst.ps, a);
    let field = planar_extend(&inst, &f, 1.5, &ExtensionBackend::Averaging).unwrap().interpolant;
    let rule = DiskRule::new(16, 32).unwrap();
    let (s1, s2) = ball_estimate_sums(&inst.tree, &inst.ps, &inst.wd, &inst.ct, &field, 1.5, &rule).unwrap();
    assert!(s1 <= 1e-20 && s2 <= 1e-20, "{s1:e} {s2:e}");
}

/// `G = x₂²`: disk averages of `∂₂G = 2x₂` are `2·(centre height)`, and the
/// affine interpolant through a leaf point `(ψ, W)` and two axis points has
/// `∂₂ = W`.
struct Square2;

impl Field for Square2 {
    fn jet(&self, x: Point) -> treeplane_core::Jet {
        treeplane_core::Jet { value: x.y * x.y, grad: [0.0, 2.0 * x.y], hess: [[0.0, 0.0], [0.0, 2.0]] }
    }
}

#[test]
fn ball_estimate_sums_hand_check_on_two_leaves() {
    let t = WeightedTree::from_nodes(2, 0.02, [("", 1.0), ("0", 0.02), ("1", 0.025)]).unwrap();
    let inst = Instance::build(t, &InstanceConfig::default()).unwrap();
    let p = 1.5;
    let rule = DiskRule::new(8, 16).unwrap();
    let (s1, s2) = ball_estimate_sums(&inst.tree, &inst.ps, &inst.wd, &inst.ct, &Square2, p, &rule).unwrap();
    let h_root = inst.ct.ball_of(NodeId::ROOT).center.y;
    let (mut w1, mut w2) = (0.0, 0.0);
    for leaf in inst.tree.leaves() {
        let w = inst.tree.weight(*leaf);
        w1 += (2.0 * w - 2.0 * h_root).abs().powf(p) * w.powf(2.0 - p);
        w2 += w * w;
    }
    assert!((s1 - w1).abs() <= 1e-12 * w1.max(1e-30), "{s1} vs {w1}");
    assert!((s2 - w2).abs() <= 1e-12 * w2, "{s2} vs {w2}");
}
