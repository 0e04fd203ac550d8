//! Quadrature for `‖F‖_{L^{2,p}}`, disk averages of first derivatives, and the
//! two sums bounded by the ball estimate.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::clusters::ClusterTree;
use crate::embedding::PlanarSet;
use crate::geometry::{Disk, Point, Rect};
use crate::interpolant::{affine_through, AffinePolynomial, Field, InterpolantError, Jet, PatchedInterpolant};
use crate::math;
use crate::tree::{NodeId, WeightedTree};
use crate::whitney::WhitneyDecomposition;

/// Default Gauss–Legendre order per axis for seminorm quadrature.
pub const DEFAULT_QUAD_ORDER: usize = 12;
/// Default relative tolerance on the coarse/fine discrepancy.
pub const DEFAULT_REFINE_TOL: f64 = 1e-2;
/// Default radial and angular node counts for disk averages.
pub const DEFAULT_RINGS: usize = 32;
pub const DEFAULT_ANGLES: usize = 64;

/// `‖F‖_{L^{2,p}}` with its refinement estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeminormEstimate {
    /// `(∫|∇²F|^p)^{1/p}` at the fine order.
    pub value: f64,
    /// `|coarse^{1/p} − fine^{1/p}|`.
    pub error: f64,
    /// `∫|∇²F|^p` at the coarse and fine orders.
    pub integral_coarse: f64,
    pub integral_fine: f64,
    /// Squares where `F̃` is not affine.
    pub active_squares: usize,
}

impl SeminormEstimate {
    /// `error / value`, zero for a vanishing seminorm.
    pub fn relative_error(&self) -> f64 {
        if self.value == 0.0 {
            0.0
        } else {
            self.error / self.value
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("quadrature order {0} is below 4")]
    Order(usize),
    #[error("quadrature discrepancy {:.3e} exceeds {tol:e} of the value {:.6e}", .estimate.error, .estimate.value)]
    Unresolved { estimate: SeminormEstimate, tol: f64 },
    #[error("disk rule needs at least 4 rings and 4 angles")]
    DiskRule,
    #[error("local interpolant at E2 point {index}: {source}")]
    Jet { index: usize, source: InterpolantError },
}

/// `|∇²F|^p` with the Frobenius norm.
#[inline]
pub fn hessian_power(j: &Jet, p: f64) -> f64 {
    math::abs_pow(j.hess_norm(), p)
}

/// `∫_r |∇²F|^p` by a tensor rule on the given axis breakpoints.
pub fn integrate_cells<F: Field + ?Sized>(f: &F, xs: &[f64], ys: &[f64], p: f64, gl: &(Vec<f64>, Vec<f64>)) -> f64 {
    integrate_cells_with(|x| f.jet(x), xs, ys, p, gl)
}

fn integrate_cells_with(mut jet: impl FnMut(Point) -> Jet, xs: &[f64], ys: &[f64], p: f64, gl: &(Vec<f64>, Vec<f64>)) -> f64 {
    let (nodes, weights) = gl;
    let mut total = 0.0;
    for cx in xs.windows(2) {
        let (hx, mx) = (0.5 * (cx[1] - cx[0]), 0.5 * (cx[1] + cx[0]));
        for cy in ys.windows(2) {
            let (hy, my) = (0.5 * (cy[1] - cy[0]), 0.5 * (cy[1] + cy[0]));
            let mut s = 0.0;
            for (a, wa) in nodes.iter().zip(weights) {
                for (b, wb) in nodes.iter().zip(weights) {
                    let x = Point::new(mx + hx * a, my + hy * b);
                    s += wa * wb * hessian_power(&jet(x), p);
                }
            }
            total += s * hx * hy;
        }
    }
    total
}

/// `∫_{Q_i} |∇²F̃|^p` at one order, with cells split where the partition of
/// unity changes formula. Zero for locally affine squares.
pub fn square_integral(f: &PatchedInterpolant<'_>, i: usize, p: f64, gl: &(Vec<f64>, Vec<f64>)) -> f64 {
    square_integrals_with(f, i, p, &[gl])[0]
}

/// Per-square coarse and fine integrals; callers may parallelise over `i`.
pub fn square_integrals(
    f: &PatchedInterpolant<'_>,
    i: usize,
    p: f64,
    coarse: &(Vec<f64>, Vec<f64>),
    fine: &(Vec<f64>, Vec<f64>),
) -> (f64, f64) {
    let r = square_integrals_with(f, i, p, &[coarse, fine]);
    (r[0], r[1])
}

/// The active set of the partition of unity is constant on the interior of
/// each breakpoint cell, so a cell where every active piece agrees carries
/// an affine `F̃` and contributes exactly zero.
fn square_integrals_with(f: &PatchedInterpolant<'_>, i: usize, p: f64, rules: &[&(Vec<f64>, Vec<f64>)]) -> Vec<f64> {
    let mut out = alloc::vec![0.0; rules.len()];
    if f.is_locally_affine(i) {
        return out;
    }
    let wd = f.decomposition();
    let ([xs, ys], _) = wd.breakpoints(i);
    let mut terms = Vec::new();
    for cx in xs.windows(2) {
        for cy in ys.windows(2) {
            let mid = Point::new(0.5 * (cx[0] + cx[1]), 0.5 * (cy[0] + cy[1]));
            wd.pou_terms(mid, &mut terms);
            let first = f.piece(terms[0].square);
            if terms.iter().all(|t| f.piece(t.square) == first) {
                continue;
            }
            let active: Vec<usize> = terms.iter().map(|t| t.square).collect();
            let mut scratch = Vec::new();
            for (o, gl) in out.iter_mut().zip(rules) {
                *o += integrate_cells_with(
                    |x| {
                        wd.pou_terms_among(&active, x, &mut scratch);
                        f.combine(i, &scratch, x)
                    },
                    cx,
                    cy,
                    p,
                    gl,
                );
            }
        }
    }
    out
}

/// Combines coarse and fine integrals into an estimate, failing when the
/// discrepancy exceeds `refine_tol` of the value.
pub fn finish_seminorm(coarse: f64, fine: f64, active: usize, p: f64, refine_tol: f64) -> Result<SeminormEstimate, AnalysisError> {
    let value = math::powf(fine, 1.0 / p);
    let est = SeminormEstimate {
        value,
        error: math::abs(math::powf(coarse, 1.0 / p) - value),
        integral_coarse: coarse,
        integral_fine: fine,
        active_squares: active,
    };
    if est.error > refine_tol * value {
        return Err(AnalysisError::Unresolved { estimate: est, tol: refine_tol });
    }
    Ok(est)
}

/// `‖F̃‖_{L^{2,p}(ℝ²)}`: Gauss–Legendre of order `quad_order` and `2·quad_order`
/// on every non-affine Whitney square (`F̃` is affine outside `Q⁰`).
pub fn planar_seminorm(f: &PatchedInterpolant<'_>, p: f64, quad_order: usize, refine_tol: f64) -> Result<SeminormEstimate, AnalysisError> {
    if quad_order < 4 {
        return Err(AnalysisError::Order(quad_order));
    }
    let coarse = math::gauss_legendre(quad_order);
    let fine = math::gauss_legendre(2 * quad_order);
    let (mut c, mut fi, mut active) = (0.0, 0.0, 0);
    for i in 0..f.decomposition().len() {
        if f.is_locally_affine(i) {
            continue;
        }
        active += 1;
        let (a, b) = square_integrals(f, i, p, &coarse, &fine);
        c += a;
        fi += b;
    }
    finish_seminorm(c, fi, active, p, refine_tol)
}

/// Independent affine pieces with coefficients uniform in `[−1, 1]` on every
/// interior square; boundary squares and the tail are zero so `F̃` is `C²`.
/// Family `family` of `seed` is its own ChaCha stream.
pub fn random_affine_family<'a>(wd: &'a WhitneyDecomposition, seed: u64, family: u64) -> PatchedInterpolant<'a> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(family);
    let pieces = wd
        .squares()
        .iter()
        .map(|s| {
            let (a, b, c) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            if s.boundary {
                AffinePolynomial::ZERO
            } else {
                AffinePolynomial::new(a, b, c)
            }
        })
        .collect();
    PatchedInterpolant::new(wd, pieces, AffinePolynomial::ZERO)
}

/// `‖F‖^p_{L^{2,p}(Q⁰)} / Σ_{Q↔Q′} ‖P_Q − P_{Q′}‖^p_{L∞(Q)} δ_Q^{2−2p}` at a
/// single quadrature order; the measured constant of the patching bound.
pub fn patching_constant(f: &PatchedInterpolant<'_>, p: f64, quad_order: usize) -> Result<f64, AnalysisError> {
    if quad_order < 4 {
        return Err(AnalysisError::Order(quad_order));
    }
    let gl = math::gauss_legendre(quad_order);
    let integral: f64 = (0..f.decomposition().len()).map(|i| square_integral(f, i, p, &gl)).sum();
    Ok(integral / patching_sum(f, p))
}

/// `Σ_{Q↔Q′} ‖P_Q − P_{Q′}‖^p_{L∞(Q)} δ_Q^{2−2p}`, the right side of the
/// patching bound (ordered pairs, `Q ≠ Q′`).
pub fn patching_sum(f: &PatchedInterpolant<'_>, p: f64) -> f64 {
    let wd = f.decomposition();
    let mut s = 0.0;
    for i in 0..wd.len() {
        let sq = wd.square(i).square;
        let r = sq.rect();
        let scale = math::powf(sq.side(), 2.0 - 2.0 * p);
        for j in wd.neighbors(i) {
            if j != i {
                s += math::powf(f.piece(i).sub(f.piece(j)).linf_on(&r), p) * scale;
            }
        }
    }
    s
}

/// Which first derivative to average.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Derivative {
    D1,
    D2,
}

impl Derivative {
    fn pick(self, j: &Jet) -> f64 {
        match self {
            Derivative::D1 => j.grad[0],
            Derivative::D2 => j.grad[1],
        }
    }
}

/// Reusable polar rule: Gauss–Legendre in `r` (weight `r`) times the
/// midpoint rule in angle.
#[derive(Clone, Debug)]
pub struct DiskRule {
    radial: (Vec<f64>, Vec<f64>),
    angles: Vec<(f64, f64)>,
}

impl DiskRule {
    pub fn new(rings: usize, angles: usize) -> Result<Self, AnalysisError> {
        if rings < 4 || angles < 4 {
            return Err(AnalysisError::DiskRule);
        }
        let radial = math::gauss_legendre_on(rings, 0.0, 1.0);
        let angles = (0..angles)
            .map(|k| {
                let t = 2.0 * PI * (k as f64 + 0.5) / angles as f64;
                (math::cos(t), math::sin(t))
            })
            .collect();
        Ok(Self { radial, angles })
    }

    /// `|B|⁻¹ ∫_B g`.
    pub fn average(&self, disk: &Disk, mut g: impl FnMut(Point) -> f64) -> f64 {
        let (nodes, weights) = &self.radial;
        let mut s = 0.0;
        for (r, w) in nodes.iter().zip(weights) {
            let mut ring = 0.0;
            for (c, sn) in &self.angles {
                ring += g(Point::new(disk.center.x + disk.radius * r * c, disk.center.y + disk.radius * r * sn));
            }
            s += w * r * ring;
        }
        // ∫₀¹ r dr = 1/2 normalises the radial weights.
        2.0 * s / self.angles.len() as f64
    }
}

/// `(∂_k F)_B` over the closed disk `B(center, radius)`.
pub fn ball_average<F: Field + ?Sized>(
    f: &F,
    center: Point,
    radius: f64,
    deriv: Derivative,
    rings: usize,
    angles: usize,
) -> Result<f64, AnalysisError> {
    let rule = DiskRule::new(rings, angles)?;
    Ok(rule.average(&Disk { center, radius }, |x| deriv.pick(&f.jet(x))))
}

/// The two sums of the ball estimate for a field `G`:
/// `Σ_{C≠root} |(∂₂G)_{B_C} − (∂₂G)_{B_{π(C)}}|^p W_C^{2−p}` and
/// `Σ_{leaf C} |∂₂T_{x_C}(G) − (∂₂G)_{B_C}|^p W_C^{2−p}`.
#[allow(clippy::too_many_arguments)]
pub fn ball_estimate_sums<F: Field + ?Sized>(
    tree: &WeightedTree,
    ps: &PlanarSet,
    wd: &WhitneyDecomposition,
    ct: &ClusterTree,
    g: &F,
    p: f64,
    rule: &DiskRule,
) -> Result<(f64, f64), AnalysisError> {
    let avg: Vec<f64> = tree.nodes().map(|v| rule.average(&ct.ball_of(v), |x| g.jet(x).grad[1])).collect();
    let mut s1 = 0.0;
    for v in tree.non_root() {
        let pv = tree.parent(v).expect("non-root");
        s1 += math::abs_pow(avg[v.index()] - avg[pv.index()], p) * math::powf(ct.weight(v), 2.0 - p);
    }
    let mut s2 = 0.0;
    for (i, leaf) in tree.leaves().iter().enumerate() {
        let a = wd.e2_anchors()[i];
        let pts = [ps.e2_point(i), ps.e1_point(a.z), ps.e1_point(a.w)];
        let jet = affine_through(pts, pts.map(|q| g.value(q))).map_err(|source| AnalysisError::Jet { index: i, source })?;
        s2 += math::abs_pow(jet.c - avg[leaf.index()], p) * math::powf(ct.weight(*leaf), 2.0 - p);
    }
    Ok((s1, s2))
}

/// `G(x) = Σ a_k exp(−|x − c_k|² / (2 s_k²))`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianBumpField {
    pub bumps: Vec<(Point, f64, f64)>,
}

impl GaussianBumpField {
    /// `count` bumps with centres in `[0, 2] × [0, 0.2]`, widths in
    /// `[0.1, 0.4]` and amplitudes in `[−1, 1]`.
    pub fn random(count: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bumps = (0..count)
            .map(|_| {
                let c = Point::new(rng.random_range(0.0..2.0), rng.random_range(0.0..0.2));
                (c, rng.random_range(0.1..0.4), rng.random_range(-1.0..1.0))
            })
            .collect();
        Self { bumps }
    }

    /// A box outside which every bump is below `e^{-32}` of its amplitude.
    pub fn support(&self) -> Rect {
        let mut r = Rect::new(f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for (c, s, _) in &self.bumps {
            r = Rect::new(r.x0.min(c.x - 8.0 * s), r.x1.max(c.x + 8.0 * s), r.y0.min(c.y - 8.0 * s), r.y1.max(c.y + 8.0 * s));
        }
        r
    }

    /// `∫|∇²G|^p` over the support box by a composite tensor rule whose
    /// panels are at most `min s / 2` wide.
    pub fn seminorm_power(&self, p: f64, order: usize) -> f64 {
        let r = self.support();
        let smin = self.bumps.iter().map(|b| b.1).fold(f64::INFINITY, f64::min);
        let axis = |a: f64, b: f64| {
            let n = math::ceil((b - a) / (0.5 * smin)) as usize;
            (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect::<Vec<_>>()
        };
        integrate_cells(self, &axis(r.x0, r.x1), &axis(r.y0, r.y1), p, &math::gauss_legendre(order))
    }
}

impl Field for GaussianBumpField {
    fn jet(&self, x: Point) -> Jet {
        let mut j = Jet::ZERO;
        for (c, s, a) in &self.bumps {
            let (dx, dy) = (x.x - c.x, x.y - c.y);
            let s2 = s * s;
            let e = a * math::exp(-(dx * dx + dy * dy) / (2.0 * s2));
            j.value += e;
            j.grad[0] -= e * dx / s2;
            j.grad[1] -= e * dy / s2;
            j.hess[0][0] += e * (dx * dx / s2 - 1.0) / s2;
            j.hess[1][1] += e * (dy * dy / s2 - 1.0) / s2;
            j.hess[0][1] += e * dx * dy / (s2 * s2);
        }
        j.hess[1][0] = j.hess[0][1];
        j
    }
}

/// `(∂_k F)_B` by stratified Monte Carlo: `samples` points, one per cell of
/// a polar grid equal in area.
pub fn ball_average_monte_carlo<F: Field + ?Sized>(f: &F, disk: &Disk, deriv: Derivative, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = math::ceil(math::sqrt(samples as f64)) as usize;
    let mut s = 0.0;
    let mut n = 0usize;
    for i in 0..side {
        for k in 0..side {
            // Uniform in area: r = R·√u.
            let u = (i as f64 + rng.random::<f64>()) / side as f64;
            let t = 2.0 * PI * (k as f64 + rng.random::<f64>()) / side as f64;
            let r = disk.radius * math::sqrt(u);
            s += deriv.pick(&f.jet(Point::new(disk.center.x + r * math::cos(t), disk.center.y + r * math::sin(t))));
            n += 1;
        }
    }
    s / n as f64
}

/// Cluster ids in tree order paired with their ball averages of `∂₂F`.
pub fn cluster_averages<F: Field + ?Sized>(tree: &WeightedTree, ct: &ClusterTree, f: &F, rule: &DiskRule) -> Vec<(NodeId, f64)> {
    tree.nodes().map(|v| (v, rule.average(&ct.ball_of(v), |x| f.jet(x).grad[1]))).collect()
}
