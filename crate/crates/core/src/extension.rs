//! The weighted trace problem on trees.
//!
//! Given leaf data `φ`, the trace seminorm is the least tree energy over all
//! node functions agreeing with `φ` on the leaves. The minimiser is computed by
//! Newton's method on a smoothed objective with a continuation in the
//! smoothing parameter; each Newton system is tree-structured and is solved by
//! elimination from the leaves up, in linear time.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::math;
use crate::tree::{tree_energy, LeafFunction, NodeFunction, NodeId, TreeError, WeightedTree};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExtensionError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("solver did not converge: residual {residual:e} after {iterations} iterations")]
    NonConvergence { best: NodeFunction, residual: f64, iterations: usize },
    #[error("brute force supports at most 4 interior nodes, tree has {0}")]
    TooManyInterior(usize),
    #[error("exponent p = {0} outside (1, 2]")]
    Exponent(f64),
}

/// Iteration controls for [`optimal_extension`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// Relative tolerance on the energy.
    pub tol: f64,
    /// Newton iterations allowed per smoothing level.
    pub max_newton: usize,
    /// Final smoothing parameter as a fraction of the data range.
    pub mu_final: f64,
    /// Divisor applied to the smoothing parameter between levels.
    pub mu_factor: f64,
    /// Sweeps allowed to the coordinate-descent fallback.
    pub max_sweeps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol: 1e-10, max_newton: 100, mu_final: 1e-10, mu_factor: 10.0, max_sweeps: 20_000 }
    }
}

/// A tree extension operator `H : φ ↦ Φ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtensionBackend {
    /// Energy minimiser; nonlinear in `φ` for `p ≠ 2`.
    Optimal(SolverConfig),
    /// Mean over the shadow; exactly linear.
    Averaging,
}

impl ExtensionBackend {
    pub fn name(&self) -> &'static str {
        match self {
            ExtensionBackend::Optimal(_) => "optimal",
            ExtensionBackend::Averaging => "averaging",
        }
    }

    pub fn apply(&self, tree: &WeightedTree, phi: &LeafFunction, p: f64) -> Result<NodeFunction, ExtensionError> {
        match self {
            ExtensionBackend::Optimal(cfg) => optimal_extension(tree, phi, p, cfg),
            ExtensionBackend::Averaging => Ok(averaging_extension(tree, phi)),
        }
    }
}

fn check_p(p: f64) -> Result<(), ExtensionError> {
    if p > 1.0 && p <= 2.0 {
        Ok(())
    } else {
        Err(ExtensionError::Exponent(p))
    }
}

/// Leaf values placed on the leaves, `fill` elsewhere.
fn embed_leaves(tree: &WeightedTree, phi: &LeafFunction, fill: f64) -> Vec<f64> {
    let mut x = vec![fill; tree.len()];
    for (k, l) in tree.leaves().iter().enumerate() {
        x[l.index()] = phi.get(k);
    }
    x
}

fn interior_nodes(tree: &WeightedTree) -> Vec<NodeId> {
    tree.nodes().filter(|v| !tree.node(*v).is_leaf()).collect()
}

/// Edge coefficients `W_v^{2−p}`, indexed by the child node.
fn edge_coefficients(tree: &WeightedTree, p: f64) -> Vec<f64> {
    tree.nodes().map(|v| math::powf(tree.weight(v), 2.0 - p)).collect()
}

struct Smoothed<'a> {
    tree: &'a WeightedTree,
    coef: &'a [f64],
    p: f64,
    mu: f64,
}

impl Smoothed<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        let mu2 = self.mu * self.mu;
        let mup = math::powf(self.mu, self.p);
        self.tree
            .non_root()
            .map(|v| {
                let d = x[v.index()] - x[self.tree.parent(v).unwrap().index()];
                self.coef[v.index()] * (math::powf(d * d + mu2, 0.5 * self.p) - mup)
            })
            .sum()
    }

    /// First and second derivative of the per-edge term in `d`.
    fn edge_derivatives(&self, d: f64) -> (f64, f64) {
        let s = d * d + self.mu * self.mu;
        let p = self.p;
        let g = p * d * math::powf(s, 0.5 * p - 1.0);
        let h = p * math::powf(s, 0.5 * p - 2.0) * ((p - 1.0) * d * d + self.mu * self.mu);
        (g, h)
    }

    /// Newton direction on the interior nodes; leaves keep a zero step.
    /// Returns the direction and the Newton decrement `gᵀH⁻¹g`.
    fn newton_step(&self, x: &[f64]) -> (Vec<f64>, f64) {
        let tree = self.tree;
        let n = tree.len();
        let mut diag = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        let mut h_edge = vec![0.0; n];
        for v in tree.non_root() {
            let pa = tree.parent(v).unwrap();
            let d = x[v.index()] - x[pa.index()];
            let (g, h) = self.edge_derivatives(d);
            let (g, h) = (self.coef[v.index()] * g, self.coef[v.index()] * h);
            h_edge[v.index()] = h;
            diag[v.index()] += h;
            diag[pa.index()] += h;
            // rhs = −∇E
            rhs[v.index()] -= g;
            rhs[pa.index()] += g;
        }
        let interior: Vec<bool> = tree.nodes().map(|v| !tree.node(v).is_leaf()).collect();
        let grad_rhs = rhs.clone();
        // Preorder reversed visits children before parents.
        for i in (1..n).rev() {
            if !interior[i] {
                continue;
            }
            let pa = tree.parent(NodeId::from_index(i)).unwrap().index();
            let h = h_edge[i];
            diag[pa] -= h * h / diag[i];
            rhs[pa] += h * rhs[i] / diag[i];
        }
        let mut step = vec![0.0; n];
        for i in 0..n {
            if !interior[i] {
                continue;
            }
            let up = match tree.parent(NodeId::from_index(i)) {
                Some(pa) => h_edge[i] * step[pa.index()],
                None => 0.0,
            };
            step[i] = (rhs[i] + up) / diag[i];
        }
        let decrement: f64 = (0..n).filter(|&i| interior[i]).map(|i| grad_rhs[i] * step[i]).sum();
        (step, decrement)
    }
}

/// Minimises the tree energy over node functions with the given leaf values.
///
/// Works for `p ∈ (1, 2]`; at `p = 2` a single Newton step is exact.
pub fn optimal_extension(tree: &WeightedTree, phi: &LeafFunction, p: f64, cfg: &SolverConfig) -> Result<NodeFunction, ExtensionError> {
    check_p(p)?;
    if phi.values().len() != tree.leaf_count() {
        return Err(TreeError::Length { expected: tree.leaf_count(), got: phi.values().len() }.into());
    }
    let (lo, hi) = (phi.min(), phi.max());
    let scale = hi - lo;
    if scale == 0.0 || tree.leaf_count() == tree.len() {
        return Ok(NodeFunction::new(tree, embed_leaves(tree, phi, lo))?);
    }
    let coef = edge_coefficients(tree, p);
    let mut x = averaging_extension(tree, phi).values().to_vec();
    let mu_final = cfg.mu_final * scale;
    let mut mu = scale;
    let mut total_iters = 0usize;
    let mut newton_ok = true;
    loop {
        let obj = Smoothed { tree, coef: &coef, p, mu };
        let mut converged = false;
        let mut f = obj.value(&x);
        for _ in 0..cfg.max_newton {
            total_iters += 1;
            let (step, dec) = obj.newton_step(&x);
            if !(dec.is_finite()) {
                break;
            }
            let fscale = f.abs() + math::powf(mu, p);
            if dec <= (cfg.tol * cfg.tol).max(1e-20) * fscale {
                converged = true;
                break;
            }
            let mut t = 1.0;
            let mut accepted = false;
            let mut stalled = false;
            for _ in 0..60 {
                let trial: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a + t * s).collect();
                let ft = obj.value(&trial);
                if ft <= f - 0.25 * t * dec {
                    // An accepted step that leaves f unchanged means the
                    // decrement sits at the rounding floor.
                    stalled = ft >= f && dec <= 1e-10 * fscale;
                    x = trial;
                    f = ft;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                // Round-off floor reached: the decrement is below what the
                // objective can resolve.
                converged = dec <= 1e-10 * fscale;
                break;
            }
            if stalled {
                converged = true;
                break;
            }
        }
        if !converged {
            newton_ok = false;
            break;
        }
        if mu <= mu_final {
            break;
        }
        mu = (mu / cfg.mu_factor).max(mu_final);
    }
    if newton_ok {
        return Ok(NodeFunction::new(tree, x)?);
    }
    coordinate_descent(tree, phi, p, cfg, x, total_iters)
}

/// Cyclic coordinate descent on the exact objective with golden-section line
/// searches. Each coordinate's objective is convex on the hull of its
/// neighbours' values, which brackets the minimiser.
fn coordinate_descent(
    tree: &WeightedTree,
    phi: &LeafFunction,
    p: f64,
    cfg: &SolverConfig,
    mut x: Vec<f64>,
    prior_iters: usize,
) -> Result<NodeFunction, ExtensionError> {
    let coef = edge_coefficients(tree, p);
    let scale = phi.max() - phi.min();
    let interior = interior_nodes(tree);
    let mut last_change = f64::INFINITY;
    for sweep in 0..cfg.max_sweeps {
        let mut change = 0.0f64;
        for &u in &interior {
            let mut nbrs: Vec<(f64, f64)> = tree.node(u).children().iter().map(|c| (x[c.index()], coef[c.index()])).collect();
            if let Some(pa) = tree.parent(u) {
                nbrs.push((x[pa.index()], coef[u.index()]));
            }
            let f = |t: f64| nbrs.iter().map(|(y, c)| c * math::abs_pow(t - y, p)).sum::<f64>();
            let a = nbrs.iter().map(|n| n.0).fold(f64::INFINITY, f64::min);
            let b = nbrs.iter().map(|n| n.0).fold(f64::NEG_INFINITY, f64::max);
            let t = golden_section(f, a, b, 1e-15 * scale.max(1e-300));
            change = change.max((t - x[u.index()]).abs());
            x[u.index()] = t;
        }
        last_change = change;
        if change <= cfg.tol * scale {
            let _ = sweep;
            return Ok(NodeFunction::new(tree, x)?);
        }
    }
    Err(ExtensionError::NonConvergence {
        best: NodeFunction::new(tree, x)?,
        residual: last_change,
        iterations: prior_iters + cfg.max_sweeps,
    })
}

/// Minimiser of a unimodal function on `[a, b]` to absolute tolerance `tol`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let m = 0.5 * (a + b);
    // The endpoints can win when the minimiser sits on the bracket.
    [a, b, m].into_iter().fold(m, |best, t| if f(t) < f(best) { t } else { best })
}

/// `p = 2` minimiser from the dense normal equations (an independent route
/// from the tree elimination used by [`optimal_extension`]).
pub fn harmonic_extension_p2(tree: &WeightedTree, phi: &LeafFunction) -> NodeFunction {
    let interior = interior_nodes(tree);
    let m = interior.len();
    let mut x = embed_leaves(tree, phi, 0.0);
    if m == 0 {
        return NodeFunction::new(tree, x).expect("sized from tree");
    }
    let mut slot = vec![usize::MAX; tree.len()];
    for (k, u) in interior.iter().enumerate() {
        slot[u.index()] = k;
    }
    let mut a = vec![0.0; m * m];
    let mut b = vec![0.0; m];
    for v in tree.non_root() {
        let pa = tree.parent(v).unwrap();
        let (sv, sp) = (slot[v.index()], slot[pa.index()]);
        // Edge term (x_v − x_p)²; leaves are known.
        match (sv != usize::MAX, sp != usize::MAX) {
            (true, true) => {
                a[sv * m + sv] += 1.0;
                a[sp * m + sp] += 1.0;
                a[sv * m + sp] -= 1.0;
                a[sp * m + sv] -= 1.0;
            }
            (false, true) => {
                a[sp * m + sp] += 1.0;
                b[sp] += x[v.index()];
            }
            _ => unreachable!("a parent is never a leaf"),
        }
    }
    let sol = math::solve_dense(a.clone(), b.clone()).expect("connected tree gives a nonsingular system");
    let scale = b.iter().fold(1.0f64, |s, t| s.max(t.abs()));
    for i in 0..m {
        let r: f64 = (0..m).map(|j| a[i * m + j] * sol[j]).sum::<f64>() - b[i];
        assert!(r.abs() <= 1e-12 * scale * m as f64, "normal-equation residual {r:e}");
    }
    for (k, u) in interior.iter().enumerate() {
        x[u.index()] = sol[k];
    }
    NodeFunction::new(tree, x).expect("sized from tree")
}

/// `Φ(v)` = mean of `φ` over the leaves below `v`.
pub fn averaging_extension(tree: &WeightedTree, phi: &LeafFunction) -> NodeFunction {
    let vals = phi.values();
    let x = tree
        .nodes()
        .map(|v| {
            let s = tree.shadow(v);
            let n = s.len() as f64;
            vals[s].iter().sum::<f64>() / n
        })
        .collect();
    NodeFunction::new(tree, x).expect("sized from tree")
}

/// `p`-th power of the trace seminorm, i.e. the minimal energy.
pub fn trace_energy(tree: &WeightedTree, phi: &LeafFunction, p: f64, cfg: &SolverConfig) -> Result<f64, ExtensionError> {
    let ext = optimal_extension(tree, phi, p, cfg)?;
    Ok(tree_energy(tree, ext.values(), p))
}

/// Trace seminorm `‖φ‖_{L^{1,p}(∂V)}` for `p ∈ (1, 2]`.
pub fn trace_seminorm(tree: &WeightedTree, phi: &LeafFunction, p: f64, cfg: &SolverConfig) -> Result<f64, ExtensionError> {
    Ok(math::powf(trace_energy(tree, phi, p, cfg)?, 1.0 / p))
}

/// Exhaustive nested grid search over the interior values (at most four).
///
/// The first grid spans `[min φ − r, max φ + r]` per coordinate with
/// `grid_steps` cells; each of three refinements re-grids the two cells
/// around the incumbent.
pub fn brute_force_extension(
    tree: &WeightedTree,
    phi: &LeafFunction,
    p: f64,
    grid_radius: f64,
    grid_steps: usize,
) -> Result<NodeFunction, ExtensionError> {
    check_p(p)?;
    let interior = interior_nodes(tree);
    let m = interior.len();
    if m > 4 {
        return Err(ExtensionError::TooManyInterior(m));
    }
    let mut x = embed_leaves(tree, phi, 0.0);
    if m == 0 {
        return Ok(NodeFunction::new(tree, x)?);
    }
    let steps = grid_steps.max(2);
    let mut lo = vec![phi.min() - grid_radius; m];
    let mut hi = vec![phi.max() + grid_radius; m];
    let mut best = vec![0.0; m];
    for _round in 0..4 {
        let h: Vec<f64> = (0..m).map(|k| (hi[k] - lo[k]) / steps as f64).collect();
        let total = (steps + 1).pow(m as u32);
        let mut best_f = f64::INFINITY;
        for idx in 0..total {
            let mut r = idx;
            for k in 0..m {
                let i = r % (steps + 1);
                r /= steps + 1;
                x[interior[k].index()] = lo[k] + h[k] * i as f64;
            }
            let f = tree_energy(tree, &x, p);
            if f < best_f {
                best_f = f;
                for k in 0..m {
                    best[k] = x[interior[k].index()];
                }
            }
        }
        for k in 0..m {
            lo[k] = best[k] - h[k];
            hi[k] = best[k] + h[k];
        }
    }
    for k in 0..m {
        x[interior[k].index()] = best[k];
    }
    Ok(NodeFunction::new(tree, x)?)
}

/// Result of [`estimate_operator_norm`].
#[derive(Clone, Debug, PartialEq)]
pub struct NormEstimate {
    /// Lower bound on `‖H‖`; never below 1 since `‖Hφ‖ ≥ ‖φ‖` always.
    pub norm: f64,
    /// Best ratio found per sample (`None` for samples with zero trace).
    pub per_sample: Vec<Option<f64>>,
}

/// Local ascent steps taken per Gaussian sample.
pub const ASCENT_STEPS: usize = 8;

/// Lower bound on `‖H‖_{L^{1,p}(∂V)→L^{1,p}(V)}` from Gaussian leaf data.
///
/// Sample `i` draws from its own stream of a ChaCha8 generator seeded with
/// `seed`, then takes [`ASCENT_STEPS`] random-perturbation ascent steps. The
/// per-sample results therefore do not depend on `n_samples`, and the maximum
/// is nondecreasing in it.
pub fn estimate_operator_norm(
    tree: &WeightedTree,
    backend: &ExtensionBackend,
    p: f64,
    n_samples: usize,
    seed: u64,
    cfg: &SolverConfig,
) -> Result<NormEstimate, ExtensionError> {
    check_p(p)?;
    let n = tree.leaf_count();
    let ratio = |vals: &[f64]| -> Result<Option<f64>, ExtensionError> {
        let phi = LeafFunction::new(tree, vals.to_vec())?;
        let tr = trace_energy(tree, &phi, p, cfg)?;
        let spread = phi.max() - phi.min();
        if spread == 0.0 || tr <= 1e-24 * math::powf(spread, p) {
            return Ok(None);
        }
        let ext = backend.apply(tree, &phi, p)?;
        Ok(Some(math::powf(tree_energy(tree, ext.values(), p) / tr, 1.0 / p)))
    };
    let mut per_sample = Vec::with_capacity(n_samples);
    let mut norm = 1.0f64;
    for i in 0..n_samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let mut cur: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let mut best = ratio(&cur)?;
        if best.is_some() {
            let mut sigma = 0.5;
            for _ in 0..ASCENT_STEPS {
                let trial: Vec<f64> = cur.iter().map(|v| v + sigma * rng.sample::<f64, _>(StandardNormal)).collect();
                match (ratio(&trial)?, best) {
                    (Some(r), Some(b)) if r > b => {
                        cur = trial;
                        best = Some(r);
                    }
                    _ => sigma *= 0.5,
                }
            }
        }
        if let Some(r) = best {
            norm = norm.max(r);
        }
        per_sample.push(best);
    }
    Ok(NormEstimate { norm, per_sample })
}
