//! The two directions between tree and plane: a planar extension built from a
//! tree extension backend, and a tree extension built from a planar one.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::analysis::{self, AnalysisError, DiskRule, SeminormEstimate};
use crate::clusters::{BallConfig, ClusterAssignment, ClusterError, ClusterTree};
use crate::embedding::{EmbeddingError, PlanarSet};
use crate::extension::{self, ExtensionBackend, ExtensionError, SolverConfig};
use crate::interpolant::{affine_through, horizontal_affine, AffinePolynomial, Field, InterpolantError, PatchedInterpolant};
use crate::math;
use crate::tree::{LeafFunction, NodeFunction, TreeError, WeightedTree};
use crate::whitney::{WhitneyDecomposition, WhitneyError, DEFAULT_MAX_SQUARES};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OperatorError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Whitney(#[from] WhitneyError),
    #[error(transparent)]
    Clusters(#[from] ClusterError),
    #[error("tree extension backend failed: {0}")]
    Extension(#[from] ExtensionError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("local interpolant P_x at E2 point {index}: {source}")]
    PointJet { index: usize, source: InterpolantError },
    #[error("horizontal interpolant L_Q at square {index}: {source}")]
    SquareJet { index: usize, source: InterpolantError },
    #[error("data has {got} E2 values, the planar set has {expected}")]
    DataLength { expected: usize, got: usize },
    #[error("E1 override at index {0} is outside the grid")]
    E1Index(usize),
    #[error("n_trials must be at least 1")]
    Trials,
    #[error("trial {0}: could not draw a non-constant leaf function")]
    Degenerate(usize),
}

/// `f: E → ℝ`: an affine rule on E1 with explicit overrides, and one value per
/// E2 point (in leaf order).
#[derive(Clone, Debug, PartialEq)]
pub struct PlanarData {
    e1_rule: AffinePolynomial,
    e1_overrides: BTreeMap<usize, f64>,
    e2: Vec<f64>,
}

impl PlanarData {
    pub fn new(ps: &PlanarSet, e1_rule: AffinePolynomial, e2: Vec<f64>) -> Result<Self, OperatorError> {
        if e2.len() != ps.e2().len() {
            return Err(OperatorError::DataLength { expected: ps.e2().len(), got: e2.len() });
        }
        Ok(Self { e1_rule, e1_overrides: BTreeMap::new(), e2 })
    }

    /// `f ≡ 0`.
    pub fn zero(ps: &PlanarSet) -> Self {
        Self { e1_rule: AffinePolynomial::ZERO, e1_overrides: BTreeMap::new(), e2: alloc::vec![0.0; ps.e2().len()] }
    }

    /// `f = A|_E`.
    pub fn from_affine(ps: &PlanarSet, a: AffinePolynomial) -> Self {
        Self { e1_rule: a, e1_overrides: BTreeMap::new(), e2: ps.e2().iter().map(|x| a.eval(x.point)).collect() }
    }

    /// `f = 0` on E1 and `f({x}) = φ({x})·W_{{x}}` on E2.
    pub fn from_leaf_function(ps: &PlanarSet, phi: &LeafFunction) -> Self {
        let e2 = ps.e2().iter().enumerate().map(|(i, x)| phi.get(i) * x.point.y).collect();
        Self { e1_rule: AffinePolynomial::ZERO, e1_overrides: BTreeMap::new(), e2 }
    }

    pub fn set_e1(&mut self, ps: &PlanarSet, k: usize, v: f64) -> Result<(), OperatorError> {
        if k >= ps.e1_count() {
            return Err(OperatorError::E1Index(k));
        }
        self.e1_overrides.insert(k, v);
        Ok(())
    }

    pub fn e1_rule(&self) -> &AffinePolynomial {
        &self.e1_rule
    }

    pub fn e1_overrides(&self) -> &BTreeMap<usize, f64> {
        &self.e1_overrides
    }

    pub fn e1(&self, ps: &PlanarSet, k: usize) -> f64 {
        self.e1_overrides.get(&k).copied().unwrap_or_else(|| self.e1_rule.eval(ps.e1_point(k)))
    }

    pub fn e2(&self, i: usize) -> f64 {
        self.e2[i]
    }

    pub fn e2_values(&self) -> &[f64] {
        &self.e2
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64, ps: &PlanarSet) -> Self {
        let mut e1_overrides = BTreeMap::new();
        for k in self.e1_overrides.keys().chain(other.e1_overrides.keys()) {
            e1_overrides.insert(*k, a * self.e1(ps, *k) + b * other.e1(ps, *k));
        }
        Self {
            e1_rule: self.e1_rule.scale(a).add(&other.e1_rule.scale(b)),
            e1_overrides,
            e2: self.e2.iter().zip(&other.e2).map(|(x, y)| a * x + b * y).collect(),
        }
    }
}

/// Construction parameters shared by every pipeline stage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InstanceConfig {
    pub balls: BallConfig,
    pub max_squares: usize,
}

impl Default for InstanceConfig {
    fn default() -> Self {
        Self { balls: BallConfig::default(), max_squares: DEFAULT_MAX_SQUARES }
    }
}

/// A tree with its planar set, Whitney decomposition, clusters and the
/// square-to-cluster map.
#[derive(Clone, Debug)]
pub struct Instance {
    pub tree: WeightedTree,
    pub ps: PlanarSet,
    pub wd: WhitneyDecomposition,
    pub ct: ClusterTree,
    pub asg: ClusterAssignment,
}

impl Instance {
    pub fn build(tree: WeightedTree, cfg: &InstanceConfig) -> Result<Self, OperatorError> {
        let ps = PlanarSet::build(&tree)?;
        let wd = WhitneyDecomposition::build_with_cap(&ps, cfg.max_squares)?;
        let ct = ClusterTree::build(&tree, &ps, &cfg.balls)?;
        let asg = ct.assign(&wd);
        Ok(Self { tree, ps, wd, ct, asg })
    }
}

/// `F̃` together with the intermediate tree functions.
#[derive(Clone, Debug)]
pub struct PlanarExtension<'a> {
    pub interpolant: PatchedInterpolant<'a>,
    /// `φ(C) = ∂₂P_{x_C}` on leaf clusters.
    pub phi: LeafFunction,
    /// `Φ = H φ`.
    pub big_phi: NodeFunction,
}

/// `P_x` for every E2 point: the affine function matching `f` at `x`, `z_x`, `w_x`.
pub fn point_jets(inst: &Instance, f: &PlanarData) -> Result<Vec<AffinePolynomial>, OperatorError> {
    let ps = &inst.ps;
    if f.e2.len() != ps.e2().len() {
        return Err(OperatorError::DataLength { expected: ps.e2().len(), got: f.e2.len() });
    }
    inst.wd
        .e2_anchors()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            affine_through([ps.e2_point(i), ps.e1_point(a.z), ps.e1_point(a.w)], [f.e2(i), f.e1(ps, a.z), f.e1(ps, a.w)])
                .map_err(|source| OperatorError::PointJet { index: i, source })
        })
        .collect()
}

/// The planar extension `T f` driven by the tree backend `H`:
/// `P_Q = L_Q + x⁽²⁾·Φ(C_Q)`, blended by the partition of unity, with the
/// boundary piece as the tail outside `Q⁰`.
pub fn planar_extend<'a>(
    inst: &'a Instance,
    f: &PlanarData,
    p: f64,
    backend: &ExtensionBackend,
) -> Result<PlanarExtension<'a>, OperatorError> {
    let ps = &inst.ps;
    let jets = point_jets(inst, f)?;
    let phi = LeafFunction::new(&inst.tree, jets.iter().map(|j| j.c).collect())?;
    let big_phi = backend.apply(&inst.tree, &phi, p)?;
    let mut pieces = Vec::with_capacity(inst.wd.len());
    for (i, s) in inst.wd.squares().iter().enumerate() {
        let (z, w) = (ps.e1_point(s.z), ps.e1_point(s.w));
        let l = horizontal_affine(z, w, f.e1(ps, s.z), f.e1(ps, s.w)).map_err(|source| OperatorError::SquareJet { index: i, source })?;
        pieces.push(AffinePolynomial::new(l.a, l.b, big_phi.get(inst.asg.cluster_of(i))));
    }
    let last = ps.e1_count() - 1;
    let l0 = horizontal_affine(ps.e1_point(0), ps.e1_point(last), f.e1(ps, 0), f.e1(ps, last))
        .map_err(|source| OperatorError::SquareJet { index: usize::MAX, source })?;
    let tail = AffinePolynomial::new(l0.a, l0.b, big_phi.get(crate::tree::NodeId::ROOT));
    Ok(PlanarExtension { interpolant: PatchedInterpolant::new(&inst.wd, pieces, tail), phi, big_phi })
}

/// A linear extension operator for data on `E`.
pub trait PlanarOperator {
    fn name(&self) -> &'static str;
    fn extend<'a>(&self, inst: &'a Instance, f: &PlanarData, p: f64) -> Result<PatchedInterpolant<'a>, OperatorError>;
}

/// The patched construction with a tree backend.
impl PlanarOperator for ExtensionBackend {
    fn name(&self) -> &'static str {
        ExtensionBackend::name(self)
    }

    fn extend<'a>(&self, inst: &'a Instance, f: &PlanarData, p: f64) -> Result<PatchedInterpolant<'a>, OperatorError> {
        Ok(planar_extend(inst, f, p, self)?.interpolant)
    }
}

/// `Φ = φ` on leaves and `(∂₂F)_{B_C}` elsewhere.
pub fn lift_to_tree<F: Field + ?Sized>(inst: &Instance, phi: &LeafFunction, field: &F, rule: &DiskRule) -> NodeFunction {
    let tree = &inst.tree;
    let mut out = NodeFunction::constant(tree, 0.0);
    for v in tree.nodes() {
        let x = match tree.leaf_position(v) {
            Some(i) => phi.get(i),
            None => rule.average(&inst.ct.ball_of(v), |x| field.jet(x).grad[1]),
        };
        out.set(v, x);
    }
    out
}

/// The tree extension `H φ` built from a planar operator `T` applied to the
/// data `f = φ·W` on E2, `0` on E1.
pub fn tree_extend_from_planar(
    inst: &Instance,
    phi: &LeafFunction,
    p: f64,
    planar: &dyn PlanarOperator,
    rule: &DiskRule,
) -> Result<NodeFunction, OperatorError> {
    let f = PlanarData::from_leaf_function(&inst.ps, phi);
    let field = planar.extend(inst, &f, p)?;
    Ok(lift_to_tree(inst, phi, &field, rule))
}

/// Largest `|F̃(x) − f(x)|` over all of E2 and the sampled E1 points, divided
/// by the largest `|f|` there (absolute when `f` vanishes on them).
pub fn restriction_error<F: Field + ?Sized>(inst: &Instance, field: &F, f: &PlanarData, e1_samples: &[usize]) -> f64 {
    let ps = &inst.ps;
    let mut err = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..ps.e2().len() {
        err = err.max(math::abs(field.value(ps.e2_point(i)) - f.e2(i)));
        scale = scale.max(math::abs(f.e2(i)));
    }
    for &k in e1_samples {
        err = err.max(math::abs(field.value(ps.e1_point(k)) - f.e1(ps, k)));
        scale = scale.max(math::abs(f.e1(ps, k)));
    }
    if scale > 0.0 {
        err / scale
    } else {
        err
    }
}

/// Numerical settings of the norm-ratio experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub quad_order: usize,
    pub rings: usize,
    pub angles: usize,
    pub solver: SolverConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            quad_order: analysis::DEFAULT_QUAD_ORDER,
            rings: analysis::DEFAULT_RINGS,
            angles: analysis::DEFAULT_ANGLES,
            solver: SolverConfig::default(),
        }
    }
}

/// One trial of the norm-ratio experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRow {
    pub seed: u64,
    pub trial: usize,
    pub n: usize,
    pub depth: usize,
    pub epsilon: f64,
    pub p: f64,
    pub backend: &'static str,
    pub rho_plane: f64,
    pub rho_tree: f64,
    /// Coarse/fine discrepancy of the planar seminorm, relative to its value.
    pub quad_error: f64,
    pub trace: f64,
    pub plane: SeminormEstimate,
    pub tree_seminorm: f64,
}

/// `min`, `median`, `max` of a sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spread {
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

impl Spread {
    pub fn of(xs: impl IntoIterator<Item = f64>) -> Self {
        let mut v: Vec<f64> = xs.into_iter().collect();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n == 0 {
            f64::NAN
        } else if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        };
        Self { min: v.first().copied().unwrap_or(f64::NAN), median, max: v.last().copied().unwrap_or(f64::NAN) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<TrialRow>,
    pub rho_plane: Spread,
    pub rho_tree: Spread,
}

impl ExperimentReport {
    pub fn from_rows(rows: Vec<TrialRow>) -> Self {
        let rho_plane = Spread::of(rows.iter().map(|r| r.rho_plane));
        let rho_tree = Spread::of(rows.iter().map(|r| r.rho_tree));
        Self { rows, rho_plane, rho_tree }
    }
}

/// Draws the de-meaned Gaussian leaf function for `(seed, trial)`.
pub fn random_leaf_function(tree: &WeightedTree, seed: u64, trial: usize) -> LeafFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    let mut v: Vec<f64> = (0..tree.leaf_count()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    for x in &mut v {
        *x -= mean;
    }
    LeafFunction::new(tree, v).expect("one value per leaf")
}

/// One trial: `ρ_plane = ‖T f_φ‖ / ‖φ‖_trace` and
/// `ρ_tree = ‖H φ‖ / ‖φ‖_trace` with `T` the patched construction over
/// `backend` and `H` its lift back to the tree.
pub fn run_trial(
    inst: &Instance,
    p: f64,
    seed: u64,
    trial: usize,
    backend: &ExtensionBackend,
    cfg: &ExperimentConfig,
) -> Result<TrialRow, OperatorError> {
    let tree = &inst.tree;
    let phi = random_leaf_function(tree, seed, trial);
    let trace = extension::trace_seminorm(tree, &phi, p, &cfg.solver)?;
    // Two leaves with equal draws de-mean to zero; nothing else can.
    if !(trace > 1e-12 * phi.max().abs().max(phi.min().abs())) {
        return Err(OperatorError::Degenerate(trial));
    }
    let f = PlanarData::from_leaf_function(&inst.ps, &phi);
    let ext = planar_extend(inst, &f, p, backend)?;
    let plane = match analysis::planar_seminorm(&ext.interpolant, p, cfg.quad_order, f64::INFINITY) {
        Ok(e) => e,
        Err(AnalysisError::Unresolved { estimate, .. }) => estimate,
        Err(e) => return Err(e.into()),
    };
    let rule = DiskRule::new(cfg.rings, cfg.angles)?;
    let big = lift_to_tree(inst, &phi, &ext.interpolant, &rule);
    let tree_seminorm = crate::tree::seminorm_tree(tree, &big, p)?;
    Ok(TrialRow {
        seed,
        trial,
        n: tree.arity(),
        depth: tree.height(),
        epsilon: tree.epsilon(),
        p,
        backend: backend.name(),
        rho_plane: plane.value / trace,
        rho_tree: tree_seminorm / trace,
        quad_error: plane.relative_error(),
        trace,
        plane,
        tree_seminorm,
    })
}

/// `n_trials` independent trials, deterministic given `seed`.
pub fn norm_ratio_experiment(
    inst: &Instance,
    p: f64,
    n_trials: usize,
    seed: u64,
    backend: &ExtensionBackend,
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport, OperatorError> {
    if n_trials == 0 {
        return Err(OperatorError::Trials);
    }
    let rows = (0..n_trials).map(|t| run_trial(inst, p, seed, t, backend, cfg)).collect::<Result<Vec<_>, _>>()?;
    Ok(ExperimentReport::from_rows(rows))
}
