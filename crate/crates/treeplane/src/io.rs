//! File formats: tree and planar-set JSON, decomposition CSV, cluster JSON,
//! interpolant grid CSV and experiment CSV.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use treeplane_core::clusters::PairSets;
use treeplane_core::geometry::Point;
use treeplane_core::interpolant::Field;
use treeplane_core::operators::{Instance, TrialRow};
use treeplane_core::tree::NodeId;
use treeplane_core::{ClusterTree, PlanarSet, WeightedTree, WhitneyDecomposition};

use crate::Failure;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: String,
    pub weight: f64,
}

/// `{"N": int, "epsilon": float, "nodes": [{"id", "weight"}]}`; ids are
/// digit strings, the root is `""`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeFile {
    #[serde(rename = "N")]
    pub n: usize,
    pub epsilon: f64,
    pub nodes: Vec<NodeRecord>,
}

impl TreeFile {
    pub fn from_tree(t: &WeightedTree) -> Self {
        Self { n: t.arity(), epsilon: t.epsilon(), nodes: t.nodes().map(|v| NodeRecord { id: t.id(v), weight: t.weight(v) }).collect() }
    }

    /// Builds and validates the tree; any broken invariant is an input error.
    pub fn to_tree(&self) -> Result<WeightedTree, Failure> {
        let t = WeightedTree::from_nodes(self.n, self.epsilon, self.nodes.iter().map(|r| (r.id.as_str(), r.weight)))
            .map_err(|e| Failure::input(format!("tree: {e}")))?;
        let bad = t.validate();
        if !bad.is_empty() {
            let list: Vec<String> = bad.iter().map(|v| v.to_string()).collect();
            return Err(Failure::input(format!("tree violates its invariants: {}", list.join("; "))));
        }
        Ok(t)
    }
}

pub fn read_tree(path: &Path) -> Result<WeightedTree, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let file: TreeFile = serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    file.to_tree()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(Failure::io)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

pub fn write_tree(path: &Path, t: &WeightedTree) -> Result<(), Failure> {
    write_json(path, &TreeFile::from_tree(t))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct E2Record {
    pub leaf: String,
    pub x: f64,
    pub y: f64,
}

/// E1 is implicit: the points `kΔ` for `k < e1_count`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarSetFile {
    pub delta: f64,
    pub e1_count: usize,
    pub e1_last: f64,
    pub e2: Vec<E2Record>,
}

impl PlanarSetFile {
    pub fn new(t: &WeightedTree, ps: &PlanarSet) -> Self {
        Self {
            delta: ps.delta(),
            e1_count: ps.e1_count(),
            e1_last: ps.e1_point(ps.e1_count() - 1).x,
            e2: ps.e2().iter().map(|e| E2Record { leaf: t.id(e.leaf), x: e.point.x, y: e.point.y }).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquareRecord {
    pub level: u8,
    pub ix: u64,
    pub iy: u64,
    pub side: f64,
    #[serde(rename = "type")]
    pub kind: String,
    pub boundary: bool,
    pub z_x: f64,
    pub z_y: f64,
    pub w_x: f64,
    pub w_y: f64,
    pub cluster: String,
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>, Failure> {
    csv::Writer::from_path(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn finish<W: Write>(mut w: csv::Writer<W>) -> Result<(), Failure> {
    w.flush().map_err(Failure::io)
}

/// One row per Whitney square with its basepoints and cluster.
pub fn write_decomposition(path: &Path, inst: &Instance) -> Result<(), Failure> {
    let mut w = csv_writer(path)?;
    for (i, s) in inst.wd.squares().iter().enumerate() {
        let (z, wp) = (inst.ps.e1_point(s.z), inst.ps.e1_point(s.w));
        w.serialize(SquareRecord {
            level: s.square.level,
            ix: s.square.ix,
            iy: s.square.iy,
            side: s.square.side(),
            kind: s.kind.label().to_string(),
            boundary: s.boundary,
            z_x: z.x,
            z_y: z.y,
            w_x: wp.x,
            w_y: wp.y,
            cluster: inst.tree.id(inst.asg.cluster_of(i)),
        })
        .map_err(Failure::io)?;
    }
    finish(w)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterRecord {
    pub id: String,
    pub weight: f64,
    pub depth: usize,
    pub representative: String,
    pub center: [f64; 2],
    pub radius: f64,
    /// `(p, R_C)`; zero at the root.
    pub r_c: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterFile {
    pub kappa: f64,
    #[serde(rename = "K1")]
    pub k1: f64,
    #[serde(rename = "K0")]
    pub k0: f64,
    pub clusters: Vec<ClusterRecord>,
}

impl ClusterFile {
    pub fn new(t: &WeightedTree, ct: &ClusterTree, sets: &PairSets) -> Self {
        let clusters = t
            .nodes()
            .map(|v| {
                let d = ct.ball_of(v);
                ClusterRecord {
                    id: t.id(v),
                    weight: ct.weight(v),
                    depth: ct.depth(v),
                    representative: t.id(t.leaves()[ct.representative(v)]),
                    center: [d.center.x, d.center.y],
                    radius: d.radius,
                    r_c: sets.ratios.iter().map(|(p, r)| (*p, r[v.index()])).collect(),
                }
            })
            .collect();
        Self { kappa: ct.kappa(), k1: ct.k1(), k0: ct.k0(), clusters }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridRecord {
    pub x: f64,
    pub y: f64,
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

/// `n × n` samples of `(F̃, ∂₁F̃, ∂₂F̃)` on the closed box `[x0, x1] × [y0, y1]`.
pub fn write_grid<F: Field + ?Sized>(path: &Path, f: &F, bounds: [f64; 4], n: usize) -> Result<(), Failure> {
    let mut w = csv_writer(path)?;
    let [x0, x1, y0, y1] = bounds;
    let step = |a: f64, b: f64, k: usize| a + (b - a) * k as f64 / (n - 1) as f64;
    for j in 0..n {
        for i in 0..n {
            let x = Point::new(step(x0, x1, i), step(y0, y1, j));
            let jet = f.jet(x);
            w.serialize(GridRecord { x: x.x, y: x.y, value: jet.value, d1: jet.grad[0], d2: jet.grad[1] }).map_err(Failure::io)?;
        }
    }
    finish(w)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub seed: u64,
    pub trial: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub depth: usize,
    pub epsilon: f64,
    pub p: f64,
    pub backend: String,
    pub rho_plane: f64,
    pub rho_tree: f64,
    pub quad_error: f64,
}

impl From<&TrialRow> for ExperimentRecord {
    fn from(r: &TrialRow) -> Self {
        Self {
            seed: r.seed,
            trial: r.trial,
            n: r.n,
            depth: r.depth,
            epsilon: r.epsilon,
            p: r.p,
            backend: r.backend.to_string(),
            rho_plane: r.rho_plane,
            rho_tree: r.rho_tree,
            quad_error: r.quad_error,
        }
    }
}

pub fn write_experiment(path: &Path, rows: &[TrialRow]) -> Result<(), Failure> {
    let mut w = csv_writer(path)?;
    for r in rows {
        w.serialize(ExperimentRecord::from(r)).map_err(Failure::io)?;
    }
    finish(w)
}

pub fn read_experiment(path: &Path) -> Result<Vec<ExperimentRecord>, Failure> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    r.deserialize().collect::<Result<_, _>>().map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// Leaf values by id, in leaf order.
pub fn leaf_values(t: &WeightedTree, values: &[f64]) -> Vec<(String, f64)> {
    t.leaves().iter().zip(values).map(|(l, v)| (t.id(*l), *v)).collect()
}

/// Node values by id, in tree order.
pub fn node_values(t: &WeightedTree, values: &[f64]) -> Vec<(String, f64)> {
    t.nodes().map(|v: NodeId| (t.id(v), values[v.index()])).collect()
}

pub fn decomposition_summary(wd: &WhitneyDecomposition) -> [usize; 4] {
    let mut c = [0usize; 4];
    for s in wd.squares() {
        c[match s.kind {
            treeplane_core::SquareType::I => 0,
            treeplane_core::SquareType::II => 1,
            treeplane_core::SquareType::III => 2,
        }] += 1;
        if s.boundary {
            c[3] += 1;
        }
    }
    c
}
