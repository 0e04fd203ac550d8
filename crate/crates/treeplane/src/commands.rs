//! One function per subcommand. Each writes its artefacts and returns the
//! exit status its findings call for.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use treeplane_core::analysis::{
    ball_estimate_sums, patching_constant, planar_seminorm, random_affine_family, AnalysisError, DiskRule, GaussianBumpField,
};
use treeplane_core::extension::trace_seminorm;
use treeplane_core::operators::{
    planar_extend, random_leaf_function, restriction_error, run_trial, tree_extend_from_planar, ExperimentReport, Instance, PlanarData,
    Spread, TrialRow,
};
use treeplane_core::tree::{seminorm_tree, LeafFunction};
use treeplane_core::verify::{verify_instance, CheckKind};
use treeplane_core::{PlanarSet, WeightedTree, WhitneyDecomposition};

use crate::config::Config;
use crate::io::{self, ClusterFile, PlanarSetFile};
use crate::{Exit, Failure};

/// Largest accepted `|F̃ − f|` on `E`, relative to `max |f|`.
pub const RESTRICTION_TOL: f64 = 1e-9;
/// Gaussian bumps per field in the ball-estimate ratios.
pub const BUMPS_PER_FIELD: usize = 6;

fn emit(out: Option<&Path>, value: &serde_json::Value) -> Result<(), Failure> {
    match out {
        Some(p) => io::write_json(p, value),
        None => {
            println!("{}", serde_json::to_string_pretty(value).map_err(Failure::io)?);
            Ok(())
        }
    }
}

fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::io(format!("{}: {e}", dir.display())))
}

/// Leaf values from a JSON array, or the de-meaned Gaussian draw for `seed`.
pub fn leaf_function(tree: &WeightedTree, phi: Option<&Path>, seed: u64) -> Result<LeafFunction, Failure> {
    match phi {
        None => Ok(random_leaf_function(tree, seed, 0)),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            let values: Vec<f64> = serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            LeafFunction::new(tree, values).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
        }
    }
}

pub fn gen_tree(cfg: &Config, out: Option<&Path>) -> Result<Exit, Failure> {
    let bound = cfg.k0 / cfg.arity as f64;
    if !(cfg.epsilon > 0.0 && cfg.epsilon <= bound) {
        return Err(Failure::input(format!("epsilon {} must lie in (0, k0/N] = (0, {bound}]", cfg.epsilon)));
    }
    let t = WeightedTree::random(cfg.arity, cfg.depth, cfg.epsilon, cfg.seed).map_err(|e| Failure::input(e.to_string()))?;
    PlanarSet::build(&t).map_err(|e| Failure::input(e.to_string()))?;
    let file = io::TreeFile::from_tree(&t);
    emit(out, &serde_json::to_value(file).map_err(Failure::io)?)?;
    Ok(Exit::Success)
}

/// Writes the planar set, decomposition and clusters of one instance.
pub fn build(cfg: &Config, tree_path: &Path, out_dir: &Path) -> Result<Exit, Failure> {
    let tree = io::read_tree(tree_path)?;
    let t0 = Instant::now();
    let inst = Instance::build(tree, &cfg.instance())?;
    let secs = t0.elapsed().as_secs_f64();
    ensure_dir(out_dir)?;
    io::write_json(&out_dir.join("planar_set.json"), &PlanarSetFile::new(&inst.tree, &inst.ps))?;
    io::write_decomposition(&out_dir.join("decomposition.csv"), &inst)?;
    let sets = inst.asg.pair_sets(&inst.ct, &inst.wd, &cfg.p_list);
    io::write_json(&out_dir.join("clusters.json"), &ClusterFile::new(&inst.tree, &inst.ct, &sets))?;
    let [t1, t2, t3, nb] = io::decomposition_summary(&inst.wd);
    let report = json!({
        "config": cfg,
        "squares": inst.wd.len(),
        "type_counts": {"I": t1, "II": t2, "III": t3, "boundary": nb},
        "delta": inst.ps.delta(),
        "K1": inst.ct.k1(),
        "ambiguous_descents": inst.asg.ambiguous,
        "build_seconds": secs,
    });
    io::write_json(&out_dir.join("build.json"), &report)?;
    Ok(Exit::Success)
}

#[derive(Serialize)]
struct CheckRecord<'a> {
    name: &'a str,
    kind: &'static str,
    passed: bool,
    detail: &'a str,
}

/// Patching constants of random affine families and ball-estimate ratios
/// of Gaussian-bump fields.
fn sampled_constants(cfg: &Config, inst: &Instance) -> Result<(Vec<f64>, Vec<f64>), Failure> {
    let p = cfg.p;
    let patching = (0..cfg.patching_families)
        .into_par_iter()
        .map(|k| patching_constant(&random_affine_family(&inst.wd, cfg.seed, k), p, cfg.quad_order))
        .collect::<Result<Vec<f64>, AnalysisError>>()
        .map_err(|e| Failure::new(Exit::Numerical, e.to_string()))?;
    let rule = DiskRule::new(cfg.rings, cfg.angles).map_err(|e| Failure::input(e.to_string()))?;
    let ball = (0..cfg.bump_fields)
        .into_par_iter()
        .map(|k| {
            let g = GaussianBumpField::random(BUMPS_PER_FIELD, cfg.seed.wrapping_add(k));
            let (s1, s2) = ball_estimate_sums(&inst.tree, &inst.ps, &inst.wd, &inst.ct, &g, p, &rule)?;
            Ok((s1 + s2) / g.seminorm_power(p, cfg.quad_order))
        })
        .collect::<Result<Vec<f64>, AnalysisError>>()
        .map_err(|e| Failure::new(Exit::Numerical, e.to_string()))?;
    Ok((patching, ball))
}

/// Every lemma check plus the measured constants. Exit 1 on an exact
/// failure, otherwise 3 on a measured-bound failure.
pub fn verify(cfg: &Config, tree_path: &Path, out: Option<&Path>) -> Result<Exit, Failure> {
    let tree = io::read_tree(tree_path)?;
    let pool = cfg.pool()?;
    let inst = Instance::build(tree, &cfg.instance())?;
    let report = verify_instance(&inst, &cfg.p_list);
    let (patching, ball) = pool.install(|| sampled_constants(cfg, &inst))?;
    let checks: Vec<CheckRecord> = report
        .checks
        .iter()
        .map(|c| CheckRecord {
            name: c.name,
            kind: if c.kind == CheckKind::Exact { "exact" } else { "measured" },
            passed: c.passed,
            detail: &c.detail,
        })
        .collect();
    let m = &report.measured;
    let w = &m.whitney;
    let value = json!({
        "config": cfg,
        "exact_passed": report.exact_passed(),
        "measured_passed": report.measured_passed(),
        "checks": checks,
        "measured": {
            "psi_K": m.psi_k,
            "squares": w.squares,
            "type_counts": {"I": w.counts[0], "II": w.counts[1], "III": w.counts[2], "boundary": w.boundary},
            "min_side_over_delta": w.min_side_over_delta,
            "max_neighbors": w.max_neighbors,
            "max_cover": w.max_cover,
            "dist_bd_ratio": [w.dist_bd.0, w.dist_bd.1],
            "type3_ratio": [w.type3_ratio.0, w.type3_ratio.1],
            "basepoint_ratio": [w.basepoint_ratio.0, w.basepoint_ratio.1],
            "K1": m.k1,
            "b4_min_ratio": m.b4_min_ratio,
            "diam_ratio": [m.diam_ratio.0, m.diam_ratio.1],
            "ambiguous_descents": m.ambiguous_descents,
            "max_R_C": m.max_rc,
            "patching_C_meas": patching,
            "ball_estimate_ratios": ball,
        },
    });
    emit(out, &value)?;
    Ok(if !report.exact_passed() {
        Exit::Verification
    } else if !report.measured_passed() {
        Exit::Numerical
    } else {
        Exit::Success
    })
}

/// Samples `F̃` for the data `f = φ·W` on E2, `0` on E1, and reports its
/// seminorm and restriction error.
pub fn extend_plane(cfg: &Config, tree_path: &Path, phi: Option<&Path>, bounds: [f64; 4], out_dir: &Path) -> Result<Exit, Failure> {
    let tree = io::read_tree(tree_path)?;
    let inst = Instance::build(tree, &cfg.instance())?;
    let phi = leaf_function(&inst.tree, phi, cfg.seed)?;
    let f = PlanarData::from_leaf_function(&inst.ps, &phi);
    let ext = planar_extend(&inst, &f, cfg.p, &cfg.backend())?;
    ensure_dir(out_dir)?;
    io::write_grid(&out_dir.join("interpolant.csv"), &ext.interpolant, bounds, cfg.grid)?;
    let e1: Vec<usize> = (0..inst.ps.e1_count()).collect();
    let restriction = restriction_error(&inst, &ext.interpolant, &f, &e1);
    let (seminorm, resolved) = match planar_seminorm(&ext.interpolant, cfg.p, cfg.quad_order, cfg.refine_tol) {
        Ok(s) => (s, true),
        Err(AnalysisError::Unresolved { estimate, .. }) => (estimate, false),
        Err(e) => return Err(Failure::new(Exit::Numerical, e.to_string())),
    };
    let report = json!({
        "config": cfg,
        "phi": io::leaf_values(&inst.tree, phi.values()),
        "Phi": io::node_values(&inst.tree, ext.big_phi.values()),
        "seminorm": seminorm.value,
        "seminorm_error": seminorm.error,
        "seminorm_resolved": resolved,
        "restriction_error": restriction,
        "grid_bounds": bounds,
    });
    io::write_json(&out_dir.join("extend_plane.json"), &report)?;
    Ok(if resolved && restriction <= RESTRICTION_TOL { Exit::Success } else { Exit::Numerical })
}

/// `Hφ` lifted from the planar construction, with its seminorm against the
/// trace seminorm.
pub fn extend_tree(cfg: &Config, tree_path: &Path, phi: Option<&Path>, out: Option<&Path>) -> Result<Exit, Failure> {
    let tree = io::read_tree(tree_path)?;
    let inst = Instance::build(tree, &cfg.instance())?;
    let phi = leaf_function(&inst.tree, phi, cfg.seed)?;
    let rule = DiskRule::new(cfg.rings, cfg.angles).map_err(|e| Failure::input(e.to_string()))?;
    let lifted = tree_extend_from_planar(&inst, &phi, cfg.p, &cfg.backend(), &rule)?;
    let norm = seminorm_tree(&inst.tree, &lifted, cfg.p).map_err(|e| Failure::input(e.to_string()))?;
    let trace = trace_seminorm(&inst.tree, &phi, cfg.p, &cfg.solver())
        .map_err(|e| Failure::from(treeplane_core::operators::OperatorError::from(e)))?;
    let value = json!({
        "config": cfg,
        "phi": io::leaf_values(&inst.tree, phi.values()),
        "Phi": io::node_values(&inst.tree, lifted.values()),
        "tree_seminorm": norm,
        "trace_seminorm": trace,
        "rho_tree": norm / trace,
    });
    emit(out, &value)?;
    Ok(Exit::Success)
}

/// `cfg.trials` trials on `cfg.workers` threads; rows are in trial order
/// whatever the scheduling.
pub fn experiment_rows(cfg: &Config, inst: &Instance) -> Result<Vec<TrialRow>, Failure> {
    let pool = cfg.pool()?;
    let backend = cfg.backend();
    let ecfg = cfg.experiment();
    pool.install(|| {
        (0..cfg.trials).into_par_iter().map(|t| run_trial(inst, cfg.p, cfg.seed, t, &backend, &ecfg)).collect::<Result<Vec<_>, _>>()
    })
    .map_err(Failure::from)
}

fn spread_json(s: &Spread) -> serde_json::Value {
    json!({"min": s.min, "median": s.median, "max": s.max})
}

/// Experiment CSV plus a JSON summary next to it (`<out>.json`). Exit 3 when
/// a ratio is not finite or a seminorm is unresolved at `refine_tol`.
pub fn experiment(cfg: &Config, tree_path: &Path, out: Option<&Path>) -> Result<Exit, Failure> {
    let tree = io::read_tree(tree_path)?;
    let inst = Instance::build(tree, &cfg.instance())?;
    let rows = experiment_rows(cfg, &inst)?;
    let report = ExperimentReport::from_rows(rows);
    let bad = report.rows.iter().filter(|r| !(r.rho_plane.is_finite() && r.rho_tree.is_finite()) || r.quad_error > cfg.refine_tol).count();
    let summary = json!({
        "config": cfg,
        "trials": report.rows.len(),
        "rho_plane": spread_json(&report.rho_plane),
        "rho_tree": spread_json(&report.rho_tree),
        "flagged_trials": bad,
        "note": "the constant C(p, N) relating the two operator norms is not computable from the proof; only the stability of these ratios is assessed",
    });
    match out {
        Some(path) => {
            io::write_experiment(path, &report.rows)?;
            io::write_json(&sidecar(path), &summary)?;
        }
        None => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            for r in &report.rows {
                w.serialize(io::ExperimentRecord::from(r)).map_err(Failure::io)?;
            }
            w.flush().map_err(Failure::io)?;
            eprintln!("{}", serde_json::to_string_pretty(&summary).map_err(Failure::io)?);
        }
    }
    Ok(if bad == 0 { Exit::Success } else { Exit::Numerical })
}

/// `run.csv` → `run.json`.
pub fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Wall-clock seconds of each pipeline stage on one instance.
pub fn bench(cfg: &Config, tree_path: &Path, out: Option<&Path>) -> Result<Exit, Failure> {
    let tree = io::read_tree(tree_path)?;
    let mut stages = Vec::new();
    let mut time = |name: &str, t: Instant| stages.push((name.to_string(), t.elapsed().as_secs_f64()));
    let t = Instant::now();
    let ps = PlanarSet::build(&tree).map_err(|e| Failure::input(e.to_string()))?;
    time("planar_set", t);
    let t = Instant::now();
    let wd = WhitneyDecomposition::build_with_cap(&ps, cfg.max_squares).map_err(|e| Failure::input(e.to_string()))?;
    time("whitney", t);
    let squares = wd.len();
    drop((ps, wd));
    let t = Instant::now();
    let inst = Instance::build(tree, &cfg.instance())?;
    time("instance", t);
    let t = Instant::now();
    let report = verify_instance(&inst, &cfg.p_list);
    time("verify", t);
    let t = Instant::now();
    run_trial(&inst, cfg.p, cfg.seed, 0, &cfg.backend(), &cfg.experiment())?;
    time("trial", t);
    let value = json!({
        "config": cfg,
        "squares": squares,
        "exact_passed": report.exact_passed(),
        "seconds": stages,
    });
    emit(out, &value)?;
    Ok(Exit::Success)
}
