//! Effective run parameters: defaults, overlaid by a TOML file, overlaid by
//! command-line flags.

use std::path::Path;

use serde::{Deserialize, Serialize};
use treeplane_core::operators::{ExperimentConfig, InstanceConfig};
use treeplane_core::{BallConfig, ExtensionBackend, SolverConfig};

use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Optimal,
    Averaging,
}

/// Tree-solver keys of the `[solver]` table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverKeys {
    pub tol: f64,
    pub max_newton: usize,
    pub mu_final: f64,
    pub mu_factor: f64,
    pub max_sweeps: usize,
}

impl Default for SolverKeys {
    fn default() -> Self {
        let s = SolverConfig::default();
        Self { tol: s.tol, max_newton: s.max_newton, mu_final: s.mu_final, mu_factor: s.mu_factor, max_sweeps: s.max_sweeps }
    }
}

/// Every tunable; serialised verbatim into reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Exponent for single-`p` commands.
    pub p: f64,
    /// Exponents for the `R_C` sums in `verify`.
    pub p_list: Vec<f64>,
    /// Arity `N` for `gen-tree`.
    pub arity: usize,
    pub depth: usize,
    pub epsilon: f64,
    pub kappa: f64,
    /// `ε ≤ k₀/N` is required of generated trees.
    pub k0: f64,
    /// Dilation `K₀` of the ball properties.
    #[serde(rename = "K0")]
    pub big_k0: f64,
    /// Overrides the computed `K₁` when set.
    #[serde(rename = "K1", skip_serializing_if = "Option::is_none")]
    pub k1: Option<f64>,
    pub quad_order: usize,
    /// Fine/coarse discrepancy above which a seminorm counts as unresolved.
    pub refine_tol: f64,
    pub rings: usize,
    pub angles: usize,
    pub trials: usize,
    pub seed: u64,
    pub backend: Backend,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    pub max_squares: usize,
    /// Random affine families for the patching constant in `verify`.
    pub patching_families: u64,
    /// Gaussian-bump fields for the ball-estimate ratios in `verify`.
    pub bump_fields: u64,
    /// Side of the sampling grid of `extend-plane`.
    pub grid: usize,
    pub solver: SolverKeys,
}

impl Default for Config {
    fn default() -> Self {
        let ic = InstanceConfig::default();
        Self {
            p: 1.5,
            p_list: vec![1.25, 1.5, 1.75],
            arity: 2,
            depth: 1,
            epsilon: 0.01,
            kappa: ic.balls.kappa,
            k0: 0.05,
            big_k0: ic.balls.k0,
            k1: None,
            quad_order: treeplane_core::analysis::DEFAULT_QUAD_ORDER,
            refine_tol: treeplane_core::analysis::DEFAULT_REFINE_TOL,
            rings: treeplane_core::analysis::DEFAULT_RINGS,
            angles: treeplane_core::analysis::DEFAULT_ANGLES,
            trials: 50,
            seed: 0,
            backend: Backend::Optimal,
            workers: 0,
            max_squares: ic.max_squares,
            patching_families: 3,
            bump_fields: 10,
            grid: 201,
            solver: SolverKeys::default(),
        }
    }
}

/// Flag values; `None` leaves the file or default value in place.
#[derive(Clone, Debug, Default, clap::Args)]
pub struct Overrides {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<std::path::PathBuf>,
    #[arg(long, global = true)]
    pub p: Option<f64>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    #[arg(long = "k0", global = true)]
    pub k0: Option<f64>,
    #[arg(long = "K0", global = true)]
    pub big_k0: Option<f64>,
    #[arg(long = "quad-order", global = true)]
    pub quad_order: Option<usize>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub backend: Option<Backend>,
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

impl Config {
    /// Parses a TOML file; absent keys keep their defaults.
    pub fn from_toml(text: &str) -> Result<Self, Failure> {
        toml::from_str(text).map_err(|e| Failure::input(format!("config: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Defaults, then the file named by `--config`, then the flags.
    pub fn resolve(o: &Overrides) -> Result<Self, Failure> {
        let mut c = match &o.config {
            Some(path) => Self::from_file(path)?,
            None => Self::default(),
        };
        c.apply(o);
        c.check()?;
        Ok(c)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.p {
            self.p = v;
        }
        if let Some(v) = o.epsilon {
            self.epsilon = v;
        }
        if let Some(v) = o.kappa {
            self.kappa = v;
        }
        if let Some(v) = o.k0 {
            self.k0 = v;
        }
        if let Some(v) = o.big_k0 {
            self.big_k0 = v;
        }
        if let Some(v) = o.quad_order {
            self.quad_order = v;
        }
        if let Some(v) = o.trials {
            self.trials = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.backend {
            self.backend = v;
        }
        if let Some(v) = o.workers {
            self.workers = v;
        }
    }

    /// Range checks that do not depend on a tree.
    pub fn check(&self) -> Result<(), Failure> {
        let bad = |what: &str| Err(Failure::input(what.to_string()));
        if !(self.p > 1.0 && self.p < 2.0) {
            return bad(&format!("p = {} must lie in (1, 2)", self.p));
        }
        if self.p_list.iter().any(|p| !(*p > 1.0 && *p < 2.0)) {
            return bad("every entry of p_list must lie in (1, 2)");
        }
        if !(self.k0 > 0.0 && self.k0 < 1.0) {
            return bad(&format!("k0 = {} must lie in (0, 1)", self.k0));
        }
        if self.quad_order < 4 {
            return bad(&format!("quad_order = {} must be at least 4", self.quad_order));
        }
        if self.rings < 4 || self.angles < 4 {
            return bad("rings and angles must be at least 4");
        }
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.grid < 2 {
            return bad("grid must be at least 2");
        }
        Ok(())
    }

    pub fn solver(&self) -> SolverConfig {
        let s = &self.solver;
        SolverConfig { tol: s.tol, max_newton: s.max_newton, mu_final: s.mu_final, mu_factor: s.mu_factor, max_sweeps: s.max_sweeps }
    }

    pub fn backend(&self) -> ExtensionBackend {
        match self.backend {
            Backend::Optimal => ExtensionBackend::Optimal(self.solver()),
            Backend::Averaging => ExtensionBackend::Averaging,
        }
    }

    pub fn instance(&self) -> InstanceConfig {
        InstanceConfig {
            balls: BallConfig { kappa: self.kappa, k1: self.k1, k0: self.big_k0, ..BallConfig::default() },
            max_squares: self.max_squares,
        }
    }

    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig { quad_order: self.quad_order, rings: self.rings, angles: self.angles, solver: self.solver() }
    }

    /// Rayon pool honouring `workers`.
    pub fn pool(&self) -> Result<rayon::ThreadPool, Failure> {
        rayon::ThreadPoolBuilder::new().num_threads(self.workers).build().map_err(|e| Failure::input(format!("workers: {e}")))
    }
}
