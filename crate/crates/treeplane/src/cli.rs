//! Argument parsing and dispatch.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands;
use crate::config::{Config, Overrides};
use crate::{Exit, Failure};

#[derive(Debug, Parser)]
#[command(name = "treeplane", version, about = "Tree and planar Sobolev extension pipelines")]
pub struct Cli {
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Random tree with every leaf at the given depth.
    GenTree {
        #[arg(long = "N", default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        depth: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Planar set, Whitney decomposition and clusters of a tree.
    Build {
        #[arg(long)]
        tree: PathBuf,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Every lemma check and measured constant.
    Verify {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The planar extension of `φ·W` on a sampling grid.
    ExtendPlane {
        #[arg(long)]
        tree: PathBuf,
        /// JSON array of leaf values; a seeded Gaussian draw when absent.
        #[arg(long)]
        phi: Option<PathBuf>,
        /// Sampling box `x0,x1,y0,y1`.
        #[arg(long, value_delimiter = ',', num_args = 4, default_values_t = [-0.1, 2.1, -0.1, 0.5])]
        bounds: Vec<f64>,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// The tree extension lifted from the planar one.
    ExtendTree {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        phi: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Norm-ratio trials as CSV.
    Experiment {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stage timings.
    Bench {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn dispatch(cli: &Cli) -> Result<Exit, Failure> {
    let mut cfg = Config::resolve(&cli.overrides)?;
    match &cli.command {
        Command::GenTree { n, depth, out } => {
            cfg.arity = *n;
            cfg.depth = *depth;
            commands::gen_tree(&cfg, out.as_deref())
        }
        Command::Build { tree, out } => commands::build(&cfg, tree, out),
        Command::Verify { tree, out } => commands::verify(&cfg, tree, out.as_deref()),
        Command::ExtendPlane { tree, phi, bounds, out } => {
            let b = [bounds[0], bounds[1], bounds[2], bounds[3]];
            if !(b[0] < b[1] && b[2] < b[3]) {
                return Err(Failure::input("bounds must satisfy x0 < x1 and y0 < y1"));
            }
            commands::extend_plane(&cfg, tree, phi.as_deref(), b, out)
        }
        Command::ExtendTree { tree, phi, out } => commands::extend_tree(&cfg, tree, phi.as_deref(), out.as_deref()),
        Command::Experiment { tree, out } => commands::experiment(&cfg, tree, out.as_deref()),
        Command::Bench { tree, out } => commands::bench(&cfg, tree, out.as_deref()),
    }
}

/// Parses `args` and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { Exit::Input as i32 } else { Exit::Success as i32 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(exit) => exit as i32,
        Err(f) => {
            eprintln!("treeplane: {f}");
            f.exit as i32
        }
    }
}
