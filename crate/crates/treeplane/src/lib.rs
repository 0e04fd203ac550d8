//! File formats, layered configuration and the `treeplane` command line on
//! top of `treeplane-core`.

pub mod cli;
pub mod commands;
pub mod config;
pub mod io;

use std::fmt;

use treeplane_core::analysis::AnalysisError;
use treeplane_core::clusters::ClusterError;
use treeplane_core::extension::ExtensionError;
use treeplane_core::operators::OperatorError;

/// Process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    /// An exact lemma check failed.
    Verification = 1,
    /// Malformed or out-of-range input, including unreadable or unwritable paths.
    Input = 2,
    /// A measured constant or numerical tolerance was exceeded.
    Numerical = 3,
}

/// A failed command with its exit status.
#[derive(Debug)]
pub struct Failure {
    pub exit: Exit,
    pub message: String,
}

impl Failure {
    pub fn new(exit: Exit, message: impl Into<String>) -> Self {
        Self { exit, message: message.into() }
    }

    pub fn input(message: impl Into<String>) -> Self {
        Self::new(Exit::Input, message)
    }

    pub fn io(e: impl fmt::Display) -> Self {
        Self::new(Exit::Input, e.to_string())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

impl From<OperatorError> for Failure {
    fn from(e: OperatorError) -> Self {
        let exit = match &e {
            OperatorError::Clusters(ClusterError::Balls(_)) => Exit::Verification,
            OperatorError::Extension(ExtensionError::NonConvergence { .. }) => Exit::Numerical,
            OperatorError::Analysis(AnalysisError::Unresolved { .. }) => Exit::Numerical,
            _ => Exit::Input,
        };
        Self::new(exit, e.to_string())
    }
}
