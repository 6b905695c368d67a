use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::expr::ExprError;
use crate::session::config::ConfigError;
use crate::session::snapshot::SnapshotError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0} vs {1} samples per axis")]
    GridMismatch(usize, usize),

    #[error("non-finite values in {0}")]
    NonFinite(&'static str),

    #[error(transparent)]
    Expr(#[from] ExprError),

    #[error("trajectory of node ({i}, {j}) became non-finite at s = {s}")]
    StepFailure { i: usize, j: usize, s: f64 },

    #[error("symplectic defect {defect:.3e} exceeds tolerance {tolerance:.3e}")]
    Defect { defect: f64, tolerance: f64 },

    #[error("Newton inversion failed: worst node ({i}, {j}) with residual {residual:.3e}")]
    Inversion { i: usize, j: usize, residual: f64 },

    #[error("degenerate induced metric at node ({i}, {j}): det g = {det:.3e}")]
    DegenerateMetric { i: usize, j: usize, det: f64 },

    #[error("time step {dt:.3e} exceeds the stability limit {limit:.3e}")]
    Cfl { dt: f64, limit: f64 },

    #[error("surface is not Lagrangian: max |ω′(e1, e2)| = {defect:.3e}")]
    NotLagrangian { defect: f64 },

    #[error("complex determinant of the tangent frame vanishes at node ({i}, {j})")]
    ZeroDeterminant { i: usize, j: usize },

    #[error("winding around the {cycle} cycle is not an integer (raw {raw:.6})")]
    NonIntegerWinding { cycle: &'static str, raw: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Snapshot(#[from] SnapshotError),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
