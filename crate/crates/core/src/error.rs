use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error(
        "infeasible perturbation: gamma {gamma} with {actions} actions (needs gamma * actions < 1)"
    )]
    InfeasibleGamma { gamma: f64, actions: usize },

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("strategy on the boundary: {0}")]
    Boundary(String),

    #[error("invalid treeplex: {0}")]
    Treeplex(String),

    #[error("invalid game: {0}")]
    Game(String),

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no convergence after {iters} iterations (residual {residual:e}, target {target:e})")]
    Convergence {
        iters: usize,
        residual: f64,
        target: f64,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
