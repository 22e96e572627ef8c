use std::path::PathBuf;

use crate::hexgrid::HexCoord;

/// Errors produced anywhere in the simulator.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("grid size must be at least 2, got {0}")]
    GridTooSmall(usize),

    #[error("coordinate ({}, {}) is outside a {size}x{size} grid", .coord.col, .coord.row)]
    OutOfBounds { coord: HexCoord, size: usize },

    #[error("no known path from ({}, {}) to ({}, {})", .from.col, .from.row, .to.col, .to.row)]
    NoPath { from: HexCoord, to: HexCoord },

    #[error("invalid maze file: {0}")]
    MazeFormat(String),

    #[error("invalid start cells: {0}")]
    InvalidStarts(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("replay buffer holds {have} transitions, {need} requested")]
    BufferNotReady { have: usize, need: usize },

    #[error("shape mismatch in {branch}: expected {expected:?}, got {actual:?}")]
    Shape {
        branch: &'static str,
        expected: Vec<usize>,
        actual: Vec<usize>,
    },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("missing checkpoint {0}")]
    MissingCheckpoint(PathBuf),

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
