//! Multi-agent exploration of hexagonal grid mazes.
//!
//! The crate provides the maze model ([`hexgrid`]), the shared exploration
//! graph ([`worldmap`]), A* travel ([`pathfind`]), four classical baseline
//! policies ([`classical`]), a backtrack-assisted deep Q-network agent
//! ([`rl`], [`neural`], [`sim`]) and a benchmark harness ([`bench`]).

pub mod bench;
pub mod classical;
pub mod error;
pub mod hexgrid;
pub mod neural;
pub mod pathfind;
pub mod rl;
pub mod rng;
pub mod sim;
pub mod worldmap;

pub use error::{Error, Result};
pub use hexgrid::{generate_maze, Direction, HexCoord, Maze};
pub use worldmap::{CellStatus, ExplorationGraph};
