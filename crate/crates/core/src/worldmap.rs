//! The exploration graph agents build while moving through a maze.
//!
//! A cell is a node; a known open side between two cells is an edge. An agent
//! standing on a cell sees that cell's six sides and nothing farther.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::hexgrid::{neighbor, Direction, HexCoord, Maze};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum CellStatus {
    Unknown,
    /// Seen through an open side of a visited cell, not yet entered.
    Frontier,
    Visited,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplorationGraph {
    size: usize,
    status: Vec<CellStatus>,
    /// Per-cell mask of sides known to be open; symmetric across each edge.
    open_edges: Vec<u8>,
    /// Per-cell mask of walls observed from inside the cell (visited cells only).
    known_walls: Vec<u8>,
    /// Frontier cells keyed by `(row, col)`.
    frontier: BTreeSet<(usize, usize)>,
    visited: usize,
}

impl ExplorationGraph {
    pub fn new(size: usize) -> Self {
        let n = size * size;
        Self {
            size,
            status: vec![CellStatus::Unknown; n],
            open_edges: vec![0; n],
            known_walls: vec![0; n],
            frontier: BTreeSet::new(),
            visited: 0,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn total_cells(&self) -> usize {
        self.size * self.size
    }

    pub fn status(&self, c: HexCoord) -> CellStatus {
        self.status[c.index(self.size)]
    }

    pub fn is_visited(&self, c: HexCoord) -> bool {
        self.status(c) == CellStatus::Visited
    }

    pub fn visited_count(&self) -> usize {
        self.visited
    }

    pub fn frontier_count(&self) -> usize {
        self.frontier.len()
    }

    /// Whether the side `dir` of `c` is a known open passage.
    pub fn has_edge(&self, c: HexCoord, dir: Direction) -> bool {
        self.open_edges[c.index(self.size)] & dir.bit() != 0
    }

    /// Known open neighbors of `c`, in direction order.
    pub fn edges(&self, c: HexCoord) -> impl Iterator<Item = (Direction, HexCoord)> + '_ {
        let mask = self.open_edges[c.index(self.size)];
        Direction::ALL
            .into_iter()
            .filter(move |d| mask & d.bit() != 0)
            .map(move |d| (d, neighbor(c, d, self.size).expect("edges stay in the grid")))
    }

    /// Wall mask observed at `c`; zero for cells never entered.
    pub fn known_walls(&self, c: HexCoord) -> u8 {
        self.known_walls[c.index(self.size)]
    }

    /// Marks `c` visited and records every open side as an edge. Returns the
    /// cells that were promoted from unknown to frontier.
    pub fn observe_and_visit(&mut self, maze: &Maze, c: HexCoord) -> Result<Vec<HexCoord>> {
        if !c.in_bounds(self.size) || maze.size() != self.size {
            return Err(Error::OutOfBounds { coord: c, size: self.size });
        }
        let idx = c.index(self.size);
        if self.status[idx] == CellStatus::Visited {
            return Ok(Vec::new());
        }
        if self.status[idx] == CellStatus::Frontier {
            self.frontier.remove(&c.row_major_key());
        }
        self.status[idx] = CellStatus::Visited;
        self.visited += 1;
        self.known_walls[idx] = maze.wall_mask(c);

        let mut promoted = Vec::new();
        for dir in Direction::ALL {
            let Some(n) = maze.step(c, dir) else { continue };
            let nidx = n.index(self.size);
            self.open_edges[idx] |= dir.bit();
            self.open_edges[nidx] |= dir.inverse().bit();
            if self.status[nidx] == CellStatus::Unknown {
                self.status[nidx] = CellStatus::Frontier;
                self.frontier.insert(n.row_major_key());
                promoted.push(n);
            }
        }
        debug_assert!(promoted.iter().all(|&n| self.frontier_is_anchored(n)));
        Ok(promoted)
    }

    /// Frontier cells in `(row, col)` order.
    pub fn unvisited_cells(&self) -> impl Iterator<Item = HexCoord> + '_ {
        self.frontier.iter().map(|&(row, col)| HexCoord::new(col, row))
    }

    pub fn coverage(&self) -> f64 {
        self.visited as f64 / self.total_cells() as f64
    }

    pub fn is_fully_explored(&self) -> bool {
        self.visited == self.total_cells()
    }

    fn frontier_is_anchored(&self, c: HexCoord) -> bool {
        self.edges(c).any(|(_, n)| self.is_visited(n))
    }

    /// Full structural check: every frontier cell hangs off a visited cell by a
    /// known edge, and every edge is an open passage of `maze`.
    pub fn check_invariants(&self, maze: &Maze) -> Result<()> {
        for i in 0..self.total_cells() {
            let c = HexCoord::from_index(i, self.size);
            match self.status[i] {
                CellStatus::Frontier if !self.frontier_is_anchored(c) => {
                    return Err(Error::Invariant(format!("frontier {c} has no visited neighbor")));
                }
                CellStatus::Unknown if self.open_edges[i] != 0 => {
                    return Err(Error::Invariant(format!("unknown cell {c} has edges")));
                }
                _ => {}
            }
            for (dir, n) in self.edges(c) {
                if maze.step(c, dir) != Some(n) {
                    return Err(Error::Invariant(format!("edge {c}->{n} is not open in the maze")));
                }
            }
        }
        let frontier = self.status.iter().filter(|s| **s == CellStatus::Frontier).count();
        if frontier != self.frontier.len() {
            return Err(Error::Invariant("frontier index out of sync".into()));
        }
        Ok(())
    }
}
