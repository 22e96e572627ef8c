//! Nearest-frontier selection and A* travel over the known graph.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use crate::error::{Error, Result};
use crate::hexgrid::{cell_center, HexCoord};
use crate::worldmap::{CellStatus, ExplorationGraph};

/// A simple path; `cells[0]` is the start and consecutive cells share a known edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    pub cells: Vec<HexCoord>,
}

impl Path {
    pub fn hops(&self) -> usize {
        self.cells.len().saturating_sub(1)
    }

    pub fn start(&self) -> HexCoord {
        self.cells[0]
    }

    pub fn end(&self) -> HexCoord {
        *self.cells.last().expect("paths are never empty")
    }
}

pub fn point_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt()
}

/// Straight-line distance between cell centers, in cell widths.
pub fn euclidean_distance(a: HexCoord, b: HexCoord) -> f64 {
    point_distance(cell_center(a), cell_center(b))
}

/// Cells connected to `from` through known edges, indexed by cell index.
/// Early in an episode the regions around different start cells are separate
/// components of the known graph.
pub fn reachable(g: &ExplorationGraph, from: HexCoord) -> Vec<bool> {
    let size = g.size();
    let mut seen = vec![false; g.total_cells()];
    if !from.in_bounds(size) || g.status(from) == CellStatus::Unknown {
        return seen;
    }
    seen[from.index(size)] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(c) = queue.pop_front() {
        for (_, m) in g.edges(c) {
            let mi = m.index(size);
            if !seen[mi] && g.status(m) != CellStatus::Unknown {
                seen[mi] = true;
                queue.push_back(m);
            }
        }
    }
    seen
}

/// The reachable frontier cell closest to `from` by straight-line distance;
/// ties go to the smaller `(row, col)`.
pub fn nearest_unvisited(g: &ExplorationGraph, from: HexCoord) -> Option<HexCoord> {
    nearest_matching(g, from, |_| true)
}

/// As [`nearest_unvisited`], restricted to frontier cells accepted by `keep`.
pub fn nearest_matching(
    g: &ExplorationGraph,
    from: HexCoord,
    mut keep: impl FnMut(HexCoord) -> bool,
) -> Option<HexCoord> {
    let size = g.size();
    let reach = reachable(g, from);
    let mut best: Option<(f64, HexCoord)> = None;
    // Frontier iteration is already row-major, so a strict `<` keeps the first tie.
    for c in g.unvisited_cells() {
        if !reach[c.index(size)] || !keep(c) {
            continue;
        }
        let d = euclidean_distance(from, c);
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, c));
        }
    }
    best.map(|(_, c)| c)
}

#[derive(Clone, Copy, PartialEq)]
struct OpenEntry {
    f: f64,
    h: f64,
    cell: HexCoord,
}

impl Eq for OpenEntry {}

impl Ord for OpenEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap and we pop the smallest key.
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.h.total_cmp(&self.h))
            .then_with(|| other.cell.row_major_key().cmp(&self.cell.row_major_key()))
    }
}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimum-hop path from `from` to `to` through visited and frontier cells,
/// using unit edge cost and the straight-line heuristic.
pub fn astar(g: &ExplorationGraph, from: HexCoord, to: HexCoord) -> Result<Path> {
    let size = g.size();
    let known = |c: HexCoord| c.in_bounds(size) && g.status(c) != CellStatus::Unknown;
    if !known(from) || !known(to) {
        return Err(Error::NoPath { from, to });
    }
    let n = g.total_cells();
    let mut best_g = vec![u32::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();

    best_g[from.index(size)] = 0;
    let h0 = euclidean_distance(from, to);
    open.push(OpenEntry { f: h0, h: h0, cell: from });

    while let Some(OpenEntry { cell, .. }) = open.pop() {
        let ci = cell.index(size);
        if closed[ci] {
            continue;
        }
        closed[ci] = true;
        if cell == to {
            let mut cells = vec![to];
            let mut i = ci;
            while parent[i] != usize::MAX {
                i = parent[i];
                cells.push(HexCoord::from_index(i, size));
            }
            cells.reverse();
            return Ok(Path { cells });
        }
        // Frontier cells are endpoints of known edges but their other sides are
        // unseen; passing through one is still a move along two known edges.
        let g_next = best_g[ci] + 1;
        for (_, m) in g.edges(cell) {
            let mi = m.index(size);
            if closed[mi] || !known(m) || g_next >= best_g[mi] {
                continue;
            }
            best_g[mi] = g_next;
            parent[mi] = ci;
            let h = euclidean_distance(m, to);
            open.push(OpenEntry { f: g_next as f64 + h, h, cell: m });
        }
    }
    Err(Error::NoPath { from, to })
}
