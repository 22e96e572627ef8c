//! Hexagonal grid geometry and maze generation.
//!
//! Cells are stored in an odd-row-offset layout of pointy-top hexagons: odd
//! rows are shifted half a cell to the right, so the grid stays a dense
//! `d x d` array.

use std::fmt;
use std::io::{BufRead, Write};

use rand::seq::IndexedRandom;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng;

const SQRT3_2: f64 = 0.866_025_403_784_438_6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HexCoord {
    pub col: usize,
    pub row: usize,
}

impl HexCoord {
    pub const fn new(col: usize, row: usize) -> Self {
        Self { col, row }
    }

    /// Row-major index into a `size x size` array.
    pub fn index(self, size: usize) -> usize {
        self.row * size + self.col
    }

    pub fn from_index(index: usize, size: usize) -> Self {
        Self::new(index % size, index / size)
    }

    pub fn in_bounds(self, size: usize) -> bool {
        self.col < size && self.row < size
    }

    /// Ordering key `(row, col)` used for every deterministic tie-break.
    pub fn row_major_key(self) -> (usize, usize) {
        (self.row, self.col)
    }
}

impl fmt::Display for HexCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.col, self.row)
    }
}

/// The six sides of a pointy-top hexagon, in ordinal order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    E = 0,
    NE = 1,
    NW = 2,
    W = 3,
    SW = 4,
    SE = 5,
}

impl Direction {
    pub const ALL: [Direction; 6] = [
        Direction::E,
        Direction::NE,
        Direction::NW,
        Direction::W,
        Direction::SW,
        Direction::SE,
    ];

    pub fn ordinal(self) -> usize {
        self as usize
    }

    pub fn from_ordinal(ordinal: usize) -> Option<Direction> {
        Self::ALL.get(ordinal).copied()
    }

    pub fn inverse(self) -> Direction {
        Self::ALL[(self.ordinal() + 3) % 6]
    }

    pub fn bit(self) -> u8 {
        1 << self.ordinal()
    }
}

/// Adjacent coordinate in direction `dir`, or `None` when it falls off the grid.
pub fn neighbor(c: HexCoord, dir: Direction, size: usize) -> Option<HexCoord> {
    let (col, row) = (c.col as i64, c.row as i64);
    let odd = row & 1 == 1;
    let (dc, dr) = match (dir, odd) {
        (Direction::E, _) => (1, 0),
        (Direction::W, _) => (-1, 0),
        (Direction::NE, false) => (0, -1),
        (Direction::NW, false) => (-1, -1),
        (Direction::SW, false) => (-1, 1),
        (Direction::SE, false) => (0, 1),
        (Direction::NE, true) => (1, -1),
        (Direction::NW, true) => (0, -1),
        (Direction::SW, true) => (0, 1),
        (Direction::SE, true) => (1, 1),
    };
    let (nc, nr) = (col + dc, row + dr);
    let n = size as i64;
    if nc < 0 || nr < 0 || nc >= n || nr >= n {
        None
    } else {
        Some(HexCoord::new(nc as usize, nr as usize))
    }
}

/// In-grid neighbors of `c` in direction order.
pub fn neighbors(c: HexCoord, size: usize) -> impl Iterator<Item = (Direction, HexCoord)> {
    Direction::ALL
        .into_iter()
        .filter_map(move |d| neighbor(c, d, size).map(|n| (d, n)))
}

pub fn in_grid_degree(c: HexCoord, size: usize) -> usize {
    neighbors(c, size).count()
}

/// Center of a cell in cell-width units.
pub fn cell_center(c: HexCoord) -> (f64, f64) {
    let x = c.col as f64 + 0.5 * (c.row % 2) as f64;
    let y = c.row as f64 * SQRT3_2;
    (x, y)
}

/// A generated maze: a `size x size` grid with a 6-bit wall mask per cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Maze {
    size: usize,
    walls: Vec<u8>,
    seed: u64,
}

impl Maze {
    /// Builds a maze from raw masks, checking wall symmetry and boundary walls.
    /// Connectivity and openness are not required here; see [`Maze::validate`].
    pub fn from_walls(size: usize, seed: u64, walls: Vec<u8>) -> Result<Maze> {
        if size < 2 {
            return Err(Error::GridTooSmall(size));
        }
        if walls.len() != size * size {
            return Err(Error::MazeFormat(format!(
                "expected {} wall masks, found {}",
                size * size,
                walls.len()
            )));
        }
        let maze = Maze { size, walls, seed };
        for i in 0..size * size {
            let c = HexCoord::from_index(i, size);
            let mask = maze.walls[i];
            if mask & !0x3F != 0 {
                return Err(Error::MazeFormat(format!("mask {mask:#04x} at {c} uses bits above 5")));
            }
            for dir in Direction::ALL {
                let wall = mask & dir.bit() != 0;
                match neighbor(c, dir, size) {
                    None if !wall => {
                        return Err(Error::MazeFormat(format!("boundary side {dir:?} of {c} is open")))
                    }
                    Some(n) if wall != maze.has_wall(n, dir.inverse()) => {
                        return Err(Error::MazeFormat(format!("asymmetric wall between {c} and {n}")))
                    }
                    _ => {}
                }
            }
        }
        Ok(maze)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn cell_count(&self) -> usize {
        self.size * self.size
    }

    pub fn walls(&self) -> &[u8] {
        &self.walls
    }

    pub fn wall_mask(&self, c: HexCoord) -> u8 {
        self.walls[c.index(self.size)]
    }

    pub fn has_wall(&self, c: HexCoord, dir: Direction) -> bool {
        self.wall_mask(c) & dir.bit() != 0
    }

    pub fn contains(&self, c: HexCoord) -> bool {
        c.in_bounds(self.size)
    }

    fn check(&self, c: HexCoord) -> Result<()> {
        if self.contains(c) {
            Ok(())
        } else {
            Err(Error::OutOfBounds { coord: c, size: self.size })
        }
    }

    /// Directions from `c` with no wall, in ordinal order.
    pub fn open_sides(&self, c: HexCoord) -> Result<Vec<Direction>> {
        self.check(c)?;
        let mask = self.wall_mask(c);
        Ok(Direction::ALL.into_iter().filter(|d| mask & d.bit() == 0).collect())
    }

    /// Neighbor reached through an open side, if any.
    pub fn step(&self, c: HexCoord, dir: Direction) -> Option<HexCoord> {
        if self.has_wall(c, dir) {
            None
        } else {
            neighbor(c, dir, self.size)
        }
    }

    fn remove_wall(&mut self, c: HexCoord, dir: Direction) {
        let n = neighbor(c, dir, self.size).expect("only internal walls are removed");
        self.walls[c.index(self.size)] &= !dir.bit();
        self.walls[n.index(self.size)] &= !dir.inverse().bit();
    }

    /// Checks connectivity and the openness quota on top of the structural
    /// checks done by [`Maze::from_walls`].
    pub fn validate(&self) -> Result<()> {
        let n = self.cell_count();
        let mut seen = vec![false; n];
        let mut stack = vec![HexCoord::new(0, 0)];
        seen[0] = true;
        let mut count = 1;
        while let Some(c) = stack.pop() {
            for dir in Direction::ALL {
                if let Some(m) = self.step(c, dir) {
                    if !seen[m.index(self.size)] {
                        seen[m.index(self.size)] = true;
                        count += 1;
                        stack.push(m);
                    }
                }
            }
        }
        if count != n {
            return Err(Error::MazeFormat(format!("only {count} of {n} cells reachable")));
        }
        for i in 0..n {
            let c = HexCoord::from_index(i, self.size);
            let open = (self.walls[i] ^ 0x3F).count_ones() as usize;
            let quota = openness_quota(c, self.size);
            if open < quota {
                return Err(Error::MazeFormat(format!("{c} has {open} open sides, needs {quota}")));
            }
        }
        Ok(())
    }

    /// Writes the `hexmaze v1` text format.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "hexmaze v1 d={} seed={}", self.size, self.seed)?;
        for row in self.walls.chunks(self.size) {
            let line: Vec<String> = row.iter().map(|m| format!("{m:02x}")).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("maze text is ASCII")
    }

    /// Parses the `hexmaze v1` text format.
    pub fn read_from<R: BufRead>(input: R) -> Result<Maze> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::MazeFormat("empty input".into()))??;
        let (size, seed) = parse_header(header.trim_end())?;
        let mut walls = Vec::with_capacity(size * size);
        for r in 0..size {
            let line = lines
                .next()
                .ok_or_else(|| Error::MazeFormat(format!("missing row {r}")))??;
            let before = walls.len();
            for tok in line.split_whitespace() {
                if tok.len() != 2 {
                    return Err(Error::MazeFormat(format!("mask `{tok}` is not two hex digits")));
                }
                let mask = u8::from_str_radix(tok, 16)
                    .map_err(|_| Error::MazeFormat(format!("bad hex mask `{tok}`")))?;
                walls.push(mask);
            }
            if walls.len() - before != size {
                return Err(Error::MazeFormat(format!(
                    "row {r} has {} masks, expected {size}",
                    walls.len() - before
                )));
            }
        }
        for rest in lines {
            if !rest?.trim().is_empty() {
                return Err(Error::MazeFormat("trailing data after last row".into()));
            }
        }
        Maze::from_walls(size, seed, walls)
    }

    pub fn from_text(text: &str) -> Result<Maze> {
        Maze::read_from(text.as_bytes())
    }
}

fn parse_header(line: &str) -> Result<(usize, u64)> {
    let bad = || Error::MazeFormat(format!("bad header `{line}`"));
    let mut parts = line.split(' ');
    if parts.next() != Some("hexmaze") || parts.next() != Some("v1") {
        return Err(bad());
    }
    let size = parts
        .next()
        .and_then(|p| p.strip_prefix("d="))
        .and_then(|v| v.parse().ok())
        .ok_or_else(bad)?;
    let seed = parts
        .next()
        .and_then(|p| p.strip_prefix("seed="))
        .and_then(|v| v.parse().ok())
        .ok_or_else(bad)?;
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok((size, seed))
}

/// Minimum number of open sides a cell must keep: three, or all of its
/// in-grid sides when it has fewer than three.
pub fn openness_quota(c: HexCoord, size: usize) -> usize {
    in_grid_degree(c, size).min(3)
}

/// Generates a maze as a pure function of `(size, seed)`.
///
/// A randomized depth-first carve yields a spanning tree; a row-major pass
/// then knocks out random internal walls of any cell below its openness quota.
pub fn generate_maze(size: usize, seed: u64) -> Result<Maze> {
    if size < 2 {
        return Err(Error::GridTooSmall(size));
    }
    let mut rng = rng::stream(seed, rng::Stream::Maze, size as u64);
    let n = size * size;
    let mut maze = Maze {
        size,
        walls: vec![0x3F; n],
        seed,
    };

    let mut carved = vec![false; n];
    let start = HexCoord::from_index(rng.random_range(0..n), size);
    carved[start.index(size)] = true;
    let mut stack = vec![start];
    let mut options = Vec::with_capacity(6);
    while let Some(&c) = stack.last() {
        options.clear();
        options.extend(neighbors(c, size).filter(|(_, m)| !carved[m.index(size)]));
        match options.choose(&mut rng) {
            Some(&(dir, m)) => {
                maze.remove_wall(c, dir);
                carved[m.index(size)] = true;
                stack.push(m);
            }
            None => {
                stack.pop();
            }
        }
    }

    for i in 0..n {
        let c = HexCoord::from_index(i, size);
        let quota = openness_quota(c, size);
        loop {
            let mask = maze.walls[i];
            let open = (mask ^ 0x3F).count_ones() as usize;
            if open >= quota {
                break;
            }
            options.clear();
            options.extend(neighbors(c, size).filter(|(d, _)| mask & d.bit() != 0));
            let &(dir, _) = options.choose(&mut rng).expect("a cell below quota has an internal wall");
            maze.remove_wall(c, dir);
        }
    }
    Ok(maze)
}
