#![allow(dead_code)]

use hexplore::hexgrid::{neighbor, Direction, HexCoord, Maze};

/// Wall masks of a grid with every interior side open.
pub fn open_walls(size: usize) -> Vec<u8> {
    let mut walls = vec![0u8; size * size];
    for (i, mask) in walls.iter_mut().enumerate() {
        let c = HexCoord::from_index(i, size);
        for d in Direction::ALL {
            if neighbor(c, d, size).is_none() {
                *mask |= d.bit();
            }
        }
    }
    walls
}

/// Walls of a grid with every side closed.
pub fn closed_walls(size: usize) -> Vec<u8> {
    vec![0x3F; size * size]
}

pub fn set_wall(walls: &mut [u8], size: usize, c: HexCoord, d: Direction) {
    let n = neighbor(c, d, size).expect("interior side");
    walls[c.index(size)] |= d.bit();
    walls[n.index(size)] |= d.inverse().bit();
}

pub fn clear_wall(walls: &mut [u8], size: usize, c: HexCoord, d: Direction) {
    let n = neighbor(c, d, size).expect("interior side");
    walls[c.index(size)] &= !d.bit();
    walls[n.index(size)] &= !d.inverse().bit();
}

pub fn maze(size: usize, walls: Vec<u8>) -> Maze {
    Maze::from_walls(size, 0, walls).expect("consistent walls")
}

pub fn cell(col: usize, row: usize) -> HexCoord {
    HexCoord::new(col, row)
}
