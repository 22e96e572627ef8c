//! Six-part agent observation: five binary images plus an 18-bit local view.

use crate::hexgrid::{neighbor, Direction, HexCoord};
use crate::neural::network::{NetInput, LOCAL_FEATURES, MAP_SIDE, WALL_SIDE};
use crate::neural::{Scalar, Tensor};
use crate::worldmap::ExplorationGraph;

/// Pixels per cell edge on the native wall canvas.
const WALL_BLOCK: usize = 3;

/// Pixel inside a cell's 3x3 wall block that marks each side, as `(x, y)`.
const WALL_PIXEL: [(usize, usize); 6] = [(2, 1), (2, 0), (0, 0), (0, 1), (0, 2), (2, 2)];

/// Square binary image packed into 64-bit words.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitImage {
    side: usize,
    bits: Vec<u64>,
}

impl BitImage {
    pub fn new(side: usize) -> Self {
        Self {
            side,
            bits: vec![0; (side * side).div_ceil(64)],
        }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        let i = y * self.side + x;
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, x: usize, y: usize) {
        let i = y * self.side + x;
        self.bits[i / 64] |= 1 << (i % 64);
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Resamples a square `src` canvas to `side x side`. Upsampling picks the
    /// source pixel under each target pixel; downsampling ORs every source
    /// pixel into the target pixel it lands on, so no marked pixel is lost.
    pub fn rescale(src: &BitImage, side: usize) -> BitImage {
        let mut out = BitImage::new(side);
        let n = src.side;
        if n <= side {
            for y in 0..side {
                for x in 0..side {
                    if src.get(x * n / side, y * n / side) {
                        out.set(x, y);
                    }
                }
            }
        } else {
            for y in 0..n {
                for x in 0..n {
                    if src.get(x, y) {
                        out.set(x * side / n, y * side / n);
                    }
                }
            }
        }
        out
    }

    pub fn to_tensor<T: Scalar>(&self) -> Tensor<T> {
        let data = (0..self.side * self.side)
            .map(|i| if self.bits[i / 64] >> (i % 64) & 1 == 1 { T::one() } else { T::zero() })
            .collect();
        Tensor::from_vec(&[1, self.side, self.side], data).expect("sized")
    }
}

/// Per-direction local features: wall on that side, another agent on that
/// neighbor, neighbor already visited.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LocalObs(pub [u8; LOCAL_FEATURES]);

impl LocalObs {
    pub fn wall(&self, d: Direction) -> bool {
        self.0[d.ordinal() * 3] == 1
    }

    pub fn agent(&self, d: Direction) -> bool {
        self.0[d.ordinal() * 3 + 1] == 1
    }

    pub fn explored(&self, d: Direction) -> bool {
        self.0[d.ordinal() * 3 + 2] == 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Observation {
    pub explored: BitImage,
    pub unexplored: BitImage,
    pub own_pos: BitImage,
    pub other_agents: BitImage,
    pub walls: BitImage,
    pub local: LocalObs,
}

impl Observation {
    pub fn to_input<T: Scalar>(&self) -> NetInput<T> {
        let local = self.local.0.iter().map(|&b| if b == 1 { T::one() } else { T::zero() }).collect();
        NetInput {
            maps: [
                self.explored.to_tensor(),
                self.unexplored.to_tensor(),
                self.own_pos.to_tensor(),
                self.other_agents.to_tensor(),
            ],
            walls: self.walls.to_tensor(),
            local: Tensor::from_vec(&[LOCAL_FEATURES], local).expect("sized"),
        }
    }
}

fn cell_map(size: usize, mark: impl Fn(HexCoord) -> bool) -> BitImage {
    let mut native = BitImage::new(size);
    for row in 0..size {
        for col in 0..size {
            if mark(HexCoord::new(col, row)) {
                native.set(col, row);
            }
        }
    }
    BitImage::rescale(&native, MAP_SIDE)
}

pub fn local_observation(map: &ExplorationGraph, agent: usize, positions: &[HexCoord]) -> LocalObs {
    let here = positions[agent];
    let walls = map.known_walls(here);
    let mut local = [0u8; LOCAL_FEATURES];
    for d in Direction::ALL {
        let n = neighbor(here, d, map.size());
        let base = d.ordinal() * 3;
        local[base] = u8::from(walls & d.bit() != 0);
        local[base + 1] = u8::from(
            n.is_some_and(|n| positions.iter().enumerate().any(|(i, &p)| i != agent && p == n)),
        );
        local[base + 2] = u8::from(n.is_some_and(|n| map.is_visited(n)));
    }
    LocalObs(local)
}

/// Encodes agent `agent`'s view of the shared map. `positions` holds every
/// agent's cell, indexed by agent id.
pub fn encode_state(map: &ExplorationGraph, agent: usize, positions: &[HexCoord]) -> Observation {
    let size = map.size();
    let here = positions[agent];
    let explored = cell_map(size, |c| map.is_visited(c));
    let unexplored = cell_map(size, |c| !map.is_visited(c));
    let own_pos = cell_map(size, |c| c == here);
    let other_agents = cell_map(size, |c| {
        positions.iter().enumerate().any(|(i, &p)| i != agent && p == c)
    });

    let mut canvas = BitImage::new(size * WALL_BLOCK);
    for row in 0..size {
        for col in 0..size {
            let c = HexCoord::new(col, row);
            if !map.is_visited(c) {
                continue;
            }
            let mask = map.known_walls(c);
            for d in Direction::ALL {
                if mask & d.bit() != 0 {
                    let (px, py) = WALL_PIXEL[d.ordinal()];
                    canvas.set(col * WALL_BLOCK + px, row * WALL_BLOCK + py);
                }
            }
        }
    }
    let walls = BitImage::rescale(&canvas, WALL_SIDE);

    Observation {
        explored,
        unexplored,
        own_pos,
        other_agents,
        walls,
        local: local_observation(map, agent, positions),
    }
}
