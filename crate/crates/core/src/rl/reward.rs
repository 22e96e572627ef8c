//! Reward terms for a single agent action.

use crate::hexgrid::{neighbors, HexCoord};
use crate::worldmap::ExplorationGraph;

/// How the exploration-progress term of a valid move is combined with its floor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ProgressRule {
    /// `max(floor, explored - unexplored)`
    #[default]
    Max,
    /// `min(floor, explored - unexplored)`
    Min,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RewardParams {
    pub valid_floor: f64,
    pub collision_penalty: f64,
    pub gamma: f64,
    pub rule: ProgressRule,
}

impl Default for RewardParams {
    fn default() -> Self {
        Self {
            valid_floor: 50.0,
            collision_penalty: -20.0,
            gamma: 0.99,
            rule: ProgressRule::Max,
        }
    }
}

impl RewardParams {
    /// Reward for the move itself. `explored` and `unexplored` are cell counts
    /// of the shared map after the move.
    pub fn immediate(&self, entered_valid: bool, explored: usize, unexplored: usize) -> f64 {
        if !entered_valid {
            return self.collision_penalty;
        }
        let progress = explored as f64 - unexplored as f64;
        match self.rule {
            ProgressRule::Max => progress.max(self.valid_floor),
            ProgressRule::Min => progress.min(self.valid_floor),
        }
    }
}

/// `max(50, explored - unexplored)` for a valid move, `-20` for a collision.
pub fn reward_immediate(entered_valid: bool, explored: usize, unexplored: usize) -> f64 {
    RewardParams::default().immediate(entered_valid, explored, unexplored)
}

/// Number of in-grid neighbors of `at` not yet visited.
pub fn reward_surrounding(map: &ExplorationGraph, at: HexCoord) -> f64 {
    neighbors(at, map.size()).filter(|&(_, n)| !map.is_visited(n)).count() as f64
}

pub fn total_reward(immediate: f64, surrounding: f64) -> f64 {
    immediate + surrounding
}
