use std::collections::VecDeque;

use rand::Rng as _;

use super::observation::Observation;
use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub state: Observation,
    pub action: usize,
    pub reward: f64,
    pub next_state: Observation,
    pub terminal: bool,
}

/// Fixed-capacity FIFO of transitions with seeded uniform sampling.
#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    capacity: usize,
    items: VecDeque<Transition>,
    rng: Rng,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, rng: Rng) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            items: VecDeque::with_capacity(capacity.min(4096)),
            rng,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn push(&mut self, t: Transition) {
        debug_assert!(t.reward.is_finite() && t.action < 6);
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(t);
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.items.iter()
    }

    /// Indices drawn uniformly with replacement.
    pub fn sample_indices(&mut self, batch_size: usize) -> Result<Vec<usize>> {
        if self.items.len() < batch_size || batch_size == 0 {
            return Err(Error::BufferNotReady {
                have: self.items.len(),
                need: batch_size,
            });
        }
        let n = self.items.len();
        Ok((0..batch_size).map(|_| self.rng.random_range(0..n)).collect())
    }

    pub fn sample(&mut self, batch_size: usize) -> Result<Vec<&Transition>> {
        let idx = self.sample_indices(batch_size)?;
        Ok(idx.into_iter().map(|i| &self.items[i]).collect())
    }
}
