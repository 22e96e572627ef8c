//! Reinforcement-learning pieces around the Q-network: observation encoding,
//! rewards, replay, exploration schedule and the Bellman target.

pub mod observation;
pub mod replay;
pub mod reward;

use rand::Rng as _;

use crate::error::Result;
use crate::neural::{QFunction, Scalar};
use crate::rng::Rng;

pub use observation::{encode_state, local_observation, BitImage, LocalObs, Observation};
pub use replay::{ReplayBuffer, Transition};
pub use reward::{reward_immediate, reward_surrounding, total_reward, ProgressRule, RewardParams};

/// Linear decay from `start` to `end` over `decay_episodes`, flat afterwards.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_episodes: usize,
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        Self {
            start: 1.0,
            end: 0.05,
            decay_episodes: 200,
        }
    }
}

impl EpsilonSchedule {
    pub fn new(start: f64, end: f64, decay_episodes: usize) -> Self {
        assert!(
            (0.0..=1.0).contains(&end) && end <= start && start <= 1.0,
            "epsilon schedule needs 0 <= end <= start <= 1"
        );
        assert!(decay_episodes > 0, "decay_episodes must be positive");
        Self { start, end, decay_episodes }
    }

    pub fn value(&self, episode: usize) -> f64 {
        let frac = (episode as f64 / self.decay_episodes as f64).min(1.0);
        self.start + (self.end - self.start) * frac
    }
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax<T: PartialOrd + Copy>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// With probability `eps` a uniform random action, otherwise the greedy one.
/// Q-values are only requested on the greedy branch.
pub fn epsilon_greedy_with<T: PartialOrd + Copy, E>(
    eps: f64,
    rng: &mut Rng,
    q_values: impl FnOnce() -> std::result::Result<[T; 6], E>,
) -> std::result::Result<usize, E> {
    if rng.random::<f64>() < eps {
        Ok(rng.random_range(0..6))
    } else {
        q_values().map(|q| argmax(&q))
    }
}

pub fn epsilon_greedy<T: PartialOrd + Copy>(q_values: &[T; 6], eps: f64, rng: &mut Rng) -> usize {
    epsilon_greedy_with::<T, ()>(eps, rng, || Ok(*q_values)).expect("infallible")
}

/// Bellman target `r + gamma * max_a' Q(s', a')`, or `r` at a terminal state.
pub fn q_target<T: Scalar, Q: QFunction<T>>(
    reward: f64,
    next_state: &Q::Input,
    terminal: bool,
    net: &Q,
    gamma: f64,
) -> Result<f64> {
    if terminal {
        return Ok(reward);
    }
    let (q, _) = net.forward(next_state)?;
    let best = q
        .data()
        .iter()
        .map(|v| v.to_f64().expect("finite"))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(reward + gamma * best)
}
