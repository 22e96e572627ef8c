//! Deep Q-learning loop for the learned policy.
//!
//! Every episode runs on a freshly generated maze with random distinct start
//! cells. All agents share one network and one replay buffer. After the warmup
//! episodes, the network takes `updates_per_episode` optimizer steps at the
//! end of each episode and, when `update_every` is set, one more step every
//! `update_every` simulation steps.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use super::{random_starts, Episode, EpisodeConfig, Method, DEFAULT_AGENTS, DEFAULT_STALL_LIMIT};
use crate::error::Result;
use crate::hexgrid::generate_maze;
use crate::neural::network::{JOINT_FEATURES, LOCAL_OUT, MAP_BRANCH_NAMES};
use crate::neural::{save_checkpoint, train_batch, Adam, NetInput, Network, Parameters, Sample};
use crate::rl::{EpsilonSchedule, ReplayBuffer, RewardParams};
use crate::rng::{self, Stream};

#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub size: usize,
    pub agents: usize,
    pub episodes: usize,
    pub seed: u64,
    pub buffer_capacity: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub schedule: EpsilonSchedule,
    /// Episodes played before the first optimizer step.
    pub warmup_episodes: usize,
    pub updates_per_episode: usize,
    pub update_every: Option<usize>,
    /// Timestep cap per training episode; the evaluation cap when `None`.
    pub max_timesteps: Option<usize>,
    pub stall_limit: usize,
    pub reward: RewardParams,
    /// Multiplies rewards inside the learner. Positive scaling leaves the
    /// optimal policy unchanged and keeps Q-values in a range Adam can reach.
    pub reward_scale: f64,
    /// Learning-rate multiplier for the image branches and for the weights
    /// that read their features in the first joint layer. The joint layer
    /// sees 33 024 image features against 32 local ones; at the full rate,
    /// Adam moves every image weight by about `lr` per step in the same
    /// direction and the shared hidden units drown out the local branch.
    pub image_lr_scale: f64,
    pub checkpoint: Option<PathBuf>,
    pub checkpoint_every: usize,
    pub log: Option<PathBuf>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            size: 10,
            agents: DEFAULT_AGENTS,
            episodes: 300,
            seed: 0,
            buffer_capacity: 50_000,
            batch_size: 64,
            learning_rate: 1e-3,
            schedule: EpsilonSchedule::default(),
            warmup_episodes: 50,
            updates_per_episode: 1,
            update_every: None,
            max_timesteps: None,
            stall_limit: DEFAULT_STALL_LIMIT,
            reward: RewardParams::default(),
            reward_scale: 1.0,
            image_lr_scale: 0.01,
            checkpoint: None,
            checkpoint_every: 25,
            log: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeLog {
    pub episode: usize,
    pub steps: usize,
    pub total_reward: f64,
    /// Mean loss of this episode's optimizer steps, if any were taken.
    pub mean_loss: Option<f64>,
    pub epsilon: f64,
    pub backtracks: usize,
    pub fully_explored: bool,
}

#[derive(Clone, Debug)]
pub struct TrainReport {
    pub logs: Vec<EpisodeLog>,
    pub network: Network<f32>,
    pub optimizer_steps: u64,
}

fn update(net: &mut Network<f32>, opt: &mut Adam<f32>, buffer: &mut ReplayBuffer, cfg: &TrainConfig) -> Result<f64> {
    let batch = buffer.sample(cfg.batch_size)?;
    let inputs: Vec<(NetInput<f32>, NetInput<f32>)> = batch
        .iter()
        .map(|t| (t.state.to_input(), t.next_state.to_input()))
        .collect();
    let samples: Vec<Sample<'_, NetInput<f32>>> = batch
        .iter()
        .zip(&inputs)
        .map(|(t, (s, s2))| Sample {
            state: s,
            action: t.action,
            reward: t.reward * cfg.reward_scale,
            next_state: s2,
            terminal: t.terminal,
        })
        .collect();
    train_batch(net, opt, &samples, cfg.reward.gamma)
}

/// Applies `factor` to the learning rate of every image-facing parameter.
fn scale_image_lr(net: &Network<f32>, opt: &mut Adam<f32>, factor: f64) {
    let image_features = JOINT_FEATURES - LOCAL_OUT;
    for (i, (name, p)) in Network::<f32>::param_names().iter().zip(net.params()).enumerate() {
        let branch = name.split('.').next().unwrap_or_default();
        if branch == "walls" || MAP_BRANCH_NAMES.contains(&branch) {
            opt.scale_lr(i, 0..p.len(), factor);
        } else if name == "head.dense1.weight" {
            opt.scale_lr(i, (0..p.len()).filter(|e| e % JOINT_FEATURES < image_features), factor);
        }
    }
}

fn write_log_row(out: &mut impl Write, log: &EpisodeLog) -> Result<()> {
    let loss = log.mean_loss.map(|l| format!("{l:.6}")).unwrap_or_default();
    writeln!(
        out,
        "{},{},{:.3},{},{:.4}",
        log.episode, log.steps, log.total_reward, loss, log.epsilon
    )?;
    Ok(())
}

/// Trains a network from scratch. A non-finite loss or parameter aborts with
/// an error and leaves the last saved checkpoint untouched.
pub fn train_bamax(cfg: &TrainConfig) -> Result<TrainReport> {
    let mut net = Network::<f32>::init(&mut rng::stream(cfg.seed, Stream::Init, 0));
    let mut opt = Adam::new(&net, cfg.learning_rate);
    if cfg.image_lr_scale != 1.0 {
        scale_image_lr(&net, &mut opt, cfg.image_lr_scale);
    }
    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity, rng::stream(cfg.seed, Stream::Replay, 0));
    let mut log_file = match &cfg.log {
        Some(path) => {
            let mut f = std::io::BufWriter::new(fs::File::create(path)?);
            writeln!(f, "episode,steps,total_reward,mean_loss,epsilon")?;
            Some(f)
        }
        None => None,
    };
    let mut logs = Vec::with_capacity(cfg.episodes);
    let mut transitions = Vec::new();

    for ep in 0..cfg.episodes {
        let index = ep as u64;
        let maze = generate_maze(cfg.size, rng::derive_seed(cfg.seed, Stream::TrainMaze, index))?;
        let starts = random_starts(cfg.size, cfg.agents, &mut rng::stream(cfg.seed, Stream::Starts, index));
        let epsilon = cfg.schedule.value(ep);
        let mut ep_cfg = EpisodeConfig::new(Method::Bamax, cfg.size, starts);
        ep_cfg.epsilon = epsilon;
        ep_cfg.seed = rng::derive_seed(cfg.seed, Stream::Epsilon, index);
        ep_cfg.stall_limit = cfg.stall_limit;
        ep_cfg.reward = cfg.reward;
        if let Some(cap) = cfg.max_timesteps {
            ep_cfg.max_timesteps = cap;
        }

        let learning = ep >= cfg.warmup_episodes;
        let mut losses = Vec::new();
        let mut episode = Episode::new(ep_cfg, &maze)?;
        while episode.termination().is_none() {
            transitions.clear();
            episode.round(Some(&net), Some(&mut transitions))?;
            for t in transitions.drain(..) {
                buffer.push(t);
            }
            if let Some(k) = cfg.update_every {
                if learning && episode.steps() % k == 0 && buffer.len() >= cfg.batch_size {
                    losses.push(update(&mut net, &mut opt, &mut buffer, cfg)?);
                }
            }
        }
        if learning && buffer.len() >= cfg.batch_size {
            for _ in 0..cfg.updates_per_episode {
                losses.push(update(&mut net, &mut opt, &mut buffer, cfg)?);
            }
        }

        let outcome = episode.finish();
        let log = EpisodeLog {
            episode: ep,
            steps: outcome.metrics.simulation_steps,
            total_reward: outcome.reward_sum,
            mean_loss: (!losses.is_empty()).then(|| losses.iter().sum::<f64>() / losses.len() as f64),
            epsilon,
            backtracks: outcome.metrics.backtrack_count,
            fully_explored: outcome.metrics.termination == super::Termination::FullyExplored,
        };
        if let Some(f) = &mut log_file {
            write_log_row(f, &log)?;
            f.flush()?;
        }
        logs.push(log);

        if let Some(path) = &cfg.checkpoint {
            let last = ep + 1 == cfg.episodes;
            if last || (cfg.checkpoint_every > 0 && (ep + 1) % cfg.checkpoint_every == 0) {
                save_checkpoint(&net, path)?;
            }
        }
    }

    Ok(TrainReport {
        logs,
        network: net,
        optimizer_steps: opt.steps_taken(),
    })
}
