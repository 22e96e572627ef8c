//! Episode engine: lockstep multi-agent stepping, collision resolution,
//! backtrack assistance for the learned policy, metrics and traces.
//!
//! Within a simulation step agents act one after another in id order and each
//! sees the moves already made by lower ids. A step ends once every agent has
//! acted; the episode ends when every cell has been visited or the timestep
//! cap is reached.

pub mod trace;
pub mod train;

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;

use crate::classical::{
    bfs_step, collab_bfs_step, collab_dfs_step, dfs_step, ClassicalAgent, MoveKind, SharedFrontier, Step,
};
use crate::error::{Error, Result};
use crate::hexgrid::{neighbor, Direction, HexCoord, Maze};
use crate::neural::Network;
use crate::pathfind::{astar, nearest_unvisited, Path};
use crate::rl::{encode_state, epsilon_greedy_with, reward_surrounding, total_reward, RewardParams, Transition};
use crate::rng::{self, Rng};
use crate::worldmap::ExplorationGraph;

pub use trace::{Trace, TraceMode, TraceRecord};
pub use train::{train_bamax, EpisodeLog, TrainConfig, TrainReport};

/// Consecutive network-controlled steps without entering a new cell after
/// which an agent is handed to backtrack assistance.
pub const DEFAULT_STALL_LIMIT: usize = 6;

pub const DEFAULT_AGENTS: usize = 4;

/// Timestep cap for a `size x size` grid.
pub fn default_cap(size: usize) -> usize {
    10 * size * size
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Dfs,
    Bfs,
    CollabDfs,
    CollabBfs,
    Bamax,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Dfs, Method::Bfs, Method::CollabDfs, Method::CollabBfs, Method::Bamax];

    pub fn name(self) -> &'static str {
        match self {
            Method::Dfs => "dfs",
            Method::Bfs => "bfs",
            Method::CollabDfs => "cdfs",
            Method::CollabBfs => "cbfs",
            Method::Bamax => "bamax",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Method::Dfs => "DFS",
            Method::Bfs => "BFS",
            Method::CollabDfs => "Collaborative DFS",
            Method::CollabBfs => "Collaborative BFS",
            Method::Bamax => "BAMAX",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Method> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown method `{s}` (expected dfs, bfs, cdfs, cbfs or bamax)")))
    }
}

#[derive(Clone, Debug)]
pub struct EpisodeConfig {
    pub method: Method,
    pub size: usize,
    pub starts: Vec<HexCoord>,
    pub max_timesteps: usize,
    /// Exploration rate of the learned policy; `0` is greedy.
    pub epsilon: f64,
    /// Seed of the action-selection stream.
    pub seed: u64,
    pub stall_limit: usize,
    pub reward: RewardParams,
    pub record_trace: bool,
}

impl EpisodeConfig {
    pub fn new(method: Method, size: usize, starts: Vec<HexCoord>) -> Self {
        Self {
            method,
            size,
            starts,
            max_timesteps: default_cap(size),
            epsilon: 0.0,
            seed: 0,
            stall_limit: DEFAULT_STALL_LIMIT,
            reward: RewardParams::default(),
            record_trace: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    FullyExplored,
    TimestepCap,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeMetrics {
    pub simulation_steps: usize,
    /// Summed over agents.
    pub backtrack_count: usize,
    /// `(step, coverage)` from step 0 through the last step.
    pub coverage_curve: Vec<(usize, f64)>,
    pub termination: Termination,
}

#[derive(Clone, Debug)]
pub struct EpisodeOutcome {
    pub metrics: EpisodeMetrics,
    pub trace: Option<Trace>,
    /// Sum of rewards over network-controlled moves (learned policy only).
    pub reward_sum: f64,
}

/// `count` distinct uniformly random cells.
pub fn random_starts(size: usize, count: usize, rng: &mut Rng) -> Vec<HexCoord> {
    sample(rng, size * size, count)
        .into_iter()
        .map(|i| HexCoord::from_index(i, size))
        .collect()
}

fn validate_starts(size: usize, starts: &[HexCoord]) -> Result<()> {
    if starts.is_empty() {
        return Err(Error::InvalidStarts("at least one agent is required".into()));
    }
    for (i, s) in starts.iter().enumerate() {
        if !s.in_bounds(size) {
            return Err(Error::InvalidStarts(format!("{s} is outside the {size}x{size} grid")));
        }
        if starts[..i].contains(s) {
            return Err(Error::InvalidStarts(format!("{s} is used twice")));
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Intent {
    Stay,
    Step(Direction),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Stayed,
    Moved { from: HexCoord, to: HexCoord },
    HitWall,
    HitAgent,
}

impl Outcome {
    pub fn is_collision(self) -> bool {
        matches!(self, Outcome::HitWall | Outcome::HitAgent)
    }
}

/// Resolves one agent's intent against the walls and the current positions of
/// every other agent, updating `positions` on success.
pub fn resolve_move(maze: &Maze, positions: &mut [HexCoord], agent: usize, intent: Intent) -> Outcome {
    let from = positions[agent];
    let Intent::Step(dir) = intent else {
        return Outcome::Stayed;
    };
    let Some(to) = maze.step(from, dir) else {
        return Outcome::HitWall;
    };
    if positions.iter().enumerate().any(|(i, &p)| i != agent && p == to) {
        return Outcome::HitAgent;
    }
    positions[agent] = to;
    Outcome::Moved { from, to }
}

/// Applies intents in agent-id order; each agent sees the positions left by
/// the agents before it.
pub fn resolve_simultaneous_moves(maze: &Maze, positions: &mut [HexCoord], intents: &[Intent]) -> Vec<Outcome> {
    intents
        .iter()
        .enumerate()
        .map(|(i, &intent)| resolve_move(maze, positions, i, intent))
        .collect()
}

/// Learned-policy agent state.
#[derive(Clone, Debug)]
pub struct BamaxAgent {
    pub id: usize,
    pub traveling: Option<(Path, usize)>,
    /// Network-controlled steps since the agent last entered a new cell.
    pub stall: usize,
}

impl BamaxAgent {
    pub fn new(id: usize) -> Self {
        Self {
            id,
            traveling: None,
            stall: 0,
        }
    }

    pub fn target(&self) -> Option<HexCoord> {
        self.traveling.as_ref().map(|(p, _)| p.end())
    }
}

/// No open side of `at` leads to an unvisited cell.
pub fn is_stuck(map: &ExplorationGraph, at: HexCoord) -> bool {
    map.edges(at).all(|(_, n)| map.is_visited(n))
}

/// What one learned-policy agent did in a step.
#[derive(Clone, Debug)]
pub enum BamaxMove {
    /// A backtrack-assistance hop along an A* path.
    Assisted { from: HexCoord, to: HexCoord, backtrack: bool },
    /// A network-selected action and its outcome.
    Acted { action: usize, outcome: Outcome, reward: f64 },
    /// No frontier left anywhere.
    Idle,
}

/// Everything a learned-policy step needs besides the agent itself.
pub struct BamaxContext<'a> {
    pub maze: &'a Maze,
    pub map: &'a mut ExplorationGraph,
    pub positions: &'a mut [HexCoord],
    pub net: &'a Network<f32>,
    pub epsilon: f64,
    pub rng: &'a mut Rng,
    pub stall_limit: usize,
    pub reward: RewardParams,
    /// Receives the transition of a network-controlled move, when present.
    pub sink: Option<&'a mut Vec<Transition>>,
}

/// One step of the learned policy with backtrack assistance.
///
/// A stuck agent (or one stalled for `stall_limit` network steps) is routed by
/// A* to the nearest frontier cell and follows that path one hop per step until
/// it enters the target. Otherwise the network picks a direction
/// epsilon-greedily.
pub fn bamax_policy_step(agent: &mut BamaxAgent, ctx: &mut BamaxContext<'_>) -> Result<BamaxMove> {
    let id = agent.id;
    let here = ctx.positions[id];
    if let Some(t) = agent.target() {
        if ctx.map.is_visited(t) {
            agent.traveling = None;
        }
    }
    if agent.traveling.is_none() && (is_stuck(ctx.map, here) || agent.stall >= ctx.stall_limit) {
        match nearest_unvisited(ctx.map, here) {
            Some(target) => {
                let path = astar(ctx.map, here, target)?;
                agent.traveling = Some((path, 1));
            }
            None if ctx.map.is_fully_explored() => return Ok(BamaxMove::Idle),
            None => {
                return Err(Error::Invariant(format!(
                    "agent {id} found no frontier at coverage {}",
                    ctx.map.coverage()
                )))
            }
        }
    }

    if let Some((path, next)) = &mut agent.traveling {
        let to = path.cells[*next];
        *next += 1;
        if *next == path.cells.len() {
            agent.traveling = None;
            agent.stall = 0;
        }
        let backtrack = ctx.map.is_visited(to);
        ctx.map.observe_and_visit(ctx.maze, to)?;
        ctx.positions[id] = to;
        return Ok(BamaxMove::Assisted { from: here, to, backtrack });
    }

    let state = ctx.sink.is_some().then(|| encode_state(ctx.map, id, ctx.positions));
    let action = epsilon_greedy_with(ctx.epsilon, ctx.rng, || {
        let input = match &state {
            Some(s) => s.to_input::<f32>(),
            None => encode_state(ctx.map, id, ctx.positions).to_input(),
        };
        ctx.net.predict(&input)
    })?;
    let dir = Direction::from_ordinal(action).expect("six actions");
    let outcome = resolve_move(ctx.maze, ctx.positions, id, Intent::Step(dir));
    let moved = match outcome {
        Outcome::Moved { to, .. } => {
            let new_cell = !ctx.map.is_visited(to);
            ctx.map.observe_and_visit(ctx.maze, to)?;
            agent.stall = if new_cell { 0 } else { agent.stall + 1 };
            true
        }
        _ => {
            agent.stall += 1;
            false
        }
    };
    let explored = ctx.map.visited_count();
    let unexplored = ctx.map.total_cells() - explored;
    let reward = total_reward(
        ctx.reward.immediate(moved, explored, unexplored),
        reward_surrounding(ctx.map, ctx.positions[id]),
    );
    if let (Some(sink), Some(state)) = (ctx.sink.as_deref_mut(), state) {
        sink.push(Transition {
            state,
            action,
            reward,
            next_state: encode_state(ctx.map, id, ctx.positions),
            terminal: ctx.map.is_fully_explored(),
        });
    }
    Ok(BamaxMove::Acted { action, outcome, reward })
}

enum Agents {
    Private {
        agents: Vec<ClassicalAgent>,
        maps: Vec<ExplorationGraph>,
        depth_first: bool,
    },
    Shared {
        agents: Vec<ClassicalAgent>,
        frontier: SharedFrontier,
        depth_first: bool,
    },
    Learned {
        agents: Vec<BamaxAgent>,
        rng: Rng,
    },
}

/// A running episode. Drive it with [`Episode::round`] until
/// [`Episode::termination`] returns a value.
pub struct Episode<'m> {
    maze: &'m Maze,
    cfg: EpisodeConfig,
    world: ExplorationGraph,
    positions: Vec<HexCoord>,
    agents: Agents,
    steps: usize,
    backtracks: usize,
    curve: Vec<(usize, f64)>,
    records: Option<Vec<TraceRecord>>,
    reward_sum: f64,
}

impl<'m> Episode<'m> {
    pub fn new(cfg: EpisodeConfig, maze: &'m Maze) -> Result<Self> {
        if maze.size() != cfg.size {
            return Err(Error::Config(format!(
                "maze is {0}x{0} but the episode expects {1}x{1}",
                maze.size(),
                cfg.size
            )));
        }
        validate_starts(cfg.size, &cfg.starts)?;
        let mut world = ExplorationGraph::new(cfg.size);
        let mut discovered = Vec::new();
        for &s in &cfg.starts {
            discovered.extend(world.observe_and_visit(maze, s)?);
        }
        let classical = |id: usize| ClassicalAgent::new(id, cfg.starts[id]);
        let n = cfg.starts.len();
        let agents = match cfg.method {
            Method::Dfs | Method::Bfs => {
                let mut agents: Vec<ClassicalAgent> = (0..n).map(classical).collect();
                let mut maps = Vec::with_capacity(n);
                for a in &mut agents {
                    let mut m = ExplorationGraph::new(cfg.size);
                    a.bfs_queue.extend(m.observe_and_visit(maze, a.position)?);
                    maps.push(m);
                }
                Agents::Private {
                    agents,
                    maps,
                    depth_first: cfg.method == Method::Dfs,
                }
            }
            Method::CollabDfs | Method::CollabBfs => {
                let mut frontier = SharedFrontier::new();
                frontier.queue.extend(discovered);
                Agents::Shared {
                    agents: (0..n).map(classical).collect(),
                    frontier,
                    depth_first: cfg.method == Method::CollabDfs,
                }
            }
            Method::Bamax => Agents::Learned {
                agents: (0..n).map(BamaxAgent::new).collect(),
                rng: rng::from_seed(cfg.seed),
            },
        };
        let curve = vec![(0, world.coverage())];
        let records = cfg.record_trace.then(Vec::new);
        Ok(Self {
            maze,
            positions: cfg.starts.clone(),
            cfg,
            world,
            agents,
            steps: 0,
            backtracks: 0,
            curve,
            records,
            reward_sum: 0.0,
        })
    }

    pub fn world(&self) -> &ExplorationGraph {
        &self.world
    }

    pub fn positions(&self) -> &[HexCoord] {
        &self.positions
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn backtracks(&self) -> usize {
        self.backtracks
    }

    pub fn termination(&self) -> Option<Termination> {
        if self.world.is_fully_explored() {
            Some(Termination::FullyExplored)
        } else if self.steps >= self.cfg.max_timesteps {
            Some(Termination::TimestepCap)
        } else {
            None
        }
    }

    fn record(&mut self, agent: usize, from: HexCoord, to: HexCoord, mode: TraceMode) {
        if mode == TraceMode::Travel {
            self.backtracks += 1;
        }
        if let Some(r) = &mut self.records {
            r.push(TraceRecord {
                step: self.steps + 1,
                agent,
                from,
                to,
                mode,
            });
        }
    }

    fn record_classical(&mut self, agent: usize, step: Step) {
        let here = self.positions[agent];
        match step {
            Step::Moved(mv) => {
                let mode = match mv.kind {
                    MoveKind::Explore => TraceMode::Explore,
                    MoveKind::Backtrack => TraceMode::Travel,
                };
                self.positions[agent] = mv.to;
                self.record(agent, mv.from, mv.to, mode);
            }
            Step::Wait | Step::Done => self.record(agent, here, here, TraceMode::Explore),
        }
    }

    /// Plays one simulation step. `net` is required for the learned policy;
    /// `sink`, when given, collects the transitions of network-controlled moves.
    pub fn round(&mut self, net: Option<&Network<f32>>, mut sink: Option<&mut Vec<Transition>>) -> Result<()> {
        let maze = self.maze;
        let n = self.positions.len();
        // Temporarily take the agent state so `self` stays borrowable for records.
        let mut agents = std::mem::replace(&mut self.agents, Agents::Learned { agents: Vec::new(), rng: rng::from_seed(0) });
        let result = (|| -> Result<()> {
            match &mut agents {
                Agents::Private { agents, maps, depth_first } => {
                    for i in 0..n {
                        let step = if *depth_first {
                            dfs_step(&mut agents[i], &mut maps[i], maze)?
                        } else {
                            bfs_step(&mut agents[i], &mut maps[i], maze)?
                        };
                        if let Step::Moved(mv) = step {
                            self.world.observe_and_visit(maze, mv.to)?;
                        }
                        self.record_classical(i, step);
                    }
                }
                Agents::Shared { agents, frontier, depth_first } => {
                    for (i, agent) in agents.iter_mut().enumerate() {
                        let step = if *depth_first {
                            collab_dfs_step(agent, &mut self.world, frontier, maze)?
                        } else {
                            collab_bfs_step(agent, &mut self.world, frontier, maze)?
                        };
                        self.record_classical(i, step);
                    }
                }
                Agents::Learned { agents, rng } => {
                    let net = net.ok_or_else(|| Error::Config("the bamax method needs a network".into()))?;
                    for agent in agents.iter_mut() {
                        let i = agent.id;
                        let here = self.positions[i];
                        let mut ctx = BamaxContext {
                            maze,
                            map: &mut self.world,
                            positions: &mut self.positions,
                            net,
                            epsilon: self.cfg.epsilon,
                            rng,
                            stall_limit: self.cfg.stall_limit,
                            reward: self.cfg.reward,
                            sink: sink.as_deref_mut(),
                        };
                        match bamax_policy_step(agent, &mut ctx)? {
                            BamaxMove::Assisted { from, to, backtrack } => {
                                let mode = if backtrack { TraceMode::Travel } else { TraceMode::Explore };
                                self.record(i, from, to, mode);
                            }
                            BamaxMove::Acted { outcome, reward, .. } => {
                                self.reward_sum += reward;
                                match outcome {
                                    Outcome::Moved { from, to } => self.record(i, from, to, TraceMode::Explore),
                                    _ => self.record(i, here, here, TraceMode::Collision),
                                }
                            }
                            BamaxMove::Idle => self.record(i, here, here, TraceMode::Explore),
                        }
                    }
                }
            }
            Ok(())
        })();
        self.agents = agents;
        result?;
        self.steps += 1;
        self.curve.push((self.steps, self.world.coverage()));
        Ok(())
    }

    pub fn finish(self) -> EpisodeOutcome {
        let termination = self.termination().unwrap_or(Termination::TimestepCap);
        let trace = self.records.map(|records| Trace {
            size: self.cfg.size,
            starts: self.cfg.starts.clone(),
            max_timesteps: self.cfg.max_timesteps,
            records,
        });
        EpisodeOutcome {
            metrics: EpisodeMetrics {
                simulation_steps: self.steps,
                backtrack_count: self.backtracks,
                coverage_curve: self.curve,
                termination,
            },
            trace,
            reward_sum: self.reward_sum,
        }
    }
}

/// Runs an episode to completion.
pub fn run_episode(cfg: EpisodeConfig, maze: &Maze, net: Option<&Network<f32>>) -> Result<EpisodeOutcome> {
    let mut ep = Episode::new(cfg, maze)?;
    while ep.termination().is_none() {
        ep.round(net, None)?;
    }
    Ok(ep.finish())
}

/// In-grid neighbor helper used by tests and tooling.
pub fn adjacent(a: HexCoord, b: HexCoord, size: usize) -> bool {
    Direction::ALL.into_iter().any(|d| neighbor(a, d, size) == Some(b))
}
