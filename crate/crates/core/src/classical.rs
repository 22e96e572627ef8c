//! Baseline exploration policies: depth-first and breadth-first search, each
//! in a private-map and a shared-map (collaborative) variant.
//!
//! Every step function moves its agent by at most one cell, updates the map it
//! decides on, and reports what kind of move it was. Neighbors are always
//! tried in direction order `E, NE, NW, W, SW, SE`.

use std::collections::{BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::hexgrid::{HexCoord, Maze};
use crate::pathfind::{astar, nearest_matching, reachable, Path};
use crate::worldmap::{CellStatus, ExplorationGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MoveKind {
    /// Entered a cell not yet visited in the deciding map.
    Explore,
    /// Moved back into already visited territory.
    Backtrack,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Move {
    pub from: HexCoord,
    pub to: HexCoord,
    pub kind: MoveKind,
}

/// Result of asking a policy for one step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    Moved(Move),
    /// Nothing to do right now, but other agents still hold targets.
    Wait,
    /// The deciding map has no frontier left.
    Done,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Mode {
    Exploring,
    /// Following `path`; `next` indexes the next cell to enter.
    Traveling { path: Path, next: usize },
}

#[derive(Clone, Debug)]
pub struct ClassicalAgent {
    pub id: usize,
    pub position: HexCoord,
    pub mode: Mode,
    /// Return trail of visited cells (DFS variants).
    pub dfs_stack: Vec<HexCoord>,
    /// Frontier cells in discovery order (plain BFS).
    pub bfs_queue: VecDeque<HexCoord>,
}

impl ClassicalAgent {
    pub fn new(id: usize, position: HexCoord) -> Self {
        Self {
            id,
            position,
            mode: Mode::Exploring,
            dfs_stack: Vec::new(),
            bfs_queue: VecDeque::new(),
        }
    }

    /// Current travel target, if traveling.
    pub fn target(&self) -> Option<HexCoord> {
        match &self.mode {
            Mode::Traveling { path, .. } => Some(path.end()),
            Mode::Exploring => None,
        }
    }
}

/// Frontier bookkeeping shared by collaborative agents: a FIFO queue in
/// discovery order (BFS) and the set of cells already claimed as travel targets.
#[derive(Clone, Debug, Default)]
pub struct SharedFrontier {
    pub queue: VecDeque<HexCoord>,
    claimed: BTreeSet<(usize, usize)>,
}

impl SharedFrontier {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_claimed(&self, c: HexCoord) -> bool {
        self.claimed.contains(&c.row_major_key())
    }

    fn claim(&mut self, c: HexCoord) -> bool {
        self.claimed.insert(c.row_major_key())
    }

    fn release(&mut self, c: HexCoord) {
        self.claimed.remove(&c.row_major_key());
    }

    pub fn claimed_count(&self) -> usize {
        self.claimed.len()
    }
}

/// Moves `agent` one cell to `to` and records the visit in `map`.
fn commit(
    agent: &mut ClassicalAgent,
    map: &mut ExplorationGraph,
    maze: &Maze,
    to: HexCoord,
) -> Result<(Move, Vec<HexCoord>)> {
    let kind = if map.is_visited(to) {
        MoveKind::Backtrack
    } else {
        MoveKind::Explore
    };
    let from = agent.position;
    agent.position = to;
    let discovered = map.observe_and_visit(maze, to)?;
    Ok((Move { from, to, kind }, discovered))
}

/// Lowest-ordinal open neighbor of `c` not yet visited in `map`.
fn first_unvisited_neighbor(map: &ExplorationGraph, c: HexCoord) -> Option<HexCoord> {
    map.edges(c).map(|(_, n)| n).find(|&n| !map.is_visited(n))
}

/// Takes the next hop of the current travel path. Returns `None` when not
/// traveling. Travel ends on entering the path's last cell.
fn travel_hop(
    agent: &mut ClassicalAgent,
    map: &mut ExplorationGraph,
    maze: &Maze,
) -> Result<Option<(Move, Vec<HexCoord>)>> {
    let Mode::Traveling { path, next } = &mut agent.mode else {
        return Ok(None);
    };
    let to = path.cells[*next];
    *next += 1;
    if *next == path.cells.len() {
        agent.mode = Mode::Exploring;
    }
    commit(agent, map, maze, to).map(Some)
}

fn start_travel(agent: &mut ClassicalAgent, map: &ExplorationGraph, target: HexCoord) -> Result<()> {
    let path = astar(map, agent.position, target)?;
    if path.hops() == 0 {
        return Err(Error::Invariant(format!(
            "agent {} asked to travel to its own cell {target}",
            agent.id
        )));
    }
    agent.mode = Mode::Traveling { path, next: 1 };
    Ok(())
}

fn no_frontier_left(agent: &ClassicalAgent, map: &ExplorationGraph) -> Result<Step> {
    if map.frontier_count() > 0 {
        Err(Error::Invariant(format!(
            "agent {} has an empty trail but {} frontier cells remain",
            agent.id,
            map.frontier_count()
        )))
    } else {
        Ok(Step::Done)
    }
}

/// Depth-first step on the agent's own map.
pub fn dfs_step(agent: &mut ClassicalAgent, map: &mut ExplorationGraph, maze: &Maze) -> Result<Step> {
    let here = agent.position;
    if let Some(n) = first_unvisited_neighbor(map, here) {
        agent.dfs_stack.push(here);
        let (mv, _) = commit(agent, map, maze, n)?;
        return Ok(Step::Moved(mv));
    }
    match agent.dfs_stack.pop() {
        Some(back) => {
            let (mv, _) = commit(agent, map, maze, back)?;
            Ok(Step::Moved(mv))
        }
        None => no_frontier_left(agent, map),
    }
}

/// Breadth-first step on the agent's own map and queue.
pub fn bfs_step(agent: &mut ClassicalAgent, map: &mut ExplorationGraph, maze: &Maze) -> Result<Step> {
    if agent.target().is_none() {
        loop {
            match agent.bfs_queue.pop_front() {
                Some(c) if map.is_visited(c) => continue,
                Some(c) => {
                    start_travel(agent, map, c)?;
                    break;
                }
                None => return no_frontier_left(agent, map),
            }
        }
    }
    let (mv, discovered) = travel_hop(agent, map, maze)?.expect("traveling after target selection");
    agent.bfs_queue.extend(discovered);
    Ok(Step::Moved(mv))
}

/// Depth-first step on the shared map. At a branch end the agent relocates to
/// the straight-line nearest unclaimed frontier cell via A*.
pub fn collab_dfs_step(
    agent: &mut ClassicalAgent,
    shared: &mut ExplorationGraph,
    frontier: &mut SharedFrontier,
    maze: &Maze,
) -> Result<Step> {
    if let Some(target) = agent.target() {
        if shared.is_visited(target) {
            frontier.release(target);
            agent.mode = Mode::Exploring;
        }
    }
    if agent.target().is_none() {
        let here = agent.position;
        if let Some(n) = first_unvisited_neighbor(shared, here) {
            agent.dfs_stack.push(here);
            let (mv, _) = commit(agent, shared, maze, n)?;
            return Ok(Step::Moved(mv));
        }
        agent.dfs_stack.clear();
        let target = nearest_matching(shared, here, |c| !frontier.is_claimed(c))
            .or_else(|| nearest_matching(shared, here, |_| true));
        let Some(target) = target else {
            return Ok(Step::Done);
        };
        frontier.claim(target);
        start_travel(agent, shared, target)?;
    }
    let (mv, _) = travel_hop(agent, shared, maze)?.expect("traveling after target selection");
    if agent.target().is_none() {
        frontier.release(mv.to);
    }
    Ok(Step::Moved(mv))
}

/// Breadth-first step on the shared map with a single shared queue. The agent
/// takes the oldest queued cell it can reach through known edges and claims
/// it, so no two agents pursue the same cell.
pub fn collab_bfs_step(
    agent: &mut ClassicalAgent,
    shared: &mut ExplorationGraph,
    frontier: &mut SharedFrontier,
    maze: &Maze,
) -> Result<Step> {
    if let Some(target) = agent.target() {
        if shared.is_visited(target) {
            frontier.release(target);
            agent.mode = Mode::Exploring;
        }
    }
    if agent.target().is_none() {
        frontier.queue.retain(|&c| shared.status(c) == CellStatus::Frontier);
        let reach = reachable(shared, agent.position);
        let size = shared.size();
        let pick = frontier.queue.iter().position(|c| reach[c.index(size)]);
        match pick.and_then(|i| frontier.queue.remove(i)) {
            Some(c) => {
                frontier.claim(c);
                start_travel(agent, shared, c)?;
            }
            None if shared.frontier_count() == 0 => return Ok(Step::Done),
            None if frontier.claimed_count() == 0 => {
                return Err(Error::Invariant(format!(
                    "agent {} sees no queued frontier but {} frontier cells are unclaimed",
                    agent.id,
                    shared.frontier_count()
                )))
            }
            None => return Ok(Step::Wait),
        }
    }
    let (mv, discovered) = travel_hop(agent, shared, maze)?.expect("traveling after target selection");
    if agent.target().is_none() {
        frontier.release(mv.to);
    }
    frontier.queue.extend(discovered);
    Ok(Step::Moved(mv))
}
